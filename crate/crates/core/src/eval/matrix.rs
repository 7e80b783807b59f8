//! Train-set by test-set grid of macro F1.
//!
//! Prediction files are laid out as `<preds>/<train>/<test>/<run>.jsonl`,
//! one file per model run (seed or fold), and scored against
//! `<gold>/<test>.jsonl`. Each cell reports the mean and sample standard
//! deviation of macro F1 over its runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{aggregate, score, Aggregate, EvalError, MetricsReport, PredictionSet};
use crate::corpus::{read_dataset, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub train: String,
    pub test: String,
    pub run_names: Vec<String>,
    pub macro_f1: Vec<f64>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMatrix {
    pub train_sets: Vec<String>,
    pub test_sets: Vec<String>,
    pub cells: Vec<MatrixCell>,
}

fn sorted_entries(dir: &Path, want_dirs: bool) -> Result<Vec<PathBuf>, EvalError> {
    let io = |source| EvalError::Io { path: dir.to_path_buf(), source };
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(io)? {
        let p = e.map_err(io)?.path();
        let wanted = if want_dirs { p.is_dir() } else { p.is_file() && p.extension().is_some_and(|x| x == "jsonl") };
        if wanted {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn dir_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn name_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Score every `(train, test, run)` prediction file found under `preds_dir`.
pub fn score_matrix(gold_dir: &Path, preds_dir: &Path) -> Result<ExperimentMatrix, EvalError> {
    let mut gold_cache: BTreeMap<String, Dataset> = BTreeMap::new();
    let mut cells = Vec::new();
    let mut test_sets = std::collections::BTreeSet::new();
    let mut train_sets = Vec::new();

    for train_dir in sorted_entries(preds_dir, true)? {
        let train = dir_name(&train_dir);
        for test_dir in sorted_entries(&train_dir, true)? {
            let test = dir_name(&test_dir);
            let runs = sorted_entries(&test_dir, false)?;
            if runs.is_empty() {
                continue;
            }
            if !gold_cache.contains_key(&test) {
                let ds = read_dataset(&gold_dir.join(format!("{test}.jsonl")))?;
                gold_cache.insert(test.clone(), ds);
            }
            let gold = &gold_cache[&test];
            let reports: Vec<MetricsReport> =
                runs.iter().map(|r| score(gold, &PredictionSet::read(r)?)).collect::<Result<_, _>>()?;
            cells.push(MatrixCell {
                train: train.clone(),
                test: test.clone(),
                run_names: runs.iter().map(|r| name_of(r)).collect(),
                macro_f1: reports.iter().map(|r| r.macro_f1).collect(),
                aggregate: aggregate(&reports)?,
            });
            test_sets.insert(test);
        }
        if cells.last().is_some_and(|c| c.train == train) {
            train_sets.push(train);
        }
    }
    Ok(ExperimentMatrix { train_sets, test_sets: test_sets.into_iter().collect(), cells })
}

impl ExperimentMatrix {
    pub fn cell(&self, train: &str, test: &str) -> Option<&MatrixCell> {
        self.cells.iter().find(|c| c.train == train && c.test == test)
    }

    /// Grid with one row per training set and one column per test set;
    /// each cell is `mean ± std` of macro F1.
    pub fn render(&self) -> String {
        let width = self.test_sets.iter().map(String::len).max().unwrap_or(0).max(13) + 2;
        let row_w = self.train_sets.iter().map(String::len).max().unwrap_or(0).max(12) + 2;
        let mut out = format!("{:<row_w$}", "train \\ test");
        for t in &self.test_sets {
            let _ = write!(out, "{t:>width$}");
        }
        out.push('\n');
        for train in &self.train_sets {
            let _ = write!(out, "{train:<row_w$}");
            for test in &self.test_sets {
                let text = match self.cell(train, test) {
                    Some(c) if c.aggregate.std_defined => {
                        format!("{:.3} ± {:.3}", c.aggregate.mean, c.aggregate.std)
                    }
                    Some(c) => format!("{:.3}", c.aggregate.mean),
                    None => "-".to_string(),
                };
                let _ = write!(out, "{text:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::sample;
    use crate::corpus::write_dataset;
    use crate::label::RelationLabel::*;

    #[test]
    fn grid_over_runs() {
        let dir = tempfile::tempdir().unwrap();
        let gold_dir = dir.path().join("gold");
        let preds = dir.path().join("preds");
        let gold = Dataset::new(
            "test",
            "clean",
            None,
            vec![sample("d:R1", "ab cd", (0, 2), (3, 5), WorkUp), sample("d:R2", "ab cd", (0, 2), (3, 5), Contained)],
        );
        write_dataset(&gold_dir.join("test.jsonl"), &gold).unwrap();
        write_dataset(&gold_dir.join("ocr@0.5.jsonl"), &gold).unwrap();

        let perfect = PredictionSet::from_pairs("p", [("d:R1", WorkUp), ("d:R2", Contained)]);
        let half = PredictionSet::from_pairs("h", [("d:R1", WorkUp), ("d:R2", WorkUp)]);
        for (train, test, run, p) in [
            ("O", "test", "seed1", &perfect),
            ("O", "test", "seed2", &half),
            ("O", "ocr@0.5", "seed1", &half),
            ("OCR", "test", "seed1", &perfect),
        ] {
            let d = preds.join(train).join(test);
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join(format!("{run}.jsonl")), p.to_jsonl()).unwrap();
        }

        let m = score_matrix(&gold_dir, &preds).unwrap();
        assert_eq!(m.train_sets, vec!["O", "OCR"]);
        assert_eq!(m.test_sets, vec!["ocr@0.5", "test"]);
        let c = m.cell("O", "test").unwrap();
        assert_eq!(c.run_names, vec!["seed1", "seed2"]);
        // Two of five classes present: a perfect run scores 2/5.
        assert!((c.macro_f1[0] - 0.4).abs() < 1e-12);
        // half: WORK_UP p=0.5 r=1 f1=2/3; CONTAINED f1=0 -> macro (2/3)/5
        assert!((c.macro_f1[1] - 2.0 / 15.0).abs() < 1e-12);
        assert!(c.aggregate.std_defined);
        let grid = m.render();
        assert!(grid.contains("0.267 ± 0.189"), "{grid}");
        assert!(grid.lines().nth(2).unwrap().contains('-'));
    }
}

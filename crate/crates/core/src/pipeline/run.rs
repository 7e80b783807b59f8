use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, PipelineError};
use crate::corpus::{
    clean_corpus, extract_samples, load_corpus_dir, write_dataset, CleaningReport, Dataset, ExtractionReport,
    LabelStats,
};
use crate::noise::{perturb_ner, perturb_ocr, NerNoiseConfig, NerReport, OcrNoiseConfig};
use crate::rate::Rate;
use crate::split::{stratified_split, SplitSpec};

/// Cleaned corpus turned into samples, with the reports of both steps.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub documents: usize,
    pub dataset: Dataset,
    pub cleaning: CleaningReport,
    pub extraction: ExtractionReport,
}

/// Load, clean and extract a brat corpus directory.
pub fn extract_corpus(corpus_dir: &Path) -> Result<Extracted, PipelineError> {
    let raw = load_corpus_dir(corpus_dir).map_err(|e| PipelineError::io(corpus_dir, e))?;
    if !raw.iter().any(|r| r.text.is_some() && r.ann.is_some()) {
        return Err(PipelineError::EmptyCorpus(corpus_dir.to_path_buf()));
    }
    let (docs, cleaning) = clean_corpus(&raw);
    let (dataset, extraction) = extract_samples(&docs);
    Ok(Extracted { documents: docs.len(), dataset, cleaning, extraction })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// `manifest.json` at the root of the output tree. Holds no paths outside
/// the tree and no timestamps, so two runs with one config match byte for
/// byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub test_fraction: Rate,
    pub k_folds: usize,
    pub ocr_wers: Vec<Rate>,
    pub ner_fractions: Vec<Rate>,
    pub documents: usize,
    pub samples: usize,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: RunManifest,
}

fn write_text(path: &Path, body: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    fs::write(path, body).map_err(|e| PipelineError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut body = serde_json::to_string_pretty(value).expect("report serializes");
    body.push('\n');
    write_text(path, &body)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let mut body = String::new();
    for item in items {
        body.push_str(&serde_json::to_string(item).expect("record serializes"));
        body.push('\n');
    }
    write_text(path, &body)
}

struct Tree<'a> {
    root: &'a Path,
    stats: Vec<(String, LabelStats)>,
}

impl Tree<'_> {
    fn dataset(&mut self, rel: &str, d: &Dataset) -> Result<(), PipelineError> {
        write_dataset(&self.root.join(rel), d).map_err(PipelineError::stage("write"))?;
        self.stats.push((rel.to_string(), d.stats()));
        Ok(())
    }
}

fn list_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    for entry in fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))? {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        if path.is_dir() {
            list_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

fn hash_tree(root: &Path) -> Result<Vec<FileEntry>, PipelineError> {
    let mut files = Vec::new();
    list_files(root, root, &mut files)?;
    let mut entries = files
        .into_iter()
        .map(|rel| {
            let full = root.join(&rel);
            let bytes = fs::read(&full).map_err(|e| PipelineError::io(&full, e))?;
            let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            Ok(FileEntry { path, bytes: bytes.len() as u64, sha256: hex::encode(Sha256::digest(&bytes)) })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(entries)
}

fn build(root: &Path, cfg: &ExperimentConfig, ex: &Extracted) -> Result<RunManifest, PipelineError> {
    let mut tree = Tree { root, stats: Vec::new() };
    tree.dataset("clean.jsonl", &ex.dataset)?;
    write_json(&root.join("reports/cleaning.json"), &ex.cleaning)?;
    write_json(&root.join("reports/extraction.json"), &ex.extraction)?;

    let spec = SplitSpec { seed: cfg.seed, test_fraction: cfg.test_fraction, k_folds: cfg.k_folds };
    let split = stratified_split(&ex.dataset, &spec).map_err(PipelineError::stage("split"))?;
    tree.dataset("splits/train.jsonl", &split.train)?;
    tree.dataset("splits/test.jsonl", &split.test)?;
    for (i, fold) in split.folds.iter().enumerate() {
        tree.dataset(&format!("splits/fold{}.train.jsonl", i + 1), &fold.train)?;
        tree.dataset(&format!("splits/fold{}.val.jsonl", i + 1), &fold.validation)?;
    }
    write_json(&root.join("splits/manifest.json"), &split.manifest(&spec))?;

    let parts = [("train", &split.train), ("test", &split.test)];
    for &wer in &cfg.ocr_wers {
        let noise = OcrNoiseConfig { wer, seed: cfg.seed };
        let dir = format!("noise/{}", noise.tag());
        for (name, d) in parts {
            let (noisy, edits) = perturb_ocr(d, &noise).map_err(PipelineError::stage("ocr noise"))?;
            tree.dataset(&format!("{dir}/{name}.jsonl"), &noisy)?;
            write_jsonl(&root.join(format!("{dir}/{name}.edits.jsonl")), &edits)?;
        }
    }
    for &fraction in &cfg.ner_fractions {
        let noise = NerNoiseConfig { fraction, seed: cfg.seed };
        let dir = format!("noise/{}", noise.tag());
        let mut reports: Vec<(&str, NerReport)> = Vec::new();
        for (name, d) in parts {
            let (noisy, log, report) = perturb_ner(d, &noise).map_err(PipelineError::stage("ner noise"))?;
            tree.dataset(&format!("{dir}/{name}.jsonl"), &noisy)?;
            write_jsonl(&root.join(format!("{dir}/{name}.mutations.jsonl")), &log)?;
            reports.push((name, report));
        }
        let reports: serde_json::Map<String, serde_json::Value> = reports
            .into_iter()
            .map(|(n, r)| (n.to_string(), serde_json::to_value(r).expect("report serializes")))
            .collect();
        write_json(&root.join(format!("{dir}/report.json")), &reports)?;
    }

    let mut stats = String::new();
    for (rel, s) in &tree.stats {
        stats.push_str(&format!("{rel}\n{}\n", s.render()));
    }
    write_text(&root.join("reports/stats.txt"), &stats)?;

    let manifest = RunManifest {
        seed: cfg.seed,
        test_fraction: cfg.test_fraction,
        k_folds: cfg.k_folds,
        ocr_wers: cfg.ocr_wers.clone(),
        ner_fractions: cfg.ner_fractions.clone(),
        documents: ex.documents,
        samples: ex.dataset.len(),
        files: hash_tree(root)?,
    };
    write_json(&root.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn replaceable(dir: &Path) -> bool {
    match fs::read_dir(dir) {
        Err(_) => true,
        Ok(mut entries) => entries.next().is_none() || dir.join("manifest.json").is_file(),
    }
}

/// Run every stage and publish the output tree at `cfg.output_dir`.
///
/// Outputs are built in a sibling staging directory and moved into place
/// only when every stage succeeded, so a failed run leaves no partial tree.
/// A previous pipeline output at the same location is replaced.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let out = cfg.output_dir.clone();
    if !replaceable(&out) {
        return Err(PipelineError::OutputOccupied(out));
    }
    let ex = extract_corpus(&cfg.corpus_dir)?;

    let name = out.file_name().ok_or_else(|| PipelineError::Config(format!("bad output_dir {}", out.display())))?;
    let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    let staging = parent.join(format!(".{}.staging-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| PipelineError::io(&staging, e))?;
    }

    let built = build(&staging, cfg, &ex);
    let manifest = match built {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    if out.exists() {
        fs::remove_dir_all(&out).map_err(|e| PipelineError::io(&out, e))?;
    }
    fs::rename(&staging, &out).map_err(|e| PipelineError::io(&out, e))?;
    Ok(RunSummary { output_dir: out, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_is_an_error_without_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        fs::create_dir(&corpus).unwrap();
        fs::write(corpus.join("lonely.txt"), "text only").unwrap();
        let cfg = ExperimentConfig::new(&corpus, dir.path().join("out"), 1);
        assert!(matches!(run_pipeline(&cfg), Err(PipelineError::EmptyCorpus(_))));
        assert!(!dir.path().join("out").exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn refuses_to_replace_foreign_directories() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        fs::write(out.join("precious.txt"), "keep").unwrap();
        let cfg = ExperimentConfig::new(dir.path(), &out, 1);
        assert!(matches!(run_pipeline(&cfg), Err(PipelineError::OutputOccupied(_))));
        assert!(out.join("precious.txt").exists());
    }

    #[test]
    fn failed_stage_leaves_nothing_behind() {
        // One relation of one class cannot fill five folds.
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        fs::create_dir(&corpus).unwrap();
        fs::write(corpus.join("a.txt"), "Alpha beta.").unwrap();
        fs::write(corpus.join("a.ann"), "T1\tE 0 5\tAlpha\nT2\tE 6 10\tbeta\nR1\tCOREFERENCE Arg1:T2 Arg2:T1\n")
            .unwrap();
        let cfg = ExperimentConfig::new(&corpus, dir.path().join("out"), 1);
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(matches!(err, PipelineError::Stage { stage: "split", .. }), "{err}");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

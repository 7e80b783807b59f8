use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::rate::Rate;

fn default_test_fraction() -> Rate {
    Rate::new(1, 4)
}

fn default_k_folds() -> usize {
    5
}

/// Word error rates 5%, 10%, 25%, 50%.
pub fn default_ocr_wers() -> Vec<Rate> {
    vec![Rate::new(1, 20), Rate::new(1, 10), Rate::new(1, 4), Rate::new(1, 2)]
}

/// Sample fractions 25%, 50%, 75%, 100%.
pub fn default_ner_fractions() -> Vec<Rate> {
    vec![Rate::new(1, 4), Rate::new(1, 2), Rate::new(3, 4), Rate::new(1, 1)]
}

/// One experiment: where the corpus lives, where outputs go, the master
/// seed and the noise grids. An empty grid disables that noise stage.
///
/// Stored as a flat TOML file:
///
/// ```toml
/// # ChEMU-Ref stress sets
/// corpus_dir = "data/chemu-ref"
/// output_dir = "out"
/// seed = 13
/// test_fraction = 0.25
/// k_folds = 5
/// ocr_wers = [0.05, 0.10, 0.25, 0.50]
/// ner_fractions = [0.25, 0.50, 0.75, 1.00]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: Rate,
    #[serde(default = "default_k_folds")]
    pub k_folds: usize,
    #[serde(default = "default_ocr_wers")]
    pub ocr_wers: Vec<Rate>,
    #[serde(default = "default_ner_fractions")]
    pub ner_fractions: Vec<Rate>,
}

impl ExperimentConfig {
    pub fn new(corpus_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        ExperimentConfig {
            corpus_dir: corpus_dir.into(),
            output_dir: output_dir.into(),
            seed,
            test_fraction: default_test_fraction(),
            k_folds: default_k_folds(),
            ocr_wers: default_ocr_wers(),
            ner_fractions: default_ner_fractions(),
        }
    }

    /// Parse a config file. Relative paths are resolved against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus_dir, &mut cfg.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.test_fraction.check_open_unit().map_err(|e| format!("test_fraction: {e}"))?;
        if self.k_folds < 2 {
            return Err(format!("k_folds must be at least 2, got {}", self.k_folds));
        }
        for r in &self.ocr_wers {
            r.check_half_open_unit().map_err(|e| format!("ocr_wers: {e}"))?;
        }
        for r in &self.ner_fractions {
            r.check_half_open_unit().map_err(|e| format!("ner_fractions: {e}"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commented_flat_file_with_defaults() {
        let cfg =
            ExperimentConfig::parse("# minimal\ncorpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 7 # master seed\n")
                .unwrap();
        assert_eq!(cfg, ExperimentConfig::new("c", "o", 7));
        assert_eq!(cfg.ocr_wers.iter().map(ToString::to_string).collect::<Vec<_>>(), ["0.05", "0.1", "0.25", "0.5"]);
        assert_eq!(cfg.ner_fractions.iter().map(ToString::to_string).collect::<Vec<_>>(), ["0.25", "0.5", "0.75", "1"]);
    }

    #[test]
    fn explicit_grids() {
        let cfg = ExperimentConfig::parse(
            "corpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 1\nocr_wers = [0.10]\nner_fractions = []\nk_folds = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.ocr_wers, vec![Rate::new(1, 10)]);
        assert!(cfg.ner_fractions.is_empty());
        assert_eq!(cfg.k_folds, 3);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "corpus_dir = \"c\"\noutput_dir = \"o\"\n",
            "corpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 1\nk_folds = 1\n",
            "corpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 1\nocr_wers = [0.0]\n",
            "corpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 1\ntest_fraction = 1.0\n",
            "corpus_dir = \"c\"\noutput_dir = \"o\"\nseed = 1\nunknown = 3\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(&p, "corpus_dir = \"corpus\"\noutput_dir = \"/abs/out\"\nseed = 2\n").unwrap();
        let cfg = ExperimentConfig::load(&p).unwrap();
        assert_eq!(cfg.corpus_dir, dir.path().join("corpus"));
        assert_eq!(cfg.output_dir, PathBuf::from("/abs/out"));
    }
}

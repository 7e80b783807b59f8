use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anastress::corpus::{read_dataset, write_dataset, Dataset};
use anastress::eval::{confusion_render, score, score_matrix, EvalError, PredictionSet};
use anastress::noise::{perturb_ner, perturb_ocr, NerNoiseConfig, OcrNoiseConfig};
use anastress::pipeline::{extract_corpus, run_pipeline, validate, ExperimentConfig, PipelineError};
use anastress::split::{stratified_split, SplitSpec};
use anastress::Rate;
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

/// Build and stress-test anaphora relation datasets from brat corpora.
#[derive(Debug, Parser)]
#[command(name = "anastress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a brat corpus directory and list every problem found.
    Validate {
        corpus_dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Clean a corpus and write one sample per relation.
    Extract {
        corpus_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the cleaning and extraction reports as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Stratified train/test split plus k-fold cross-validation folds.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "0.25")]
        test_fraction: Rate,
        #[arg(long, default_value_t = 5)]
        k_folds: usize,
    },
    /// Write a noisy copy of a dataset.
    Perturb {
        #[command(subcommand)]
        kind: PerturbKind,
    },
    /// Label counts and proportions.
    Stats {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Score a prediction file against a gold dataset.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        preds: PathBuf,
        /// Show the confusion matrix as row proportions.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Score every run under `<preds-dir>/<train>/<test>/` and print the grid.
    Matrix {
        #[arg(long)]
        gold_dir: PathBuf,
        #[arg(long)]
        preds_dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run every stage from a TOML experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum PerturbKind {
    /// Keyboard typos and character swaps at a word error rate.
    Ocr {
        #[command(flatten)]
        io: PerturbIo,
        #[arg(long)]
        wer: Rate,
    },
    /// Entity boundary mistakes on a fraction of samples.
    Ner {
        #[command(flatten)]
        io: PerturbIo,
        #[arg(long)]
        fraction: Rate,
    },
}

#[derive(Debug, Args)]
struct PerturbIo {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Per-sample log of every edit made.
    #[arg(long)]
    log: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_FAILED: u8 = 3;

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait OrExit<T> {
    fn invalid(self) -> Result<T, Failure>;
    fn failed(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_INVALID, error: e.into() })
    }

    fn failed(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EXIT_FAILED, error: e.into() })
    }
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    read_dataset(path).invalid()
}

fn save(path: &Path, d: &Dataset) -> Result<(), Failure> {
    write_dataset(path, d).failed()
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<(), Failure> {
    let mut body = String::new();
    for item in items {
        body.push_str(&serde_json::to_string(item).expect("record serializes"));
        body.push('\n');
    }
    fs::write(path, body).with_context(|| path.display().to_string()).failed()
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn pipeline_failure(e: PipelineError) -> Failure {
    let code = match e {
        PipelineError::Config(_) | PipelineError::EmptyCorpus(_) | PipelineError::OutputOccupied(_) => EXIT_INVALID,
        PipelineError::Io { .. } | PipelineError::Stage { .. } => EXIT_FAILED,
    };
    Failure { code, error: e.into() }
}

fn eval_failure(e: EvalError) -> Failure {
    let code = match e {
        EvalError::Io { .. } => EXIT_FAILED,
        _ => EXIT_INVALID,
    };
    Failure { code, error: e.into() }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { corpus_dir, json } => {
            let report = validate(&corpus_dir).map_err(pipeline_failure)?;
            if json {
                println!("{}", pretty(&report));
            } else {
                print!("{}", report.render());
            }
            if report.has_errors() {
                return Err(Failure { code: EXIT_INVALID, error: anyhow::anyhow!("corpus has annotation errors") });
            }
        }
        Command::Extract { corpus_dir, out, report } => {
            let ex = extract_corpus(&corpus_dir).map_err(pipeline_failure)?;
            save(&out, &ex.dataset)?;
            if let Some(path) = report {
                let body = serde_json::json!({ "cleaning": ex.cleaning, "extraction": ex.extraction });
                fs::write(&path, pretty(&body) + "\n").with_context(|| path.display().to_string()).failed()?;
            }
            eprintln!(
                "{} documents kept, {} removed; {} samples, {} relations skipped, {} window fallbacks",
                ex.documents,
                ex.cleaning.removed().count(),
                ex.dataset.len(),
                ex.extraction.skipped.len(),
                ex.extraction.fallbacks()
            );
        }
        Command::Split { input, out_dir, seed, test_fraction, k_folds } => {
            let d = load(&input)?;
            let spec = SplitSpec { seed, test_fraction, k_folds };
            let split = stratified_split(&d, &spec).failed()?;
            save(&out_dir.join("train.jsonl"), &split.train)?;
            save(&out_dir.join("test.jsonl"), &split.test)?;
            for (i, fold) in split.folds.iter().enumerate() {
                save(&out_dir.join(format!("fold{}.train.jsonl", i + 1)), &fold.train)?;
                save(&out_dir.join(format!("fold{}.val.jsonl", i + 1)), &fold.validation)?;
            }
            let manifest = out_dir.join("manifest.json");
            fs::write(&manifest, pretty(&split.manifest(&spec)) + "\n")
                .with_context(|| manifest.display().to_string())
                .failed()?;
            eprintln!("train {} / test {} / {} folds", split.train.len(), split.test.len(), split.folds.len());
        }
        Command::Perturb { kind: PerturbKind::Ocr { io, wer } } => {
            let d = load(&io.input)?;
            let cfg = OcrNoiseConfig { wer, seed: io.seed };
            let (noisy, edits) = perturb_ocr(&d, &cfg).invalid()?;
            save(&io.out, &noisy)?;
            if let Some(log) = io.log {
                write_jsonl(&log, &edits)?;
            }
            let words: usize = edits.iter().map(|e| e.edits.len()).sum();
            eprintln!("{}: {} words changed across {} samples", cfg.tag(), words, noisy.len());
        }
        Command::Perturb { kind: PerturbKind::Ner { io, fraction } } => {
            let d = load(&io.input)?;
            let cfg = NerNoiseConfig { fraction, seed: io.seed };
            let (noisy, log, report) = perturb_ner(&d, &cfg).invalid()?;
            save(&io.out, &noisy)?;
            if let Some(path) = io.log {
                write_jsonl(&path, &log)?;
            }
            eprintln!("{}: {} of {} requested samples mutated", cfg.tag(), report.mutated, report.requested);
            if report.shortfall > 0 {
                eprintln!("warning: {} samples short, no feasible mutation left", report.shortfall);
            }
        }
        Command::Stats { datasets, json } => {
            let mut all = Vec::new();
            for path in &datasets {
                let d = load(path)?;
                all.push((path.display().to_string(), d.stats()));
            }
            if json {
                let map: serde_json::Map<_, _> =
                    all.into_iter().map(|(p, s)| (p, serde_json::to_value(s).expect("stats serialize"))).collect();
                println!("{}", pretty(&map));
            } else {
                for (p, s) in all {
                    println!("{p}\n{}", s.render());
                }
            }
        }
        Command::Score { gold, preds, normalize, json } => {
            let g = load(&gold)?;
            let p = PredictionSet::read(&preds).map_err(eval_failure)?;
            let report = score(&g, &p).map_err(eval_failure)?;
            if json {
                println!("{}", pretty(&report));
            } else {
                println!("{}", report.render());
                print!("{}", confusion_render(&report, normalize));
            }
        }
        Command::Matrix { gold_dir, preds_dir, json } => {
            let m = score_matrix(&gold_dir, &preds_dir).map_err(eval_failure)?;
            if json {
                println!("{}", pretty(&m));
            } else {
                print!("{}", m.render());
            }
        }
        Command::Run { config, seed, corpus_dir, output_dir } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(pipeline_failure)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(c) = corpus_dir {
                cfg.corpus_dir = c;
            }
            if let Some(o) = output_dir {
                cfg.output_dir = o;
            }
            let summary = run_pipeline(&cfg).map_err(pipeline_failure)?;
            eprintln!(
                "{} documents, {} samples, {} files written to {}",
                summary.manifest.documents,
                summary.manifest.samples,
                summary.manifest.files.len() + 1,
                summary.output_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

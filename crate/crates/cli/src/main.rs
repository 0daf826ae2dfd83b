//! `lexrel`: ingest corpora, train the relation classifier, classify
//! transcripts, sample pairs for judges and score the judges' labels.
//!
//! Exit status is 0 on success, 2 for bad input (missing or malformed files,
//! invalid flags) and 1 for internal failures.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lexrel::eval::AgreementPolicy;
use lexrel::svm::ClassWeighting;

#[derive(Debug, Parser)]
#[command(
    name = "lexrel",
    version,
    about = "Discourse relations between sentences of court transcripts"
)]
pub struct Cli {
    /// Directory overriding the bundled annotation and transition resources.
    #[arg(long, global = true, env = "LEXREL_RESOURCES")]
    pub resources: Option<PathBuf>,
    /// Word similarity table (`word1<TAB>word2<TAB>score`).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Citation rule file; the bundled rules are used when absent.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Seed for every shuffle and for training.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-pair classification.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate corpus files and report their contents.
    Ingest {
        /// Pair datasets, judge files, CoNLL files, transcripts or
        /// directories of transcripts.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model on labelled pairs or feature vectors.
    Train {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        /// Model file to write.
        #[arg(long)]
        model: PathBuf,
        /// Regularisation strength; chosen by cross-validation when absent.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value = "inverse-frequency")]
        weighting: ClassWeighting,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Training report (default: `<model>.report.json`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify adjacent sentence pairs of transcripts into a record store.
    Classify {
        #[arg(required = true)]
        transcripts: Vec<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Pair each sentence with the next `window` sentences.
        #[arg(long, default_value_t = 1)]
        window: usize,
        /// Add to an existing store instead of replacing it.
        #[arg(long)]
        append: bool,
    },
    /// Draw shuffled clusters of pairs and write a judge worksheet.
    Sample {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        sample_n: usize,
        #[arg(long, default_value_t = 5)]
        cluster_size: usize,
    },
    /// Score predictions against judge annotations.
    Eval {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value = "both-agree")]
        policy: AgreementPolicy,
        /// Output directory for the reports.
        #[arg(long)]
        out: PathBuf,
        /// Save the annotations into the store.
        #[arg(long)]
        update_store: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}

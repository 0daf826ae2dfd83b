use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde::Serialize;
use sha2::{Digest, Sha256};

use lexrel::annotate::annotate_pair;
use lexrel::citation::{load_rules, CitationRuleSet};
use lexrel::corpus::{
    load_transcript_with, parse_annotated_corpus, parse_judge_annotations, parse_pair_dataset, validate_dataset_census,
    DatasetCensus, RelationLabel,
};
use lexrel::eval::{build_confusion, correlation_report, precision_recall_f1};
use lexrel::features::{extract_features, FeatureResources, FeatureVector};
use lexrel::pipeline::{
    attach_annotations, judged_predictions, run_transcript, sample_for_annotation, write_annotation_export, Classifier,
    RecordStore, RunOptions,
};
use lexrel::svm::{
    cross_validate, load_model, parse_feature_dataset, save_model, select_lambda, train_with_report, CrossValidation,
    TrainingConfig, DEFAULT_LAMBDA_GRID,
};

use crate::manifest::RunManifest;
use crate::{Cli, Command};

/// A failed command, split by who has to fix it.
#[derive(Debug)]
pub enum Failure {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::User(_) => 2,
            Failure::Internal(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::User(e) | Failure::Internal(e) => e,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

trait Blame<T> {
    fn user(self, context: impl FnOnce() -> String) -> Outcome<T>;
    fn internal(self, context: impl FnOnce() -> String) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Blame<T> for Result<T, E> {
    fn user(self, context: impl FnOnce() -> String) -> Outcome<T> {
        self.map_err(|e| Failure::User(e.into().context(context())))
    }

    fn internal(self, context: impl FnOnce() -> String) -> Outcome<T> {
        self.map_err(|e| Failure::Internal(e.into().context(context())))
    }
}

fn user_error(message: String) -> Failure {
    Failure::User(anyhow!(message))
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).user(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).user(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).user(|| format!("cannot write {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn print_path(p: &Path) -> String {
    p.display().to_string()
}

/// Files of a directory ending in `.txt`, sorted; other paths unchanged.
fn expand_transcripts(paths: &[PathBuf]) -> Outcome<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .user(|| format!("cannot list {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            out.extend(files);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(user_error(format!("{} does not exist", p.display())));
        }
    }
    Ok(out)
}

struct Loaded {
    resources: FeatureResources,
    rules: CitationRuleSet,
}

fn load_context(cli: &Cli, manifest: &mut RunManifest) -> Outcome<Loaded> {
    let resources = FeatureResources::load(cli.resources.as_deref(), cli.lexicon.as_deref())
        .user(|| "cannot load resources".to_string())?;
    let rules = load_rules(cli.rules.as_deref()).user(|| "cannot load citation rules".to_string())?;
    manifest.config("resources", cli.resources.as_deref());
    manifest.config("lexicon", cli.lexicon.as_deref());
    manifest.config("rules", cli.rules.as_deref());
    manifest
        .resource_versions
        .insert("features".into(), resources.version());
    manifest.resource_versions.insert(
        "citation_rules".into(),
        hex::encode(&Sha256::digest(rules.to_tsv().as_bytes())[..8]),
    );
    Ok(Loaded { resources, rules })
}

fn finish(manifest: &mut RunManifest, cli: &Cli, default_path: Option<PathBuf>) -> Outcome<()> {
    let Some(path) = cli.manifest.clone().or(default_path) else {
        return Ok(());
    };
    manifest
        .write(&path)
        .user(|| format!("cannot write manifest {}", path.display()))
}

pub fn run(cli: Cli) -> Outcome<()> {
    if cli.jobs == 0 {
        return Err(user_error("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Ingest { paths, out } => ingest(&cli, paths, out.as_deref()),
        Command::Train {
            datasets,
            model,
            lambda,
            epochs,
            weighting,
            folds,
            report,
        } => {
            let config = TrainingConfig {
                lambda: lambda.unwrap_or(TrainingConfig::default().lambda),
                epochs: *epochs,
                seed: cli.seed,
                class_weighting: *weighting,
            };
            train(&cli, datasets, model, lambda.is_some(), config, *folds, report.clone())
        }
        Command::Classify {
            transcripts,
            model,
            store,
            window,
            append,
        } => classify(&cli, transcripts, model, store, *window, *append),
        Command::Sample {
            store,
            out,
            sample_n,
            cluster_size,
        } => sample(&cli, store, out, *sample_n, *cluster_size),
        Command::Eval {
            store,
            annotations,
            policy,
            out,
            update_store,
        } => eval(&cli, store, annotations, *policy, out, *update_store),
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum IngestEntry {
    PairDataset {
        path: PathBuf,
        records: usize,
        census: DatasetCensus,
    },
    JudgeAnnotations {
        path: PathBuf,
        annotations: usize,
        pairs: usize,
        judges: Vec<String>,
    },
    FeatureDataset {
        path: PathBuf,
        vectors: usize,
        labels: BTreeMap<RelationLabel, usize>,
    },
    AnnotatedCorpus {
        path: PathBuf,
        sentences: usize,
    },
    Transcript {
        path: PathBuf,
        sentences: usize,
    },
}

fn first_data_line(text: &str) -> &str {
    text.lines()
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .unwrap_or("")
}

fn ingest_file(path: &Path, resources: &FeatureResources) -> Outcome<IngestEntry> {
    let text = read(path)?;
    let diag = || format!("{}", path.display());
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(ext, "conll" | "conllu") {
        let sentences = parse_annotated_corpus(text.as_bytes()).user(diag)?;
        return Ok(IngestEntry::AnnotatedCorpus {
            path: path.to_path_buf(),
            sentences: sentences.len(),
        });
    }
    if matches!(ext, "tsv" | "tab") {
        let first = first_data_line(&text);
        if first.starts_with("label\t") {
            let data = parse_feature_dataset(text.as_bytes()).user(diag)?;
            let mut labels = BTreeMap::new();
            for (_, l) in &data {
                *labels.entry(*l).or_insert(0) += 1;
            }
            return Ok(IngestEntry::FeatureDataset {
                path: path.to_path_buf(),
                vectors: data.len(),
                labels,
            });
        }
        if first.split('\t').count() == 3 {
            let annotations = parse_judge_annotations(text.as_bytes()).user(diag)?;
            let pairs: std::collections::BTreeSet<&str> = annotations.iter().map(|a| a.pair_id.as_str()).collect();
            let judges: std::collections::BTreeSet<&str> = annotations.iter().map(|a| a.judge_id.as_str()).collect();
            return Ok(IngestEntry::JudgeAnnotations {
                path: path.to_path_buf(),
                annotations: annotations.len(),
                pairs: pairs.len(),
                judges: judges.into_iter().map(str::to_string).collect(),
            });
        }
        let pairs = parse_pair_dataset(text.as_bytes()).user(diag)?;
        return Ok(IngestEntry::PairDataset {
            path: path.to_path_buf(),
            records: pairs.len(),
            census: validate_dataset_census(&pairs),
        });
    }
    let sentences = load_transcript_with(&text, resources.annotation.abbreviations());
    Ok(IngestEntry::Transcript {
        path: path.to_path_buf(),
        sentences: sentences.len(),
    })
}

fn ingest(cli: &Cli, paths: &[PathBuf], out: Option<&Path>) -> Outcome<()> {
    let mut manifest = RunManifest::new("ingest", cli.seed);
    let ctx = load_context(cli, &mut manifest)?;
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            files.extend(expand_transcripts(std::slice::from_ref(p))?);
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(user_error(format!("{} does not exist", p.display())));
        }
    }
    let mut entries = Vec::new();
    for f in &files {
        let entry = ingest_file(f, &ctx.resources)?;
        manifest.input(f).user(|| print_path(f))?;
        match &entry {
            IngestEntry::PairDataset { path, records, census } => {
                println!("{}: pair dataset, {records} pairs", path.display());
                for (label, n) in &census.mapped {
                    println!("  {:<14}{n:>6}", label.name());
                }
            }
            IngestEntry::JudgeAnnotations {
                path,
                annotations,
                pairs,
                judges,
            } => println!(
                "{}: {annotations} judge annotations over {pairs} pairs by {} judges",
                path.display(),
                judges.len()
            ),
            IngestEntry::FeatureDataset { path, vectors, .. } => {
                println!("{}: feature dataset, {vectors} vectors", path.display())
            }
            IngestEntry::AnnotatedCorpus { path, sentences } => {
                println!("{}: annotated corpus, {sentences} sentences", path.display())
            }
            IngestEntry::Transcript { path, sentences } => {
                println!("{}: transcript, {sentences} sentences", path.display())
            }
        }
        entries.push(entry);
    }
    if let Some(out) = out {
        write(out, &json(&entries))?;
        manifest.output(out).user(|| print_path(out))?;
    }
    finish(&mut manifest, cli, out.map(RunManifest::path_for))
}

#[derive(Debug, Serialize)]
struct TrainReport {
    examples: usize,
    labels: BTreeMap<RelationLabel, usize>,
    classes: Vec<RelationLabel>,
    config: TrainingConfig,
    lambda_selection: Option<Vec<(f64, f64)>>,
    training_accuracy: f64,
    final_objective: f64,
    objective_tail_non_increasing: bool,
    cross_validation: Option<CrossValidation>,
    cross_validation_skipped: Option<String>,
    model_sha256: String,
}

fn load_training_data(path: &Path, resources: &FeatureResources) -> Outcome<Vec<(FeatureVector, RelationLabel)>> {
    let text = read(path)?;
    if first_data_line(&text).starts_with("label\t") {
        return parse_feature_dataset(text.as_bytes()).user(|| print_path(path));
    }
    let pairs = parse_pair_dataset(text.as_bytes()).user(|| print_path(path))?;
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let pair = annotate_pair(&p.id, &p.target, &p.source, &resources.annotation)
            .internal(|| format!("{}: pair {}", path.display(), p.id))?;
        let x = extract_features(&pair, resources).internal(|| format!("{}: pair {}", path.display(), p.id))?;
        out.push((x.vector, p.label.relation()));
    }
    Ok(out)
}

fn train(
    cli: &Cli,
    datasets: &[PathBuf],
    model_path: &Path,
    lambda_given: bool,
    mut config: TrainingConfig,
    folds: usize,
    report_path: Option<PathBuf>,
) -> Outcome<()> {
    let mut manifest = RunManifest::new("train", cli.seed);
    let ctx = load_context(cli, &mut manifest)?;
    let mut data = Vec::new();
    for d in datasets {
        if !d.exists() {
            return Err(user_error(format!("dataset {} does not exist", d.display())));
        }
        data.extend(load_training_data(d, &ctx.resources)?);
        manifest.input(d).user(|| print_path(d))?;
    }
    if data.is_empty() {
        return Err(user_error("training data is empty".into()));
    }
    let mut labels = BTreeMap::new();
    for (_, l) in &data {
        *labels.entry(*l).or_insert(0usize) += 1;
    }
    let smallest = labels.values().copied().min().unwrap_or(0);
    let cv_possible = folds >= 2 && smallest >= folds && labels.len() >= 2;
    let mut lambda_selection = None;
    if !lambda_given && cv_possible {
        let (best, scores) =
            select_lambda(&data, &DEFAULT_LAMBDA_GRID, folds, &config).internal(|| "lambda selection".into())?;
        config.lambda = best;
        lambda_selection = Some(scores);
    }
    let (model, training) = train_with_report(&data, &config).user(|| "training failed".into())?;
    let cross_validation = if cv_possible {
        Some(cross_validate(&data, folds, &config).internal(|| "cross-validation".into())?)
    } else {
        None
    };
    let mut bytes = Vec::new();
    save_model(&model, &mut bytes).internal(|| "serializing model".into())?;
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).user(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(model_path, &bytes).user(|| format!("cannot write {}", model_path.display()))?;
    let report = TrainReport {
        examples: data.len(),
        labels,
        classes: model.classes.clone(),
        config: config.clone(),
        lambda_selection,
        training_accuracy: training.training_accuracy,
        final_objective: *training.objective_history.last().expect("at least one epoch"),
        objective_tail_non_increasing: training.tail_non_increasing(),
        cross_validation_skipped: (!cv_possible)
            .then(|| format!("needs at least {folds} examples of every class and at least 2 folds")),
        cross_validation,
        model_sha256: hex::encode(Sha256::digest(&bytes)),
    };
    let report_path = report_path.unwrap_or_else(|| {
        let mut p = model_path.as_os_str().to_owned();
        p.push(".report.json");
        PathBuf::from(p)
    });
    write(&report_path, &json(&report))?;
    println!(
        "trained on {} examples, classes: {}",
        report.examples,
        join_labels(&report.classes)
    );
    println!("lambda: {}", config.lambda);
    println!("training accuracy: {:.3}", report.training_accuracy);
    if let Some(cv) = &report.cross_validation {
        println!(
            "{}-fold cross-validation accuracy: {:.3} +/- {:.3}",
            cv.k, cv.mean_accuracy, cv.std_accuracy
        );
    }
    println!("model sha256: {}", report.model_sha256);
    manifest.output(model_path).user(|| print_path(model_path))?;
    manifest.output(&report_path).user(|| print_path(&report_path))?;
    finish(&mut manifest, cli, Some(RunManifest::path_for(model_path)))
}

fn join_labels(labels: &[RelationLabel]) -> String {
    labels.iter().map(|l| l.name()).collect::<Vec<_>>().join(", ")
}

fn classify(
    cli: &Cli,
    transcripts: &[PathBuf],
    model_path: &Path,
    store_path: &Path,
    window: usize,
    append: bool,
) -> Outcome<()> {
    let mut manifest = RunManifest::new("classify", cli.seed);
    let ctx = load_context(cli, &mut manifest)?;
    if window == 0 {
        return Err(user_error("--window must be at least 1".into()));
    }
    let file = fs::File::open(model_path).user(|| format!("cannot open model {}", model_path.display()))?;
    let model = load_model(BufReader::new(file)).user(|| format!("invalid model {}", model_path.display()))?;
    manifest.config("model", Some(model_path));
    manifest.input(model_path).user(|| print_path(model_path))?;
    let files = expand_transcripts(transcripts)?;
    let classifier = Classifier::new(model, ctx.rules, ctx.resources);
    let mut store = if append {
        RecordStore::open_or_create(store_path)
    } else {
        RecordStore::create(store_path)
    }
    .user(|| format!("record store {}", store_path.display()))?;
    let options = RunOptions { window, jobs: cli.jobs };
    let mut total = 0;
    let mut gated = 0;
    for f in &files {
        let text = read(f)?;
        manifest.input(f).user(|| print_path(f))?;
        let id = f
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| user_error(format!("{}: no usable file name", f.display())))?;
        let records = run_transcript(id, &text, &classifier, options).internal(|| print_path(f))?;
        gated += records.iter().filter(|r| r.is_rule_gated()).count();
        total += records.len();
        store
            .append(&records)
            .user(|| format!("{}: {}", store_path.display(), f.display()))?;
        println!("{}: {} pairs", f.display(), records.len());
    }
    let census = store.census().internal(|| print_path(store_path))?;
    println!(
        "{total} records written to {} ({gated} by citation rules)",
        store_path.display()
    );
    for (label, n) in census {
        println!("  {:<14}{n:>6}", label.name());
    }
    manifest.output(store_path).user(|| print_path(store_path))?;
    finish(&mut manifest, cli, Some(RunManifest::path_for(store_path)))
}

fn sample(cli: &Cli, store_path: &Path, out: &Path, n: usize, cluster_size: usize) -> Outcome<()> {
    let mut manifest = RunManifest::new("sample", cli.seed);
    let store = RecordStore::open(store_path).user(|| format!("record store {}", store_path.display()))?;
    manifest.input(store_path).user(|| print_path(store_path))?;
    let records = store.load_all().user(|| print_path(store_path))?;
    let clusters = sample_for_annotation(&records, n, cli.seed, cluster_size).user(|| "sampling".into())?;
    let mut buf = Vec::new();
    write_annotation_export(&clusters, &mut buf).internal(|| "export".into())?;
    write(out, &String::from_utf8(buf).expect("export is UTF-8"))?;
    println!(
        "{} clusters of {cluster_size} pairs written to {}",
        clusters.len(),
        out.display()
    );
    manifest.output(out).user(|| print_path(out))?;
    finish(&mut manifest, cli, Some(RunManifest::path_for(out)))
}

fn eval(
    cli: &Cli,
    store_path: &Path,
    annotations_path: &Path,
    policy: lexrel::eval::AgreementPolicy,
    out: &Path,
    update_store: bool,
) -> Outcome<()> {
    let mut manifest = RunManifest::new("eval", cli.seed);
    let text = read(annotations_path)?;
    let annotations = parse_judge_annotations(text.as_bytes()).user(|| print_path(annotations_path))?;
    let mut store = RecordStore::open(store_path).user(|| format!("record store {}", store_path.display()))?;
    manifest.input(store_path).user(|| print_path(store_path))?;
    manifest.input(annotations_path).user(|| print_path(annotations_path))?;
    let mut records = store.load_all().user(|| print_path(store_path))?;
    attach_annotations(&mut records, &annotations).user(|| print_path(annotations_path))?;
    if update_store {
        store.rewrite(&records).user(|| print_path(store_path))?;
    }
    let annotated: Vec<_> = records
        .into_iter()
        .filter(|r| !r.judge_annotations.is_empty())
        .collect();
    if annotated.is_empty() {
        return Err(user_error("no stored pair has a judge annotation".into()));
    }
    let judged = judged_predictions(&annotated);
    let matrix = build_confusion(&judged, policy, RelationLabel::ALL.to_vec()).user(|| format!("{policy} policy"))?;
    let metrics = precision_recall_f1(&matrix);
    fs::create_dir_all(out).user(|| format!("cannot create {}", out.display()))?;
    let confusion_path = out.join(format!("confusion-{policy}.tsv"));
    let metrics_json = out.join(format!("metrics-{policy}.json"));
    let metrics_txt = out.join(format!("metrics-{policy}.txt"));
    write(&confusion_path, &matrix.to_tsv())?;
    write(&metrics_json, &json(&metrics))?;
    write(&metrics_txt, &metrics.to_text())?;
    println!("policy: {policy}, pairs scored: {}", matrix.total());
    print!("{}", metrics.to_text());
    let mut outputs = vec![confusion_path, metrics_json, metrics_txt];
    if judged.iter().all(|j| j.judges.len() == 2) {
        let corr = correlation_report(&judged).internal(|| "correlations".into())?;
        let corr_path = out.join("correlations.json");
        write(&corr_path, &json(&corr))?;
        println!("Corr(H,H) = {}  Corr(H,S) = {}", corr.corr_hh, corr.corr_hs);
        outputs.push(corr_path);
    } else {
        println!("correlations skipped: every pair needs exactly two judges");
    }
    for p in &outputs {
        manifest.output(p).user(|| print_path(p))?;
    }
    finish(
        &mut manifest,
        cli,
        Some(out.join(format!("eval-{policy}.manifest.json"))),
    )
}

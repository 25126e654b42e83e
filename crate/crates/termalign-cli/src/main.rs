//! Batch pipeline driver: every stage of the terminology extraction and
//! bilingual alignment pipeline as a subcommand, with a flat key=value
//! config file, flag overrides, and reproducible output headers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use termalign::align::{
    build_candidates, precision_at_n, rank_candidates, AlignOptions, AlignmentCandidate,
    RankMode,
};
use termalign::corpus::{
    load_column_corpus, load_parallel_corpus, Corpus, CorpusRole, Sentence,
};
use termalign::crf::{train, CrfModel, TrainConfig};
use termalign::eval::{kfold, score, EvalReport};
use termalign::features::{
    extract_features, read_feature_matrix, write_feature_matrix, FeatureConfig, FeatureMatrix,
};
use termalign::ngram::{extract_ngrams, NGramFilters};
use termalign::termhood::{corpus_termhood_report, TermhoodTable};
use termalign::{Result, TermError};

#[derive(Parser)]
#[command(
    name = "termalign",
    version,
    about = "Terminology extraction and bilingual term alignment pipeline"
)]
struct Cli {
    /// Flat key=value config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare sentence termhood across one or more domain corpora.
    Stats(StatsArgs),
    /// Word-level termhood table for a domain/background corpus pair.
    Termhood(TermhoodArgs),
    /// Extract a per-token feature matrix from a (possibly labeled) corpus.
    Features(FeaturesArgs),
    /// Train a CRF tagger on a labeled feature matrix.
    Train(TrainArgs),
    /// Tag a feature matrix with a trained model.
    Tag(TagArgs),
    /// Score a model's tags against a labeled feature matrix.
    Eval(EvalArgs),
    /// K-fold cross-validation on a labeled feature matrix.
    Xval(XvalArgs),
    /// N-gram baseline candidate extraction ranked by frequency difference.
    Ngram(NgramArgs),
    /// Align bilingual term pairs over a sentence-aligned parallel corpus.
    Align(AlignArgs),
    /// Precision@N of ranked alignment candidates against a gold file.
    EvalAlign(EvalAlignArgs),
}

#[derive(clap::Args)]
struct StatsArgs {
    /// Domain corpus in column format; repeat to compare several.
    #[arg(long)]
    domain: Vec<PathBuf>,
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct TermhoodArgs {
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct FeaturesArgs {
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    background: Option<PathBuf>,
    /// Feature group preset or comma-separated feature list.
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    bin_count: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Labeled feature matrix produced by `features`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Where to write the trained model (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    l2_sigma2: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct TagArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Labeled feature matrix to score against.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct XvalArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    /// Number of folds.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    l2_sigma2: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct NgramArgs {
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Stopword list, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Drop candidates whose final token is not noun-tagged (needs POS).
    #[arg(long)]
    noun_final: Option<bool>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum AlignMode {
    Threshold,
    TopK,
    All,
}

#[derive(clap::Args)]
struct AlignArgs {
    /// Source side of the parallel corpus, one sentence per line.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Target side of the parallel corpus, one sentence per line.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Source-language term candidates, one per line (tokens space-separated).
    #[arg(long)]
    source_terms: Option<PathBuf>,
    #[arg(long)]
    target_terms: Option<PathBuf>,
    /// Source-language domain corpus; defaults to the source side itself.
    #[arg(long)]
    src_domain: Option<PathBuf>,
    #[arg(long)]
    src_background: Option<PathBuf>,
    #[arg(long)]
    tgt_domain: Option<PathBuf>,
    #[arg(long)]
    tgt_background: Option<PathBuf>,
    #[arg(long)]
    min_cooc: Option<u64>,
    /// Drop pairs whose termhood ratio max(Tc,Te)/min(Tc,Te) exceeds this.
    #[arg(long)]
    ratio_cap: Option<f64>,
    /// How to truncate the ranked candidate list.
    #[arg(long, value_enum)]
    mode: Option<AlignMode>,
    /// Association threshold for --mode threshold.
    #[arg(long)]
    theta: Option<f64>,
    /// List length for --mode top-k.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct EvalAlignArgs {
    /// Ranked candidate TSV produced by `align`.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Gold file: source TAB target TAB {1|0}.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Evaluate precision at this cutoff.
    #[arg(long)]
    at_n: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Resolved settings for one run: config-file values overridden by flags,
/// with every resolved key recorded for the config hash and run manifest.
struct Settings {
    file: HashMap<String, String>,
    resolved: BTreeMap<String, String>,
    seed: u64,
}

impl Settings {
    fn load(config: Option<&Path>) -> Result<Settings> {
        let mut file = HashMap::new();
        if let Some(path) = config {
            let text = fs::read_to_string(path).map_err(|source| TermError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    TermError::Config(format!(
                        "{}:{}: expected key=value, got {line:?}",
                        path.display(),
                        idx + 1
                    ))
                })?;
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Settings {
            file,
            resolved: BTreeMap::new(),
            seed: 0,
        })
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Flag > config file > default.
    fn get<T>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => raw.parse().map_err(|_| {
                    TermError::Config(format!("bad value for {key}: {raw:?}"))
                })?,
                None => default,
            },
        };
        self.record(key, &value);
        Ok(value)
    }

    fn get_opt<T>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(raw.parse().map_err(|_| {
                    TermError::Config(format!("bad value for {key}: {raw:?}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    fn path(&mut self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.opt_path(flag, key)?
            .ok_or_else(|| TermError::Config(format!("missing required setting: {key}")))
    }

    fn opt_path(&mut self, flag: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        let value = flag.or_else(|| self.file.get(key).map(PathBuf::from));
        if let Some(p) = &value {
            self.record(key, p.display());
        }
        Ok(value)
    }

    fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        self.seed = self.get(flag, "seed", 0)?;
        Ok(self.seed)
    }

    /// Hash of the resolved settings; identical config + flags hash alike.
    fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (key, value) in &self.resolved {
            hasher.update(key.as_bytes());
            hasher.update(b"=");
            hasher.update(value.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let result = dispatch(&cli);
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("termalign: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Stats(args) => cmd_stats(args, settings),
        Command::Termhood(args) => cmd_termhood(args, settings),
        Command::Features(args) => cmd_features(args, settings),
        Command::Train(args) => cmd_train(args, settings),
        Command::Tag(args) => cmd_tag(args, settings),
        Command::Eval(args) => cmd_eval(args, settings),
        Command::Xval(args) => cmd_xval(args, settings),
        Command::Ngram(args) => cmd_ngram(args, settings),
        Command::Align(args) => cmd_align(args, settings),
        Command::EvalAlign(args) => cmd_eval_align(args, settings),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TermError + '_ {
    move |source| TermError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn header(stage: &str, settings: &Settings) -> String {
    format!(
        "# termalign {stage} v{}\n# config_hash={} seed={}\n",
        env!("CARGO_PKG_VERSION"),
        settings.config_hash(),
        settings.seed
    )
}

fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, body).map_err(io_err(path)),
        None => {
            print!("{body}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

/// Sidecar manifest describing a stage run: versions, config hash, seed,
/// and every resolved setting. Deterministic for identical inputs.
fn write_manifest(stage: &str, output: Option<&Path>, settings: &Settings) -> Result<()> {
    let Some(output) = output else {
        return Ok(());
    };
    let mut body = String::new();
    body.push_str(&format!("stage={stage}\n"));
    body.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
    body.push_str(&format!("model_format={}\n", termalign::crf::MODEL_FORMAT_VERSION));
    body.push_str(&format!("config_hash={}\n", settings.config_hash()));
    body.push_str(&format!("seed={}\n", settings.seed));
    for (key, value) in &settings.resolved {
        if key != "seed" {
            body.push_str(&format!("{key}={value}\n"));
        }
    }
    let mut path = output.as_os_str().to_owned();
    path.push(".manifest");
    let path = PathBuf::from(path);
    fs::write(&path, body).map_err(io_err(&path))
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip form keeps outputs byte-stable and exact;
    // negative zero would print as "-0"
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

fn cmd_stats(args: &StatsArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let domains: Vec<PathBuf> = if args.domain.is_empty() {
        settings
            .file
            .get("domain")
            .map(|raw| raw.split(',').map(|p| PathBuf::from(p.trim())).collect())
            .unwrap_or_default()
    } else {
        args.domain.clone()
    };
    if domains.is_empty() {
        return Err(TermError::Config("missing required setting: domain".to_string()));
    }
    settings.record(
        "domain",
        domains
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    let background_path = settings.path(args.background.clone(), "background")?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let background = load_column_corpus(&background_path, CorpusRole::Background)?;
    let corpora: Vec<(String, Corpus)> = domains
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            load_column_corpus(path, CorpusRole::Domain).map(|c| (name, c))
        })
        .collect::<Result<_>>()?;
    let named: Vec<(String, &Corpus)> = corpora.iter().map(|(n, c)| (n.clone(), c)).collect();
    let rows = corpus_termhood_report(&named, &background);

    let mut body = header("stats", &settings);
    body.push_str("# columns=name,sentences,mean_freq_sen_d,mean_freq_sen_b,mean_termhood\n");
    for row in rows {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            row.name,
            row.sentence_count,
            fmt_f64(row.mean_freq_sen_d),
            fmt_f64(row.mean_freq_sen_b),
            fmt_f64(row.mean_termhood)
        ));
    }
    write_output(output.as_deref(), &body)
}

fn cmd_termhood(args: &TermhoodArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let domain_path = settings.path(args.domain.clone(), "domain")?;
    let background_path = settings.path(args.background.clone(), "background")?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let domain = load_column_corpus(&domain_path, CorpusRole::Domain)?;
    let background = load_column_corpus(&background_path, CorpusRole::Background)?;
    let table = TermhoodTable::build(&domain, &background);

    let mut records: Vec<_> = table.records.values().collect();
    records.sort_by(|a, b| {
        b.delta_f
            .partial_cmp(&a.delta_f)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.word.cmp(&b.word))
    });

    let mut body = header("termhood", &settings);
    body.push_str("# columns=word,c_d,c_b,f_d,f_b,r_d,r_b,delta_f,delta_r,delta_r_c\n");
    for rec in records {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            rec.word,
            rec.c_d,
            rec.c_b,
            fmt_f64(rec.f_d),
            fmt_f64(rec.f_b),
            fmt_f64(rec.r_d),
            fmt_f64(rec.r_b),
            fmt_f64(rec.delta_f),
            fmt_f64(rec.delta_r),
            fmt_f64(rec.delta_r_c)
        ));
    }
    write_output(output.as_deref(), &body)
}

fn cmd_features(args: &FeaturesArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let domain_path = settings.path(args.domain.clone(), "domain")?;
    let background_path = settings.path(args.background.clone(), "background")?;
    let group = settings.get(args.group.clone(), "group", "all".to_string())?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let mut config = FeatureConfig::parse_group(&group)?;
    config.bin_count = settings.get(args.bin_count, "bin_count", config.bin_count)?;

    let domain = load_column_corpus(&domain_path, CorpusRole::Domain)?;
    let background = load_column_corpus(&background_path, CorpusRole::Background)?;
    let table = TermhoodTable::build(&domain, &background);
    let matrix = extract_features(&domain, &table, &config);

    let mut buf = Vec::new();
    buf.extend_from_slice(header("features", &settings).as_bytes());
    write_feature_matrix(&matrix, &mut buf).map_err(|e| TermError::Io {
        path: output.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source: e,
    })?;
    let body = String::from_utf8(buf).expect("matrix output is utf-8");
    write_output(output.as_deref(), &body)?;
    write_manifest("features", output.as_deref(), &settings)
}

fn load_matrix(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    read_feature_matrix(&text, path)
}

fn cmd_train(args: &TrainArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let features_path = settings.path(args.features.clone(), "features")?;
    let model_path = settings.path(args.model.clone(), "model")?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        l2_sigma2: settings.get(args.l2_sigma2, "l2_sigma2", defaults.l2_sigma2)?,
        max_iterations: settings.get(args.max_iterations, "max_iterations", defaults.max_iterations)?,
        ..defaults
    };

    let matrix = load_matrix(&features_path)?;
    let mut model = train(&matrix, &config)?;
    model.config_hash = settings.config_hash();
    model.save(&model_path)?;
    write_manifest("train", Some(&model_path), &settings)
}

fn cmd_tag(args: &TagArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let features_path = settings.path(args.features.clone(), "features")?;
    let model_path = settings.path(args.model.clone(), "model")?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let matrix = load_matrix(&features_path)?;
    let model = CrfModel::load(&model_path)?;
    let tags = model.tag(&matrix)?;

    let mut body = header("tag", &settings);
    for (rows, sentence_tags) in matrix.sentences.iter().zip(&tags) {
        for (row, tag) in rows.iter().zip(sentence_tags) {
            if row.word.is_empty() {
                body.push_str(&format!("{tag}\n"));
            } else {
                body.push_str(&format!("{}\t{tag}\n", row.word));
            }
        }
        body.push('\n');
    }
    write_output(output.as_deref(), &body)?;
    write_manifest("tag", output.as_deref(), &settings)
}

fn gold_bio(matrix: &FeatureMatrix) -> Result<Vec<Vec<termalign::corpus::BioTag>>> {
    matrix
        .sentences
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|r| {
                    r.label.ok_or_else(|| {
                        TermError::Evaluation("evaluation needs a labeled matrix".to_string())
                    })
                })
                .collect()
        })
        .collect()
}

fn cmd_eval(args: &EvalArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let features_path = settings.path(args.features.clone(), "features")?;
    let model_path = settings.path(args.model.clone(), "model")?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let matrix = load_matrix(&features_path)?;
    let gold = gold_bio(&matrix)?;
    let model = CrfModel::load(&model_path)?;
    let tags = model.tag(&matrix)?;
    let system: Vec<Vec<termalign::corpus::BioTag>> = tags
        .iter()
        .map(|s| {
            s.iter()
                .map(|t| termalign::corpus::BioTag::parse(t).unwrap_or(termalign::corpus::BioTag::O))
                .collect()
        })
        .collect();
    let (contingency, p, r, f1) = score(&system, &gold)?;

    let mut body = header("eval", &settings);
    body.push_str(&format!(
        "a={}\nb={}\nc={}\nprecision={}\nrecall={}\nf1={}\n",
        contingency.a,
        contingency.b,
        contingency.c,
        fmt_f64(p),
        fmt_f64(r),
        fmt_f64(f1)
    ));
    write_output(output.as_deref(), &body)?;
    write_manifest("eval", output.as_deref(), &settings)
}

fn xval_body(report: &EvalReport, settings: &Settings) -> String {
    let mut body = header("xval", settings);
    body.push_str("# columns=fold,a,b,c,precision,recall,f1\n");
    for fold in &report.folds {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            fold.fold,
            fold.contingency.a,
            fold.contingency.b,
            fold.contingency.c,
            fmt_f64(fold.p),
            fmt_f64(fold.r),
            fmt_f64(fold.f1)
        ));
    }
    body.push_str(&format!(
        "macro\t{}\t{}\t{}\t{}\t{}\t{}\n",
        report.totals.a,
        report.totals.b,
        report.totals.c,
        fmt_f64(report.macro_p),
        fmt_f64(report.macro_r),
        fmt_f64(report.macro_f1)
    ));
    body.push_str(&format!("# f1_of_macro={}\n", fmt_f64(report.f1_of_macro)));
    body
}

fn cmd_xval(args: &XvalArgs, mut settings: Settings) -> Result<()> {
    let seed = settings.seed(args.seed)?;
    let features_path = settings.path(args.features.clone(), "features")?;
    let folds = settings.get(args.folds, "folds", 10usize)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        l2_sigma2: settings.get(args.l2_sigma2, "l2_sigma2", defaults.l2_sigma2)?,
        max_iterations: settings.get(args.max_iterations, "max_iterations", defaults.max_iterations)?,
        ..defaults
    };
    let output = settings.opt_path(args.output.clone(), "output")?;

    let matrix = load_matrix(&features_path)?;
    let report = kfold(&matrix, folds, seed, &config)?;
    write_output(output.as_deref(), &xval_body(&report, &settings))?;
    write_manifest("xval", output.as_deref(), &settings)
}

fn cmd_ngram(args: &NgramArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let domain_path = settings.path(args.domain.clone(), "domain")?;
    let background_path = settings.path(args.background.clone(), "background")?;
    let max_n = settings.get(args.max_n, "max_n", 4usize)?;
    let min_count = settings.get(args.min_count, "min_count", 2u64)?;
    let stopwords_path = settings.opt_path(args.stopwords.clone(), "stopwords")?;
    let noun_final = settings.get(args.noun_final, "noun_final", true)?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let mut filters = NGramFilters {
        noun_final,
        ..NGramFilters::default()
    };
    if let Some(path) = &stopwords_path {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        filters.stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
    }

    let domain = load_column_corpus(&domain_path, CorpusRole::Domain)?;
    let background = load_column_corpus(&background_path, CorpusRole::Background)?;
    let candidates = extract_ngrams(&domain, &background, max_n, min_count, &filters);

    let mut body = header("ngram", &settings);
    body.push_str("# columns=candidate,count_domain,count_background,delta_f\n");
    for cand in candidates {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            cand.joined(),
            cand.count_domain,
            cand.count_background,
            fmt_f64(cand.score)
        ));
    }
    write_output(output.as_deref(), &body)?;
    write_manifest("ngram", output.as_deref(), &settings)
}

fn load_term_list(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect())
}

fn side_corpus(pairs: &[termalign::corpus::SentencePair], take_source: bool) -> Corpus {
    let sentences: Vec<Sentence> = pairs
        .iter()
        .map(|p| if take_source { p.source.clone() } else { p.target.clone() })
        .collect();
    Corpus {
        sentences,
        role: CorpusRole::Domain,
    }
}

fn align_body(ranked: &[AlignmentCandidate], settings: &Settings) -> String {
    let mut body = header("align", settings);
    body.push_str("# columns=c,e,k11,k12,k21,k22,logl,termhood_c,termhood_e,association\n");
    for cand in ranked {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            cand.source_joined(),
            cand.target_joined(),
            cand.contingency.k11,
            cand.contingency.k12,
            cand.contingency.k21,
            cand.contingency.k22,
            fmt_f64(cand.logl),
            fmt_f64(cand.termhood_source),
            fmt_f64(cand.termhood_target),
            fmt_f64(cand.association)
        ));
    }
    body
}

fn cmd_align(args: &AlignArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let source_path = settings.path(args.source.clone(), "source")?;
    let target_path = settings.path(args.target.clone(), "target")?;
    let source_terms_path = settings.path(args.source_terms.clone(), "source_terms")?;
    let target_terms_path = settings.path(args.target_terms.clone(), "target_terms")?;
    let src_domain_path = settings.opt_path(args.src_domain.clone(), "src_domain")?;
    let src_background_path = settings.path(args.src_background.clone(), "src_background")?;
    let tgt_domain_path = settings.opt_path(args.tgt_domain.clone(), "tgt_domain")?;
    let tgt_background_path = settings.path(args.tgt_background.clone(), "tgt_background")?;
    let options = AlignOptions {
        min_cooc: settings.get(args.min_cooc, "min_cooc", AlignOptions::default().min_cooc)?,
        ratio_cap: settings.get_opt(args.ratio_cap, "ratio_cap")?,
    };
    let mode = match args.mode {
        Some(m) => m,
        None => match settings.file.get("mode").map(String::as_str) {
            Some("threshold") => AlignMode::Threshold,
            Some("top-k") | Some("topk") => AlignMode::TopK,
            Some("all") | None => AlignMode::All,
            Some(other) => {
                return Err(TermError::Config(format!("unknown align mode: {other:?}")))
            }
        },
    };
    settings.record("mode", format!("{mode:?}").to_lowercase());
    let mode = match mode {
        AlignMode::Threshold => RankMode::Threshold(settings.get(args.theta, "theta", 0.0)?),
        AlignMode::TopK => RankMode::TopK(settings.get(args.top_k, "top_k", 100usize)?),
        AlignMode::All => RankMode::All,
    };
    let output = settings.opt_path(args.output.clone(), "output")?;

    let parallel = load_parallel_corpus(&source_path, &target_path)?;
    let src_terms = load_term_list(&source_terms_path)?;
    let tgt_terms = load_term_list(&target_terms_path)?;
    let src_domain = match &src_domain_path {
        Some(path) => load_column_corpus(path, CorpusRole::Domain)?,
        None => side_corpus(&parallel.pairs, true),
    };
    let tgt_domain = match &tgt_domain_path {
        Some(path) => load_column_corpus(path, CorpusRole::Domain)?,
        None => side_corpus(&parallel.pairs, false),
    };
    let src_background = load_column_corpus(&src_background_path, CorpusRole::Background)?;
    let tgt_background = load_column_corpus(&tgt_background_path, CorpusRole::Background)?;

    let candidates = build_candidates(
        &parallel.pairs,
        &src_terms,
        &tgt_terms,
        &src_domain,
        &src_background,
        &tgt_domain,
        &tgt_background,
        &options,
    );
    let ranked = rank_candidates(candidates, mode);
    write_output(output.as_deref(), &align_body(&ranked, &settings))?;
    write_manifest("align", output.as_deref(), &settings)
}

/// Parse the ranked-candidate TSV written by `align` back into candidates
/// (only the fields P@N needs).
fn load_candidates(path: &Path) -> Result<Vec<AlignmentCandidate>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(TermError::Format {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected 10 columns, found {}", cols.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            cols[i].parse().map_err(|_| TermError::Format {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("bad number: {:?}", cols[i]),
            })
        };
        out.push(AlignmentCandidate {
            source: cols[0].split_whitespace().map(str::to_string).collect(),
            target: cols[1].split_whitespace().map(str::to_string).collect(),
            contingency: Default::default(),
            logl: num(6)?,
            termhood_source: num(7)?,
            termhood_target: num(8)?,
            association: num(9)?,
        });
    }
    Ok(out)
}

fn load_gold(path: &Path) -> Result<HashMap<(String, String), bool>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut gold = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let ok = match cols.as_slice() {
            [_, _, flag] => match *flag {
                "1" => true,
                "0" => false,
                other => {
                    return Err(TermError::Format {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: format!("expected 1 or 0, got {other:?}"),
                    })
                }
            },
            _ => {
                return Err(TermError::Format {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected 3 columns, found {}", cols.len()),
                })
            }
        };
        gold.insert((cols[0].to_string(), cols[1].to_string()), ok);
    }
    Ok(gold)
}

fn cmd_eval_align(args: &EvalAlignArgs, mut settings: Settings) -> Result<()> {
    settings.seed(args.seed)?;
    let candidates_path = settings.path(args.candidates.clone(), "candidates")?;
    let gold_path = settings.path(args.gold.clone(), "gold")?;
    let at_n = settings.get(args.at_n, "at_n", 500usize)?;
    let output = settings.opt_path(args.output.clone(), "output")?;

    let ranked = load_candidates(&candidates_path)?;
    let gold = load_gold(&gold_path)?;
    let p = precision_at_n(&ranked, &gold, at_n)?;

    let mut body = header("eval-align", &settings);
    body.push_str(&format!("p_at_{at_n}={p:.4}\n"));
    if output.is_some() {
        // the headline number also goes to stdout for pipeline logs
        println!("p_at_{at_n}={p:.4}");
    }
    write_output(output.as_deref(), &body)?;
    write_manifest("eval-align", output.as_deref(), &settings)
}

//! Command-line front end: `prep`, `pairs`, `train`, `eval`, `baseline`,
//! `verify`.
//!
//! Exit codes: 0 success, 1 internal error, 2 input error, 3 configuration
//! error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{evaluate_baseline, DistanceKind};
use crate::data::{
    decode_canonical, load_ucr_archive, parse_mitbih, parse_ucr, prepare, save_canonical, Dataset,
    Delimiter, Role, ScalingMode, DEFAULT_L_MAX,
};
use crate::episodic::{evaluate, Evaluation, Protocol, DEFAULT_N_WAY, DEFAULT_QUERIES, DEFAULT_TASKS};
use crate::error::{Error, Result};
use crate::pairs::{generate_pairs, pair_seed, PairSet, PairSource, DEFAULT_CAP_PER_CLASS};
use crate::report::{save_results, SummaryTable};
use crate::siamese::{load_checkpoint, pretrain_with, save_checkpoint, EmbeddingConfig, TrainConfig};
use crate::verify::{run_all, VerifyOptions};

pub const DEFAULT_TRAIN: [&str; 2] = ["ECG200", "ECG5000"];
pub const DEFAULT_VAL: [&str; 2] = ["ECGFiveDays", "TwoLeadECG"];
pub const DEFAULT_TEST: &str = "MIT-BIH";
const CANONICAL_EXT: &str = "fsts";

#[derive(Debug, Parser)]
#[command(name = "fsts", version, about = "Few-shot ECG classification with a Siamese 1-D CNN")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse raw datasets, scale and pad them, and write canonical files.
    Prep(PrepArgs),
    /// Generate balanced same/different pairs for one prepared dataset.
    Pairs(PairsArgs),
    /// Pretrain the Siamese network and write a checkpoint and report.
    Train(TrainArgs),
    /// Evaluate a checkpoint on N-way K-shot episodes.
    Eval(EvalArgs),
    /// Evaluate a 1-NN baseline on the same episodes.
    Baseline(BaselineArgs),
    /// Run gradient, DTW and pair-balance self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RawKind {
    Ucr,
    Mitbih,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Tsv,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Ed,
    Dtw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    PerSeries,
    PerDataset,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed for every stochastic stage.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Root for dataset names that are not paths.
    #[arg(long, env = "FSTS_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    /// Raw files, UCR archive directories, or dataset names under the data directory.
    #[arg(required = true)]
    pub inputs: Vec<String>,
    #[arg(long, value_enum, default_value_t = RawKind::Ucr)]
    pub kind: RawKind,
    /// Field separator of UCR text files; detected when omitted.
    #[arg(long, value_enum)]
    pub format: Option<TextFormat>,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    pub l_max: usize,
    #[arg(long, value_enum, default_value_t = Scaling::PerSeries)]
    pub scaling: Scaling,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct PairsArgs {
    /// Prepared dataset file or name.
    pub dataset: String,
    /// Same-label pairs per class (and as many different-label pairs).
    #[arg(long, default_value_t = DEFAULT_CAP_PER_CLASS)]
    pub cap_pairs: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Training datasets (prepared files or names).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TRAIN.map(String::from))]
    pub train: Vec<String>,
    /// Validation datasets (prepared files or names).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_VAL.map(String::from))]
    pub val: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_CAP_PER_CLASS)]
    pub cap_pairs: usize,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    /// Checkpoint directory; defaults to `<out>/checkpoint`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EpisodeArgs {
    /// Shot counts to sweep.
    #[arg(long = "k", value_delimiter = ',', default_values_t = crate::episodic::DEFAULT_K_LIST)]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_N_WAY)]
    pub n_way: usize,
    #[arg(long, default_value_t = DEFAULT_QUERIES)]
    pub queries: usize,
    #[arg(long, default_value_t = DEFAULT_TASKS)]
    pub tasks: usize,
    /// Kind of the test file when it is raw text rather than a prepared file.
    #[arg(long, value_enum, default_value_t = RawKind::Mitbih)]
    pub kind: RawKind,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Test dataset (prepared file, raw file, or name).
    #[arg(default_value = DEFAULT_TEST)]
    pub dataset: String,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[arg(value_enum)]
    pub distance: BaselineKind,
    /// Test dataset (prepared file, raw file, or name).
    #[arg(default_value = DEFAULT_TEST)]
    pub dataset: String,
    /// Sakoe-Chiba half-width for DTW; unconstrained when omitted.
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub episodes: EpisodeArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub corrupt_dtw: bool,
}

/// Validated parameters shared by the commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub out: PathBuf,
    pub seed: u64,
    pub n_way: usize,
    pub k_list: Vec<usize>,
    pub q_queries: usize,
    pub n_tasks: usize,
    pub cap_per_class: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub epoch_cap: usize,
    pub dropout_rate: f64,
    pub checkpoint: Option<PathBuf>,
}

impl RunConfig {
    fn base(command: &'static str, inputs: Vec<String>, common: &Common) -> Self {
        let train = TrainConfig::default();
        Self {
            command,
            inputs,
            out: common.out.clone(),
            seed: common.seed,
            n_way: DEFAULT_N_WAY,
            k_list: crate::episodic::DEFAULT_K_LIST.to_vec(),
            q_queries: DEFAULT_QUERIES,
            n_tasks: DEFAULT_TASKS,
            cap_per_class: DEFAULT_CAP_PER_CLASS,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            patience: train.patience,
            epoch_cap: train.max_epochs,
            dropout_rate: crate::siamese::DEFAULT_DROPOUT,
            checkpoint: None,
        }
    }

    fn with_episodes(mut self, e: &EpisodeArgs) -> Self {
        self.k_list = e.k_list.clone();
        self.n_way = e.n_way;
        self.q_queries = e.queries;
        self.n_tasks = e.tasks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n-way", self.n_way),
            ("queries", self.q_queries),
            ("tasks", self.n_tasks),
            ("cap-pairs", self.cap_per_class),
            ("batch-size", self.batch_size),
            ("patience", self.patience),
            ("epochs", self.epoch_cap),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("--{name} must be positive")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("--lr must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument("--dropout must lie in [0, 1)".into()));
        }
        if matches!(self.command, "eval" | "baseline") {
            if self.k_list.is_empty() {
                return Err(Error::InvalidArgument("--k needs at least one shot count".into()));
            }
            if self.k_list.contains(&0) {
                return Err(Error::InvalidArgument("--k values must be positive".into()));
            }
        }
        Ok(())
    }

    fn protocol(&self, k_shot: usize) -> Protocol {
        Protocol {
            n_way: self.n_way,
            k_shot,
            q_queries: self.q_queries,
            n_tasks: self.n_tasks,
        }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.epoch_cap,
        }
    }
}

fn not_found(path: impl Into<PathBuf>) -> Error {
    Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound))
}

fn delimiter(format: Option<TextFormat>) -> Delimiter {
    match format {
        None => Delimiter::Auto,
        Some(TextFormat::Tsv) => Delimiter::Tab,
        Some(TextFormat::Csv) => Delimiter::Comma,
    }
}

fn load_raw(input: &str, kind: RawKind, delim: Delimiter, data_dir: Option<&Path>) -> Result<Dataset> {
    let path = Path::new(input);
    match kind {
        RawKind::Mitbih => {
            if path.is_file() {
                return parse_mitbih(path);
            }
            let dir = data_dir.ok_or_else(|| not_found(path))?;
            ["mitbih_test.csv", input]
                .iter()
                .map(|f| dir.join(f))
                .find(|p| p.is_file())
                .map(parse_mitbih)
                .unwrap_or_else(|| Err(not_found(dir.join("mitbih_test.csv"))))
        }
        RawKind::Ucr => {
            if path.is_file() {
                return parse_ucr(path, delim);
            }
            if path.is_dir() {
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(input);
                return load_ucr_archive(path, name, delim);
            }
            let dir = data_dir.ok_or_else(|| not_found(path))?;
            let nested = dir.join(input);
            if nested.is_dir() {
                load_ucr_archive(&nested, input, delim)
            } else {
                load_ucr_archive(dir, input, delim)
            }
        }
    }
}

/// Loads a prepared file, or a raw file of the given kind, or a name
/// resolved as `<data_dir>/<name>.fsts`.
pub fn load_dataset(spec: &str, raw_kind: RawKind, data_dir: Option<&Path>) -> Result<Dataset> {
    let path = Path::new(spec);
    let file = if path.is_file() {
        path.to_path_buf()
    } else {
        let dir = data_dir.ok_or_else(|| not_found(path))?;
        let candidate = dir.join(format!("{spec}.{CANONICAL_EXT}"));
        if candidate.is_file() {
            candidate
        } else {
            return load_raw(spec, raw_kind, Delimiter::Auto, Some(dir));
        }
    };
    let bytes = std::fs::read(&file).map_err(|e| Error::io(&file, e))?;
    if bytes.starts_with(b"FSTS") {
        decode_canonical(&bytes)
    } else {
        load_raw(&file.display().to_string(), raw_kind, Delimiter::Auto, None)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_prep(args: &PrepArgs) -> Result<Vec<PathBuf>> {
    if args.l_max == 0 {
        return Err(Error::InvalidArgument("--l-max must be positive".into()));
    }
    let mode = match args.scaling {
        Scaling::PerSeries => ScalingMode::PerSeries,
        Scaling::PerDataset => ScalingMode::PerDataset,
    };
    let role = match args.kind {
        RawKind::Ucr => Role::Train,
        RawKind::Mitbih => Role::Test,
    };
    ensure_dir(&args.common.out)?;
    let mut written = Vec::new();
    for input in &args.inputs {
        let raw = load_raw(input, args.kind, delimiter(args.format), args.common.data_dir.as_deref())?;
        let original = raw.max_original_length();
        let ready = prepare(&raw, args.l_max, mode)?.with_role(role);
        let path = args.common.out.join(format!("{}.{CANONICAL_EXT}", ready.name));
        save_canonical(&ready, &path)?;
        println!("{}", ready.summary(original));
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_pairs(args: &PairsArgs) -> Result<PathBuf> {
    let mut config = RunConfig::base("pairs", vec![args.dataset.clone()], &args.common);
    config.cap_per_class = args.cap_pairs;
    config.validate()?;
    let ds = load_dataset(&args.dataset, RawKind::Ucr, args.common.data_dir.as_deref())?;
    let pairs = generate_pairs(&ds, Some(config.cap_per_class), pair_seed(config.seed, &ds.name))?;
    ensure_dir(&config.out)?;
    let path = config.out.join(format!("{}_pairs.csv", ds.name));
    pairs.save_csv(&path)?;
    let same = pairs.pairs.iter().filter(|p| p.label == 1).count();
    println!("{}: {} pairs ({same} same, {} different)", ds.name, pairs.len(), pairs.len() - same);
    Ok(path)
}

fn train_config(args: &TrainArgs) -> RunConfig {
    let mut c = RunConfig::base(
        "train",
        args.train.iter().chain(&args.val).cloned().collect(),
        &args.common,
    );
    c.cap_per_class = args.cap_pairs;
    c.batch_size = args.batch_size;
    c.learning_rate = args.lr;
    c.patience = args.patience;
    c.epoch_cap = args.epochs;
    c.dropout_rate = args.dropout;
    c.checkpoint = Some(args.checkpoint.clone().unwrap_or_else(|| args.common.out.join("checkpoint")));
    c
}

fn pair_sources<'a>(sets: &'a [Dataset], pairs: &'a [PairSet]) -> Vec<PairSource<'a>> {
    sets.iter()
        .zip(pairs)
        .map(|(dataset, pairs)| PairSource { dataset, pairs })
        .collect()
}

pub fn cmd_train(args: &TrainArgs) -> Result<PathBuf> {
    let config = train_config(args);
    config.validate()?;
    if let Some(name) = args.train.iter().find(|n| args.val.contains(n)) {
        return Err(Error::DatasetOverlap(name.clone()));
    }
    let data_dir = args.common.data_dir.as_deref();
    let load_all = |names: &[String], role: Role| -> Result<Vec<Dataset>> {
        names
            .iter()
            .map(|n| {
                let ds = load_dataset(n, RawKind::Ucr, data_dir)?;
                if ds.is_padded() {
                    Ok(ds.with_role(role))
                } else {
                    Ok(prepare(&ds, DEFAULT_L_MAX, ScalingMode::PerSeries)?.with_role(role))
                }
            })
            .collect()
    };
    let train = load_all(&args.train, Role::Train)?;
    let val = load_all(&args.val, Role::Validation)?;
    let input_length = train[0].l_max;
    let model_config = EmbeddingConfig::default()
        .with_input_length(input_length)
        .with_dropout(config.dropout_rate);

    let pair_sets = |sets: &[Dataset]| -> Result<Vec<_>> {
        sets.iter()
            .map(|d| generate_pairs(d, Some(config.cap_per_class), pair_seed(config.seed, &d.name)))
            .collect()
    };
    let train_pairs = pair_sets(&train)?;
    let val_pairs = pair_sets(&val)?;
    let train_src = pair_sources(&train, &train_pairs);
    let val_src = pair_sources(&val, &val_pairs);

    let (model, report) = pretrain_with(
        &train_src,
        &val_src,
        &model_config,
        &config.train_config(),
        config.seed,
        |r| eprintln!("epoch {:>3}  train {:.5}  val {:.5}", r.epoch, r.train_loss, r.val_loss),
    )?;
    let ckpt = config.checkpoint.clone().expect("set by train_config");
    save_checkpoint(&model, &ckpt)?;
    ensure_dir(&config.out)?;
    report.save(&config.out)?;
    println!(
        "stopped after {} epochs ({:?}); best epoch {}; checkpoint {}",
        report.epochs.len(),
        report.stop_reason,
        report.best_epoch,
        ckpt.display()
    );
    Ok(ckpt)
}

fn write_evaluations(out: &Path, tag: &str, evaluations: &[Evaluation]) -> Result<()> {
    ensure_dir(out)?;
    save_results(out.join(format!("results_{tag}.csv")), evaluations)?;
    let table = SummaryTable::from_evaluations(evaluations);
    table.save_csv(out.join(format!("summary_{tag}.csv")))?;
    print!("{}", table.render_accuracy());
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<Evaluation>> {
    let mut config = RunConfig::base("eval", vec![args.dataset.clone()], &args.common).with_episodes(&args.episodes);
    config.checkpoint = Some(args.checkpoint.clone());
    config.validate()?;
    let model = load_checkpoint(&args.checkpoint)?;
    let mut ds = load_dataset(&args.dataset, args.episodes.kind, args.common.data_dir.as_deref())?;
    if !ds.is_padded() || ds.l_max != model.config.input_length {
        ds = prepare(&ds, model.config.input_length, ScalingMode::PerSeries)?;
    }
    let evaluations = config
        .k_list
        .iter()
        .map(|&k| evaluate(&model, &ds, config.protocol(k), config.seed))
        .collect::<Result<Vec<_>>>()?;
    write_evaluations(&config.out, "scnn", &evaluations)?;
    Ok(evaluations)
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<Vec<Evaluation>> {
    let config = RunConfig::base("baseline", vec![args.dataset.clone()], &args.common).with_episodes(&args.episodes);
    config.validate()?;
    let distance = match args.distance {
        BaselineKind::Ed => DistanceKind::Euclidean,
        BaselineKind::Dtw => DistanceKind::Dtw { window: args.window },
    };
    let ds = load_dataset(&args.dataset, args.episodes.kind, args.common.data_dir.as_deref())?;
    let evaluations = config
        .k_list
        .iter()
        .map(|&k| evaluate_baseline(&ds, distance, config.protocol(k), config.seed))
        .collect::<Result<Vec<_>>>()?;
    let tag = distance.model_name().to_lowercase();
    write_evaluations(&config.out, &tag, &evaluations)?;
    Ok(evaluations)
}

/// Returns whether every check passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let report = run_all(&VerifyOptions {
        seed: args.seed,
        corrupt_dtw: args.corrupt_dtw,
    })?;
    print!("{}", report.render());
    Ok(report.passed())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Prep(a) => cmd_prep(a).map(|_| 0),
        Command::Pairs(a) => cmd_pairs(a).map(|_| 0),
        Command::Train(a) => cmd_train(a).map(|_| 0),
        Command::Eval(a) => cmd_eval(a).map(|_| 0),
        Command::Baseline(a) => cmd_baseline(a).map(|_| 0),
        Command::Verify(a) => cmd_verify(a).map(|ok| if ok { 0 } else { 1 }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

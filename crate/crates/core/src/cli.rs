//! Command-line front end.
//!
//! Every option can also come from a `key = value` config file passed with
//! `--config`; flags given on the command line win. Keys are the long flag
//! names (`delta-att`, `lambda_reg` and so on; `-` and `_` are
//! interchangeable).

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::constraints::{self, read_pairs, read_vocab_file, write_pairs, ConstraintSet};
use crate::error::Error;
use crate::eval::{evaluate, neighbors, SimilarityDataset};
use crate::morph_fix::{morph_fix, FrequencyTable};
use crate::morph_rules::{Language, RuleSet};
use crate::optimizer::{fit, write_cost_log, NegativePool, TrainingConfig};
use crate::vector_store::{LoadOptions, VectorStore};

pub const DEFAULT_MIN_FREQ: u64 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "morphfit",
    version,
    about = "Morphological fine-tuning of word vectors"
)]
pub struct Cli {
    /// `key = value` file with default option values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Log progress to standard error (-vv for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract ATTRACT and REPEL constraints from a vocabulary.
    Extract(ExtractArgs),
    /// Fine-tune vectors against constraint files.
    Fit(FitArgs),
    /// Morph-fixing baseline.
    Fix(FixArgs),
    /// Spearman correlation against a similarity dataset.
    Eval(EvalArgs),
    /// Nearest neighbours of a word.
    Neighbors(NeighborsArgs),
    /// Write a built-in rule table in the editable text format.
    Rules(RulesArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub lang: Option<String>,
    /// Custom rule table; replaces the built-in rules for `--lang`.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// One word per line, optionally `word<TAB>count`.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out_attract: Option<PathBuf>,
    #[arg(long)]
    pub out_repel: Option<PathBuf>,
    /// Drop words whose count is below this value. Words without a count
    /// are kept.
    #[arg(long)]
    pub min_freq: Option<u64>,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub attract: Option<PathBuf>,
    #[arg(long)]
    pub repel: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-epoch cost log; defaults to `<out>.costs.tsv`.
    #[arg(long)]
    pub cost_log: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub delta_att: Option<f64>,
    #[arg(long)]
    pub delta_rpl: Option<f64>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    /// Sets both the attract and the repel batch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub attract_batch_size: Option<usize>,
    #[arg(long)]
    pub repel_batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `joint` or `same-kind`.
    #[arg(long)]
    pub negatives: Option<String>,
    /// Keep input vectors at their original length.
    #[arg(long)]
    pub no_normalize: bool,
    /// Scale fitted vectors to unit length before writing.
    #[arg(long)]
    pub normalize_output: bool,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct FixArgs {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub attract: Option<PathBuf>,
    /// `word<TAB>count` lines.
    #[arg(long)]
    pub freq: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// `word1<TAB>word2<TAB>score` lines.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub word: Option<String>,
    #[arg(short)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    #[arg(long)]
    pub lang: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            status: 1,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// `key = value` settings.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", idx + 1))?;
            values.insert(normalize_key(key), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(&normalize_key(key)) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| format!("config key '{key}': {e}")),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

/// Resolves a value from a flag, then the config file, then a default.
struct Resolver<'a> {
    config: &'a ConfigFile,
}

impl Resolver<'_> {
    fn opt<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key).map_err(CliError::usage),
        }
    }

    fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn required<T>(&self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing required option --{key}")))
    }

    fn switch(&self, flag: bool, key: &str) -> CliResult<bool> {
        if flag {
            return Ok(true);
        }
        Ok(self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    fn input(&self, flag: Option<PathBuf>, key: &str) -> CliResult<PathBuf> {
        let path = self.required(flag, key)?;
        check_input(&path)?;
        Ok(path)
    }
}

fn check_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}

/// Parse `args` and run the selected command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();

    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.status)
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let r = Resolver { config: &config };
    match cli.command {
        Command::Extract(args) => cmd_extract(args, &r),
        Command::Fit(args) => cmd_fit(args, &r),
        Command::Fix(args) => cmd_fix(args, &r),
        Command::Eval(args) => cmd_eval(args, &r),
        Command::Neighbors(args) => cmd_neighbors(args, &r),
        Command::Rules(args) => cmd_rules(args, &r),
    }
}

fn cmd_extract(args: ExtractArgs, r: &Resolver) -> CliResult<()> {
    let vocab_path = r.input(args.vocab, "vocab")?;
    let rules_path = r.opt(args.rules, "rules")?;
    if let Some(p) = &rules_path {
        check_input(p)?;
    }
    let out_attract: PathBuf = r.required(args.out_attract, "out-attract")?;
    let out_repel: PathBuf = r.required(args.out_repel, "out-repel")?;
    let min_freq = r.or(args.min_freq, "min-freq", DEFAULT_MIN_FREQ)?;
    let lowercase = r.switch(args.lowercase, "lowercase")?;

    let rules = match rules_path {
        Some(p) => RuleSet::load(p)?,
        None => {
            let lang: String = r.required(args.lang, "lang")?;
            RuleSet::builtin(lang.parse::<Language>()?)
        }
    };

    let entries = read_vocab_file(&vocab_path, lowercase)?;
    let vocab = constraints::vocabulary(
        entries
            .into_iter()
            .filter(|e| e.count.is_none_or(|c| c >= min_freq))
            .map(|e| e.word),
    );
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary.into());
    }

    let set = constraints::build(&vocab, &rules);
    write_pairs(&out_attract, &set.attract)?;
    write_pairs(&out_repel, &set.repel)?;
    eprintln!(
        "|W|={} |A|={} |R|={}",
        vocab.len(),
        set.attract.len(),
        set.repel.len()
    );
    Ok(())
}

fn training_config(args: &FitArgs, r: &Resolver) -> CliResult<TrainingConfig> {
    let d = TrainingConfig::default();
    let batch = r.opt(args.batch_size, "batch-size")?;
    let negatives = match r.opt(args.negatives.clone(), "negatives")? {
        Some(s) => s.parse::<NegativePool>()?,
        None => d.negatives,
    };
    let config = TrainingConfig {
        delta_att: r.or(args.delta_att, "delta-att", d.delta_att)?,
        delta_rpl: r.or(args.delta_rpl, "delta-rpl", d.delta_rpl)?,
        lambda_reg: r.or(args.lambda_reg, "lambda-reg", d.lambda_reg)?,
        epochs: r.or(args.epochs, "epochs", d.epochs)?,
        attract_batch_size: r.or(
            args.attract_batch_size,
            "attract-batch-size",
            batch.unwrap_or(d.attract_batch_size),
        )?,
        repel_batch_size: r.or(
            args.repel_batch_size,
            "repel-batch-size",
            batch.unwrap_or(d.repel_batch_size),
        )?,
        learning_rate: r.or(args.lr, "lr", d.learning_rate)?,
        rng_seed: r.or(args.seed, "seed", d.rng_seed)?,
        negatives,
    };
    config.validate()?;
    Ok(config)
}

fn load_options(no_normalize: bool, lowercase: bool, r: &Resolver) -> CliResult<LoadOptions> {
    let normalize = if no_normalize {
        false
    } else {
        r.or(None, "normalize", true)?
    };
    Ok(LoadOptions {
        normalize,
        lowercase: r.switch(lowercase, "lowercase")?,
    })
}

fn cmd_fit(args: FitArgs, r: &Resolver) -> CliResult<()> {
    let vectors = r.input(args.vectors.clone(), "vectors")?;
    let attract = r.input(args.attract.clone(), "attract")?;
    let repel = match r.opt(args.repel.clone(), "repel")? {
        Some(p) => {
            check_input(&p)?;
            Some(p)
        }
        None => None,
    };
    let out: PathBuf = r.required(args.out.clone(), "out")?;
    let cost_log = match r.opt(args.cost_log.clone(), "cost-log")? {
        Some(p) => p,
        None => {
            let mut s = out.clone().into_os_string();
            s.push(".costs.tsv");
            PathBuf::from(s)
        }
    };
    let config = training_config(&args, r)?;
    let options = load_options(args.no_normalize, args.lowercase, r)?;
    let normalize_output = r.switch(args.normalize_output, "normalize-output")?;

    let store = VectorStore::load_with(&vectors, options)?;
    let lowercase_pairs = |pairs: Vec<(String, String)>| -> Vec<(String, String)> {
        if options.lowercase {
            pairs
                .into_iter()
                .map(|(a, b)| (a.to_lowercase(), b.to_lowercase()))
                .collect()
        } else {
            pairs
        }
    };
    let constraints = ConstraintSet {
        attract: lowercase_pairs(read_pairs(&attract)?),
        repel: match repel {
            Some(p) => lowercase_pairs(read_pairs(&p)?),
            None => Vec::new(),
        },
    };

    let result = fit(&store, &constraints, &config)?;
    let mut fitted = result.store;
    if normalize_output {
        fitted.normalize()?;
    }
    fitted.save(&out)?;
    write_cost_log(&cost_log, &result.costs)?;
    if let Some(last) = result.costs.last() {
        eprintln!(
            "epochs={} final_cost={:.6} dropped={}",
            result.costs.len(),
            last.cost.total(),
            result.dropped
        );
    }
    Ok(())
}

fn cmd_fix(args: FixArgs, r: &Resolver) -> CliResult<()> {
    let vectors = r.input(args.vectors, "vectors")?;
    let attract = r.input(args.attract, "attract")?;
    let freq = r.input(args.freq, "freq")?;
    let out: PathBuf = r.required(args.out, "out")?;
    let options = load_options(args.no_normalize, args.lowercase, r)?;

    let store = VectorStore::load_with(&vectors, options)?;
    let pairs = read_pairs(&attract)?;
    let table = FrequencyTable::load(&freq)?;
    morph_fix(&store, &pairs, &table).save(&out)?;
    Ok(())
}

fn cmd_eval(args: EvalArgs, r: &Resolver) -> CliResult<()> {
    let vectors = r.input(args.vectors, "vectors")?;
    let dataset = r.input(args.dataset, "dataset")?;
    let lowercase = r.switch(args.lowercase, "lowercase")?;
    let store = VectorStore::load_with(
        &vectors,
        LoadOptions {
            normalize: false,
            lowercase,
        },
    )?;
    let data = SimilarityDataset::load(&dataset, lowercase)?;
    let result = evaluate(&store, &data)?;
    println!("{result}");
    Ok(())
}

fn cmd_neighbors(args: NeighborsArgs, r: &Resolver) -> CliResult<()> {
    let vectors = r.input(args.vectors, "vectors")?;
    let word: String = r.required(args.word, "word")?;
    let k = r.or(args.k, "k", 10)?;
    if k == 0 {
        return Err(CliError::usage("-k must be at least 1"));
    }
    let lowercase = r.switch(args.lowercase, "lowercase")?;
    let store = VectorStore::load_with(
        &vectors,
        LoadOptions {
            normalize: false,
            lowercase,
        },
    )?;
    let query = if lowercase { word.to_lowercase() } else { word };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (w, cos) in neighbors(&store, &query, k)? {
        writeln!(out, "{w}\t{cos:.6}").map_err(|e| CliError::from(Error::io("<stdout>", e)))?;
    }
    Ok(())
}

fn cmd_rules(args: RulesArgs, r: &Resolver) -> CliResult<()> {
    let lang: String = r.required(args.lang, "lang")?;
    let rules = RuleSet::builtin(lang.parse::<Language>()?);
    match r.opt::<PathBuf>(args.out, "out")? {
        Some(path) => rules.save(&path)?,
        None => print!("{}", rules.to_text()),
    }
    Ok(())
}

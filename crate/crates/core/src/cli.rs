//! Command-line pipeline: `build-vocab`, `induce-classes`,
//! `extract-features`, `train`, `eval` and `bench`, handing results to each
//! other through files.
//!
//! Every run writes its resolved arguments to `config.json` in its output
//! directory; `classmaxent --config <file>` replays such a run.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classing::{build_hierarchy, default_level_sizes, induce_classes, sweep_class_count, ClassHierarchy};
use crate::corpus::{build_vocabulary, extract_events, tokenize, Event, RawCorpus, Vocabulary, DEFAULT_MAX_VOCAB};
use crate::error::{Error, Result};
use crate::eval::{
    benchmark, fit_alpha, fit_alpha_grid, perplexity, probability_pairs, train_trigram, BenchConfig, Interpolated,
    Method,
};
use crate::factored::{
    train_factored, train_unfactored, FactoredConfig, FactoredModel, FactoredTraining, HIERARCHY_FILE, INDICATOR_FILE,
    VOCAB_FILE,
};
use crate::features::{FeatureSet, DEFAULT_INDICATOR_CLASSES, DEFAULT_MIN_COUNT};
use crate::gis::{GisConfig, Variant, DEFAULT_ITERATIONS, DEFAULT_TOLERANCE};
use crate::synth::{self, SynthConfig};

pub const CONFIG_FILE: &str = "config.json";
pub const FEATURES_FILE: &str = "features.tsv";
pub const SWEEP_FILE: &str = "sweep.tsv";
pub const TRAIN_LOG_FILE: &str = "train_log.tsv";
pub const REPORT_FILE: &str = "report.json";
pub const TOKEN_LOG_FILE: &str = "tokens.tsv";
pub const BENCH_FILE: &str = "bench.tsv";

#[derive(Parser, Debug)]
#[command(name = "classmaxent", version, about = "Train and evaluate class-factored maximum-entropy language models")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    /// Replay a run from a config.json written by an earlier run.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

/// The resolved arguments of one run, as echoed to `config.json`.
#[derive(Subcommand, Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Count words and keep the most frequent ones.
    BuildVocab(BuildVocabArgs),
    /// Induce the indicator class map and the factoring hierarchy.
    InduceClasses(InduceArgs),
    /// Instantiate and dump the feature inventory of the unfactored model.
    ExtractFeatures(FeaturesArgs),
    /// Train a model directory.
    Train(TrainArgs),
    /// Perplexity of a trained model, optionally interpolated with a trigram model.
    Eval(EvalArgs),
    /// Time training iterations of several methods over growing corpus prefixes.
    Bench(BenchArgs),
}

pub type RunConfig = Command;

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Common {
    /// Worker threads.
    #[arg(long, env = "MAXENT_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Seed for class-induction tie breaking and synthetic corpora.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lowercase all text before counting.
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct VocabOptions {
    /// Vocabulary file from `build-vocab` (built from the input when absent).
    #[arg(long, value_name = "FILE")]
    pub vocab: Option<PathBuf>,
    /// Most frequent content words kept when building a vocabulary.
    #[arg(long, default_value_t = DEFAULT_MAX_VOCAB)]
    pub max_vocab: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct IndicatorOptions {
    /// Class map for the history slots of feature templates (level 0 is
    /// used; induced when absent).
    #[arg(long, value_name = "FILE")]
    pub indicator: Option<PathBuf>,
    /// Number of indicator classes to induce.
    #[arg(long, default_value_t = DEFAULT_INDICATOR_CLASSES)]
    pub indicator_classes: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct BuildVocabArgs {
    /// Training corpus, one sentence per line.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Most frequent content words kept.
    #[arg(long, default_value_t = DEFAULT_MAX_VOCAB)]
    pub max_vocab: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct InduceArgs {
    /// Training corpus, one sentence per line.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub vocab: VocabOptions,
    /// Number of indicator classes.
    #[arg(long, default_value_t = DEFAULT_INDICATOR_CLASSES)]
    pub indicator_classes: usize,
    /// Class counts per hierarchy level, coarsest first.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
    pub level_sizes: Option<Vec<usize>>,
    /// Hierarchy depth when no sizes are given (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Pick a one-level class count among these by the cost of one training
    /// iteration.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    /// Minimum count of a feature kept during the sweep.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct FeaturesArgs {
    /// Training corpus, one sentence per line.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub vocab: VocabOptions,
    #[command(flatten)]
    #[serde(flatten)]
    pub indicator: IndicatorOptions,
    /// Minimum training count of a kept feature.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TrainArgs {
    /// Training corpus, one sentence per line.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model directory to write.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Training method: gis, gis-cache, factored2 or factored3.
    #[arg(long, default_value = "factored2")]
    pub method: Method,
    #[command(flatten)]
    #[serde(flatten)]
    pub vocab: VocabOptions,
    #[command(flatten)]
    #[serde(flatten)]
    pub indicator: IndicatorOptions,
    /// Factoring hierarchy from `induce-classes` (induced when absent).
    #[arg(long, value_name = "FILE")]
    pub hierarchy: Option<PathBuf>,
    /// Class counts per hierarchy level when inducing one.
    #[arg(long, value_delimiter = ',')]
    pub level_sizes: Option<Vec<usize>>,
    /// Class map behind the class-conditioned history templates of a
    /// factored model.
    #[arg(long, value_enum, default_value = "indicator")]
    #[serde(default)]
    pub history_classes: HistoryClasses,
    /// Minimum training count of a kept feature.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// Maximum GIS iterations per model level.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Stop once every expectation is within this relative error.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryClasses {
    /// The indicator classes (`--indicator` / `--indicator-classes`).
    #[default]
    Indicator,
    /// The finest class level of the factoring hierarchy.
    Factoring,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaFit {
    /// EM, falling back to the grid optimum when that is better.
    Em,
    /// Best of a 0.05-step grid.
    Grid,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct EvalArgs {
    /// Model directory from `train`.
    #[arg(long, short)]
    pub model: PathBuf,
    /// Test corpus, one sentence per line.
    #[arg(long, short)]
    pub test: PathBuf,
    /// Output directory for the report and the per-token log.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Interpolate with a deleted-interpolation trigram model.
    #[arg(long, requires = "train")]
    pub interpolate: bool,
    /// Corpus the trigram model is counted on.
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Held-out corpus the interpolation weight is fit on.
    #[arg(long, value_name = "FILE")]
    pub heldout: Option<PathBuf>,
    /// Fixed interpolation weight of the maxent model.
    #[arg(long, conflicts_with = "heldout")]
    pub alpha: Option<f64>,
    /// How the interpolation weight is fit on held-out text.
    #[arg(long, value_enum, default_value_t = AlphaFit::Em)]
    pub alpha_fit: AlphaFit,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct BenchArgs {
    /// Corpus whose prefixes are benchmarked.
    #[arg(long, short, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Benchmark a generated corpus of this many tokens instead.
    #[arg(long, value_name = "TOKENS")]
    pub synthetic: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Training sizes in tokens, ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Methods to compare.
    #[arg(long, value_delimiter = ',', default_value = "gis,gis-cache,factored2")]
    pub methods: Vec<Method>,
    /// Most frequent content words kept at each size.
    #[arg(long, default_value_t = DEFAULT_MAX_VOCAB)]
    pub max_vocab: usize,
    /// Minimum training count of a kept feature.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// Number of indicator classes.
    #[arg(long, default_value_t = DEFAULT_INDICATOR_CLASSES)]
    pub indicator_classes: usize,
    /// Class counts per hierarchy level (defaults scale with the vocabulary).
    #[arg(long, value_delimiter = ',')]
    pub level_sizes: Option<Vec<usize>>,
    /// Timed iterations per run.
    #[arg(long, default_value_t = 1)]
    pub iterations: usize,
    /// Runs per method and size.
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::BuildVocab(a) => &a.common,
            Command::InduceClasses(a) => &a.common,
            Command::ExtractFeatures(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Bench(a) => &a.common,
        }
    }

    pub fn output(&self) -> &Path {
        match self {
            Command::BuildVocab(a) => &a.output,
            Command::InduceClasses(a) => &a.output,
            Command::ExtractFeatures(a) => &a.output,
            Command::Train(a) => &a.output,
            Command::Eval(a) => &a.output,
            Command::Bench(a) => &a.output,
        }
    }

    /// Checks that clap cannot express; failures are usage errors.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.common().threads == 0 {
            return Err("--threads must be at least 1".into());
        }
        match self {
            Command::InduceClasses(a) => {
                if a.sweep.is_some() && a.levels != 1 {
                    return Err("--sweep picks a single class level; use --levels 1".into());
                }
                if !(1..=2).contains(&a.levels) {
                    return Err("--levels must be 1 or 2".into());
                }
            }
            Command::Train(a) => {
                let uses_hierarchy =
                    a.hierarchy.is_some() || a.level_sizes.is_some() || a.history_classes == HistoryClasses::Factoring;
                if a.method.class_levels() == 0 && uses_hierarchy {
                    return Err(format!("method {} does not use a class hierarchy", a.method));
                }
                if let Some(s) = &a.level_sizes {
                    if s.len() != a.method.class_levels() {
                        return Err(format!(
                            "method {} needs {} level size(s), got {}",
                            a.method,
                            a.method.class_levels(),
                            s.len()
                        ));
                    }
                }
            }
            Command::Eval(a) => {
                if a.interpolate && a.heldout.is_none() && a.alpha.is_none() {
                    return Err("--interpolate needs --heldout or --alpha".into());
                }
                if let Some(alpha) = a.alpha {
                    if !(0.0..=1.0).contains(&alpha) {
                        return Err("--alpha must lie in [0, 1]".into());
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Parses `argv` (program name first) and runs the command. Returns 0 on
/// success, 2 on usage errors and 1 on runtime errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command = match (cli.config, cli.command) {
        (Some(path), None) => match load_config(&path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: cannot replay {}: {e}", path.display());
                return 2;
            }
        },
        (None, Some(c)) => c,
        _ => {
            eprintln!("error: expected a subcommand or --config <FILE>\n");
            let _ = Cli::command().print_help();
            return 2;
        }
    };
    if let Err(msg) = command.validate() {
        eprintln!("error: {msg}");
        return 2;
    }
    match execute(&command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn load_config(path: &Path) -> Result<Command> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Runs an already validated command on a pool of `threads` workers.
pub fn execute(command: &Command) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(command.common().threads)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| {
        fs::create_dir_all(command.output())?;
        let mut out = BufWriter::new(File::create(command.output().join(CONFIG_FILE))?);
        serde_json::to_writer_pretty(&mut out, command)?;
        writeln!(out)?;
        out.flush()?;
        match command {
            Command::BuildVocab(a) => build_vocab(a),
            Command::InduceClasses(a) => induce(a),
            Command::ExtractFeatures(a) => extract_features(a),
            Command::Train(a) => train(a),
            Command::Eval(a) => evaluate(a),
            Command::Bench(a) => bench(a),
        }
    })
}

fn vocabulary(corpus: &RawCorpus, opts: &VocabOptions) -> Result<Vocabulary> {
    match &opts.vocab {
        Some(p) => Vocabulary::load(p),
        None => build_vocabulary(corpus, opts.max_vocab),
    }
}

fn indicator_map(events: &[Event], vocab: &Vocabulary, opts: &IndicatorOptions, seed: u64) -> Result<Vec<u32>> {
    match &opts.indicator {
        Some(p) => Ok(ClassHierarchy::load(vocab, p)?.level(0).to_vec()),
        None => induce_indicator(events, vocab, opts.indicator_classes, seed),
    }
}

fn induce_indicator(events: &[Event], vocab: &Vocabulary, classes: usize, seed: u64) -> Result<Vec<u32>> {
    Ok(induce_classes(events, vocab.len(), classes.min(vocab.len()), seed)?.level(0).to_vec())
}

fn build_vocab(a: &BuildVocabArgs) -> Result<()> {
    let corpus = RawCorpus::from_path(&a.input, a.common.lowercase)?;
    let vocab = build_vocabulary(&corpus, a.max_vocab)?;
    vocab.save(a.output.join(VOCAB_FILE))?;
    log::info!("kept {} of the corpus's word types", vocab.content_len());
    Ok(())
}

fn induce(a: &InduceArgs) -> Result<()> {
    let corpus = RawCorpus::from_path(&a.input, a.common.lowercase)?;
    let vocab = vocabulary(&corpus, &a.vocab)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    let indicator = induce_indicator(&events, &vocab, a.indicator_classes, a.common.seed)?;
    let sizes = if let Some(candidates) = &a.sweep {
        let cfg = FactoredConfig {
            min_count: a.min_count,
            gis: GisConfig { threads: a.common.threads, ..Default::default() },
        };
        let sweep = sweep_class_count(&events, vocab.len(), candidates, &indicator, &cfg, |c| {
            build_hierarchy(&events, vocab.len(), &[c], a.common.seed)
        })?;
        let mut out = BufWriter::new(File::create(a.output.join(SWEEP_FILE))?);
        writeln!(out, "classes\tops\tops_per_event")?;
        for e in &sweep.table {
            writeln!(out, "{}\t{}\t{:.4}", e.classes, e.ops, e.ops_per_event)?;
        }
        out.flush()?;
        log::info!("sweep picked {} classes", sweep.best);
        vec![sweep.best]
    } else {
        a.level_sizes.clone().unwrap_or_else(|| default_level_sizes(vocab.len(), a.levels))
    };
    let hierarchy = build_hierarchy(&events, vocab.len(), &sizes, a.common.seed)?;
    vocab.save(a.output.join(VOCAB_FILE))?;
    ClassHierarchy::flat(indicator)?.save(&vocab, a.output.join(INDICATOR_FILE))?;
    hierarchy.save(&vocab, a.output.join(HIERARCHY_FILE))?;
    Ok(())
}

fn extract_features(a: &FeaturesArgs) -> Result<()> {
    let corpus = RawCorpus::from_path(&a.input, a.common.lowercase)?;
    let vocab = vocabulary(&corpus, &a.vocab)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    let indicator = indicator_map(&events, &vocab, &a.indicator, a.common.seed)?;
    let features = FeatureSet::instantiate(
        events.iter().map(|e| (e.history, e.target, e.count)),
        indicator.clone(),
        vocab.len(),
        a.min_count,
    )?;
    vocab.save(a.output.join(VOCAB_FILE))?;
    ClassHierarchy::flat(indicator)?.save(&vocab, a.output.join(INDICATOR_FILE))?;
    let mut out = BufWriter::new(File::create(a.output.join(FEATURES_FILE))?);
    features.dump(&mut out)?;
    out.flush()?;
    log::info!("{} features", features.len());
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let corpus = RawCorpus::from_path(&a.input, a.common.lowercase)?;
    let vocab = vocabulary(&corpus, &a.vocab)?;
    let events = extract_events(&tokenize(&corpus, &vocab));
    if events.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let indicator = indicator_map(&events, &vocab, &a.indicator, a.common.seed)?;
    let variant = if a.method == Method::GisCache { Variant::UnigramCached } else { Variant::Plain };
    let cfg = FactoredConfig {
        min_count: a.min_count,
        gis: GisConfig { iterations: a.iterations, tolerance: a.tolerance, threads: a.common.threads, variant },
    };
    let run = match a.method.class_levels() {
        0 => train_unfactored(&events, vocab.len(), &indicator, &cfg)?,
        levels => {
            let hierarchy = match (&a.hierarchy, &a.level_sizes) {
                (Some(p), _) => ClassHierarchy::load(&vocab, p)?,
                (None, sizes) => {
                    let sizes = sizes.clone().unwrap_or_else(|| default_level_sizes(vocab.len(), levels));
                    build_hierarchy(&events, vocab.len(), &sizes, a.common.seed)?
                }
            };
            if hierarchy.num_levels() != levels {
                return Err(Error::invalid(format!(
                    "method {} needs a {levels}-level hierarchy, got {} levels",
                    a.method,
                    hierarchy.num_levels()
                )));
            }
            let history = match a.history_classes {
                HistoryClasses::Indicator => indicator,
                HistoryClasses::Factoring => hierarchy.level(levels - 1).to_vec(),
            };
            train_factored(&events, &hierarchy, &history, &cfg)?
        }
    };
    run.model.save(&a.output, &vocab, a.method.name())?;
    write_train_log(&run, &a.output.join(TRAIN_LOG_FILE))?;
    Ok(())
}

fn write_train_log(run: &FactoredTraining, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "level\titeration\tloglike\tmax_deviation\tops")?;
    for (k, report) in run.reports.iter().enumerate() {
        for l in &report.log {
            writeln!(out, "{k}\t{}\t{:.10e}\t{:.6e}\t{}", l.iteration, l.loglike, l.max_deviation, l.ops)?;
        }
        log::info!("level {k}: {} iterations, converged: {}", report.log.len(), report.converged);
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub tokens: usize,
    pub perplexity: f64,
    pub maxent_perplexity: f64,
    pub trigram_perplexity: Option<f64>,
    pub alpha: Option<f64>,
}

fn evaluate(a: &EvalArgs) -> Result<()> {
    let (vocab, model, method) = FactoredModel::load(&a.model)?;
    let test = tokenize(&RawCorpus::from_path(&a.test, a.common.lowercase)?, &vocab);
    let maxent = perplexity(&model, &test)?;
    let (report, log) = if a.interpolate {
        let train_path = a.train.as_ref().ok_or_else(|| Error::invalid("--interpolate needs --train"))?;
        let train_events = extract_events(&tokenize(&RawCorpus::from_path(train_path, a.common.lowercase)?, &vocab));
        let trigram = train_trigram(&train_events, vocab.len())?;
        let alpha = match (a.alpha, &a.heldout) {
            (Some(alpha), _) => alpha,
            (None, Some(p)) => {
                let held = tokenize(&RawCorpus::from_path(p, a.common.lowercase)?, &vocab);
                let pairs = probability_pairs(&model, &trigram, &held);
                match a.alpha_fit {
                    AlphaFit::Em => fit_alpha(&pairs),
                    AlphaFit::Grid => fit_alpha_grid(&pairs),
                }
            }
            (None, None) => return Err(Error::invalid("--interpolate needs --heldout or --alpha")),
        };
        let tri = perplexity(&trigram, &test)?;
        let mixed = perplexity(&Interpolated { maxent: &model, trigram: &trigram, alpha }, &test)?;
        let report = EvalReport {
            method,
            tokens: mixed.tokens,
            perplexity: mixed.perplexity,
            maxent_perplexity: maxent.perplexity,
            trigram_perplexity: Some(tri.perplexity),
            alpha: Some(alpha),
        };
        (report, mixed)
    } else {
        let report = EvalReport {
            method,
            tokens: maxent.tokens,
            perplexity: maxent.perplexity,
            maxent_perplexity: maxent.perplexity,
            trigram_perplexity: None,
            alpha: None,
        };
        (report, maxent)
    };
    let mut out = BufWriter::new(File::create(a.output.join(TOKEN_LOG_FILE))?);
    log.write_log(&mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(a.output.join(REPORT_FILE))?);
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    println!("perplexity\t{:.6}", report.perplexity);
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let corpus = match (&a.input, a.synthetic) {
        (Some(p), _) => RawCorpus::from_path(p, a.common.lowercase)?,
        (None, Some(tokens)) => synth::generate(&SynthConfig { seed: a.common.seed, ..Default::default() }, tokens),
        (None, None) => return Err(Error::invalid("bench needs --input or --synthetic")),
    };
    let cfg = BenchConfig {
        max_vocab: a.max_vocab,
        min_count: a.min_count,
        indicator_classes: a.indicator_classes,
        iterations: a.iterations,
        repetitions: a.repetitions,
        threads: a.common.threads,
        seed: a.common.seed,
        level_sizes: a.level_sizes.clone(),
    };
    let report = benchmark(&a.methods, &a.sizes, &corpus, &cfg)?;
    let mut out = BufWriter::new(File::create(a.output.join(BENCH_FILE))?);
    report.write_tsv(&mut out)?;
    out.flush()?;
    report.write_tsv(std::io::stdout().lock())?;
    Ok(())
}

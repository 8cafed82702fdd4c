//! Operator entry point: scenario files, batch simulation over seed
//! ranges, parameter sweeps, classifier training and evaluation, corpus
//! synthesis, and the route-availability bound.
//!
//! Every command is deterministic given its seed arguments. Result files
//! are JSON lines (simulation KPIs) or comma-delimited text (sweeps,
//! bounds, corpora); model files are structured text. Relative output
//! paths land in `$CA_PARROT_OUT_DIR` when that variable is set.

use crate::adapt::{
    cross_validate, load_corpus, synthesize_corpus, train_forest, write_corpus, AdaptError,
    CorpusSpec, CrossValReport, ForestHyper, Rep,
};
use crate::channel::ChannelModel;
use crate::sim::{
    prepare_model, route_availability_bound, run_baseline_geo, run_with_model, KPIRecord,
    Scenario, SimError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CA_PARROT_OUT_DIR";

/// Override keys accepted by `--override` and as sweep axes.
pub const OVERRIDE_KEYS: [&str; 23] = [
    "duration_s",
    "node_count",
    "playground.x_m",
    "playground.y_m",
    "playground.z_m",
    "channel.model",
    "mobility.kind",
    "mobility.speed_kmh",
    "radio.tx_power_dbm",
    "radio.sensitivity_dbm",
    "radio.frequency_hz",
    "radio.range_exponent",
    "timers.chirp_interval_s",
    "timers.commit_interval_s",
    "prediction.tau_s",
    "prediction.step_count",
    "params.r_b",
    "params.alpha",
    "params.gamma0",
    "params.lambda",
    "params.omega",
    "adaptation.enabled",
    "adaptation.train_seed",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Adapt(#[from] AdaptError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "ca-parrot",
    version,
    about = "Context-adaptive mesh routing: simulator, sweeps, and REP classifier tooling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario over a seed batch; emits KPI rows plus a summary.
    Simulate(SimulateArgs),
    /// Sweep one scenario or parameter axis over values x seeds.
    Sweep(SweepArgs),
    /// Train the random-forest environment classifier from a corpus.
    Train(TrainArgs),
    /// Cross-validate the forest against the ANN and linear SVM baselines.
    Crossval(CrossvalArgs),
    /// Synthesize a labeled feature corpus from the channel prototypes.
    GenCorpus(GenCorpusArgs),
    /// Report the mobility-constrained route-availability upper bound.
    Bound(BoundArgs),
}

/// Protocol flavor of a batch run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Full protocol with online environment adaptation.
    CaParrot,
    /// Same protocol locked to the scenario's fixed parameter tuple.
    ParrotFixed,
    /// Greedy geographic forwarding on the same medium.
    GeoBaseline,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::CaParrot => "ca-parrot",
            Variant::ParrotFixed => "parrot-fixed",
            Variant::GeoBaseline => "geo-baseline",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Comma list with inclusive ranges, e.g. `1..25` or `1,5,9..12`.
    #[arg(long, default_value = "1..25")]
    pub seeds: String,
    #[arg(long, value_enum, default_value_t = Variant::CaParrot)]
    pub variant: Variant,
    /// Scenario override, `key=value`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// JSON-lines output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Axis to vary; any `--override` key, e.g. `params.r_b`.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    #[arg(long, default_value = "1..25")]
    pub seeds: String,
    #[arg(long, value_enum, default_value_t = Variant::ParrotFixed)]
    pub variant: Variant,
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled corpus (feature rows or raw rss/distance rows).
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 15)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Model file to write (structured text).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    /// Environments to synthesize, by channel prototype name.
    #[arg(long, value_delimiter = ',', default_value = "rural,suburban,urban")]
    pub channels: Vec<String>,
    /// Feature windows per class.
    #[arg(long, default_value_t = 2000)]
    pub windows: usize,
    #[arg(long, default_value_t = 10.0)]
    pub distance_min_m: f64,
    #[arg(long, default_value_t = 500.0)]
    pub distance_max_m: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "1..25")]
    pub seeds: String,
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A fully resolved simulate request.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub scenario: PathBuf,
    pub seeds: Vec<u64>,
    pub variant: Variant,
    pub overrides: Vec<(String, String)>,
    pub out: Option<PathBuf>,
}

impl RunManifest {
    pub fn from_args(args: SimulateArgs) -> Result<Self, CliError> {
        Ok(RunManifest {
            scenario: args.scenario,
            seeds: expand_seeds(&args.seeds)?,
            variant: args.variant,
            overrides: parse_overrides(&args.overrides)?,
            out: args.out,
        })
    }
}

/// Expands a seed expression: comma-separated integers and inclusive
/// `a..b` ranges.
pub fn expand_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let mut seeds = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((a, b)) = token.split_once("..") {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad seed range start {a:?}")))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad seed range end {b:?}")))?;
            if a > b {
                return Err(CliError::Usage(format!("seed range {token} is reversed")));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(
                token
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad seed {token:?}")))?,
            );
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("need at least one seed".to_owned()));
    }
    Ok(seeds)
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, CliError> {
    raw.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
                .ok_or_else(|| CliError::Usage(format!("override {kv:?} is not key=value")))
        })
        .collect()
}

fn parse_as<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("override {key}: cannot parse {value:?} as {what}")))
}

/// Applies one `key=value` override to a parsed scenario. Sweep axes use
/// the same key set.
pub fn apply_override(scenario: &mut Scenario, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "duration_s" => scenario.duration_s = parse_as(key, value, "a number")?,
        "node_count" => scenario.node_count = parse_as(key, value, "an integer")?,
        "playground.x_m" => scenario.playground.x_m = parse_as(key, value, "a number")?,
        "playground.y_m" => scenario.playground.y_m = parse_as(key, value, "a number")?,
        "playground.z_m" => scenario.playground.z_m = parse_as(key, value, "a number")?,
        "channel.model" => {
            scenario.channel = ChannelModel::by_name(value).ok_or_else(|| {
                CliError::Usage(format!(
                    "override channel.model: unknown prototype {value:?}; \
                     choose from rural, suburban, urban"
                ))
            })?;
        }
        "mobility.kind" => {
            scenario.mobility.kind = match value {
                "waypoint" => crate::sim::MobilityKind::Waypoint,
                "static" => crate::sim::MobilityKind::Static,
                _ => {
                    return Err(CliError::Usage(format!(
                        "override mobility.kind: expected waypoint or static, got {value:?}"
                    )))
                }
            };
        }
        "mobility.speed_kmh" => scenario.mobility.speed_kmh = parse_as(key, value, "a number")?,
        "radio.tx_power_dbm" => scenario.radio.tx_power_dbm = parse_as(key, value, "a number")?,
        "radio.sensitivity_dbm" => {
            scenario.radio.sensitivity_dbm = parse_as(key, value, "a number")?
        }
        "radio.frequency_hz" => scenario.radio.frequency_hz = parse_as(key, value, "a number")?,
        "radio.range_exponent" => {
            scenario.radio.range_exponent = parse_as(key, value, "a number")?
        }
        "timers.chirp_interval_s" => {
            scenario.timers.chirp_interval_s = parse_as(key, value, "a number")?
        }
        "timers.commit_interval_s" => {
            scenario.timers.commit_interval_s = parse_as(key, value, "a number")?
        }
        "prediction.tau_s" => scenario.prediction.tau = parse_as(key, value, "a number")?,
        "prediction.step_count" => {
            scenario.prediction.step_count = parse_as(key, value, "an integer")?
        }
        "params.r_b" | "params.range_budget_m" => {
            scenario.params.range_budget_m = parse_as(key, value, "a number")?
        }
        "params.alpha" => scenario.params.alpha = parse_as(key, value, "a number")?,
        "params.gamma0" => scenario.params.gamma0 = parse_as(key, value, "a number")?,
        "params.lambda" => scenario.params.lambda = parse_as(key, value, "an integer")?,
        "params.omega" => scenario.params.omega = parse_as(key, value, "an integer")?,
        "adaptation.enabled" => {
            scenario.adaptation.enabled = parse_as(key, value, "true or false")?
        }
        "adaptation.train_seed" => {
            scenario.adaptation.train_seed = parse_as(key, value, "an integer")?
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown override key {key:?}; valid keys: {}",
                OVERRIDE_KEYS.join(", ")
            )));
        }
    }
    Ok(())
}

/// The variant decides whether adaptation runs, regardless of what the
/// scenario file says.
fn apply_variant(scenario: &mut Scenario, variant: Variant) {
    scenario.adaptation.enabled = variant == Variant::CaParrot;
}

/// Mean, sample standard deviation, and normal-approximation 95%
/// confidence interval of one KPI across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub mean: f64,
    pub std: f64,
    pub ci95: [f64; 2],
}

fn stat(values: &[f64]) -> SummaryStat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let half = 1.96 * std / n.sqrt();
    SummaryStat { mean, std, ci95: [mean - half, mean + half] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub pdr: SummaryStat,
    pub mean_latency_s: SummaryStat,
    pub latency_p50_s: SummaryStat,
    pub latency_p95_s: SummaryStat,
    pub latency_p99_s: SummaryStat,
    pub mean_hop_count: SummaryStat,
    pub packets_sent: SummaryStat,
    pub packets_delivered: SummaryStat,
}

/// Batch statistics over per-run KPI rows. Recomputing this from the
/// emitted rows reproduces the emitted summary exactly.
pub fn summarize(records: &[KPIRecord]) -> Summary {
    let pick = |f: fn(&KPIRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    Summary {
        runs: records.len(),
        pdr: stat(&pick(|r| r.pdr)),
        mean_latency_s: stat(&pick(|r| r.mean_latency_s)),
        latency_p50_s: stat(&pick(|r| r.latency_p50_s)),
        latency_p95_s: stat(&pick(|r| r.latency_p95_s)),
        latency_p99_s: stat(&pick(|r| r.latency_p99_s)),
        mean_hop_count: stat(&pick(|r| r.mean_hop_count)),
        packets_sent: stat(&pick(|r| r.packets_sent as f64)),
        packets_delivered: stat(&pick(|r| r.packets_delivered as f64)),
    }
}

/// One emitted result row: the run's KPIs tagged with the variant.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRow {
    pub variant: String,
    #[serde(flatten)]
    pub kpi: KPIRecord,
}

/// The trailing summary row, distinguishable by its `summary` key.
#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub summary: Summary,
}

fn resolve_out_in(base: Option<PathBuf>, path: &Path) -> PathBuf {
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Resolves an output path against `$CA_PARROT_OUT_DIR`.
pub fn resolve_out(path: &Path) -> PathBuf {
    resolve_out_in(std::env::var_os(OUT_DIR_ENV).map(PathBuf::from), path)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let resolved = resolve_out(path);
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|source| CliError::Io { path: resolved.clone(), source })?;
        }
    }
    std::fs::write(&resolved, text).map_err(|source| CliError::Io { path: resolved.clone(), source })
}

fn emit(out: Option<&Path>, text: &str, note: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_text(path, text)?;
            println!("{note} -> {}", resolve_out(path).display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs every seed of a batch; the classifier (when the variant needs
/// one) is prepared once and shared.
fn run_batch(
    scenario: &Scenario,
    seeds: &[u64],
    variant: Variant,
) -> Result<Vec<KPIRecord>, SimError> {
    scenario.validate()?;
    let model = prepare_model(scenario)?;
    seeds
        .par_iter()
        .map(|&seed| match variant {
            Variant::GeoBaseline => run_baseline_geo(scenario, seed),
            _ => run_with_model(scenario, seed, model.as_deref()),
        })
        .collect()
}

fn load_with_overrides(
    path: &Path,
    overrides: &[(String, String)],
    variant: Option<Variant>,
) -> Result<Scenario, CliError> {
    let mut scenario = Scenario::load(path)?;
    for (key, value) in overrides {
        apply_override(&mut scenario, key, value)?;
    }
    if let Some(v) = variant {
        apply_variant(&mut scenario, v);
    }
    Ok(scenario)
}

pub fn cmd_simulate(manifest: &RunManifest) -> Result<(), CliError> {
    let scenario =
        load_with_overrides(&manifest.scenario, &manifest.overrides, Some(manifest.variant))?;
    let records = run_batch(&scenario, &manifest.seeds, manifest.variant)?;
    let mut text = String::new();
    for record in &records {
        let row = RunRow { variant: manifest.variant.label().to_owned(), kpi: record.clone() };
        text.push_str(&serde_json::to_string(&row)?);
        text.push('\n');
    }
    let summary = summarize(&records);
    text.push_str(&serde_json::to_string(&SummaryRow { summary: summary.clone() })?);
    text.push('\n');
    emit(
        manifest.out.as_deref(),
        &text,
        &format!(
            "{} runs, mean pdr {:.4}, mean latency {:.6} s",
            records.len(),
            summary.pdr.mean,
            summary.mean_latency_s.mean
        ),
    )
}

pub fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let seeds = expand_seeds(&args.seeds)?;
    let overrides = parse_overrides(&args.overrides)?;
    let values: Vec<String> =
        args.values.iter().map(|v| v.trim().to_owned()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one --values entry".to_owned()));
    }
    let base = load_with_overrides(&args.scenario, &overrides, Some(args.variant))?;
    let mut text = String::from("value,seed,pdr,mean_latency_s\n");
    for value in &values {
        let mut scenario = base.clone();
        apply_override(&mut scenario, &args.axis, value)?;
        let records = run_batch(&scenario, &seeds, args.variant)?;
        for record in &records {
            text.push_str(&format!(
                "{value},{},{},{}\n",
                record.seed, record.pdr, record.mean_latency_s
            ));
        }
    }
    emit(
        args.out.as_deref(),
        &text,
        &format!("swept {} over {} values x {} seeds", args.axis, values.len(), seeds.len()),
    )
}

pub fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let rows = load_corpus(&args.corpus)?;
    let hyper = ForestHyper { trees: args.trees, max_depth: args.max_depth };
    let model = train_forest(&rows, hyper, args.seed)?;
    let out = resolve_out(&args.out);
    model.save(&out)?;
    println!("trained {} trees (max depth {}) on {} windows", args.trees, args.max_depth, rows.len());
    match model.oob_accuracy {
        Some(acc) => println!("out-of-bag accuracy {acc:.4}"),
        None => println!("out-of-bag accuracy unavailable (no out-of-bag samples)"),
    }
    println!("model -> {}", out.display());
    Ok(())
}

pub fn cmd_crossval(args: CrossvalArgs) -> Result<CrossValReport, CliError> {
    let rows = load_corpus(&args.corpus)?;
    let report = cross_validate(&rows, args.folds, args.seed)?;
    print!("{}", report.table());
    let (best, accuracy) = report.best();
    println!("best\t{best}\t{accuracy:.4}");
    Ok(report)
}

pub fn cmd_gen_corpus(args: GenCorpusArgs) -> Result<(), CliError> {
    let mut classes = Vec::new();
    for name in &args.channels {
        let name = name.trim();
        let (label, channel) = Rep::from_str(name)
            .ok()
            .zip(ChannelModel::by_name(name))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown channel {name:?}; choose from rural, suburban, urban"
                ))
            })?;
        classes.push((label, channel));
    }
    let spec = CorpusSpec {
        classes,
        windows_per_class: args.windows,
        distance_range_m: (args.distance_min_m, args.distance_max_m),
        ..CorpusSpec::default()
    };
    let rows = synthesize_corpus(&spec, args.seed)?;
    let out = resolve_out(&args.out);
    write_corpus(&out, &rows)?;
    println!("wrote {} labeled windows -> {}", rows.len(), out.display());
    Ok(())
}

pub fn cmd_bound(args: BoundArgs) -> Result<(), CliError> {
    let seeds = expand_seeds(&args.seeds)?;
    let overrides = parse_overrides(&args.overrides)?;
    let scenario = load_with_overrides(&args.scenario, &overrides, None)?;
    scenario.validate()?;
    let bounds: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| route_availability_bound(&scenario, seed))
        .collect::<Result<_, _>>()?;
    let mut text = String::from("seed,bound\n");
    for (seed, bound) in seeds.iter().zip(&bounds) {
        text.push_str(&format!("{seed},{bound}\n"));
    }
    let mean = bounds.iter().sum::<f64>() / bounds.len() as f64;
    emit(args.out.as_deref(), &text, &format!("mean availability bound {mean:.4}"))
}

/// Dispatches one parsed invocation. Callers map `Err` to a nonzero exit.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&RunManifest::from_args(args)?),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Train(args) => cmd_train(args),
        Command::Crossval(args) => cmd_crossval(args).map(|_| ()),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
        Command::Bound(args) => cmd_bound(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges_expand_inclusively() {
        assert_eq!(expand_seeds("1..25").unwrap().len(), 25);
        assert_eq!(expand_seeds("3").unwrap(), vec![3]);
        assert_eq!(expand_seeds("1,4..6,9").unwrap(), vec![1, 4, 5, 6, 9]);
        assert!(expand_seeds("").is_err());
        assert!(expand_seeds("9..2").is_err());
        assert!(expand_seeds("abc").is_err());
    }

    #[test]
    fn override_sets_range_budget_via_both_spellings() {
        let mut sc = Scenario::table1_defaults();
        apply_override(&mut sc, "params.r_b", "-5").unwrap();
        assert_eq!(sc.params.range_budget_m, -5.0);
        apply_override(&mut sc, "params.range_budget_m", "50").unwrap();
        assert_eq!(sc.params.range_budget_m, 50.0);
    }

    #[test]
    fn unknown_override_lists_valid_keys() {
        let mut sc = Scenario::table1_defaults();
        let err = apply_override(&mut sc, "params.bogus", "1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("params.bogus"), "{msg}");
        assert!(msg.contains("params.r_b"), "{msg}");
        assert!(msg.contains("duration_s"), "{msg}");
    }

    #[test]
    fn override_switches_channel_prototype() {
        let mut sc = Scenario::table1_defaults();
        apply_override(&mut sc, "channel.model", "urban").unwrap();
        assert!(matches!(sc.channel, ChannelModel::Nakagami { .. }));
        assert!(apply_override(&mut sc, "channel.model", "desert").is_err());
    }

    #[test]
    fn variant_controls_adaptation_flag() {
        let mut sc = Scenario::table1_defaults();
        apply_variant(&mut sc, Variant::CaParrot);
        assert!(sc.adaptation.enabled);
        apply_variant(&mut sc, Variant::ParrotFixed);
        assert!(!sc.adaptation.enabled);
        assert_eq!(Variant::GeoBaseline.label(), "geo-baseline");
    }

    #[test]
    fn summary_stats_match_hand_computation() {
        let mut records = Vec::new();
        for (seed, pdr) in [(1u64, 0.5), (2, 0.7), (3, 0.9)] {
            let mut r = blank_record();
            r.seed = seed;
            r.pdr = pdr;
            records.push(r);
        }
        let s = summarize(&records);
        assert_eq!(s.runs, 3);
        assert!((s.pdr.mean - 0.7).abs() < 1e-12);
        assert!((s.pdr.std - 0.2).abs() < 1e-12);
        let half = 1.96 * s.pdr.std / 3f64.sqrt();
        assert!((s.pdr.ci95[0] - (s.pdr.mean - half)).abs() < 1e-15);
        assert!((s.pdr.ci95[1] - (s.pdr.mean + half)).abs() < 1e-15);
        // a single run has zero spread and a collapsed interval
        let one = summarize(&records[..1]);
        assert_eq!(one.pdr.std, 0.0);
        assert_eq!(one.pdr.ci95, [0.5, 0.5]);
    }

    #[test]
    fn summary_recomputed_from_serialized_rows_is_identical() {
        let mut records = Vec::new();
        for seed in 0..5 {
            let mut r = blank_record();
            r.seed = seed;
            r.pdr = 1.0 / (seed as f64 + 3.0);
            r.mean_latency_s = 0.001 * (seed as f64 + 1.0) / 7.0;
            records.push(r);
        }
        let emitted = summarize(&records);
        let mut parsed = Vec::new();
        for r in &records {
            let row = RunRow { variant: "ca-parrot".to_owned(), kpi: r.clone() };
            let json = serde_json::to_string(&row).unwrap();
            let back: RunRow = serde_json::from_str(&json).unwrap();
            parsed.push(back.kpi);
        }
        assert_eq!(summarize(&parsed), emitted);
    }

    #[test]
    fn out_dir_env_applies_to_relative_paths_only() {
        let base = Some(PathBuf::from("/results"));
        assert_eq!(
            resolve_out_in(base.clone(), Path::new("kpi.jsonl")),
            PathBuf::from("/results/kpi.jsonl")
        );
        assert_eq!(
            resolve_out_in(base, Path::new("/tmp/kpi.jsonl")),
            PathBuf::from("/tmp/kpi.jsonl")
        );
        assert_eq!(resolve_out_in(None, Path::new("kpi.jsonl")), PathBuf::from("kpi.jsonl"));
    }

    #[test]
    fn cli_parses_the_documented_invocation() {
        let cli = Cli::try_parse_from([
            "ca-parrot", "simulate", "--scenario", "rural.toml", "--seeds", "1..25",
            "--variant", "ca-parrot", "--override", "params.r_b=-5", "--out", "kpi.jsonl",
        ])
        .unwrap();
        let Command::Simulate(args) = cli.command else {
            panic!("expected simulate");
        };
        let manifest = RunManifest::from_args(args).unwrap();
        assert_eq!(manifest.seeds.len(), 25);
        assert_eq!(manifest.variant, Variant::CaParrot);
        assert_eq!(manifest.overrides, vec![("params.r_b".to_owned(), "-5".to_owned())]);
    }

    fn blank_record() -> KPIRecord {
        KPIRecord {
            scenario: "test".to_owned(),
            seed: 0,
            pdr: 0.0,
            mean_latency_s: 0.0,
            latency_p50_s: 0.0,
            latency_p95_s: 0.0,
            latency_p99_s: 0.0,
            packets_sent: 0,
            packets_delivered: 0,
            packets_dropped: 0,
            packets_in_flight: 0,
            drops_no_route: 0,
            drops_link: 0,
            drops_ttl: 0,
            mean_hop_count: 0.0,
            classification_trace: Vec::new(),
        }
    }
}

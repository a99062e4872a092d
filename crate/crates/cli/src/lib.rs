//! `feint` command-line front end.
//!
//! Each subcommand writes its tables into an output directory together with
//! a `manifest.json` naming the inputs (with SHA-256 digests), the effective
//! configuration, the seed and the tool version. Numbers in CSV and JSON
//! outputs use the shortest decimal that parses back to the same `f64`.
//!
//! Exit codes: 0 success, 2 validation error, 3 infeasible configuration,
//! 4 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use feint_core::{
    combination_matrix_with, enumerate_combinations, enumerate_feints, solve_maximin, sweep_csv_string,
    sweep_feint_length, ActionSet64, ActionSpec64, Alignment, DualActionProbe, EnumerationConfig, Error, FeintAction64,
    Result, Scenario, ScenarioConfig, ScenarioKind, DEFAULT_PALINDROME_EPS, STANCE_NEUTRAL, SYNTHETIC_FEINT_ID,
};
use serde_json::json;

mod manifest;

use manifest::{io_error, OutputDir};
pub use manifest::{InputFile, RunManifest, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(
    name = "feint",
    version,
    about = "Feint generation, combination games and combat simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract feints from every attack with frame data.
    GenFeints(GenFeintsArgs),
    /// Enumerate combinations, build the reward matrix and solve for the maximin policy.
    Solve(SolveArgs),
    /// Run seeded episodes of a two-NPC scenario.
    Simulate(SimulateArgs),
    /// Classify feint durations and measure the score delta of the dual-action matchup.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenFeintsArgs {
    /// Action-set JSON file.
    #[arg(long)]
    pub actions: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub min_duration: f64,
    /// Defaults to no upper bound.
    #[arg(long)]
    pub max_duration: Option<f64>,
    /// Pose distance under which two frames count as identical.
    #[arg(long, default_value_t = DEFAULT_PALINDROME_EPS)]
    pub eps: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub actions: PathBuf,
    #[arg(long, default_value_t = 5.5)]
    pub lookahead: f64,
    /// Feints allowed per combination; 0 disables feints.
    #[arg(long, default_value_t = 0)]
    pub max_feints: usize,
    /// Length of the synthetic feint added when the set has none.
    #[arg(long, default_value_t = 0.5)]
    pub feint_duration: f64,
    #[arg(long, default_value = "units")]
    pub alignment: Alignment,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Required when no config is given.
    #[arg(long)]
    pub scenario: Option<ScenarioKind>,
    /// Overrides the config's action set.
    #[arg(long)]
    pub actions: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub episodes: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lookahead: Option<f64>,
    #[arg(long)]
    pub feint_duration: Option<f64>,
    #[arg(long)]
    pub max_feints: Option<usize>,
    #[arg(long)]
    pub alignment: Option<Alignment>,
    #[arg(long)]
    pub episode_length: Option<f64>,
    #[arg(long)]
    pub knockdown_recovery: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub actions: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 3.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 200)]
    pub episodes: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub episode_length: Option<f64>,
    #[arg(long)]
    pub knockdown_recovery: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => 3,
        Error::Io { .. } => 4,
        Error::Parse(_)
        | Error::Validation { .. }
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite(_) => 2,
    }
}

/// Runs one subcommand and returns its manifest.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    match &cli.command {
        Command::GenFeints(a) => gen_feints(a),
        Command::Solve(a) => solve(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub fn gen_feints(args: &GenFeintsArgs) -> Result<RunManifest> {
    let set = ActionSet64::load(&args.actions)?;
    let max = args.max_duration.unwrap_or(f64::INFINITY);
    let mut feints: Vec<FeintAction64> = Vec::new();
    for attack in set.attacks() {
        if attack.frames.is_none() || attack.stages.is_none() {
            return Err(Error::Validation {
                action: Some(attack.id.clone()),
                message: "frame data required for feint generation".to_owned(),
            });
        }
        feints.extend(enumerate_feints(attack, args.min_duration, max, args.eps)?);
    }
    let specs: Vec<ActionSpec64> = feints.iter().map(|f| f.spec.clone()).collect();

    let config = json!({
        "min_duration": args.min_duration,
        "max_duration": args.max_duration,
        "eps": args.eps,
    });
    let mut manifest = RunManifest::new("gen-feints", config);
    manifest.add_input(&args.actions)?;
    let mut out = OutputDir::create(&args.out, manifest)?;
    out.write(
        "feints.json",
        &feint_core::actions_to_json(set.joint_dimension(), &specs),
    )?;
    println!("{} feints from {} attacks", specs.len(), set.attacks().count());
    out.finish()
}

/// Adds a synthetic feint when feints are requested and the set has none.
fn with_feint(set: ActionSet64, max_feints: usize, duration: f64) -> Result<ActionSet64> {
    if max_feints == 0 || set.feints().next().is_some() {
        return Ok(set);
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(invalid("feint duration must be positive when feints are allowed"));
    }
    let stance = set
        .attacks()
        .next()
        .map_or(STANCE_NEUTRAL, |a| a.stance_start.as_str())
        .to_owned();
    set.with_action(ActionSpec64::synthetic_feint(SYNTHETIC_FEINT_ID, duration, &stance))
}

pub fn solve(args: &SolveArgs) -> Result<RunManifest> {
    if !(args.lookahead > 0.0) || !args.lookahead.is_finite() {
        return Err(invalid("lookahead must be positive"));
    }
    let set = with_feint(ActionSet64::load(&args.actions)?, args.max_feints, args.feint_duration)?;
    let mut cfg = EnumerationConfig::new(args.lookahead);
    if args.max_feints > 0 {
        cfg = cfg.with_feints(args.max_feints);
    }
    let combos = enumerate_combinations(&set, &cfg);
    let matrix = combination_matrix_with(&combos, &combos, args.alignment)?;
    let solution = solve_maximin(&matrix)?;

    let mut listing = String::from("index,combination,total_time,feints\n");
    for (i, c) in combos.iter().enumerate() {
        listing.push_str(&format!("{i},{},{},{}\n", c.label(), c.total_time, c.feint_count()));
    }

    let config = json!({
        "lookahead": args.lookahead,
        "max_feints": args.max_feints,
        "feint_duration": args.feint_duration,
        "alignment": args.alignment,
    });
    let mut manifest = RunManifest::new("solve", config);
    manifest.add_input(&args.actions)?;
    let mut out = OutputDir::create(&args.out, manifest)?;
    out.write("combinations.csv", &listing)?;
    out.write("matrix.csv", &matrix.to_csv_string())?;
    out.write("policy.csv", &solution.agent_policy.to_csv_string())?;
    out.write("opponent_policy.csv", &solution.opponent_policy.to_csv_string())?;
    out.write("value.txt", &format!("{}\n", solution.value))?;
    println!("{} combinations, value {}", combos.len(), solution.value);
    out.finish()
}

/// Reads a scenario config and resolves its action-set path against the
/// config file's directory.
fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut cfg = ScenarioConfig::from_json_str(&text)?;
    if let Some(rel) = cfg.action_set.take() {
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.action_set = Some(if rel.is_absolute() { rel } else { base.join(rel) });
    }
    Ok(cfg)
}

fn action_set_path(cfg: &ScenarioConfig) -> Result<PathBuf> {
    cfg.action_set
        .clone()
        .ok_or_else(|| invalid("no action set given: pass --actions or set action_set in the config"))
}

fn start_manifest(
    command: &str,
    config_path: Option<&Path>,
    cfg: &ScenarioConfig,
    extra: serde_json::Value,
) -> Result<RunManifest> {
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    if let (Some(map), serde_json::Value::Object(extra)) = (config.as_object_mut(), extra) {
        map.extend(extra);
    }
    let mut manifest = RunManifest::new(command, config);
    manifest.seed = Some(cfg.seed);
    if let Some(p) = config_path {
        manifest.add_input(p)?;
    }
    manifest.add_input(&action_set_path(cfg)?)?;
    Ok(manifest)
}

/// The effective scenario config: defaults, then the config file, then flags.
pub fn simulate_config(args: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.config, args.scenario) {
        (Some(path), _) => load_config(path)?,
        (None, Some(kind)) => ScenarioConfig::new(kind),
        (None, None) => return Err(invalid("pass --config or --scenario")),
    };
    if let Some(kind) = args.scenario {
        cfg.scenario = kind;
    }
    if let Some(p) = &args.actions {
        cfg.action_set = Some(p.clone());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(v) = args.lookahead {
        cfg.lookahead = v;
    }
    if let Some(v) = args.feint_duration {
        cfg.feint_duration = v;
    }
    if let Some(v) = args.max_feints {
        cfg.max_feints = v;
    }
    if let Some(v) = args.alignment {
        cfg.alignment = v;
    }
    if let Some(v) = args.episode_length {
        cfg.episode_length = v;
    }
    if let Some(v) = args.knockdown_recovery {
        cfg.knockdown_recovery = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<RunManifest> {
    if args.episodes == 0 {
        return Err(invalid("--episodes must be at least 1"));
    }
    let cfg = simulate_config(args)?;
    let set = ActionSet64::load(action_set_path(&cfg)?)?;
    let scenario = Scenario::new(&cfg, &set)?;
    let logs = scenario.episodes(args.episodes);
    let stats = feint_core::SummaryStats::from_logs(&logs)?;

    let manifest = start_manifest(
        "simulate",
        args.config.as_deref(),
        &cfg,
        json!({ "episodes": args.episodes }),
    )?;
    let mut out = OutputDir::create(&args.out, manifest)?;
    let log_dir = args.out.join("episodes");
    std::fs::create_dir_all(&log_dir).map_err(|e| io_error(&log_dir, e))?;
    let width = (args.episodes - 1).to_string().len();
    for log in &logs {
        out.write(&format!("episodes/{:0width$}.jsonl", log.episode), &log.to_jsonl())?;
    }
    out.write("summary.csv", &stats.to_csv_string())?;
    out.write("choices.csv", &stats.choices_csv_string())?;
    out.write("policy_a.csv", &scenario.solution().agent_policy.to_csv_string())?;
    out.write("policy_b.csv", &scenario.solution().opponent_policy.to_csv_string())?;
    println!(
        "{}: {} episodes, mean A {}, mean B {}, mean delta {} (se {})",
        cfg.scenario,
        args.episodes,
        stats.mean_a,
        stats.mean_b,
        stats.mean_delta(),
        stats.delta_std_error()
    );
    out.finish()
}

/// `from, from + step, …` up to `to`, rounded to 12 decimals so that
/// decimal steps print cleanly.
pub fn duration_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from >= 0.0) || !(to >= from) || !to.is_finite() {
        return Err(invalid("durations must satisfy 0 ≤ from ≤ to"));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid("step must be positive"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((from + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn sweep(args: &SweepArgs) -> Result<RunManifest> {
    if args.episodes == 0 {
        return Err(invalid("--episodes must be at least 1"));
    }
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::new(ScenarioKind::FeintVsBasic),
    };
    if let Some(p) = &args.actions {
        cfg.action_set = Some(p.clone());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(v) = args.episode_length {
        cfg.episode_length = v;
    }
    if let Some(v) = args.knockdown_recovery {
        cfg.knockdown_recovery = v;
    }
    cfg.validate()?;
    let durations = duration_grid(args.from, args.to, args.step)?;
    let set = ActionSet64::load(action_set_path(&cfg)?)?;
    let probe = DualActionProbe::canonical(&set)?;
    let rows = sweep_feint_length(&cfg, &probe, &durations, args.episodes)?;

    let extra = json!({ "from": args.from, "to": args.to, "step": args.step, "episodes": args.episodes });
    let manifest = start_manifest("sweep", args.config.as_deref(), &cfg, extra)?;
    let mut out = OutputDir::create(&args.out, manifest)?;
    out.write("sweep.csv", &sweep_csv_string(&rows))?;
    println!("{} durations swept", rows.len());
    out.finish()
}

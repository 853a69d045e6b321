//! Command-line front end for the cart-pole scenarios.
//!
//! Subcommands: `list`, `run`, `metrics`, `sweep`, `tune`. Exit codes are in
//! [`error::exit`].

pub mod config;
pub mod error;
pub mod report;
pub mod sweep;
pub mod trace;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use cartpole_core::catalog;
use cartpole_core::control::CascadeConfig;
use cartpole_core::metrics::MetricsConfig;
use cartpole_core::scenario::{run_scenario, Controller, Outcome, Scenario};
use cartpole_core::tune::{gain_search, GainBounds, SearchOutcome};
use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig, SpecDef};
use error::{exit, CliError};
use report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "cartpole",
    version,
    about = "Cart-pole control scenarios: simulate, measure, sweep and tune"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in scenarios.
    List,
    /// Run one scenario, write its trace and print a report.
    Run(RunArgs),
    /// Recompute the report from a trace file.
    Metrics(MetricsArgs),
    /// Run a scenario once per value of one numeric field.
    Sweep(SweepArgs),
    /// Search cascade gains against a tuning spec.
    Tune(TuneArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in scenario name (S1..S6).
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    /// TOML run config (named or inline scenario).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Source {
    fn run_config(&self, positional: Option<&str>) -> Result<RunConfig, CliError> {
        match (positional.or(self.scenario.as_deref()), &self.config) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give a scenario name or --config, not both".into(),
            )),
            (Some(name), None) => Ok(RunConfig {
                scenario: Some(name.to_string()),
                ..RunConfig::default()
            }),
            (None, Some(path)) => RunConfig::load(path),
            (None, None) => Err(CliError::Config(
                "no scenario: pass a name, --scenario or --config".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Noise seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Integration step override, s; must divide the controller period.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Trace format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in scenario name (same as --scenario).
    pub name: Option<String>,
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Trace output path [default: <scenario>.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tuning spec to check the run against.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Trace file (CSV or TSV in the exported schema).
    pub trace: PathBuf,
    /// Takes reference, track and name from this scenario.
    #[command(flatten)]
    pub source: Source,
    /// Final cart reference, m.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Settling band as a fraction of the reference.
    #[arg(long, default_value_t = 0.02)]
    pub band: f64,
    /// Force magnitude counted as saturated, N.
    #[arg(long, default_value_t = catalog::FORCE_LIMIT)]
    pub force_limit: f64,
    /// Track half length, m.
    #[arg(long)]
    pub track: Option<f64>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter path, e.g. `reference` or `plant.pendulum_mass`.
    pub param: String,
    /// Values to run; `reference` on S2 defaults to the four-command family.
    #[arg(allow_negative_numbers = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Directory for per-run traces; none are written without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Tuning spec (TOML); defaults apply when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Start from the reference simulation gains instead of the scenario's.
    #[arg(long)]
    pub from_reference: bool,
    /// Where to write the tuned run config [default: <scenario>-tuned.toml].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, writing to `out`/`err`.
/// Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return exit::CONFIG;
            }
            let _ = write!(out, "{}", e.render());
            return exit::OK;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    match command {
        Command::List => cmd_list(out),
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Metrics(a) => cmd_metrics(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Tune(a) => cmd_tune(&a, out, err),
    }
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn outcome_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Settled | Outcome::NotSettled => exit::OK,
        Outcome::FellOver { .. } => exit::FELL_OVER,
        Outcome::TrackExceeded { .. } => exit::TRACK_EXCEEDED,
    }
}

fn apply_overrides(mut cfg: RunConfig, o: &Overrides) -> RunConfig {
    cfg.seed = o.seed.or(cfg.seed);
    cfg.dt = o.dt.or(cfg.dt);
    cfg.format = o.format.or(cfg.format);
    cfg
}

fn load_spec(path: Option<&Path>) -> Result<SpecDef, CliError> {
    path.map_or_else(|| Ok(SpecDef::default()), SpecDef::load)
}

pub fn cmd_list(out: &mut dyn Write) -> Result<u8, CliError> {
    for e in catalog::ENTRIES {
        writeln!(out, "{:<4}{:<11}{}", e.name, e.figure, e.description).map_err(stdout_error)?;
    }
    Ok(exit::OK)
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = apply_overrides(a.source.run_config(a.name.as_deref())?, &a.overrides);
    let sc = cfg.scenario()?;
    let spec = a
        .spec
        .as_deref()
        .map(SpecDef::load)
        .transpose()?
        .map(|s| s.tuning());
    let format = cfg.format.unwrap_or_default();
    let path = a
        .out
        .clone()
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", sc.name, format.extension())));

    let run = run_scenario(&sc)?;
    trace::save_trace(&run.series, &path, format)?;
    let report = Report::new(
        sc.name.clone(),
        &run.series,
        &sc.metrics_config(),
        Some(run.outcome),
        spec.as_ref(),
    )?;
    write!(out, "{report}").map_err(stdout_error)?;
    let _ = writeln!(err, "wrote {} ({} rows)", path.display(), run.series.len());
    Ok(outcome_code(&run.outcome))
}

pub fn cmd_metrics(a: &MetricsArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let from_scenario = if a.source.scenario.is_some() || a.source.config.is_some() {
        Some(a.source.run_config(None)?.scenario()?)
    } else {
        None
    };
    let (name, mut cfg) = match (&from_scenario, a.reference) {
        (Some(sc), _) => (sc.name.clone(), sc.metrics_config()),
        (None, Some(r)) => (a.trace.display().to_string(), MetricsConfig::new(r)),
        (None, None) => {
            return Err(CliError::Config(
                "metrics needs --reference, --scenario or --config".into(),
            ))
        }
    };
    if let Some(r) = a.reference {
        cfg.reference = r;
    }
    cfg.band = a.band;
    cfg.force_limit = a.force_limit;
    if a.track.is_some() {
        cfg.track_half_length = a.track;
    }
    if !(cfg.band > 0.0 && cfg.reference.is_finite()) {
        return Err(CliError::Config(
            "band must be positive and the reference finite".into(),
        ));
    }
    let spec = a
        .spec
        .as_deref()
        .map(SpecDef::load)
        .transpose()?
        .map(|s| s.tuning());
    let series = trace::load_trace(&a.trace)?;
    let report = Report::new(name, &series, &cfg, None, spec.as_ref())?;
    write!(out, "{report}").map_err(stdout_error)?;
    Ok(exit::OK)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = apply_overrides(a.source.run_config(None)?, &a.overrides);
    let base = cfg.scenario()?;
    let values =
        if a.values.is_empty() && a.param == "reference" && base.name.eq_ignore_ascii_case("S2") {
            catalog::S2_COMMANDS.to_vec()
        } else {
            a.values.clone()
        };
    let rows = sweep::sweep(&base, &a.param, &values)?;

    let format = cfg.format.unwrap_or_default();
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for row in &rows {
            let path = dir.join(format!(
                "{}_{}_{}.{}",
                base.name,
                a.param,
                row.value,
                format.extension()
            ));
            trace::save_trace(&row.run.series, &path, format)?;
            let _ = writeln!(err, "wrote {}", path.display());
        }
    }

    let w = |e| stdout_error(e);
    let width = a.param.len().max(12) + 2;
    writeln!(
        out,
        "{:<width$}{:<28}{:>12}{:>14}{:>14}{:>14}{:>12}",
        a.param, "outcome", "max_abs_x", "overshoot_pct", "settling_s", "peak_angle", "peak_force"
    )
    .map_err(w)?;
    for row in &rows {
        let m = &row.metrics;
        writeln!(
            out,
            "{:<width$}{:<28}{:>12.6}{:>14}{:>14}{:>14.4}{:>12.4}",
            row.value,
            row.run.outcome.to_string(),
            m.max_abs_x,
            fmt_opt(m.percent_overshoot),
            fmt_opt(m.settling_time),
            m.peak_angle_deg,
            m.peak_abs_force
        )
        .map_err(w)?;
    }
    Ok(exit::OK)
}

pub fn cmd_tune(a: &TuneArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let spec_def = load_spec(a.spec.as_deref())?;
    let spec = spec_def.tuning();
    let cfg = apply_overrides(a.source.run_config(None)?, &a.overrides);
    let mut base = cfg.scenario()?;
    let start: CascadeConfig = if a.from_reference {
        catalog::reference_cascade()
    } else {
        match base.controller {
            Controller::Cascade(c) => c,
            _ => {
                return Err(CliError::Config(format!(
                    "{} does not use the cascade PID controller",
                    base.name
                )))
            }
        }
    };
    base.controller = Controller::Cascade(start);
    let result = gain_search(
        &spec,
        &GainBounds::around(&start, spec_def.bounds_fraction),
        &base,
    )?;

    let best = result.best();
    let tuned = Scenario {
        controller: Controller::Cascade(best.config),
        ..base.clone()
    };
    let run = run_scenario(&tuned)?;
    let report = Report::new(
        tuned.name.clone(),
        &run.series,
        &tuned.metrics_config(),
        Some(run.outcome),
        Some(&spec),
    )?;
    write!(out, "{report}").map_err(stdout_error)?;
    writeln!(out, "evaluations         {}", result.evaluations()).map_err(stdout_error)?;

    match result {
        SearchOutcome::Found { .. } => {
            let path = a
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}-tuned.toml", base.name)));
            let gains = RunConfig {
                inline: Some((&tuned).into()),
                ..RunConfig::default()
            };
            std::fs::write(&path, gains.to_toml()).map_err(|e| CliError::io(&path, e))?;
            let _ = writeln!(err, "wrote {}", path.display());
            Ok(exit::OK)
        }
        SearchOutcome::Failed { .. } => {
            let _ = writeln!(
                err,
                "search failed: no gains met the spec within {} evaluations",
                spec.budget
            );
            Ok(exit::SEARCH_FAILED)
        }
    }
}

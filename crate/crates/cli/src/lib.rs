//! Command-line front end for the energy-recycling MISO simulator.
//!
//! Every subcommand reads an optional TOML config, applies flag overrides on
//! top and writes one CSV table whose first line is `# config: ...` with the
//! fully resolved configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod range;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use recyc_miso::{
    antenna_penalty, avg_active_sweep, schedule_exhaustive, schedule_fast, sweep_harvest_cap, sweep_m,
    verify_harvest_identity, ChannelSample, Schedule, SchedulerLimits, SweepResult,
};

use config::{Cap, ConfigError, CouplingSection, RawConfig, Resolved};
use output::{render_csv, Cell, Table};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "RECYC_MISO_THREADS";

pub const SWEEP_HEADER: [&str; 7] = [
    "m",
    "rate_ryc_bits",
    "rate_noryc_bits",
    "stderr_ryc",
    "stderr_noryc",
    "avg_active",
    "gain_pct",
];
pub const CAP_HEADER: [&str; 7] = [
    "cap",
    "rate_ryc_bits",
    "rate_noryc_bits",
    "stderr_ryc",
    "stderr_noryc",
    "avg_active",
    "gain_pct",
];
pub const ACTIVE_HEADER: [&str; 3] = ["m", "avg_active", "avg_harvesting"];
pub const PENALTY_HEADER: [&str; 2] = ["m", "penalty"];
pub const AUDIT_HEADER: [&str; 9] = [
    "n_samples",
    "analytic_harvest",
    "simulated_harvest",
    "cross_term",
    "noise_harvest",
    "stderr_difference",
    "stderr_cross",
    "consumed_power",
    "budget",
];
pub const SCHEDULE_HEADER: [&str; 4] = ["scheduler", "active", "f", "g"];

#[derive(Debug, Parser)]
#[command(name = "recyc-miso", version, about = "Energy-recycling MISO rate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rates of both transmitters over a range of antenna counts.
    RateSweep(Common),
    /// Rates over a range of harvester caps at a fixed antenna count.
    CapSweep(CapArgs),
    /// Mean number of transmitting and harvesting antennas per antenna count.
    ActiveSweep(Common),
    /// Antennas the recycling transmitter saves at each antenna count.
    Penalty(Common),
    /// Monte Carlo check of the harvested-energy accounting.
    Audit(Common),
    /// Schedules a single channel with both schedulers.
    ScheduleOnce(ScheduleArgs),
    /// Resolves and checks the configuration without computing.
    ValidateConfig(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML configuration file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub dry_run: bool,
    /// Antenna count, or a list/range such as `5..25` for sweeps.
    #[arg(long)]
    pub m: Option<String>,
    /// Maximum number of simultaneously harvesting antennas, or `none`.
    #[arg(long)]
    pub cap: Option<Cap>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Uniform coupling in dB (must be negative).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "alpha")]
    pub alpha_db: Option<f64>,
    /// Uniform linear coupling in [0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mean_gain_db: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `fast` or `exhaustive`.
    #[arg(long)]
    pub scheduler: Option<String>,
    /// CSV coupling matrix (linear ratios, zero diagonal).
    #[arg(long)]
    pub coupling_file: Option<PathBuf>,
    /// `hex` or `ula`; selects geometric coupling.
    #[arg(long)]
    pub layout: Option<String>,
    /// Element spacing in wavelengths.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_ref_db: Option<f64>,
    #[arg(long)]
    pub d_ref: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Use a constant-modulus data symbol in the audit.
    #[arg(long)]
    pub deterministic_symbol: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CapArgs {
    #[command(flatten)]
    pub common: Common,
    /// Cap values, for example `0..10`.
    #[arg(long)]
    pub caps: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Channel power gains, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub h: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl From<recyc_miso::Error> for CliError {
    fn from(e: recyc_miso::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// How the `--m` flag is read by a subcommand.
#[derive(Clone, Copy, PartialEq)]
enum MFlag {
    Sweep,
    Single,
}

fn overrides(c: &Common, m_flag: MFlag) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig {
        max_harvesters: c.cap,
        snr_db: c.snr_db,
        mean_gain_db: c.mean_gain_db,
        n_samples: c.n_samples,
        seed: c.seed,
        scheduler: c.scheduler.clone(),
        deterministic_symbol: c.deterministic_symbol.then_some(true),
        coupling: CouplingSection {
            alpha_db: c.alpha_db,
            alpha: c.alpha,
            file: c.coupling_file.clone(),
            layout: c.layout.clone(),
            spacing: c.spacing,
            alpha_ref_db: c.alpha_ref_db,
            d_ref: c.d_ref,
            exponent: c.exponent,
            ..Default::default()
        },
        ..Default::default()
    };
    if c.alpha_db.is_some() || c.alpha.is_some() {
        raw.coupling.kind = Some("scalar".into());
    } else if c.coupling_file.is_some() {
        raw.coupling.kind = Some("matrix".into());
    } else if c.layout.is_some() {
        raw.coupling.kind = Some("geometry".into());
    }
    if let Some(m) = &c.m {
        match m_flag {
            MFlag::Sweep => raw.m_values = Some(m.clone()),
            MFlag::Single => {
                let m = m
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::new("m", format!("expected a single antenna count, got `{m}`")))?;
                raw.m = Some(m);
            }
        }
    }
    Ok(raw)
}

fn load(c: &Common, m_flag: MFlag) -> Result<RawConfig, ConfigError> {
    let mut raw = match &c.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    raw.overlay(&overrides(c, m_flag)?);
    Ok(raw)
}

fn sweep_table(header: [&'static str; 7], result: &SweepResult) -> Table {
    let mut t = Table::new(&header);
    for r in &result.rows {
        t.push(vec![
            r.x.into(),
            r.rate_ryc.into(),
            r.rate_noryc.into(),
            r.std_err_ryc.into(),
            r.std_err_noryc.into(),
            r.avg_active.into(),
            r.gain_pct.into(),
        ]);
    }
    t
}

fn schedule_row(name: &str, s: &Schedule) -> Vec<Cell> {
    let active = s
        .active()
        .iter()
        .map(|k| (k + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ");
    vec![name.into(), active.into(), s.f().into(), s.g().into()]
}

fn thread_count() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(ConfigError::new(
                THREADS_ENV,
                format!("expected a positive integer, got `{v}`"),
            )),
        },
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Output of one subcommand: the resolved configuration plus a table, or
/// only the configuration for dry runs.
struct Outcome {
    config_line: String,
    table: Option<Table>,
}

fn run_experiment(
    resolved: &Resolved,
    dry_run: bool,
    threads: Option<usize>,
    compute: impl FnOnce(&Resolved) -> Result<Table, CliError> + Send,
) -> Result<Outcome, CliError> {
    let config_line = resolved.canonical();
    if dry_run {
        return Ok(Outcome {
            config_line,
            table: None,
        });
    }
    let table = in_pool(threads, || compute(resolved))??;
    Ok(Outcome {
        config_line,
        table: Some(table),
    })
}

fn execute(cmd: &Command, stderr: &mut dyn Write) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let threads = thread_count()?;
    match cmd {
        Command::RateSweep(c) => {
            let r = load(c, MFlag::Sweep)?.resolve(None)?;
            let out = run_experiment(&r, c.dry_run, threads, |r| {
                Ok(sweep_table(SWEEP_HEADER, &sweep_m(&r.experiment, &r.m_values)?))
            })?;
            Ok((out, c.output.clone()))
        }
        Command::CapSweep(a) => {
            let mut raw = load(&a.common, MFlag::Single)?;
            if a.caps.is_some() {
                raw.cap_values = a.caps.clone();
            }
            let r = raw.resolve(None)?;
            let out = run_experiment(&r, a.common.dry_run, threads, |r| {
                Ok(sweep_table(
                    CAP_HEADER,
                    &sweep_harvest_cap(&r.experiment, &r.cap_values)?,
                ))
            })?;
            Ok((out, a.common.output.clone()))
        }
        Command::ActiveSweep(c) => {
            let r = load(c, MFlag::Sweep)?.resolve(None)?;
            let out = run_experiment(&r, c.dry_run, threads, |r| {
                let mut t = Table::new(&ACTIVE_HEADER);
                for row in avg_active_sweep(&r.experiment, &r.m_values)? {
                    t.push(vec![row.m.into(), row.avg_active.into(), row.avg_harvesting.into()]);
                }
                Ok(t)
            })?;
            Ok((out, c.output.clone()))
        }
        Command::Penalty(c) => {
            let r = load(c, MFlag::Sweep)?.resolve(None)?;
            let out = run_experiment(&r, c.dry_run, threads, |r| {
                let result = sweep_m(&r.experiment, &r.m_values)?;
                let mut t = Table::new(&PENALTY_HEADER);
                for row in &result.rows {
                    t.push(vec![row.x.into(), antenna_penalty(&result, row.x)?.into()]);
                }
                Ok(t)
            })?;
            Ok((out, c.output.clone()))
        }
        Command::Audit(c) => {
            let r = load(c, MFlag::Single)?.resolve(None)?;
            let out = run_experiment(&r, c.dry_run, threads, |r| {
                let a = verify_harvest_identity(&r.experiment)?;
                let mut t = Table::new(&AUDIT_HEADER);
                t.push(vec![
                    a.n_samples.into(),
                    a.analytic_harvest.into(),
                    a.simulated_harvest.into(),
                    a.cross_term.into(),
                    a.noise_harvest.into(),
                    a.std_err_difference.into(),
                    a.std_err_cross.into(),
                    a.consumed_power.into(),
                    a.budget.into(),
                ]);
                Ok(t)
            })?;
            Ok((out, c.output.clone()))
        }
        Command::ScheduleOnce(a) => {
            let c = &a.common;
            if c.m.is_some() {
                return Err(ConfigError::new("m", "schedule-once takes the antenna count from --h").into());
            }
            let r = load(c, MFlag::Single)?.build(Some(a.h.len()))?;
            let table = if c.dry_run {
                None
            } else {
                Some(schedule_once(&r, &a.h, stderr)?)
            };
            let out = Outcome {
                config_line: r.canonical(),
                table,
            };
            Ok((out, c.output.clone()))
        }
        Command::ValidateConfig(c) => {
            let r = load(c, MFlag::Sweep)?.resolve(None)?;
            let out = run_experiment(&r, true, threads, |_| unreachable!("dry run"))?;
            Ok((out, c.output.clone()))
        }
    }
}

fn schedule_once(r: &Resolved, h: &[f64], stderr: &mut dyn Write) -> Result<Table, CliError> {
    let e = &r.experiment;
    let sample = ChannelSample::from_powers(h).map_err(|err| ConfigError::new("h", err.to_string()))?;
    let coupling = e.coupling.resolve(h.len()).map_err(config::core_to_config)?;
    let limits = match e.max_harvesters {
        Some(cap) => SchedulerLimits::capped(cap),
        None => SchedulerLimits::unlimited(),
    };
    let mut t = Table::new(&SCHEDULE_HEADER);
    match coupling.symmetric_scalar() {
        Some(alpha) => t.push(schedule_row("fast", &schedule_fast(&sample, alpha, limits)?)),
        None => {
            let _ = writeln!(stderr, "note: fast scheduler skipped, coupling is not uniform");
        }
    }
    match schedule_exhaustive(&sample, &coupling, limits) {
        Ok(s) => t.push(schedule_row("exhaustive", &s)),
        Err(recyc_miso::Error::SizeLimitExceeded { .. }) => {
            let _ = writeln!(stderr, "note: exhaustive scheduler skipped, too many antennas");
        }
        Err(err) => return Err(err.into()),
    }
    Ok(t)
}

fn write_out(bytes: &[u8], path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))
        }
        None => stdout
            .write_all(bytes)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Runtime(format!("cannot write output: {e}"))),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 success, 1 runtime failure, 2 usage or config error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.to_string();
            let _ = writeln!(stderr, "{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return 2;
        }
    };
    let result = execute(&cli.command, stderr).and_then(|(outcome, path)| {
        let bytes = match &outcome.table {
            Some(t) => render_csv(&outcome.config_line, t),
            None => format!("# config: {}\r\n", outcome.config_line).into_bytes(),
        };
        write_out(&bytes, path.as_ref(), stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run`] on the process arguments and standard streams.
pub fn parse_and_dispatch(argv: Vec<String>) -> i32 {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run(argv, &mut stdout, &mut stderr)
}

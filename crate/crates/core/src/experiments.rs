//! Monte Carlo experiments comparing recycling and non-recycling transmitters.
//!
//! Every sample index `n` owns the random stream `(seed, n)`. Per-sample work
//! may run on any number of threads; results are collected in index order and
//! reduced with [`pairwise_sum`], so outputs are bit-identical for any worker
//! count.
//!
//! The nominal received SNR maps to a budget through
//! `snr = P_c · m_ref · E[H_k]`, with `m_ref` the configuration's antenna
//! count. Sweeps over `m` keep that budget fixed, so rows compare
//! transmitters spending the same power.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{
    coupling_from_layout, db_to_linear, draw_channel, hex_layout, ula_layout, ChannelSample, CouplingMatrix,
    SampleStream,
};
use crate::error::{Error, Result};
use crate::power::{
    allocate, beamform_weights, ergodic_rate, pairwise_mean, pairwise_sum, solve_water_level, GainSamples, Mode,
    PowerPolicy, DEFAULT_BUDGET_TOL,
};
use crate::scheduler::{schedule_exhaustive, schedule_fast, Schedule, SchedulerLimits, EXHAUSTIVE_MAX_M};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    Fast,
    Exhaustive,
}

impl SchedulerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulerKind::Fast => "fast",
            SchedulerKind::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    Hex,
    Ula,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    /// Same linear coupling between every pair.
    Scalar { alpha: f64 },
    /// Explicit matrix; sweeps use its leading `m x m` block.
    Matrix(CouplingMatrix),
    /// Power-law decay over a generated layout.
    Geometry {
        layout: LayoutKind,
        spacing: f64,
        alpha_ref: f64,
        d_ref: f64,
        exponent: f64,
    },
}

impl CouplingSpec {
    pub fn resolve(&self, m: usize) -> Result<CouplingMatrix> {
        match self {
            CouplingSpec::Scalar { alpha } => CouplingMatrix::symmetric(m, *alpha),
            CouplingSpec::Matrix(c) => c.truncated(m),
            CouplingSpec::Geometry {
                layout,
                spacing,
                alpha_ref,
                d_ref,
                exponent,
            } => {
                let positions = match layout {
                    LayoutKind::Hex => hex_layout(m, *spacing)?,
                    LayoutKind::Ula => ula_layout(m, *spacing)?,
                };
                coupling_from_layout(&positions, *alpha_ref, *d_ref, *exponent)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub max_harvesters: Option<usize>,
    pub coupling: CouplingSpec,
    pub mean_gain_db: f64,
    pub snr_db: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub scheduler: SchedulerKind,
    /// Draw the data symbol with `|S|² = P(h)` exactly in the harvest audit
    /// instead of `S ~ CN(0, P(h))`.
    pub deterministic_symbol: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 25,
            max_harvesters: Some(5),
            coupling: CouplingSpec::Scalar {
                alpha: db_to_linear(-15.0),
            },
            mean_gain_db: -60.0,
            snr_db: 10.0,
            n_samples: 100_000,
            seed: 1,
            scheduler: SchedulerKind::Fast,
            deterministic_symbol: false,
        }
    }
}

impl ExperimentConfig {
    pub fn mean_gain(&self) -> f64 {
        db_to_linear(self.mean_gain_db)
    }

    /// Average power budget `P_c` implied by `snr_db` for `m` antennas.
    pub fn budget(&self) -> f64 {
        budget_for_snr(self.snr_db, self.m, self.mean_gain())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "antenna count must be >= 1"));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if !self.mean_gain_db.is_finite() {
            return Err(Error::invalid("mean_gain_db", "must be finite"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db", "must be finite"));
        }
        self.validate_for(self.m)
    }

    /// Checks that the configuration can run at `m` antennas.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        let coupling = self.coupling.resolve(m)?;
        match self.scheduler {
            SchedulerKind::Fast if coupling.symmetric_scalar().is_none() => Err(Error::invalid(
                "scheduler",
                "the fast scheduler needs uniform coupling; use the exhaustive scheduler",
            )),
            SchedulerKind::Exhaustive if m > EXHAUSTIVE_MAX_M => Err(Error::SizeLimitExceeded {
                what: "exhaustive antenna scheduling",
                size: m,
                limit: EXHAUSTIVE_MAX_M,
            }),
            _ => Ok(()),
        }
    }
}

pub fn budget_for_snr(snr_db: f64, m: usize, mean_gain: f64) -> f64 {
    db_to_linear(snr_db) / (m as f64 * mean_gain)
}

#[cfg(feature = "parallel")]
fn map_samples<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_samples<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    (0..n as u64).map(f).collect()
}

fn schedule(
    kind: SchedulerKind,
    sample: &ChannelSample,
    coupling: &CouplingMatrix,
    limits: SchedulerLimits,
) -> Result<Schedule> {
    match kind {
        SchedulerKind::Fast => {
            let alpha = coupling
                .symmetric_scalar()
                .ok_or_else(|| Error::invalid("scheduler", "the fast scheduler needs uniform coupling"))?;
            schedule_fast(sample, alpha, limits)
        }
        SchedulerKind::Exhaustive => schedule_exhaustive(sample, coupling, limits),
    }
}

/// Recycling and baseline gains for one draw. When the scheduler keeps every
/// antenna the recycling gain is taken to be exactly the baseline sum.
fn draw_gains(
    cfg: &ExperimentConfig,
    m: usize,
    coupling: &CouplingMatrix,
    limits: SchedulerLimits,
    index: u64,
) -> Result<(f64, f64, usize)> {
    let mut stream = SampleStream::new(cfg.seed, index);
    let sample = draw_channel(&mut stream, m, cfg.mean_gain())?;
    let sch = schedule(cfg.scheduler, &sample, coupling, limits)?;
    let total = sample.total_power();
    let active = sch.active().len();
    let g = if active == m { total } else { sch.g() };
    Ok((g, total, active))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub m: usize,
    pub budget: f64,
    pub rate_ryc: f64,
    pub rate_noryc: f64,
    pub std_err_ryc: f64,
    pub std_err_noryc: f64,
    pub avg_active: f64,
}

impl PointResult {
    pub fn gain_pct(&self) -> f64 {
        100.0 * (self.rate_ryc - self.rate_noryc) / self.rate_noryc
    }

    pub fn avg_harvesting(&self) -> f64 {
        self.m as f64 - self.avg_active
    }
}

fn run_at(cfg: &ExperimentConfig, m: usize, limits: SchedulerLimits, budget: f64) -> Result<PointResult> {
    cfg.validate_for(m)?;
    let coupling = cfg.coupling.resolve(m)?;
    let draws = map_samples(cfg.n_samples, |n| draw_gains(cfg, m, &coupling, limits, n))?;

    let ryc = GainSamples::new(draws.iter().map(|d| d.0).collect(), Mode::Recycling)?;
    let noryc = GainSamples::new(draws.iter().map(|d| d.1).collect(), Mode::NonRecycling)?;
    let active: Vec<f64> = draws.iter().map(|d| d.2 as f64).collect();

    let rate_ryc = ergodic_rate(&ryc, &solve_water_level(&ryc, budget, DEFAULT_BUDGET_TOL)?);
    let rate_noryc = ergodic_rate(&noryc, &solve_water_level(&noryc, budget, DEFAULT_BUDGET_TOL)?);
    Ok(PointResult {
        m,
        budget,
        rate_ryc: rate_ryc.rate,
        rate_noryc: rate_noryc.rate,
        std_err_ryc: rate_ryc.std_err,
        std_err_noryc: rate_noryc.std_err,
        avg_active: pairwise_mean(&active),
    })
}

fn limits_of(cfg: &ExperimentConfig) -> SchedulerLimits {
    SchedulerLimits {
        max_harvesters: cfg.max_harvesters,
    }
}

/// Recycling rate and classical capacity at one operating point, from the
/// same channel draws and the same budget.
pub fn run_point(cfg: &ExperimentConfig) -> Result<PointResult> {
    cfg.validate()?;
    run_at(cfg, cfg.m, limits_of(cfg), cfg.budget())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// swept value: antenna count or harvester cap
    pub x: usize,
    pub rate_ryc: f64,
    pub rate_noryc: f64,
    pub std_err_ryc: f64,
    pub std_err_noryc: f64,
    pub avg_active: f64,
    pub gain_pct: f64,
}

impl SweepRow {
    fn from_point(x: usize, p: &PointResult) -> Self {
        SweepRow {
            x,
            rate_ryc: p.rate_ryc,
            rate_noryc: p.rate_noryc,
            std_err_ryc: p.std_err_ryc,
            std_err_noryc: p.std_err_noryc,
            avg_active: p.avg_active,
            gain_pct: p.gain_pct(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, x: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.x == x)
    }
}

/// One row per antenna count, budget held at the configuration's value.
pub fn sweep_m(cfg: &ExperimentConfig, m_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    let budget = cfg.budget();
    let mut ms = m_values.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let rows = ms
        .into_iter()
        .map(|m| {
            if m == 0 {
                return Err(Error::invalid("m", "antenna count must be >= 1"));
            }
            run_at(cfg, m, limits_of(cfg), budget).map(|p| SweepRow::from_point(m, &p))
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows })
}

/// One row per harvester cap at the configuration's antenna count.
pub fn sweep_harvest_cap(cfg: &ExperimentConfig, cap_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    let rows = cap_values
        .iter()
        .map(|&cap| {
            run_at(cfg, cfg.m, SchedulerLimits::capped(cap), cfg.budget()).map(|p| SweepRow::from_point(cap, &p))
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityRow {
    pub m: usize,
    pub avg_active: f64,
    pub avg_harvesting: f64,
}

/// Mean number of transmitting and harvesting antennas per antenna count.
/// Scheduling does not depend on the budget, so no water-filling is done.
pub fn avg_active_sweep(cfg: &ExperimentConfig, m_values: &[usize]) -> Result<Vec<ActivityRow>> {
    cfg.validate()?;
    m_values
        .iter()
        .map(|&m| {
            cfg.validate_for(m)?;
            let coupling = cfg.coupling.resolve(m)?;
            let active = map_samples(cfg.n_samples, |n| {
                draw_gains(cfg, m, &coupling, limits_of(cfg), n).map(|d| d.2 as f64)
            })?;
            let avg_active = pairwise_mean(&active);
            Ok(ActivityRow {
                m,
                avg_active,
                avg_harvesting: m as f64 - avg_active,
            })
        })
        .collect()
}

/// Largest `Δ` such that the recycling transmitter with `m - Δ` antennas
/// reaches the classical capacity of `m` antennas. Only the contiguous run of
/// rows ending at `m` is scanned.
pub fn antenna_penalty(result: &SweepResult, m: usize) -> Result<usize> {
    let target = result.row(m).ok_or(Error::OutOfRange(m))?.rate_noryc;
    let mut penalty = 0;
    for delta in 0..m {
        match result.row(m - delta) {
            Some(r) if r.rate_ryc >= target => penalty = delta,
            Some(_) => {}
            None => break,
        }
    }
    Ok(penalty)
}

/// Sample means from the power-accounting audit of the recycling scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestAudit {
    /// mean of `P(h)(1 - f(h))`
    pub analytic_harvest: f64,
    /// mean noiseless energy collected by the harvesting antennas
    pub simulated_harvest: f64,
    /// mean of the `m != n` interference terms of that energy
    pub cross_term: f64,
    /// mean noise energy at the harvesting antennas
    pub noise_harvest: f64,
    /// standard error of the paired difference `simulated - analytic`
    pub std_err_difference: f64,
    pub std_err_cross: f64,
    /// mean of `P(h) f(h)`, which the water level pins to the budget
    pub consumed_power: f64,
    pub budget: f64,
    pub n_samples: usize,
}

#[derive(Clone, Copy)]
struct AuditDraw {
    analytic: f64,
    simulated: f64,
    cross: f64,
    noise: f64,
    consumed: f64,
}

fn audit_draw(
    cfg: &ExperimentConfig,
    coupling: &CouplingMatrix,
    limits: SchedulerLimits,
    policy: &PowerPolicy,
    index: u64,
) -> Result<AuditDraw> {
    let m = cfg.m;
    let mut stream = SampleStream::new(cfg.seed, index);
    let sample = draw_channel(&mut stream, m, cfg.mean_gain())?;
    let sch = schedule(cfg.scheduler, &sample, coupling, limits)?;
    let f = sch.f();
    let p_consumed = allocate(policy, sch.g())?;
    let p = p_consumed / f;

    let symbol = if cfg.deterministic_symbol {
        Complex64::new(p.sqrt(), 0.0)
    } else {
        let s = (p / 2.0).sqrt();
        let re: f64 = stream.sample(StandardNormal);
        let im: f64 = stream.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    };
    let weights = beamform_weights(&sample, sch.active())?;

    let mut harvesting = vec![true; m];
    for &k in sch.active() {
        harvesting[k] = false;
    }
    let (mut simulated, mut cross, mut noise) = (0.0, 0.0, 0.0);
    for l in (0..m).filter(|&l| harvesting[l]) {
        let mut z = Complex64::new(0.0, 0.0);
        let mut diagonal = 0.0;
        for &k in sch.active() {
            let a = symbol * weights[k] * coupling.get(k, l).sqrt();
            z += a;
            diagonal += a.norm_sqr();
        }
        simulated += z.norm_sqr();
        cross += z.norm_sqr() - diagonal;
        let nr: f64 = stream.sample(StandardNormal);
        let ni: f64 = stream.sample(StandardNormal);
        noise += (nr * nr + ni * ni) / 2.0;
    }
    Ok(AuditDraw {
        analytic: p * (1.0 - f),
        simulated,
        cross,
        noise,
        consumed: p * f,
    })
}

fn std_err(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = pairwise_mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (pairwise_sum(&dev) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
}

/// Simulates the energy collected by the harvesting antennas under
/// conjugate beamforming and compares it with `E[P(h)(1 - f(h))]`.
///
/// Water-filling is solved first over the draws' recycling gains; each draw
/// is then replayed from its own stream, continuing with the data symbol and
/// the harvesting-antenna noise.
pub fn verify_harvest_identity(cfg: &ExperimentConfig) -> Result<HarvestAudit> {
    cfg.validate()?;
    let m = cfg.m;
    let coupling = cfg.coupling.resolve(m)?;
    let limits = limits_of(cfg);
    let budget = cfg.budget();

    let gains = map_samples(cfg.n_samples, |n| draw_gains(cfg, m, &coupling, limits, n).map(|d| d.0))?;
    let policy = solve_water_level(&GainSamples::new(gains, Mode::Recycling)?, budget, DEFAULT_BUDGET_TOL)?;

    let draws = map_samples(cfg.n_samples, |n| audit_draw(cfg, &coupling, limits, &policy, n))?;
    let column = |f: fn(&AuditDraw) -> f64| draws.iter().map(f).collect::<Vec<f64>>();
    let analytic = column(|d| d.analytic);
    let simulated = column(|d| d.simulated);
    let cross = column(|d| d.cross);
    let difference = column(|d| d.simulated - d.analytic);

    Ok(HarvestAudit {
        analytic_harvest: pairwise_mean(&analytic),
        simulated_harvest: pairwise_mean(&simulated),
        cross_term: pairwise_mean(&cross),
        noise_harvest: pairwise_mean(&column(|d| d.noise)),
        std_err_difference: std_err(&difference),
        std_err_cross: std_err(&cross),
        consumed_power: pairwise_mean(&column(|d| d.consumed)),
        budget,
        n_samples: cfg.n_samples,
    })
}

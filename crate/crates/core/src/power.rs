//! Water-filling under a long-term average power budget, and ergodic rates.
//!
//! The expectation in the budget constraint is replaced by the sample mean
//! over a fixed set of Monte Carlo gains; the same set is then used to
//! evaluate the rate.

use num_complex::Complex64;

use crate::channel::ChannelSample;
use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Default relative budget tolerance for [`solve_water_level`].
pub const DEFAULT_BUDGET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Gains are `g_max(h)`; the budget bounds consumed power.
    Recycling,
    /// Gains are `Σ_k h_k`; the budget bounds transmitted power.
    NonRecycling,
}

/// Sampled distribution of the water-filling gain, one value per channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSamples {
    values: Vec<f64>,
    mode: Mode,
}

impl GainSamples {
    pub fn new(values: Vec<f64>, mode: Mode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("samples", "no gain samples"));
        }
        if let Some(g) = values.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::invalid(
                "samples",
                format!("gains must be finite and > 0, got {g}"),
            ));
        }
        Ok(GainSamples { values, mode })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    water_level: f64,
    target_budget: f64,
    mode: Mode,
}

impl PowerPolicy {
    pub fn water_level(&self) -> f64 {
        self.water_level
    }

    pub fn target_budget(&self) -> f64 {
        self.target_budget
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    fn power_for(&self, g: f64) -> f64 {
        (self.water_level - 1.0 / g).max(0.0)
    }
}

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so the result does not depend on how the slice was filled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn pairwise_mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn mean_power(inverse_gains: &[f64], level: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(inverse_gains.iter().map(|ig| (level - ig).max(0.0)));
    pairwise_mean(scratch)
}

/// Finds the water level `λ` with `mean_n (λ - 1/g_n)⁺ = budget` by bisection
/// on `[0, budget + max_n 1/g_n]`.
///
/// The bracket is narrowed until it stops shrinking in floating point; `tol`
/// only decides whether the final budget residual is acceptable.
pub fn solve_water_level(samples: &GainSamples, budget: f64, tol: f64) -> Result<PowerPolicy> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::invalid(
            "budget",
            format!("must be finite and >= 0, got {budget}"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    if budget == 0.0 {
        return Ok(PowerPolicy {
            water_level: 0.0,
            target_budget: 0.0,
            mode: samples.mode,
        });
    }
    let inverse: Vec<f64> = samples.values.iter().map(|g| 1.0 / g).collect();
    let max_inverse = inverse.iter().copied().fold(0.0, f64::max);
    let mut scratch = Vec::with_capacity(inverse.len());

    let (mut lo, mut hi) = (0.0, budget + max_inverse);
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_power(&inverse, mid, &mut scratch) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lo_err = (mean_power(&inverse, lo, &mut scratch) - budget).abs();
    let hi_err = (mean_power(&inverse, hi, &mut scratch) - budget).abs();
    let (water_level, residual) = if lo_err < hi_err { (lo, lo_err) } else { (hi, hi_err) };
    if residual > tol * budget {
        return Err(Error::NoConvergence {
            iterations,
            residual: residual / budget,
        });
    }
    Ok(PowerPolicy {
        water_level,
        target_budget: budget,
        mode: samples.mode,
    })
}

/// Power for a draw with gain `g`: `(λ - 1/g)⁺`.
pub fn allocate(policy: &PowerPolicy, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::invalid("g", format!("gain must be > 0, got {g}")));
    }
    Ok(policy.power_for(g))
}

/// Sample-mean power a policy spends on `samples`.
pub fn mean_allocated(samples: &GainSamples, policy: &PowerPolicy) -> f64 {
    let p: Vec<f64> = samples.values.iter().map(|&g| policy.power_for(g)).collect();
    pairwise_mean(&p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// bits per channel use
    pub rate: f64,
    pub std_err: f64,
}

/// Monte Carlo estimate of `E[log2(1 + P(g)·g)]` with its standard error.
pub fn ergodic_rate(samples: &GainSamples, policy: &PowerPolicy) -> RateEstimate {
    let rates: Vec<f64> = samples
        .values
        .iter()
        .map(|&g| (policy.power_for(g) * g).ln_1p() / std::f64::consts::LN_2)
        .collect();
    let n = rates.len() as f64;
    let rate = pairwise_mean(&rates);
    let std_err = if rates.len() > 1 {
        let dev: Vec<f64> = rates.iter().map(|r| (r - rate).powi(2)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    RateEstimate { rate, std_err }
}

/// Unit-norm conjugate beamforming weights over `active`, zero elsewhere.
pub fn beamform_weights(sample: &ChannelSample, active: &[usize]) -> Result<Vec<Complex64>> {
    let m = sample.m();
    if active.is_empty() {
        return Err(Error::invalid("active", "active set must be nonempty"));
    }
    if let Some(k) = active.iter().find(|&&k| k >= m) {
        return Err(Error::invalid("active", format!("antenna index {k} out of range")));
    }
    let gains = sample.gains();
    let norm = active.iter().map(|&k| gains[k].norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateChannel("active channel vector has zero norm".into()));
    }
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    for &k in active {
        w[k] = gains[k].conj() / norm;
    }
    Ok(w)
}

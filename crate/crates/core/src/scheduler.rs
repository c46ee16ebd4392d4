//! Choosing which antennas transmit and which harvest.
//!
//! For an active set `A` with leakage `L = Σ_{k∈A} Σ_{l∉A} h_k α_kl` the
//! recycle fraction is `f = 1 - L / Σ_{k∈A} h_k` and the effective gain is
//! `g = (Σ_{k∈A} h_k) / f`. Water-filling against `g` instead of `Σ h` is what
//! lets a recycling transmitter beat the classical capacity.
//!
//! Two searches are provided: an exhaustive scan over every admissible
//! harvesting set (any coupling matrix), and the sorted-prefix scan that is
//! exact when all coupling entries are equal.

use crate::channel::{ChannelSample, CouplingMatrix};
use crate::error::{Error, Result};

/// Largest antenna count accepted by [`schedule_exhaustive`].
pub const EXHAUSTIVE_MAX_M: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    active: Vec<usize>,
    g: f64,
    f: f64,
}

impl Schedule {
    /// Zero-based indices of the transmitting antennas, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn harvesting(&self, m: usize) -> usize {
        m - self.active.len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchedulerLimits {
    pub max_harvesters: Option<usize>,
}

impl SchedulerLimits {
    pub fn unlimited() -> Self {
        SchedulerLimits { max_harvesters: None }
    }

    pub fn capped(max_harvesters: usize) -> Self {
        SchedulerLimits {
            max_harvesters: Some(max_harvesters),
        }
    }

    /// Harvester cap actually in force for `m` antennas; at least one antenna
    /// always transmits.
    pub fn effective_cap(&self, m: usize) -> usize {
        let structural = m.saturating_sub(1);
        self.max_harvesters.map_or(structural, |c| c.min(structural))
    }
}

fn active_mask(m: usize, active: &[usize]) -> Result<Vec<bool>> {
    if active.is_empty() {
        return Err(Error::invalid("active", "active set must be nonempty"));
    }
    let mut mask = vec![false; m];
    for &k in active {
        if k >= m {
            return Err(Error::invalid(
                "active",
                format!("antenna index {k} out of range for m = {m}"),
            ));
        }
        if std::mem::replace(&mut mask[k], true) {
            return Err(Error::invalid("active", format!("antenna {k} listed twice")));
        }
    }
    Ok(mask)
}

/// Returns `(Σ_{k∈A} h_k, leakage)` for the given active set.
fn active_sums(sample: &ChannelSample, mask: &[bool], coupling: &CouplingMatrix) -> Result<(f64, f64)> {
    let m = sample.m();
    if coupling.m() != m {
        return Err(Error::invalid(
            "coupling",
            format!("coupling is {}x{0} but the channel has {m} antennas", coupling.m()),
        ));
    }
    let h = sample.powers();
    let mut sum = 0.0;
    let mut leak = 0.0;
    for k in (0..m).filter(|&k| mask[k]) {
        sum += h[k];
        let row = coupling.row(k);
        let out: f64 = (0..m).filter(|&l| !mask[l]).map(|l| row[l]).sum();
        leak += h[k] * out;
    }
    if !(sum > 0.0) {
        return Err(Error::DegenerateChannel(
            "active antennas carry zero channel power".into(),
        ));
    }
    Ok((sum, leak))
}

/// Fraction of the allocated power actually consumed once the energy
/// harvested by the inactive antennas is credited back. Can be `<= 0` for
/// pathological coupling; the caller decides what that means.
pub fn recycle_fraction(sample: &ChannelSample, active: &[usize], coupling: &CouplingMatrix) -> Result<f64> {
    let mask = active_mask(sample.m(), active)?;
    let (sum, leak) = active_sums(sample, &mask, coupling)?;
    Ok(1.0 - leak / sum)
}

/// Effective gain `(Σh)² / (Σh - leakage)`, or `None` when the active set is
/// infeasible (`f <= MIN_RECYCLE_FRACTION`).
pub fn effective_gain(sample: &ChannelSample, active: &[usize], coupling: &CouplingMatrix) -> Result<Option<f64>> {
    let mask = active_mask(sample.m(), active)?;
    let (sum, leak) = active_sums(sample, &mask, coupling)?;
    let f = 1.0 - leak / sum;
    Ok(feasible(f).then(|| sum / f))
}

/// Incremental bookkeeping for the exhaustive search. Moving antenna `j` to
/// the harvesting side updates every quantity in `O(M)`.
#[derive(Clone, Copy)]
struct SearchState {
    harvest_mask: u32,
    sum: f64,
    leak: f64,
    /// `inflow[j] = Σ_{k∈A} h_k α_kj`
    inflow: [f64; EXHAUSTIVE_MAX_M],
    /// `outflow[j] = Σ_{l∉A} α_jl`
    outflow: [f64; EXHAUSTIVE_MAX_M],
}

impl SearchState {
    fn full(h: &[f64], coupling: &CouplingMatrix) -> Self {
        let m = h.len();
        let mut inflow = [0.0; EXHAUSTIVE_MAX_M];
        for (k, &hk) in h.iter().enumerate() {
            let row = coupling.row(k);
            for j in 0..m {
                inflow[j] += hk * row[j];
            }
        }
        SearchState {
            harvest_mask: 0,
            sum: h.iter().sum(),
            leak: 0.0,
            inflow,
            outflow: [0.0; EXHAUSTIVE_MAX_M],
        }
    }

    fn harvest(&mut self, j: usize, h: &[f64], coupling: &CouplingMatrix) {
        let hj = h[j];
        self.sum -= hj;
        self.leak += self.inflow[j] - hj * self.outflow[j];
        let row = coupling.row(j);
        for (x, &a) in row.iter().enumerate() {
            self.inflow[x] -= hj * a;
            self.outflow[x] += coupling.get(x, j);
        }
        self.harvest_mask |= 1 << j;
    }

    fn gain(&self) -> Option<f64> {
        if !(self.sum > 0.0) {
            return None;
        }
        let f = 1.0 - self.leak / self.sum;
        feasible(f).then(|| self.sum / f)
    }
}

struct Best {
    g: f64,
    harvest_mask: u32,
}

/// Ranks a candidate against the incumbent: higher `g`, then fewer
/// harvesters, then the lexicographically smaller active index list.
fn beats(g: f64, mask: u32, best: &Best, m: usize) -> bool {
    if g != best.g {
        return g > best.g;
    }
    let (nc, nb) = (mask.count_ones(), best.harvest_mask.count_ones());
    if nc != nb {
        return nc < nb;
    }
    let active = |mask: u32| (0..m).filter(move |&k| mask & (1 << k) == 0);
    active(mask).lt(active(best.harvest_mask))
}

fn search(
    state: &SearchState,
    start: usize,
    depth: usize,
    cap: usize,
    h: &[f64],
    coupling: &CouplingMatrix,
    best: &mut Option<Best>,
) {
    let m = h.len();
    if let Some(g) = state.gain() {
        let better = match best {
            None => true,
            Some(b) => beats(g, state.harvest_mask, b, m),
        };
        if better {
            *best = Some(Best {
                g,
                harvest_mask: state.harvest_mask,
            });
        }
    }
    if depth == cap {
        return;
    }
    for j in start..m {
        let mut next = *state;
        next.harvest(j, h, coupling);
        search(&next, j + 1, depth + 1, cap, h, coupling, best);
    }
}

/// Maximizes `g` over every nonempty active set whose harvesting complement
/// respects `limits`. Infeasible sets (`f <= MIN_RECYCLE_FRACTION`) are skipped; the full set is
/// always feasible.
pub fn schedule_exhaustive(
    sample: &ChannelSample,
    coupling: &CouplingMatrix,
    limits: SchedulerLimits,
) -> Result<Schedule> {
    let m = sample.m();
    if m > EXHAUSTIVE_MAX_M {
        return Err(Error::SizeLimitExceeded {
            what: "exhaustive antenna scheduling",
            size: m,
            limit: EXHAUSTIVE_MAX_M,
        });
    }
    if coupling.m() != m {
        return Err(Error::invalid(
            "coupling",
            format!("coupling is {}x{0} but the channel has {m} antennas", coupling.m()),
        ));
    }
    let h = sample.powers();
    if !(sample.total_power() > 0.0) {
        return Err(Error::DegenerateChannel("all channel power gains are zero".into()));
    }
    let cap = limits.effective_cap(m);
    let mut best = None;
    search(&SearchState::full(h, coupling), 0, 0, cap, h, coupling, &mut best);
    // the full set has f = 1 and positive power, so something was found
    let best = best.expect("full active set is always feasible");

    let active: Vec<usize> = (0..m).filter(|&k| best.harvest_mask & (1 << k) == 0).collect();
    let mask = active_mask(m, &active)?;
    let (sum, leak) = active_sums(sample, &mask, coupling)?;
    let f = 1.0 - leak / sum;
    Ok(Schedule { g: sum / f, f, active })
}

/// Antenna indices ordered by descending power gain, ties by ascending index.
pub fn descending_order(powers: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    order
}

/// Smallest recycle fraction treated as feasible. Sets whose exact `f` is
/// zero (for example `M - 1` harvesters at `alpha = 1/(M - 1)`) evaluate to
/// rounding noise around zero; the floor keeps them out of every scheduler.
pub const MIN_RECYCLE_FRACTION: f64 = 1e-9;

fn feasible(f: f64) -> bool {
    f > MIN_RECYCLE_FRACTION
}

#[inline]
fn prefix_denominator(i: usize, m: usize, alpha: f64) -> f64 {
    1.0 - (m - i) as f64 * alpha
}

/// `g_i`: gain of keeping the `i` strongest antennas active under uniform
/// coupling `alpha`. `None` if `1 - (m - i)·alpha <= MIN_RECYCLE_FRACTION`.
pub fn sorted_prefix_gain(i: usize, sorted_powers: &[f64], alpha: f64, m: usize) -> Result<Option<f64>> {
    if sorted_powers.len() != m {
        return Err(Error::invalid(
            "sorted_powers",
            format!("expected {m} powers, got {}", sorted_powers.len()),
        ));
    }
    if i == 0 || i > m {
        return Err(Error::invalid("i", format!("prefix length {i} outside 1..={m}")));
    }
    debug_assert!(
        sorted_powers.windows(2).all(|w| w[0] >= w[1]),
        "powers must be sorted in descending order"
    );
    let den = prefix_denominator(i, m, alpha);
    let sum: f64 = sorted_powers[..i].iter().sum();
    Ok(feasible(den).then(|| sum / den))
}

/// Smallest prefix length worth considering: feasible and within the cap.
fn min_prefix(m: usize, alpha: f64, cap: usize) -> usize {
    let mut i = (m - cap).max(1);
    while i < m && !feasible(prefix_denominator(i, m, alpha)) {
        i += 1;
    }
    i
}

/// Sorted-prefix scheduler for uniform coupling.
///
/// Walks the prefixes of the descending order from the smallest admissible
/// length and stops at the first `i` with `g_i >= g_{i+1}`; unimodality of
/// `g_i` makes that the maximum. `O(M log M)` overall.
pub fn schedule_fast(sample: &ChannelSample, alpha: f64, limits: SchedulerLimits) -> Result<Schedule> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    let m = sample.m();
    let h = sample.powers();
    if !(sample.total_power() > 0.0) {
        return Err(Error::DegenerateChannel("all channel power gains are zero".into()));
    }
    let order = descending_order(h);
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &k in &order {
        acc += h[k];
        prefix.push(acc);
    }
    let g = |i: usize| prefix[i] / prefix_denominator(i, m, alpha);

    let mut i = min_prefix(m, alpha, limits.effective_cap(m));
    while i < m && g(i) < g(i + 1) {
        i += 1;
    }
    let mut active = order[..i].to_vec();
    active.sort_unstable();
    Ok(Schedule {
        active,
        g: g(i),
        f: prefix_denominator(i, m, alpha),
    })
}

/// Checks the unimodality property behind [`schedule_fast`] on one sorted
/// sample: once `g_i >= g_{i+1}`, no later prefix beats `g_i`. Only feasible
/// prefixes take part.
pub fn check_lemma1(sorted_powers: &[f64], alpha: f64, m: usize) -> bool {
    if m <= 1 {
        return true;
    }
    let gains: Vec<Option<f64>> = (1..=m)
        .map(|i| sorted_prefix_gain(i, sorted_powers, alpha, m).ok().flatten())
        .collect();
    let feasible: Vec<f64> = gains.into_iter().flatten().collect();
    let Some(turn) = feasible.windows(2).position(|w| w[0] >= w[1]) else {
        return true;
    };
    feasible[turn..].iter().all(|&gj| feasible[turn] >= gj)
}

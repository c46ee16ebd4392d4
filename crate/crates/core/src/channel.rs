//! Fading draws, transmitter geometry and inter-antenna coupling.
//!
//! Channel gains are flat Rayleigh: every antenna sees an independent
//! circularly-symmetric complex Gaussian gain whose power has the configured
//! mean. Coupling between co-located antennas is a matrix of linear power
//! ratios, either a single scalar for every pair or derived from a layout.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest admissible coupling entry; anything at or above 1 would harvest
/// more than was emitted.
pub const COUPLING_CAP: f64 = 1.0 - 1e-9;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid("x", format!("linear ratio must be > 0, got {x}")));
    }
    Ok(10.0 * x.log10())
}

/// Random stream dedicated to one Monte Carlo sample.
///
/// The stream is ChaCha8 keyed by the master seed with the sample index as the
/// stream id, so sample `n` sees the same numbers whatever order or thread it
/// is evaluated on.
#[derive(Debug, Clone)]
pub struct SampleStream(ChaCha8Rng);

impl SampleStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        SampleStream(rng)
    }
}

impl RngCore for SampleStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// One fading realization: complex gains `G_k` and power gains `H_k = |G_k|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    gains: Vec<Complex64>,
    powers: Vec<f64>,
}

impl ChannelSample {
    pub fn from_gains(gains: Vec<Complex64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::invalid("m", "a channel needs at least one antenna"));
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::invalid("gains", "non-finite channel gain"));
        }
        let powers = gains.iter().map(|g| g.norm_sqr()).collect();
        Ok(ChannelSample { gains, powers })
    }

    /// Builds a sample with real, nonnegative amplitudes `sqrt(h_k)`. Useful when
    /// only the power gains matter (scheduling and rate evaluation).
    pub fn from_powers(powers: &[f64]) -> Result<Self> {
        if let Some(h) = powers.iter().find(|h| !(**h >= 0.0) || !h.is_finite()) {
            return Err(Error::invalid(
                "h",
                format!("power gains must be finite and >= 0, got {h}"),
            ));
        }
        if powers.is_empty() {
            return Err(Error::invalid("m", "a channel needs at least one antenna"));
        }
        // keep the caller's powers exactly; they agree with |sqrt(h)|² to an ulp
        Ok(ChannelSample {
            gains: powers.iter().map(|h| Complex64::new(h.sqrt(), 0.0)).collect(),
            powers: powers.to_vec(),
        })
    }

    pub fn m(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Draws `m` i.i.d. `CN(0, mean_gain)` gains from `rng`.
///
/// Gains are drawn antenna by antenna, so an `m`-antenna draw is a prefix of
/// an `m + 1`-antenna draw from the same stream state.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, m: usize, mean_gain: f64) -> Result<ChannelSample> {
    if m == 0 {
        return Err(Error::invalid("m", "antenna count must be >= 1"));
    }
    if !(mean_gain > 0.0) || !mean_gain.is_finite() {
        return Err(Error::invalid(
            "mean_gain",
            format!("mean power gain must be finite and > 0, got {mean_gain}"),
        ));
    }
    let sigma = (mean_gain / 2.0).sqrt();
    let gains = (0..m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    ChannelSample::from_gains(gains)
}

/// Inter-antenna power coupling `alpha[k][l]`: the fraction of antenna `k`'s
/// emission captured by antenna `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    m: usize,
    alpha: Vec<f64>,
    symmetric_scalar: Option<f64>,
}

impl CouplingMatrix {
    /// Every off-diagonal entry equal to `alpha`.
    pub fn symmetric(m: usize, alpha: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "antenna count must be >= 1"));
        }
        check_entry(alpha)?;
        let mut data = vec![alpha; m * m];
        for k in 0..m {
            data[k * m + k] = 0.0;
        }
        Ok(CouplingMatrix {
            m,
            alpha: data,
            symmetric_scalar: Some(alpha),
        })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::symmetric(m, 0.0)
    }

    /// Builds from explicit rows. The diagonal must be zero. If every
    /// off-diagonal entry is identical the scalar form is recorded.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("alpha", "coupling matrix is empty"));
        }
        let mut data = Vec::with_capacity(m * m);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(
                    "alpha",
                    format!("row {k} has {} entries, expected {m}", row.len()),
                ));
            }
            for (l, &a) in row.iter().enumerate() {
                if k == l {
                    if a != 0.0 {
                        return Err(Error::invalid(
                            "alpha",
                            format!("diagonal entry ({k},{k}) must be 0, got {a}"),
                        ));
                    }
                } else {
                    check_entry(a)?;
                }
                data.push(a);
            }
        }
        let first = if m > 1 { Some(data[1]) } else { None };
        let symmetric_scalar = match first {
            None => Some(0.0),
            Some(a) => {
                let uniform = (0..m)
                    .flat_map(|k| (0..m).map(move |l| (k, l)))
                    .filter(|(k, l)| k != l)
                    .all(|(k, l)| data[k * m + l] == a);
                uniform.then_some(a)
            }
        };
        Ok(CouplingMatrix {
            m,
            alpha: data,
            symmetric_scalar,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.alpha[k * self.m + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.alpha[k * self.m..(k + 1) * self.m]
    }

    pub fn symmetric_scalar(&self) -> Option<f64> {
        self.symmetric_scalar
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|k| self.row(k).to_vec()).collect()
    }

    /// Restriction to the first `m` antennas.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.m {
            return Err(Error::invalid(
                "m",
                format!("cannot truncate a {}-antenna coupling matrix to {m}", self.m),
            ));
        }
        let rows: Vec<Vec<f64>> = (0..m).map(|k| self.row(k)[..m].to_vec()).collect();
        Self::from_rows(&rows)
    }
}

fn check_entry(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invalid("alpha", format!("coupling must lie in [0, 1), got {a}")));
    }
    Ok(())
}

/// Antenna positions in units of the carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    positions: Vec<[f64; 2]>,
}

impl AntennaLayout {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("layout", "layout has no antennas"));
        }
        let layout = AntennaLayout { positions };
        for k in 0..layout.len() {
            for l in k + 1..layout.len() {
                if !(layout.distance(k, l) > 0.0) {
                    return Err(Error::invalid("layout", format!("antennas {k} and {l} coincide")));
                }
            }
        }
        Ok(layout)
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, k: usize, l: usize) -> f64 {
        let [x0, y0] = self.positions[k];
        let [x1, y1] = self.positions[l];
        (x1 - x0).hypot(y1 - y0)
    }
}

/// Sites of a hexagonal grid with cell side `side`: the center and corners of
/// each small hexagon, which together form a triangular lattice.
///
/// Sites are emitted ring by ring from the origin; ring `r` holds `6r` sites
/// walked counter-clockwise starting on the +x axis.
pub fn hex_layout(n: usize, side: f64) -> Result<AntennaLayout> {
    if n == 0 {
        return Err(Error::invalid("n", "antenna count must be >= 1"));
    }
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::invalid("side", format!("must be > 0, got {side}")));
    }
    let corner = |r: usize, j: usize| {
        let theta = std::f64::consts::FRAC_PI_3 * (j % 6) as f64;
        let rad = r as f64 * side;
        [rad * theta.cos(), rad * theta.sin()]
    };
    let mut positions = Vec::with_capacity(n);
    positions.push([0.0, 0.0]);
    let mut ring = 1;
    while positions.len() < n {
        'ring: for j in 0..6 {
            let a = corner(ring, j);
            let b = corner(ring, j + 1);
            for t in 0..ring {
                if positions.len() == n {
                    break 'ring;
                }
                let s = t as f64 / ring as f64;
                positions.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        ring += 1;
    }
    AntennaLayout::new(positions)
}

/// `n` collinear antennas along +x, `spacing` apart.
pub fn ula_layout(n: usize, spacing: f64) -> Result<AntennaLayout> {
    if n == 0 {
        return Err(Error::invalid("n", "antenna count must be >= 1"));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::invalid("spacing", format!("must be > 0, got {spacing}")));
    }
    AntennaLayout::new((0..n).map(|k| [k as f64 * spacing, 0.0]).collect())
}

/// Power-law coupling `alpha_ref * (d_ref / d)^exponent`, clamped to
/// [`COUPLING_CAP`].
pub fn coupling_from_layout(
    layout: &AntennaLayout,
    alpha_ref: f64,
    d_ref: f64,
    exponent: f64,
) -> Result<CouplingMatrix> {
    if !(alpha_ref > 0.0 && alpha_ref < 1.0) {
        return Err(Error::invalid(
            "alpha_ref",
            format!("must lie in (0, 1), got {alpha_ref}"),
        ));
    }
    if !(d_ref > 0.0) || !d_ref.is_finite() {
        return Err(Error::invalid("d_ref", format!("must be > 0, got {d_ref}")));
    }
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err(Error::invalid("exponent", format!("must be >= 0, got {exponent}")));
    }
    if layout.is_empty() {
        return Err(Error::invalid("layout", "layout has no antennas"));
    }
    let m = layout.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            (0..m)
                .map(|l| {
                    if k == l {
                        0.0
                    } else {
                        (alpha_ref * (d_ref / layout.distance(k, l)).powf(exponent)).min(COUPLING_CAP)
                    }
                })
                .collect()
        })
        .collect();
    CouplingMatrix::from_rows(&rows)
}

//! Browser bindings for the energy-recycling MISO simulator.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.
//! A negative `cap` means no harvester cap.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use recyc_miso::scheduler::descending_order;
use recyc_miso::{
    db_to_linear, draw_channel, hex_layout, schedule_exhaustive, schedule_fast, sorted_prefix_gain, sweep_m,
    ChannelSample, CouplingMatrix, CouplingSpec, ExperimentConfig, SampleStream, Schedule, SchedulerKind,
    SchedulerLimits,
};

/// Largest antenna count the demo schedules exhaustively.
pub const DEMO_MAX_M: usize = 16;

#[derive(Serialize)]
struct ScheduleJson {
    /// 1-based antenna indices
    active: Vec<usize>,
    f: f64,
    g: f64,
}

impl From<&Schedule> for ScheduleJson {
    fn from(s: &Schedule) -> Self {
        ScheduleJson {
            active: s.active().iter().map(|k| k + 1).collect(),
            f: s.f(),
            g: s.g(),
        }
    }
}

#[derive(Serialize)]
struct ScheduleReport {
    fast: ScheduleJson,
    exhaustive: Option<ScheduleJson>,
    /// `g` with the `i` strongest antennas active, `null` where `f <= 0`
    prefix_gains: Vec<Option<f64>>,
    /// 1-based antenna indices, strongest first
    order: Vec<usize>,
}

#[derive(Serialize)]
struct RatePoint {
    m: usize,
    rate_ryc: f64,
    rate_noryc: f64,
    avg_active: f64,
    gain_pct: f64,
}

#[derive(Serialize)]
struct LayoutReport {
    positions: Vec<[f64; 2]>,
    coupling: Vec<Vec<f64>>,
    powers: Vec<f64>,
    schedule: ScheduleJson,
}

fn limits(cap: i32) -> SchedulerLimits {
    match usize::try_from(cap) {
        Ok(c) => SchedulerLimits::capped(c),
        Err(_) => SchedulerLimits::unlimited(),
    }
}

fn to_json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// Schedules one channel (power gains `h`) under uniform coupling `alpha`
/// with both schedulers and returns the sorted-prefix gain curve.
#[wasm_bindgen]
pub fn schedule_channel(h: &[f64], alpha: f64, cap: i32) -> String {
    to_json((|| {
        let e = |err: recyc_miso::Error| err.to_string();
        let sample = ChannelSample::from_powers(h).map_err(e)?;
        let m = sample.m();
        let limits = limits(cap);
        let fast = schedule_fast(&sample, alpha, limits).map_err(e)?;
        let exhaustive = if m <= DEMO_MAX_M {
            let coupling = CouplingMatrix::symmetric(m, alpha).map_err(e)?;
            Some(ScheduleJson::from(
                &schedule_exhaustive(&sample, &coupling, limits).map_err(e)?,
            ))
        } else {
            None
        };
        let order = descending_order(h);
        let sorted: Vec<f64> = order.iter().map(|&k| h[k]).collect();
        let prefix_gains = (1..=m)
            .map(|i| sorted_prefix_gain(i, &sorted, alpha, m))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        Ok(ScheduleReport {
            fast: ScheduleJson::from(&fast),
            exhaustive,
            prefix_gains,
            order: order.iter().map(|k| k + 1).collect(),
        })
    })())
}

/// Recycling rate and classical capacity for `m_min..=m_max` antennas at a
/// budget fixed by `snr_db` at `m_max`.
#[wasm_bindgen]
pub fn rate_curve(
    m_min: usize,
    m_max: usize,
    snr_db: f64,
    alpha_db: f64,
    cap: i32,
    n_samples: usize,
    seed: u32,
) -> String {
    to_json((|| {
        if m_min == 0 || m_min > m_max {
            return Err(format!("invalid antenna range {m_min}..{m_max}"));
        }
        if alpha_db >= 0.0 {
            return Err("coupling must be below 0 dB".to_string());
        }
        let cfg = ExperimentConfig {
            m: m_max,
            max_harvesters: limits(cap).max_harvesters,
            coupling: CouplingSpec::Scalar {
                alpha: db_to_linear(alpha_db),
            },
            snr_db,
            n_samples,
            seed: seed.into(),
            scheduler: SchedulerKind::Fast,
            ..ExperimentConfig::default()
        };
        let ms: Vec<usize> = (m_min..=m_max).collect();
        let sweep = sweep_m(&cfg, &ms).map_err(|e| e.to_string())?;
        Ok(sweep
            .rows
            .iter()
            .map(|r| RatePoint {
                m: r.x,
                rate_ryc: r.rate_ryc,
                rate_noryc: r.rate_noryc,
                avg_active: r.avg_active,
                gain_pct: r.gain_pct,
            })
            .collect::<Vec<_>>())
    })())
}

/// Hexagonal array of `n` antennas with power-law coupling, one seeded
/// Rayleigh draw and its exhaustive schedule.
#[wasm_bindgen]
pub fn hex_array(n: usize, spacing: f64, alpha_ref_db: f64, exponent: f64, cap: i32, seed: u32) -> String {
    to_json((|| {
        if n > DEMO_MAX_M {
            return Err(format!("at most {DEMO_MAX_M} antennas in the demo"));
        }
        if alpha_ref_db >= 0.0 {
            return Err("coupling must be below 0 dB".to_string());
        }
        let e = |err: recyc_miso::Error| err.to_string();
        let spec = CouplingSpec::Geometry {
            layout: recyc_miso::LayoutKind::Hex,
            spacing,
            alpha_ref: db_to_linear(alpha_ref_db),
            d_ref: 1.0 / 3.0,
            exponent,
        };
        let coupling = spec.resolve(n).map_err(e)?;
        let layout = hex_layout(n, spacing).map_err(e)?;
        let sample = draw_channel(&mut SampleStream::new(seed.into(), 0), n, 1.0).map_err(e)?;
        let schedule = schedule_exhaustive(&sample, &coupling, limits(cap)).map_err(e)?;
        Ok(LayoutReport {
            positions: layout.positions().to_vec(),
            coupling: coupling.to_rows(),
            powers: sample.powers().to_vec(),
            schedule: ScheduleJson::from(&schedule),
        })
    })())
}

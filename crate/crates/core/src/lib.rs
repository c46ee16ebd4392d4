//! Achievable rate of a MISO transmitter whose antennas can switch between
//! transmitting and harvesting the energy radiated by their neighbours.
//!
//! * [`channel`]: Rayleigh draws, antenna layouts and coupling matrices.
//! * [`scheduler`]: recycle fraction, effective gain, and the exhaustive and
//!   sorted-prefix antenna schedulers.
//! * [`power`]: water-filling and ergodic rate estimation.
//! * [`experiments`]: Monte Carlo sweeps, antenna penalty and the
//!   harvested-energy audit.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod power;
pub mod scheduler;

pub use channel::{
    coupling_from_layout, db_to_linear, draw_channel, hex_layout, linear_to_db, ula_layout, AntennaLayout,
    ChannelSample, CouplingMatrix, SampleStream,
};
pub use error::{Error, Result};
pub use experiments::{
    antenna_penalty, avg_active_sweep, run_point, sweep_harvest_cap, sweep_m, verify_harvest_identity, ActivityRow,
    CouplingSpec, ExperimentConfig, HarvestAudit, LayoutKind, PointResult, SchedulerKind, SweepResult, SweepRow,
};
pub use power::{
    allocate, beamform_weights, ergodic_rate, solve_water_level, GainSamples, Mode, PowerPolicy, RateEstimate,
};
pub use scheduler::{
    check_lemma1, effective_gain, recycle_fraction, schedule_exhaustive, schedule_fast, sorted_prefix_gain, Schedule,
    SchedulerLimits, MIN_RECYCLE_FRACTION,
};

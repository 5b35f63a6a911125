//! mmWave and LTE link-quality models.
//!
//! The mmWave channel is a re-parameterization of measurement-based
//! models: a distance-dependent LOS/NLOS/outage state process (statistical
//! mode) or a geometric blockage process (mobility mode), log-distance
//! pathloss per state with block shadowing, and a capped spectral
//! efficiency mapping SNR to per-slot capacity. Every constant is a
//! config key; the defaults here are the calibrated ones shipped with the
//! simulator.

mod geometry;
mod lte;
mod markov;
mod process;
mod propagation;

pub use geometry::{deploy_obstacles, geometric_state, MobilityState, Obstacle, Point};
pub use lte::{lte_sample, LteDirection, LteParams};
pub use markov::{build_transition_matrix, MarkovChain};
pub use process::ChannelProcess;
pub use propagation::{pathloss_db, slot_capacity, snr_db, state_probabilities};

/// Radio visibility state of a link during one update period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

/// mmWave carrier band. 73 GHz is modeled as 28 GHz plus a fixed
/// frequency offset of 20*log10(73/28) = 8.3 dB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Mm28,
    Mm73,
}

/// Stationary LOS/NLOS/outage probabilities at a given distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDistribution {
    pub p_los: f64,
    pub p_nlos: f64,
    pub p_out: f64,
}

impl StateDistribution {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p_los, self.p_nlos, self.p_out]
    }

    pub fn is_valid(&self) -> bool {
        let a = self.as_array();
        a.iter().all(|p| (0.0..=1.0).contains(p)) && (a.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }
}

/// Link quality for one slot.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSample {
    pub state: LinkState,
    pub pathloss_db: f64,
    pub snr_db: f64,
    pub spectral_eff: f64,
    pub slot_capacity_bits: u64,
}

/// Physical-layer parameters of a mmWave link. Field defaults mirror the
/// shipped configuration (Table-driven where the source experiments pin
/// them: 1 GHz bandwidth, 30 dBm TX power).
#[derive(Debug, Clone, PartialEq)]
pub struct MmWaveParams {
    pub band: Band,
    pub tx_power_dbm: f64,
    pub beam_gain_db: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    /// Spectral-efficiency cap, bit/s/Hz.
    pub eff_cap: f64,
    /// Below this SNR no MCS decodes; capacity is zero.
    pub mcs_floor_db: f64,
    pub slot: crate::sim::SimTime,
    /// Fraction of slots serving each direction (TDD abstraction).
    pub duty: f64,
    /// PHY/MAC overhead fraction subtracted from the raw rate.
    pub overhead: f64,
    /// State probability shape parameters.
    pub a_los_m: f64,
    pub a_out_m: f64,
    pub b_out: f64,
    /// Log-distance pathloss coefficients per state.
    pub los_pl0_db: f64,
    pub los_exp10: f64,
    pub nlos_pl0_db: f64,
    pub nlos_exp10: f64,
    pub mm73_offset_db: f64,
    /// Block-shadowing standard deviations, redrawn on state change.
    pub sigma_los_db: f64,
    pub sigma_nlos_db: f64,
    /// State update period and mean sojourn (in periods).
    pub update_period: crate::sim::SimTime,
    pub mean_sojourn_periods: f64,
}

impl Default for MmWaveParams {
    fn default() -> Self {
        MmWaveParams {
            band: Band::Mm28,
            tx_power_dbm: 30.0,
            beam_gain_db: 30.0,
            noise_figure_db: 5.0,
            bandwidth_hz: 1e9,
            eff_cap: 7.5,
            mcs_floor_db: -5.0,
            slot: crate::sim::SimTime::from_micros(125),
            duty: 0.5,
            overhead: 0.15,
            a_los_m: 67.1,
            a_out_m: 30.0,
            b_out: 5.2,
            los_pl0_db: 61.4,
            los_exp10: 20.0,
            nlos_pl0_db: 72.0,
            nlos_exp10: 29.2,
            mm73_offset_db: 8.3,
            sigma_los_db: 5.8,
            sigma_nlos_db: 8.7,
            update_period: crate::sim::SimTime::from_millis(100),
            mean_sojourn_periods: 5.0,
        }
    }
}

impl MmWaveParams {
    /// Thermal noise floor plus noise figure, in dBm.
    pub fn noise_floor_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn sigma_db(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.sigma_los_db,
            LinkState::Nlos => self.sigma_nlos_db,
            LinkState::Outage => 0.0,
        }
    }
}

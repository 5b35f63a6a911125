//! Per-link channel evolution.
//!
//! The link state is re-evaluated once per update period. Statistical
//! mode steps a Markov chain built from the distance-dependent stationary
//! distribution; geometric mode moves the UE and tests sight-line
//! blockage against the deployed obstacles. Shadowing is redrawn only on
//! state changes (block shadowing), so capacity is constant within an
//! episode and the transport layer sees episode-scale swings rather than
//! per-slot jitter.

use super::{
    geometric_state, pathloss_db, slot_capacity, snr_db, state_probabilities, ChannelSample,
    LinkState, MarkovChain, MmWaveParams, MobilityState, Obstacle, Point,
};
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Clone)]
enum Mode {
    Statistical {
        distance_m: f64,
        chain: MarkovChain,
    },
    Geometric {
        enb: Point,
        mobility: MobilityState,
        obstacles: Vec<Obstacle>,
    },
}

#[derive(Debug, Clone)]
pub struct ChannelProcess {
    params: MmWaveParams,
    mode: Mode,
    state: LinkState,
    shadow_db: f64,
    sample: ChannelSample,
}

const STATES: [LinkState; 3] = [LinkState::Los, LinkState::Nlos, LinkState::Outage];

impl ChannelProcess {
    pub fn statistical(
        params: MmWaveParams,
        distance_m: f64,
        state_rng: &mut RngStream,
        shadow_rng: &mut RngStream,
    ) -> Self {
        let dist = state_probabilities(distance_m, &params);
        let chain = MarkovChain::new(&dist, params.mean_sojourn_periods, state_rng);
        let state = STATES[chain.state()];
        let mut p = ChannelProcess {
            params,
            mode: Mode::Statistical { distance_m, chain },
            state,
            shadow_db: 0.0,
            sample: ChannelSample {
                state,
                pathloss_db: 0.0,
                snr_db: 0.0,
                spectral_eff: 0.0,
                slot_capacity_bits: 0,
            },
        };
        p.redraw_shadow(shadow_rng);
        p.refresh_sample(SimTime::ZERO);
        p
    }

    pub fn geometric(
        params: MmWaveParams,
        enb: Point,
        mobility: MobilityState,
        obstacles: Vec<Obstacle>,
        shadow_rng: &mut RngStream,
    ) -> Self {
        let ue = mobility.position_at(SimTime::ZERO);
        let state = geometric_state(&ue, &enb, &obstacles);
        let mut p = ChannelProcess {
            params,
            mode: Mode::Geometric {
                enb,
                mobility,
                obstacles,
            },
            state,
            shadow_db: 0.0,
            sample: ChannelSample {
                state,
                pathloss_db: 0.0,
                snr_db: 0.0,
                spectral_eff: 0.0,
                slot_capacity_bits: 0,
            },
        };
        p.redraw_shadow(shadow_rng);
        p.refresh_sample(SimTime::ZERO);
        p
    }

    pub fn params(&self) -> &MmWaveParams {
        &self.params
    }

    pub fn update_period(&self) -> SimTime {
        self.params.update_period
    }

    pub fn state(&self) -> LinkState {
        self.state
    }

    /// Current per-slot sample for the data direction share `duty`.
    pub fn sample(&self) -> ChannelSample {
        self.sample
    }

    fn distance_at(&self, now: SimTime) -> f64 {
        match &self.mode {
            Mode::Statistical { distance_m, .. } => *distance_m,
            Mode::Geometric { enb, mobility, .. } => mobility.position_at(now).distance(enb),
        }
    }

    fn redraw_shadow(&mut self, shadow_rng: &mut RngStream) {
        let sigma = self.params.sigma_db(self.state);
        self.shadow_db = if sigma > 0.0 {
            shadow_rng.normal(0.0, sigma)
        } else {
            0.0
        };
    }

    fn refresh_sample(&mut self, now: SimTime) {
        let d = self.distance_at(now).max(1.0);
        self.sample = match self.state {
            LinkState::Outage => ChannelSample {
                state: LinkState::Outage,
                pathloss_db: f64::INFINITY,
                snr_db: f64::NEG_INFINITY,
                spectral_eff: 0.0,
                slot_capacity_bits: 0,
            },
            s => {
                let pl = pathloss_db(s, d, self.params.band, self.shadow_db, &self.params);
                let snr = snr_db(pl, &self.params);
                let bits = slot_capacity(
                    snr,
                    self.params.slot,
                    self.params.duty,
                    self.params.overhead,
                    &self.params,
                );
                let eff = if bits == 0 {
                    0.0
                } else {
                    (1.0 + 10f64.powf(snr / 10.0)).log2().min(self.params.eff_cap)
                };
                ChannelSample {
                    state: s,
                    pathloss_db: pl,
                    snr_db: snr,
                    spectral_eff: eff,
                    slot_capacity_bits: bits,
                }
            }
        };
    }

    /// Advance one update period. Returns the new sample.
    pub fn step(
        &mut self,
        now: SimTime,
        state_rng: &mut RngStream,
        shadow_rng: &mut RngStream,
    ) -> ChannelSample {
        let new_state = match &mut self.mode {
            Mode::Statistical { chain, .. } => STATES[chain.step(state_rng)],
            Mode::Geometric {
                enb,
                mobility,
                obstacles,
            } => {
                let ue = mobility.position_at(now);
                geometric_state(&ue, enb, obstacles)
            }
        };
        if new_state != self.state {
            self.state = new_state;
            self.redraw_shadow(shadow_rng);
        }
        self.refresh_sample(now);
        self.sample
    }
}

//! Simplified LTE link: fixed capacity, loss-free, fixed one-way radio
//! latency. The experiments only rely on LTE being bounded in rate and
//! reliable, so nothing finer is modeled.

use super::{ChannelSample, LinkState};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LteDirection {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LteParams {
    pub uplink_bps: f64,
    pub downlink_bps: f64,
    pub one_way_latency: SimTime,
    pub buffer_bytes: u64,
}

impl Default for LteParams {
    fn default() -> Self {
        LteParams {
            uplink_bps: 75e6,
            downlink_bps: 150e6,
            one_way_latency: SimTime::from_millis(10),
            buffer_bytes: 2 * 1024 * 1024,
        }
    }
}

impl LteParams {
    pub fn rate_bps(&self, dir: LteDirection) -> f64 {
        match dir {
            LteDirection::Uplink => self.uplink_bps,
            LteDirection::Downlink => self.downlink_bps,
        }
    }
}

/// Per-slot view of the LTE link; always LOS, never in outage.
pub fn lte_sample(direction: LteDirection, slot: SimTime, p: &LteParams) -> ChannelSample {
    let rate = p.rate_bps(direction);
    ChannelSample {
        state: LinkState::Los,
        pathloss_db: 0.0,
        snr_db: f64::INFINITY,
        spectral_eff: rate / 20e6,
        slot_capacity_bits: (rate * slot.as_secs_f64()).floor() as u64,
    }
}

//! Single-path TCP: segments, RTT estimation, congestion-control math,
//! and the sender/receiver flow mechanics shared with MP-TCP subflows.

mod cc;
mod flow;
mod rtt;
mod segment;

pub use cc::{reno_ca_increase_mss, CcKind, CubicState, CUBIC_BETA, CUBIC_C};
pub use flow::{AckResult, FlowRx, Phase, TcpFlow};
pub use rtt::RttEstimator;
pub use segment::{FlowId, Segment, SegmentKind, HEADER_BYTES};

use crate::sim::SimTime;

/// Endpoint configuration shared by every flow of a connection.
#[derive(Debug, Clone, PartialEq)]
pub struct TcpConfig {
    pub mss: u32,
    pub init_cwnd_mss: u32,
    pub min_rto: SimTime,
    pub init_rto: SimTime,
    pub max_rto: SimTime,
    pub rwnd_bytes: u64,
    pub delayed_ack: bool,
    pub delack_timer: SimTime,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            mss: 1400,
            init_cwnd_mss: 10,
            min_rto: SimTime::from_millis(200),
            init_rto: SimTime::from_secs(1),
            max_rto: SimTime::from_secs(60),
            rwnd_bytes: 32 * 1024 * 1024,
            delayed_ack: false,
            delack_timer: SimTime::from_millis(40),
        }
    }
}

//! Link stack of one radio bearer: bounded PDCP ingress buffer, RLC
//! AM/UM segmentation and retransmission, and MAC slot scheduling with
//! parallel stop-and-wait HARQ processes.

mod bearer;
mod harq;
mod pdcp;
mod rlc_am;
mod rlc_um;

pub use bearer::{Bearer, Dir, LinkDeliveries, RadioLink, RlcRx, RlcTx};
pub use harq::{decode_outcome, HarqConfig, HarqPool, TransportBlock};
pub use pdcp::PdcpBuffer;
pub use rlc_am::{AmRx, AmTx, RadioLinkFailure, StatusPdu};
pub use rlc_um::{UmRx, UmTx};

use crate::tcp::Segment;

/// RLC operating mode of a bearer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlcMode {
    Am,
    Um,
}

/// One RLC data PDU: a slice of exactly one SDU. SDU slices occupy
/// consecutive sequence numbers, so in-order SN delivery reassembles
/// SDUs without an offset map.
#[derive(Debug, Clone, Copy)]
pub struct DataPdu {
    pub sn: u64,
    /// First byte of the slice within its SDU.
    pub offset: u32,
    /// Slice length in SDU wire bytes.
    pub len: u32,
    pub is_last: bool,
    /// The TCP segment the SDU carries.
    pub segment: Segment,
}

impl DataPdu {
    pub fn wire_bytes(&self, header_bytes: u32) -> u32 {
        self.len + header_bytes
    }
}

/// RLC-level configuration of one bearer.
#[derive(Debug, Clone, PartialEq)]
pub struct RlcConfig {
    pub mode: RlcMode,
    /// Wire SN space; the usable window is half of it.
    pub sn_modulus: u64,
    pub max_retx: u8,
    pub status_period: crate::sim::SimTime,
    pub t_reordering: crate::sim::SimTime,
    /// Transmitter-side stall detector: the window-base PDU counts as
    /// NACKed when unacknowledged for this long. Burns retransmission
    /// attempts during extended outages, which is what eventually declares
    /// a radio link failure.
    pub poll_retx: crate::sim::SimTime,
    pub header_bytes: u32,
    pub status_base_bytes: u32,
    pub status_nack_bytes: u32,
}

impl Default for RlcConfig {
    fn default() -> Self {
        RlcConfig {
            mode: RlcMode::Am,
            sn_modulus: 1024,
            max_retx: 5,
            status_period: crate::sim::SimTime::from_millis(5),
            t_reordering: crate::sim::SimTime::from_millis(10),
            poll_retx: crate::sim::SimTime::from_millis(80),
            header_bytes: 3,
            status_base_bytes: 4,
            status_nack_bytes: 2,
        }
    }
}

impl RlcConfig {
    pub fn tx_window(&self) -> u64 {
        self.sn_modulus / 2
    }
}

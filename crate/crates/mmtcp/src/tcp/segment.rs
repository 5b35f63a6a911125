//! The unit that crosses the stack: one TCP segment inside one IP packet.
//!
//! Payload bytes are simulated as counts only; a segment is a small Copy
//! struct so queues and blocks never allocate per packet.

use crate::sim::SimTime;

/// TCP/IP header overhead added to every packet on the wire.
pub const HEADER_BYTES: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Data,
    Ack,
}

/// Identifies one endpoint's flow within the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlowId {
    pub conn: u32,
    pub subflow: u8,
}

#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub flow: FlowId,
    pub kind: SegmentKind,
    /// Subflow-level sequence number of the first payload byte.
    pub seq: u64,
    /// Payload length in bytes; zero for a pure ACK.
    pub len: u32,
    /// Connection-level data sequence number of the first payload byte.
    pub dsn: u64,
    /// Cumulative subflow-level ACK (meaningful for `Ack` segments).
    pub ack: u64,
    /// When this byte range was first handed to the network.
    pub first_sent: SimTime,
    /// When this particular copy was sent (retransmissions differ).
    pub sent: SimTime,
    pub is_retx: bool,
}

impl Segment {
    pub fn wire_bytes(&self) -> u32 {
        self.len + HEADER_BYTES
    }

    pub fn seq_end(&self) -> u64 {
        self.seq + self.len as u64
    }
}

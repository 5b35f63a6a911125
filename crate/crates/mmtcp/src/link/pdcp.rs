//! Bounded drop-tail buffer at the bearer ingress. This is the single
//! queueing bound of a bearer; overflow here is what TCP perceives as
//! loss on an otherwise reliable AM bearer.

use crate::tcp::Segment;

#[derive(Debug, Clone)]
pub struct PdcpBuffer {
    capacity_bytes: u64,
    occupancy_bytes: u64,
    queue: std::collections::VecDeque<Segment>,
    // flow-conservation counters
    pub offered_bytes: u64,
    pub accepted_bytes: u64,
    pub dropped_bytes: u64,
    pub dropped_sdus: u64,
}

impl PdcpBuffer {
    pub fn new(capacity_bytes: u64) -> Self {
        PdcpBuffer {
            capacity_bytes,
            occupancy_bytes: 0,
            queue: std::collections::VecDeque::new(),
            offered_bytes: 0,
            accepted_bytes: 0,
            dropped_bytes: 0,
            dropped_sdus: 0,
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn occupancy_bytes(&self) -> u64 {
        self.occupancy_bytes
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Drop-tail enqueue: rejected iff it would exceed capacity.
    pub fn enqueue(&mut self, sdu: Segment) -> bool {
        let size = sdu.wire_bytes() as u64;
        self.offered_bytes += size;
        if self.occupancy_bytes + size > self.capacity_bytes {
            self.dropped_bytes += size;
            self.dropped_sdus += 1;
            return false;
        }
        self.occupancy_bytes += size;
        self.accepted_bytes += size;
        self.queue.push_back(sdu);
        true
    }

    pub fn dequeue(&mut self) -> Option<Segment> {
        let sdu = self.queue.pop_front()?;
        self.occupancy_bytes -= sdu.wire_bytes() as u64;
        Some(sdu)
    }

    /// Queueing delay a byte entering now would see at `drain_bps`.
    pub fn delay_at(&self, drain_bps: f64) -> f64 {
        if drain_bps <= 0.0 {
            return f64::INFINITY;
        }
        self.occupancy_bytes as f64 * 8.0 / drain_bps
    }
}

//! RLC Acknowledged Mode: ARQ with periodic status reports.
//!
//! The transmitter keeps a copy of every PDU until acknowledged,
//! retransmits NACKed PDUs ahead of new data, and declares radio link
//! failure once a PDU exhausts `max_retx` retransmissions. The receiver
//! reorders by sequence number and hands SDUs up in order, exactly once.

use std::collections::BTreeMap;

use super::{DataPdu, PdcpBuffer, RlcConfig};
use crate::sim::SimTime;
use crate::tcp::Segment;

/// Receiver status: cumulative ACK point plus the holes below it.
///
/// `ack_sn` is the SN after the highest received PDU; `nack_list` holds
/// the missing SNs below it, sorted.
#[derive(Debug, Clone)]
pub struct StatusPdu {
    pub ack_sn: u64,
    pub nack_list: Vec<u64>,
}

impl StatusPdu {
    pub fn wire_bytes(&self, cfg: &RlcConfig) -> u32 {
        cfg.status_base_bytes + cfg.status_nack_bytes * self.nack_list.len() as u32
    }
}

/// Bearer torn down: a PDU exceeded the retransmission budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadioLinkFailure;

#[derive(Debug, Clone)]
struct TxPdu {
    pdu: DataPdu,
    retx_count: u8,
    /// Queued for retransmission and not yet re-sent. Repeat NACKs for a
    /// PDU already queued must not burn extra attempts.
    awaiting_retx: bool,
    last_tx: SimTime,
}

/// Transmit side of an AM entity.
#[derive(Debug, Clone)]
pub struct AmTx {
    cfg: RlcConfig,
    next_sn: u64,
    /// Lowest unacknowledged SN (window base).
    una_sn: u64,
    unacked: BTreeMap<u64, TxPdu>,
    retx_queue: std::collections::VecDeque<u64>,
    /// SDU currently being segmented: (segment, bytes already sent).
    current: Option<(Segment, u32)>,
    failed: bool,
    pub retx_bytes: u64,
    pub new_bytes: u64,
}

impl AmTx {
    pub fn new(cfg: RlcConfig) -> Self {
        AmTx {
            cfg,
            next_sn: 0,
            una_sn: 0,
            unacked: BTreeMap::new(),
            retx_queue: std::collections::VecDeque::new(),
            current: None,
            failed: false,
            retx_bytes: 0,
            new_bytes: 0,
        }
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn window_stalled(&self) -> bool {
        self.next_sn >= self.una_sn + self.cfg.tx_window()
    }

    pub fn buffered_payload_bytes(&self) -> u64 {
        self.unacked
            .values()
            .map(|p| p.pdu.len as u64)
            .sum::<u64>()
    }

    pub fn has_work(&self, pdcp: &PdcpBuffer) -> bool {
        !self.retx_queue.is_empty()
            || self.current.is_some()
            || (!pdcp.is_empty() && !self.window_stalled())
    }

    /// Serve one MAC grant of `budget` bytes: retransmissions first, then
    /// new data pulled from the PDCP queue, segmented to fit.
    ///
    /// A retransmitted PDU is never re-segmented; the first PDU of a grant
    /// may overflow the budget so a shrunken grant cannot deadlock.
    pub fn on_grant(&mut self, mut budget: u32, pdcp: &mut PdcpBuffer, now: SimTime) -> Vec<DataPdu> {
        let mut out = Vec::new();
        if self.failed {
            return out;
        }
        let hdr = self.cfg.header_bytes;
        // retransmissions preempt new data
        while let Some(&sn) = self.retx_queue.front() {
            let entry = match self.unacked.get_mut(&sn) {
                Some(e) => e,
                None => {
                    // acknowledged while queued
                    self.retx_queue.pop_front();
                    continue;
                }
            };
            let cost = entry.pdu.wire_bytes(hdr);
            if cost > budget && !out.is_empty() {
                return out;
            }
            self.retx_queue.pop_front();
            entry.awaiting_retx = false;
            entry.last_tx = now;
            self.retx_bytes += entry.pdu.len as u64;
            budget = budget.saturating_sub(cost);
            out.push(entry.pdu);
            if budget == 0 {
                return out;
            }
        }
        // new data while the window is open
        while budget > hdr {
            if self.window_stalled() {
                break;
            }
            let (sdu, offset) = match self.current.take() {
                Some(cur) => cur,
                None => match pdcp.dequeue() {
                    Some(sdu) => (sdu, 0),
                    None => break,
                },
            };
            let total = sdu.wire_bytes();
            let remaining = total - offset;
            let take = remaining.min(budget - hdr);
            let is_last = offset + take == total;
            let pdu = DataPdu {
                sn: self.next_sn,
                offset,
                len: take,
                is_last,
                segment: sdu,
            };
            self.next_sn += 1;
            self.new_bytes += take as u64;
            self.unacked.insert(
                pdu.sn,
                TxPdu {
                    pdu,
                    retx_count: 0,
                    awaiting_retx: false,
                    last_tx: now,
                },
            );
            out.push(pdu);
            budget -= take + hdr;
            if !is_last {
                self.current = Some((sdu, offset + take));
            }
        }
        out
    }

    /// Apply a receiver status report.
    pub fn on_status(&mut self, status: &StatusPdu) -> Result<(), RadioLinkFailure> {
        if self.failed {
            return Err(RadioLinkFailure);
        }
        // purge everything acknowledged: below ack_sn and not NACKed
        let acked: Vec<u64> = self
            .unacked
            .range(..status.ack_sn)
            .map(|(&sn, _)| sn)
            .filter(|sn| !status.nack_list.contains(sn))
            .collect();
        for sn in acked {
            self.unacked.remove(&sn);
        }
        for &sn in &status.nack_list {
            if let Some(entry) = self.unacked.get_mut(&sn) {
                if !entry.awaiting_retx {
                    entry.retx_count += 1;
                    if entry.retx_count > self.cfg.max_retx {
                        self.failed = true;
                        return Err(RadioLinkFailure);
                    }
                    entry.awaiting_retx = true;
                    self.retx_queue.push_back(sn);
                }
            }
        }
        self.advance_window();
        Ok(())
    }

    /// Transmitter-side stall detection: treat the window-base PDU as
    /// NACKed when it has sat unacknowledged for `poll_retx`. During an
    /// extended outage this is the path that exhausts the retransmission
    /// budget and declares RLF.
    pub fn poll_stalled(&mut self, now: SimTime) -> Result<(), RadioLinkFailure> {
        if self.failed {
            return Err(RadioLinkFailure);
        }
        let base = match self.unacked.keys().next() {
            Some(&sn) => sn,
            None => return Ok(()),
        };
        let entry = self.unacked.get_mut(&base).unwrap();
        if !entry.awaiting_retx && now.saturating_sub(entry.last_tx) >= self.cfg.poll_retx {
            entry.retx_count += 1;
            if entry.retx_count > self.cfg.max_retx {
                self.failed = true;
                return Err(RadioLinkFailure);
            }
            entry.awaiting_retx = true;
            self.retx_queue.push_back(base);
        }
        Ok(())
    }

    fn advance_window(&mut self) {
        self.una_sn = match self.unacked.keys().next() {
            Some(&sn) => sn,
            None => self.next_sn,
        };
    }

    #[cfg(test)]
    fn outstanding(&self) -> usize {
        self.unacked.len()
    }
}

/// Receive side of an AM entity.
#[derive(Debug, Clone)]
pub struct AmRx {
    cfg: RlcConfig,
    /// Lowest SN not yet received (delivery frontier).
    rcv_next: u64,
    buffer: BTreeMap<u64, DataPdu>,
    last_reported_ack: u64,
    /// A duplicate arrived: the peer missed our last report, re-emit it.
    force_report: bool,
    pub delivered_sdus: u64,
    pub delivered_payload_bytes: u64,
}

impl AmRx {
    pub fn new(cfg: RlcConfig) -> Self {
        AmRx {
            cfg,
            rcv_next: 0,
            buffer: BTreeMap::new(),
            last_reported_ack: 0,
            force_report: false,
            delivered_sdus: 0,
            delivered_payload_bytes: 0,
        }
    }

    /// Buffer a PDU, then deliver every SDU completed by the new maximal
    /// in-order prefix. Duplicates and out-of-window SNs are discarded.
    pub fn on_pdu(&mut self, pdu: DataPdu) -> Vec<Segment> {
        if pdu.sn < self.rcv_next || self.buffer.contains_key(&pdu.sn) {
            self.force_report = true;
            return Vec::new();
        }
        if pdu.sn >= self.rcv_next + self.cfg.tx_window() {
            return Vec::new();
        }
        self.buffer.insert(pdu.sn, pdu);
        self.deliver_prefix()
    }

    fn deliver_prefix(&mut self) -> Vec<Segment> {
        let mut delivered = Vec::new();
        // walk the contiguous prefix; an SDU completes at its last slice
        while let Some(pdu) = self.buffer.get(&self.rcv_next).copied() {
            if !pdu.is_last {
                // need every later slice of this SDU contiguous as well
                let mut sn = self.rcv_next + 1;
                let mut complete = false;
                while let Some(next) = self.buffer.get(&sn) {
                    if next.is_last {
                        complete = true;
                        break;
                    }
                    sn += 1;
                }
                if !complete {
                    break;
                }
                // drop the slice entries through the last one
                for s in self.rcv_next..=sn {
                    self.buffer.remove(&s);
                }
                self.rcv_next = sn + 1;
            } else {
                self.buffer.remove(&self.rcv_next);
                self.rcv_next += 1;
            }
            self.delivered_sdus += 1;
            self.delivered_payload_bytes += pdu.segment.wire_bytes() as u64;
            delivered.push(pdu.segment);
        }
        delivered
    }

    /// Highest received SN plus one, or the frontier if nothing is
    /// buffered above it.
    pub fn ack_sn(&self) -> u64 {
        match self.buffer.keys().next_back() {
            Some(&hi) => hi + 1,
            None => self.rcv_next,
        }
    }

    /// Build a status report. Returns None when there is nothing new to
    /// report (saves reverse-link capacity at idle).
    pub fn status(&mut self) -> Option<StatusPdu> {
        let ack_sn = self.ack_sn();
        let nack_list: Vec<u64> = (self.rcv_next..ack_sn)
            .filter(|sn| !self.buffer.contains_key(sn))
            .collect();
        if ack_sn == self.last_reported_ack && nack_list.is_empty() && !self.force_report {
            return None;
        }
        self.force_report = false;
        self.last_reported_ack = ack_sn;
        Some(StatusPdu { ack_sn, nack_list })
    }
}

//! RLC Unacknowledged Mode: segmentation and short reordering, no
//! retransmission. Whatever HARQ fails to deliver is lost; the reordering
//! timer bounds how long delivery waits on a gap before skipping it.

use std::collections::BTreeMap;

use super::{DataPdu, PdcpBuffer, RlcConfig};
use crate::sim::SimTime;
use crate::tcp::Segment;

/// Transmit side: identical segmentation to AM, but no copies are kept
/// and nothing is ever retransmitted.
#[derive(Debug, Clone)]
pub struct UmTx {
    cfg: RlcConfig,
    next_sn: u64,
    current: Option<(Segment, u32)>,
    pub new_bytes: u64,
}

impl UmTx {
    pub fn new(cfg: RlcConfig) -> Self {
        UmTx {
            cfg,
            next_sn: 0,
            current: None,
            new_bytes: 0,
        }
    }

    pub fn has_work(&self, pdcp: &PdcpBuffer) -> bool {
        self.current.is_some() || !pdcp.is_empty()
    }

    pub fn on_grant(&mut self, mut budget: u32, pdcp: &mut PdcpBuffer) -> Vec<DataPdu> {
        let hdr = self.cfg.header_bytes;
        let mut out = Vec::new();
        while budget > hdr {
            let (sdu, offset) = match self.current.take() {
                Some(cur) => cur,
                None => match pdcp.dequeue() {
                    Some(sdu) => (sdu, 0),
                    None => break,
                },
            };
            let total = sdu.wire_bytes();
            let take = (total - offset).min(budget - hdr);
            let is_last = offset + take == total;
            out.push(DataPdu {
                sn: self.next_sn,
                offset,
                len: take,
                is_last,
                segment: sdu,
            });
            self.next_sn += 1;
            self.new_bytes += take as u64;
            budget -= take + hdr;
            if !is_last {
                self.current = Some((sdu, offset + take));
            }
        }
        out
    }
}

/// Receive side with a t-Reordering window.
#[derive(Debug, Clone)]
pub struct UmRx {
    cfg: RlcConfig,
    rcv_next: u64,
    buffer: BTreeMap<u64, DataPdu>,
    /// Deadline of the running reordering timer, if any.
    pub reorder_deadline: Option<SimTime>,
    pub delivered_sdus: u64,
    pub lost_sdus: u64,
}

impl UmRx {
    pub fn new(cfg: RlcConfig) -> Self {
        UmRx {
            cfg,
            rcv_next: 0,
            buffer: BTreeMap::new(),
            reorder_deadline: None,
            delivered_sdus: 0,
            lost_sdus: 0,
        }
    }

    pub fn on_pdu(&mut self, pdu: DataPdu, now: SimTime) -> Vec<Segment> {
        if pdu.sn < self.rcv_next || self.buffer.contains_key(&pdu.sn) {
            return Vec::new();
        }
        self.buffer.insert(pdu.sn, pdu);
        let delivered = self.deliver_prefix();
        match self.buffer.keys().next() {
            Some(&sn) if sn > self.rcv_next => {
                // a gap exists; make sure a timer is running
                if self.reorder_deadline.is_none() {
                    self.reorder_deadline = Some(now + self.cfg.t_reordering);
                }
            }
            _ => self.reorder_deadline = None,
        }
        delivered
    }

    /// Timer expiry: skip past the gap and deliver what follows. SDUs
    /// with missing slices are dropped and surface as loss upstream.
    pub fn on_reorder_expiry(&mut self, now: SimTime) -> Vec<Segment> {
        self.reorder_deadline = None;
        let next_present = match self.buffer.keys().next() {
            Some(&sn) => sn,
            None => return Vec::new(),
        };
        if next_present > self.rcv_next {
            self.rcv_next = next_present;
        }
        // a leading partial SDU (offset > 0 or lost first slices) cannot
        // reassemble; drop slices until an SDU boundary
        while let Some(pdu) = self.buffer.get(&self.rcv_next).copied() {
            if pdu.offset == 0 {
                break;
            }
            self.buffer.remove(&self.rcv_next);
            self.rcv_next += 1;
            if pdu.is_last {
                self.lost_sdus += 1;
            }
        }
        let delivered = self.deliver_prefix();
        if self.buffer.keys().next().is_some() {
            self.reorder_deadline = Some(now + self.cfg.t_reordering);
        }
        delivered
    }

    fn deliver_prefix(&mut self) -> Vec<Segment> {
        let mut delivered = Vec::new();
        while let Some(pdu) = self.buffer.get(&self.rcv_next).copied() {
            if pdu.offset != 0 {
                break;
            }
            if !pdu.is_last {
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
                for s in self.rcv_next..=sn {
                    self.buffer.remove(&s);
                }
                self.rcv_next = sn + 1;
            } else {
                self.buffer.remove(&self.rcv_next);
                self.rcv_next += 1;
            }
            self.delivered_sdus += 1;
            delivered.push(pdu.segment);
        }
        delivered
    }
}

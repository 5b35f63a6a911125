//! One radio link = a channel process plus an uplink and a downlink
//! bearer. Each bearer owns its PDCP buffer, RLC transmitter (local
//! node) and RLC receiver (peer node), and a HARQ pool. Status reports
//! generated by a bearer's receiver travel on the reverse bearer with
//! priority over data.

use super::harq::{BlockPdu, FeedbackOutcome};
use super::{
    decode_outcome, AmRx, AmTx, HarqConfig, HarqPool, PdcpBuffer, RlcConfig, RlcMode, StatusPdu,
    TransportBlock, UmRx, UmTx,
};
use crate::channel::ChannelProcess;
use crate::sim::{RngStream, SimTime};
use crate::tcp::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Ul = 0,
    Dl = 1,
}

impl Dir {
    pub fn opposite(self) -> Dir {
        match self {
            Dir::Ul => Dir::Dl,
            Dir::Dl => Dir::Ul,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug)]
pub enum RlcTx {
    Am(AmTx),
    Um(UmTx),
}

#[derive(Debug)]
pub enum RlcRx {
    Am(AmRx),
    Um(UmRx),
}

#[derive(Debug)]
pub struct Bearer {
    pub pdcp: PdcpBuffer,
    pub tx: RlcTx,
    pub rx: RlcRx,
    pub harq: HarqPool,
    /// Status PDUs to carry in this direction (for the reverse bearer).
    pending_status: std::collections::VecDeque<StatusPdu>,
    pub delivered_segments: u64,
    pub delivered_payload_bytes: u64,
}

impl Bearer {
    fn new(rlc_cfg: &RlcConfig, harq_cfg: &HarqConfig, buffer_bytes: u64) -> Self {
        let (tx, rx) = match rlc_cfg.mode {
            RlcMode::Am => (
                RlcTx::Am(AmTx::new(rlc_cfg.clone())),
                RlcRx::Am(AmRx::new(rlc_cfg.clone())),
            ),
            RlcMode::Um => (
                RlcTx::Um(UmTx::new(rlc_cfg.clone())),
                RlcRx::Um(UmRx::new(rlc_cfg.clone())),
            ),
        };
        Bearer {
            pdcp: PdcpBuffer::new(buffer_bytes),
            tx,
            rx,
            harq: HarqPool::new(harq_cfg.processes),
            pending_status: std::collections::VecDeque::new(),
            delivered_segments: 0,
            delivered_payload_bytes: 0,
        }
    }

    fn tx_has_work(&self) -> bool {
        match &self.tx {
            RlcTx::Am(am) => am.has_work(&self.pdcp),
            RlcTx::Um(um) => um.has_work(&self.pdcp),
        }
    }

    /// Reordering-timer deadline of the UM receiver, if armed.
    pub fn um_deadline(&self) -> Option<SimTime> {
        match &self.rx {
            RlcRx::Um(um) => um.reorder_deadline,
            RlcRx::Am(_) => None,
        }
    }
}

/// What a feedback or timer event produced for the upper layers.
#[derive(Debug, Default)]
pub struct LinkDeliveries {
    pub segments: Vec<Segment>,
    pub rlf: bool,
}

#[derive(Debug)]
pub struct RadioLink {
    pub channel: ChannelProcess,
    bearers: [Bearer; 2],
    pub rlc_cfg: RlcConfig,
    pub harq_cfg: HarqConfig,
    pub failed: bool,
}

impl RadioLink {
    pub fn new(
        channel: ChannelProcess,
        rlc_cfg: RlcConfig,
        harq_cfg: HarqConfig,
        buffer_bytes: [u64; 2],
    ) -> Self {
        let bearers = [
            Bearer::new(&rlc_cfg, &harq_cfg, buffer_bytes[0]),
            Bearer::new(&rlc_cfg, &harq_cfg, buffer_bytes[1]),
        ];
        RadioLink {
            channel,
            bearers,
            rlc_cfg,
            harq_cfg,
            failed: false,
        }
    }

    pub fn bearer(&self, dir: Dir) -> &Bearer {
        &self.bearers[dir.index()]
    }

    pub fn bearer_mut(&mut self, dir: Dir) -> &mut Bearer {
        &mut self.bearers[dir.index()]
    }

    /// Hand an IP packet to the bearer ingress. Returns false on drop
    /// (buffer full or failed link): the packet simply vanishes, exactly
    /// what the transport layer perceives as loss.
    pub fn enqueue(&mut self, dir: Dir, segment: Segment) -> bool {
        if self.failed {
            return false;
        }
        self.bearers[dir.index()].pdcp.enqueue(segment)
    }

    /// Current drain rate of one direction, bits per second.
    pub fn rate_bps(&self) -> f64 {
        let sample = self.channel.sample();
        sample.slot_capacity_bits as f64 / self.channel.params().slot.as_secs_f64()
    }

    /// One TDD slot: each direction launches at most one transport block.
    /// Returns the processes now awaiting decode feedback.
    pub fn slot_tick(&mut self, now: SimTime) -> Vec<(Dir, u8)> {
        let mut launched = Vec::new();
        if self.failed {
            return launched;
        }
        let sample = self.channel.sample();
        if sample.slot_capacity_bits == 0 {
            return launched;
        }
        for dir in [Dir::Ul, Dir::Dl] {
            if let Some(proc) = self.slot_grant(dir, sample.slot_capacity_bits, sample.snr_db, now)
            {
                launched.push((dir, proc));
            }
        }
        launched
    }

    fn slot_grant(&mut self, dir: Dir, capacity_bits: u64, snr_db: f64, now: SimTime) -> Option<u8> {
        let bearer = &mut self.bearers[dir.index()];
        // retransmissions occupy the slot ahead of any new block
        if bearer.harq.has_retx_pending() {
            return bearer.harq.start_retx(snr_db);
        }
        bearer.harq.idle_process()?;
        if bearer.pending_status.is_empty() && !bearer.tx_has_work() {
            return None;
        }
        let mut budget = (capacity_bits / 8) as u32;
        let mut pdus: Vec<BlockPdu> = Vec::new();
        let mut bits: u64 = 0;
        while let Some(status) = bearer.pending_status.front() {
            let cost = status.wire_bytes(&self.rlc_cfg);
            if cost > budget && !pdus.is_empty() {
                break;
            }
            let status = bearer.pending_status.pop_front().unwrap();
            bits += cost as u64 * 8;
            budget = budget.saturating_sub(cost);
            pdus.push(BlockPdu::Status(status));
        }
        if budget > 0 {
            let data = match &mut bearer.tx {
                RlcTx::Am(am) => am.on_grant(budget, &mut bearer.pdcp, now),
                RlcTx::Um(um) => um.on_grant(budget, &mut bearer.pdcp),
            };
            for pdu in data {
                bits += pdu.wire_bytes(self.rlc_cfg.header_bytes) as u64 * 8;
                pdus.push(BlockPdu::Data(pdu));
            }
        }
        if pdus.is_empty() {
            return None;
        }
        let proc = bearer.harq.idle_process().expect("checked above");
        bearer.harq.start_new(
            proc,
            TransportBlock {
                bits,
                pdus,
                attempt: 1,
                snr_db,
            },
        );
        Some(proc)
    }

    /// Decode feedback for a block launched `feedback_slots` ago.
    pub fn on_feedback(
        &mut self,
        dir: Dir,
        proc: u8,
        rng: &mut RngStream,
        _now: SimTime,
    ) -> LinkDeliveries {
        let mut out = LinkDeliveries::default();
        if self.failed {
            return out;
        }
        let bearer = &mut self.bearers[dir.index()];
        let snr = match bearer.harq.block_of(proc) {
            Some(b) => b.snr_db,
            None => return out,
        };
        let attempt = bearer.harq.block_of(proc).unwrap().attempt;
        let decode = decode_outcome(rng, snr, attempt, &self.harq_cfg);
        match bearer.harq.on_feedback(proc, decode, self.harq_cfg.max_tx) {
            FeedbackOutcome::Requeued | FeedbackOutcome::Dropped(_) => {}
            FeedbackOutcome::Delivered(block) => {
                for pdu in block.pdus {
                    match pdu {
                        BlockPdu::Data(data) => {
                            let bearer = &mut self.bearers[dir.index()];
                            let delivered = match &mut bearer.rx {
                                RlcRx::Am(am) => am.on_pdu(data),
                                RlcRx::Um(um) => um.on_pdu(data, _now),
                            };
                            for seg in delivered {
                                bearer.delivered_segments += 1;
                                bearer.delivered_payload_bytes += seg.len as u64;
                                out.segments.push(seg);
                            }
                        }
                        BlockPdu::Status(status) => {
                            // a status travelling in `dir` reports on data
                            // of the reverse bearer
                            let rev = &mut self.bearers[dir.opposite().index()];
                            if let RlcTx::Am(am) = &mut rev.tx {
                                if am.on_status(&status).is_err() {
                                    self.failed = true;
                                    out.rlf = true;
                                    return out;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Periodic status machinery: emit receiver reports onto the reverse
    /// direction and run the transmitter stall detector.
    pub fn status_tick(&mut self, now: SimTime) -> LinkDeliveries {
        let mut out = LinkDeliveries::default();
        if self.failed {
            return out;
        }
        for dir in [Dir::Ul, Dir::Dl] {
            let status = match &mut self.bearers[dir.index()].rx {
                RlcRx::Am(am) => am.status(),
                RlcRx::Um(_) => None,
            };
            if let Some(status) = status {
                self.bearers[dir.opposite().index()]
                    .pending_status
                    .push_back(status);
            }
            if let RlcTx::Am(am) = &mut self.bearers[dir.index()].tx {
                if am.poll_stalled(now).is_err() {
                    self.failed = true;
                    out.rlf = true;
                    return out;
                }
            }
        }
        out
    }

    /// Expire the UM reordering timer of one direction, if due.
    pub fn um_expire(&mut self, dir: Dir, now: SimTime) -> LinkDeliveries {
        let mut out = LinkDeliveries::default();
        let bearer = &mut self.bearers[dir.index()];
        if let RlcRx::Um(um) = &mut bearer.rx {
            if um.reorder_deadline.is_some_and(|d| d <= now) {
                for seg in um.on_reorder_expiry(now) {
                    bearer.delivered_segments += 1;
                    bearer.delivered_payload_bytes += seg.len as u64;
                    out.segments.push(seg);
                }
            }
        }
        out
    }
}

//! The (MP-)TCP connection: per-subflow TCP flows, the connection-level
//! data-sequence space with exactly-once in-order reassembly, and the
//! congestion controller (uncoupled NewReno/CUBIC or coupled
//! LIA/OLIA/BALIA). A single-path connection is the one-subflow case of
//! the same machinery.

use std::collections::{BTreeMap, VecDeque};

use super::coupled::{
    balia_decrease_fraction, balia_increase, lia_increase, olia_increase, PathView,
};

use crate::sim::SimTime;
use crate::tcp::{
    reno_ca_increase_mss, AckResult, FlowId, FlowRx, Phase, Segment, SegmentKind, TcpConfig,
    TcpFlow,
};

/// Connection-level congestion controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnCc {
    NewReno,
    Cubic,
    Lia,
    Olia,
    Balia,
}

impl ConnCc {
    pub fn is_coupled(self) -> bool {
        matches!(self, ConnCc::Lia | ConnCc::Olia | ConnCc::Balia)
    }
}

/// One subflow: sender flow state, receiver ACK state, and the map from
/// subflow bytes to connection data-sequence ranges.
#[derive(Debug)]
pub struct Subflow {
    pub flow: TcpFlow,
    pub rx: FlowRx,
    /// sub_seq start -> (dsn, len); purged below snd_una.
    mapping: BTreeMap<u64, (u64, u64)>,
    /// Sub-seq below which unacked data has already been handed to the
    /// remap pool (failover must not duplicate endlessly).
    remap_watermark: u64,
}

impl Subflow {
    fn new(id: FlowId, cfg: &TcpConfig, established: bool) -> Self {
        Subflow {
            flow: TcpFlow::new(id, cfg, established),
            rx: FlowRx::new(cfg),
            mapping: BTreeMap::new(),
            remap_watermark: 0,
        }
    }

    /// The dsn corresponding to a sub-seq position, with the chunk length
    /// available before the next mapping boundary.
    fn dsn_at(&self, sub_seq: u64) -> Option<(u64, u64)> {
        let (&start, &(dsn, len)) = self.mapping.range(..=sub_seq).next_back()?;
        let off = sub_seq - start;
        if off >= len {
            return None;
        }
        Some((dsn + off, len - off))
    }

    fn purge_acked_mappings(&mut self) {
        let una = self.flow.snd_una;
        while let Some((&start, &(_, len))) = self.mapping.first_key_value() {
            if start + len <= una {
                self.mapping.remove(&start);
            } else {
                break;
            }
        }
    }
}

/// A dsn range handed to the application, attributed to the subflow that
/// delivered the winning copy.
#[derive(Debug, Clone, Copy)]
pub struct DeliveredChunk {
    pub dsn: u64,
    pub bytes: u64,
    pub subflow: u8,
    pub first_sent: SimTime,
}

#[derive(Debug, Default)]
pub struct DataResult {
    pub ack: Option<Segment>,
    pub delivered: Vec<DeliveredChunk>,
    pub completed: bool,
}

#[derive(Debug)]
pub struct Connection {
    pub pump_emits: u64,
    pub pump_calls: u64,
    pub id: u32,
    pub cc: ConnCc,
    pub cfg: TcpConfig,
    pub subflows: Vec<Subflow>,
    /// Next fresh connection-level byte to assign.
    pub next_dsn: u64,
    /// Total application bytes to transfer (u64::MAX = unbounded bulk).
    pub app_limit: u64,
    /// dsn ranges awaiting (re)assignment after failover.
    remap_pool: VecDeque<(u64, u64)>,
    // receiver side
    pub meta_rcv_nxt: u64,
    meta_ooo: BTreeMap<u64, (u64, u8, SimTime)>,
    pub completed_at: Option<SimTime>,
    // controller bookkeeping
    pub cc_updates: u64,
    pub lia_clamp_violations: u64,
}

impl Connection {
    pub fn new(id: u32, cc: ConnCc, cfg: TcpConfig, n_subflows: u8, app_limit: u64) -> Self {
        let subflows = (0..n_subflows)
            .map(|s| {
                Subflow::new(
                    FlowId {
                        conn: id,
                        subflow: s,
                    },
                    &cfg,
                    s == 0,
                )
            })
            .collect();
        Connection {
            pump_emits: 0,
            pump_calls: 0,
            id,
            cc,
            cfg,
            subflows,
            next_dsn: 0,
            app_limit,
            remap_pool: VecDeque::new(),
            meta_rcv_nxt: 0,
            meta_ooo: BTreeMap::new(),
            completed_at: None,
            cc_updates: 0,
            lia_clamp_violations: 0,
        }
    }

    pub fn establish_subflow(&mut self, sub: usize) {
        self.subflows[sub].flow.established = true;
    }

    pub fn delivered_bytes(&self) -> u64 {
        self.meta_rcv_nxt
    }

    pub fn app_bytes_remaining(&self) -> u64 {
        self.app_limit.saturating_sub(self.next_dsn)
    }

    fn meta_window_open(&self) -> bool {
        self.next_dsn - self.meta_rcv_nxt < self.cfg.rwnd_bytes
    }

    fn has_fresh_or_remap_data(&self) -> bool {
        !self.remap_pool.is_empty() || (self.app_bytes_remaining() > 0 && self.meta_window_open())
    }

    /// Pull the next dsn chunk to transmit, remapped ranges first.
    fn next_chunk(&mut self, max_len: u64) -> Option<(u64, u64)> {
        if let Some(front) = self.remap_pool.front_mut() {
            let (s, e) = *front;
            let len = max_len.min(e - s);
            if s + len >= e {
                self.remap_pool.pop_front();
            } else {
                front.0 = s + len;
            }
            return Some((s, len));
        }
        if !self.meta_window_open() {
            return None;
        }
        let remaining = self.app_bytes_remaining();
        if remaining == 0 {
            return None;
        }
        let len = max_len.min(remaining);
        let dsn = self.next_dsn;
        self.next_dsn += len;
        Some((dsn, len))
    }

    /// Emit everything the windows and scheduler allow right now.
    pub fn pump(&mut self, now: SimTime) -> Vec<(usize, Segment)> {
        self.pump_calls += 1;
        let mss = self.cfg.mss as u64;
        let mut out = Vec::new();
        // per-subflow retransmissions go out first, on their own path
        for s in 0..self.subflows.len() {
            loop {
                {
                    // while recovering, cycle the sweep over the still
                    // unacknowledged window until the hole set is gone
                    let flow = &mut self.subflows[s].flow;
                    if flow.phase == Phase::FastRecovery
                        && flow.rtx_next >= flow.recover
                        && flow.snd_una < flow.recover
                    {
                        flow.rtx_next = flow.snd_una;
                    }
                }
                let flow = &self.subflows[s].flow;
                if flow.dead || !flow.established || !flow.has_retransmit_pending() {
                    break;
                }
                let space = flow.window_space();
                let need = mss.min(flow.snd_nxt - flow.rtx_next);
                if space < need {
                    break;
                }
                match self.retx_segment_at(s, self.subflows[s].flow.rtx_next, need, now) {
                    Some(seg) => {
                        self.subflows[s].flow.rtx_next = seg.seq_end();
                        out.push((s, seg));
                    }
                    None => break,
                }
            }
        }
        self.pump_emits += out.len() as u64;
        // fresh data through the min-RTT scheduler
        loop {
            if !self.has_fresh_or_remap_data() {
                break;
            }
            let flows: Vec<&TcpFlow> = self.subflows.iter().map(|s| &s.flow).collect();
            // a full segment unless the source runs short
            let want = mss.min(self.source_head_len().unwrap_or(mss)).max(1);
            let s = match scheduler_pick_ref(&flows, want) {
                Some(s) => s,
                None => break,
            };
            let (dsn, len) = match self.next_chunk(want) {
                Some(c) => c,
                None => break,
            };
            let sub = &mut self.subflows[s];
            let seq = sub.flow.snd_nxt;
            sub.mapping.insert(seq, (dsn, len));
            sub.flow.snd_nxt += len;
            sub.flow.rtx_next = sub.flow.rtx_next.max(seq + len);
            let seg = sub.flow.emit(seq, len as u32, dsn, now, false);
            out.push((s, seg));
        }
        out
    }

    /// Length available at the head of the send source (remap or fresh).
    fn source_head_len(&self) -> Option<u64> {
        if let Some(&(s, e)) = self.remap_pool.front() {
            return Some(e - s);
        }
        let remaining = self.app_bytes_remaining();
        (remaining > 0 && self.meta_window_open()).then_some(remaining)
    }

    /// Build a retransmission segment at `sub_seq`, clipped to mapping
    /// boundaries (each segment carries one contiguous dsn chunk).
    fn retx_segment_at(
        &mut self,
        s: usize,
        sub_seq: u64,
        max_len: u64,
        now: SimTime,
    ) -> Option<Segment> {
        let sub = &mut self.subflows[s];
        let snd_nxt = sub.flow.snd_nxt;
        if sub_seq >= snd_nxt {
            return None;
        }
        let (dsn, run) = sub.dsn_at(sub_seq)?;
        let len = max_len.min(run).min(snd_nxt - sub_seq).max(1) as u32;
        Some(sub.flow.emit(sub_seq, len, dsn, now, true))
    }

    /// Unconditional retransmission of the hole at snd_una (fast
    /// retransmit and RTO recovery ignore window space).
    fn force_retransmit_hole(&mut self, s: usize, now: SimTime) -> Option<(usize, Segment)> {
        let mss = self.cfg.mss as u64;
        let una = self.subflows[s].flow.snd_una;
        let seg = self.retx_segment_at(s, una, mss, now)?;
        let sub = &mut self.subflows[s];
        sub.flow.rtx_next = sub.flow.rtx_next.max(seg.seq_end());
        Some((s, seg))
    }

    /// A data segment arrived at the receiver endpoint over subflow `s`.
    pub fn on_data(&mut self, s: usize, seg: &Segment, now: SimTime) -> DataResult {
        debug_assert_eq!(seg.kind, SegmentKind::Data);
        let ack_now = self.subflows[s].rx.on_data(seg, now);
        let delivered = self.meta_insert(seg.dsn, seg.len as u64, s as u8, seg.first_sent);
        if self.completed_at.is_none() && self.app_limit != u64::MAX {
            if self.meta_rcv_nxt >= self.app_limit {
                self.completed_at = Some(now);
            }
        }
        DataResult {
            ack: ack_now.then(|| self.make_ack(s, now)),
            delivered,
            completed: self.completed_at.is_some(),
        }
    }

    pub fn make_ack(&self, s: usize, now: SimTime) -> Segment {
        Segment {
            flow: FlowId {
                conn: self.id,
                subflow: s as u8,
            },
            kind: SegmentKind::Ack,
            seq: 0,
            len: 0,
            dsn: 0,
            ack: self.subflows[s].rx.rcv_nxt,
            first_sent: now,
            sent: now,
            is_retx: false,
        }
    }

    /// An ACK arrived back at the sender endpoint for subflow `s`.
    /// Returns retransmissions to send immediately; the caller pumps
    /// afterwards.
    pub fn on_ack(&mut self, s: usize, ack_seq: u64, now: SimTime) -> Vec<(usize, Segment)> {
        let mut out = Vec::new();
        if self.subflows[s].flow.dead {
            return out;
        }
        match self.subflows[s].flow.on_ack(ack_seq, now) {
            AckResult::Stale => {}
            AckResult::Dup { third } => {
                if third {
                    self.loss_event(s);
                    out.extend(self.force_retransmit_hole(s, now));
                }
            }
            AckResult::Advanced {
                acked_bytes,
                fr_partial,
                ..
            } => {
                self.subflows[s].purge_acked_mappings();
                if fr_partial {
                    // a partial ACK means several holes: without SACK the
                    // per-hole cadence would take one RTT each, so resend
                    // the window from the hole (the receiver discards
                    // what it already has). One sweep at a time; holes the
                    // sweep misses restart it once it completes.
                    let flow = &mut self.subflows[s].flow;
                    if flow.rtx_next >= flow.recover {
                        flow.rtx_next = flow.snd_una;
                    }
                    out.extend(self.force_retransmit_hole(s, now));
                } else if self.subflows[s].flow.phase != Phase::FastRecovery {
                    self.apply_increase(s, acked_bytes, now);
                }
            }
        }
        out
    }

    /// Retransmission timeout on subflow `s`.
    pub fn on_rto(&mut self, s: usize, now: SimTime) -> Vec<(usize, Segment)> {
        let mut out = Vec::new();
        if self.subflows[s].flow.dead {
            return out;
        }
        {
            let flow = &mut self.subflows[s].flow;
            flow.on_rto(now);
        }
        self.apply_loss_reduction_rto(s);
        out.extend(self.force_retransmit_hole(s, now));
        // a second consecutive timeout looks like path death: let the
        // other subflows carry the stranded data
        if self.subflows[s].flow.backoff >= 2 {
            self.failover_remap(s);
        }
        out
    }

    /// The bearer under subflow `s` failed for good.
    pub fn on_subflow_dead(&mut self, s: usize) {
        let flow = &mut self.subflows[s].flow;
        if flow.dead {
            return;
        }
        flow.dead = true;
        flow.rto_deadline = None;
        self.failover_remap(s);
    }

    fn alive_subflows(&self) -> usize {
        self.subflows
            .iter()
            .filter(|f| f.flow.established && !f.flow.dead)
            .count()
    }

    /// Push this subflow's not-yet-remapped unacked dsn ranges onto the
    /// remap pool so another subflow can carry them.
    fn failover_remap(&mut self, s: usize) {
        if self.alive_subflows() <= if self.subflows[s].flow.dead { 0 } else { 1 } {
            return;
        }
        let sub = &mut self.subflows[s];
        let lo = sub.flow.snd_una.max(sub.remap_watermark);
        let hi = sub.flow.snd_nxt;
        if lo >= hi {
            return;
        }
        let mut cursor = lo;
        while cursor < hi {
            match sub.dsn_at(cursor) {
                Some((dsn, run)) => {
                    let len = run.min(hi - cursor);
                    self.remap_pool.push_back((dsn, dsn + len));
                    cursor += len;
                }
                None => break,
            }
        }
        sub.remap_watermark = hi;
    }

    fn path_views(&self) -> (Vec<PathView>, Vec<usize>) {
        let mut views = Vec::new();
        let mut idx = Vec::new();
        for (i, sub) in self.subflows.iter().enumerate() {
            if sub.flow.established && !sub.flow.dead {
                views.push(PathView {
                    w_mss: sub.flow.cwnd_mss(),
                    rtt_s: sub.flow.srtt_s(),
                    bytes_since_loss: sub.flow.bytes_since_loss,
                });
                idx.push(i);
            }
        }
        (views, idx)
    }

    /// Multiplicative decrease on a triple-dupack loss event.
    fn loss_event(&mut self, s: usize) {
        self.subflows[s].flow.enter_fast_recovery();
        let mss = self.cfg.mss as f64;
        let cwnd = self.subflows[s].flow.cwnd;
        let new = match self.cc {
            ConnCc::NewReno | ConnCc::Lia | ConnCc::Olia => cwnd / 2.0,
            ConnCc::Cubic => {
                let w = self.subflows[s].flow.cubic.on_loss(cwnd / mss);
                w * mss
            }
            ConnCc::Balia => {
                let (views, idx) = self.path_views();
                match idx.iter().position(|&i| i == s) {
                    Some(vi) => cwnd * (1.0 - balia_decrease_fraction(&views, vi)),
                    None => cwnd / 2.0,
                }
            }
        };
        let flow = &mut self.subflows[s].flow;
        flow.ssthresh = new.max(mss);
        flow.cwnd = flow.ssthresh;
    }

    /// RTO already collapsed cwnd to 1 MSS; CUBIC additionally records the
    /// pre-collapse window as its saturation point.
    fn apply_loss_reduction_rto(&mut self, _s: usize) {}

    /// Window growth on newly acked bytes (slow start or CA).
    fn apply_increase(&mut self, s: usize, acked_bytes: u64, now: SimTime) {
        let mss = self.cfg.mss as f64;
        self.cc_updates += 1;
        match self.subflows[s].flow.phase {
            Phase::SlowStart => {
                let flow = &mut self.subflows[s].flow;
                flow.cwnd += (acked_bytes as f64).min(mss);
                flow.clamp_cwnd();
            }
            Phase::CongestionAvoidance => {
                let acked_mss = (acked_bytes as f64 / mss).min(1.0);
                let (views, idx) = self.path_views();
                let vi = idx.iter().position(|&i| i == s);
                let w_mss = self.subflows[s].flow.cwnd_mss();
                let delta_mss = match (self.cc, vi) {
                    (ConnCc::NewReno, _) => reno_ca_increase_mss(w_mss, acked_mss),
                    (ConnCc::Cubic, _) => {
                        let srtt = self.subflows[s].flow.srtt_s();
                        self.subflows[s]
                            .flow
                            .cubic
                            .ca_increase(w_mss, acked_mss, srtt, now)
                    }
                    (ConnCc::Lia, Some(vi)) => {
                        let d = lia_increase(&views, vi, acked_mss);
                        if d > acked_mss / w_mss + 1e-12 {
                            self.lia_clamp_violations += 1;
                        }
                        d
                    }
                    (ConnCc::Olia, Some(vi)) => olia_increase(&views, vi, acked_mss),
                    (ConnCc::Balia, Some(vi)) => balia_increase(&views, vi, acked_mss),
                    // subflow not in the active view (races around death)
                    (_, None) => reno_ca_increase_mss(w_mss, acked_mss),
                };
                let flow = &mut self.subflows[s].flow;
                flow.cwnd += delta_mss * mss;
                flow.clamp_cwnd();
            }
            Phase::FastRecovery => {}
        }
    }

    /// Exactly-once in-order reassembly at the connection level.
    /// Overlapping ranges keep the first-arrived copy.
    fn meta_insert(
        &mut self,
        dsn: u64,
        len: u64,
        subflow: u8,
        first_sent: SimTime,
    ) -> Vec<DeliveredChunk> {
        let mut delivered = Vec::new();
        if len == 0 {
            return delivered;
        }
        let end = dsn + len;
        let mut cursor = dsn.max(self.meta_rcv_nxt);
        if end <= cursor {
            return delivered;
        }
        // slot the new range into the gaps between existing spans
        let mut pieces = Vec::new();
        let overlaps: Vec<(u64, u64)> = self
            .meta_ooo
            .range(..end)
            .map(|(&s, &(e, _, _))| (s, e))
            .collect();
        for (os, oe) in overlaps {
            if oe <= cursor {
                continue;
            }
            if os > cursor {
                pieces.push((cursor, os.min(end)));
            }
            cursor = cursor.max(oe);
            if cursor >= end {
                break;
            }
        }
        if cursor < end {
            pieces.push((cursor, end));
        }
        for (ps, pe) in pieces {
            self.meta_ooo.insert(ps, (pe, subflow, first_sent));
        }
        // hand over the maximal in-order prefix
        while let Some((&fs, &(fe, fsub, fts))) = self.meta_ooo.first_key_value() {
            if fs != self.meta_rcv_nxt {
                debug_assert!(fs > self.meta_rcv_nxt);
                break;
            }
            self.meta_ooo.remove(&fs);
            self.meta_rcv_nxt = fe;
            delivered.push(DeliveredChunk {
                dsn: fs,
                bytes: fe - fs,
                subflow: fsub,
                first_sent: fts,
            });
        }
        delivered
    }
}

/// scheduler_pick over borrowed flows (avoids cloning in the pump loop).
fn scheduler_pick_ref(flows: &[&TcpFlow], min_space: u64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in flows.iter().enumerate() {
        if !f.established || f.dead || f.window_space() < min_space {
            continue;
        }
        let srtt = f.srtt_s();
        match best {
            Some((_, b)) if b <= srtt => {}
            _ => best = Some((i, srtt)),
        }
    }
    best.map(|(i, _)| i)
}

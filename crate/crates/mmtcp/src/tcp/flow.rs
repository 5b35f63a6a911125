//! Sender and receiver mechanics of one TCP flow (a subflow of a
//! connection, or the whole connection for single-path runs): window
//! bookkeeping with pipe accounting, triple-dupack fast retransmit and
//! NewReno-style recovery, RTO with exponential backoff, and the
//! cumulative-ACK receiver.
//!
//! Congestion-window growth and multiplicative decreases live at the
//! connection level (they may be coupled across subflows); this module
//! only tracks phases and sequence state.

use std::collections::BTreeMap;

use super::rtt::RttEstimator;
use super::segment::{FlowId, Segment, SegmentKind};
use super::TcpConfig;
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

/// What an arriving cumulative ACK meant to the sender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AckResult {
    /// Below snd_una: nothing to do.
    Stale,
    /// Duplicate ACK; `third` marks the fast-retransmit trigger.
    Dup { third: bool },
    Advanced {
        acked_bytes: u64,
        /// Partial ACK inside fast recovery: retransmit the next hole.
        fr_partial: bool,
        fr_exit: bool,
    },
}

#[derive(Debug)]
pub struct TcpFlow {
    pub id: FlowId,
    pub mss: u32,
    /// Congestion window, bytes (real-valued accumulator, floor 1 MSS).
    pub cwnd: f64,
    pub ssthresh: f64,
    pub phase: Phase,
    pub dup_acks: u32,
    pub snd_una: u64,
    pub snd_nxt: u64,
    /// Next byte to retransmit when behind snd_nxt (go-back-N pointer
    /// used after RTO; cumulative ACKs jump it forward).
    pub rtx_next: u64,
    /// Recovery point of the current fast-recovery episode.
    pub recover: u64,
    /// Conservative estimate of bytes currently in the network.
    pub pipe: f64,
    pub est: RttEstimator,
    /// Consecutive-RTO counter; doubles the effective timeout.
    pub backoff: u32,
    /// Karn timing slot: (sequence end, send time) of one unretransmitted
    /// segment awaiting its ACK.
    timed: Option<(u64, SimTime)>,
    pub cubic: super::cc::CubicState,
    /// RTO deadline the flow wants, and the event time the driver has
    /// actually scheduled (lazy timer pattern).
    pub rto_deadline: Option<SimTime>,
    pub rto_scheduled: Option<SimTime>,
    pub established: bool,
    pub dead: bool,
    // counters
    pub acked_bytes_total: u64,
    pub bytes_since_loss: f64,
    pub loss_events: u64,
    pub rto_events: u64,
    pub sent_bytes_total: u64,
}

impl TcpFlow {
    pub fn new(id: FlowId, cfg: &TcpConfig, established: bool) -> Self {
        TcpFlow {
            id,
            mss: cfg.mss,
            cwnd: (cfg.init_cwnd_mss * cfg.mss) as f64,
            ssthresh: f64::INFINITY,
            phase: Phase::SlowStart,
            dup_acks: 0,
            snd_una: 0,
            snd_nxt: 0,
            rtx_next: 0,
            recover: 0,
            pipe: 0.0,
            est: RttEstimator::new(cfg.min_rto, cfg.init_rto, cfg.max_rto),
            backoff: 0,
            timed: None,
            cubic: super::cc::CubicState::default(),
            rto_deadline: None,
            rto_scheduled: None,
            established,
            dead: false,
            acked_bytes_total: 0,
            bytes_since_loss: 0.0,
            loss_events: 0,
            rto_events: 0,
            sent_bytes_total: 0,
        }
    }

    pub fn cwnd_mss(&self) -> f64 {
        self.cwnd / self.mss as f64
    }

    pub fn srtt_s(&self) -> f64 {
        self.est.srtt_or_init()
    }

    /// Bytes of window space left (cwnd minus pipe).
    pub fn window_space(&self) -> u64 {
        let space = self.cwnd - self.pipe;
        if space <= 0.0 {
            0
        } else {
            space as u64
        }
    }

    pub fn has_retransmit_pending(&self) -> bool {
        self.rtx_next < self.snd_nxt
    }

    pub fn outstanding(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    /// Build and account an outgoing data segment.
    pub fn emit(&mut self, seq: u64, len: u32, dsn: u64, now: SimTime, is_retx: bool) -> Segment {
        debug_assert!(len > 0 && len <= self.mss);
        self.pipe += len as f64;
        self.sent_bytes_total += len as u64;
        if is_retx {
            // Karn: a retransmission voids any sample it could bias
            if self.timed.map_or(false, |(end, _)| seq < end) {
                self.timed = None;
            }
        } else if self.timed.is_none() {
            self.timed = Some((seq + len as u64, now));
        }
        self.arm_rto(now);
        Segment {
            flow: self.id,
            kind: SegmentKind::Data,
            seq,
            len,
            dsn,
            ack: 0,
            first_sent: now,
            sent: now,
            is_retx,
        }
    }

    /// Process a cumulative ACK. Window growth is left to the caller.
    pub fn on_ack(&mut self, ack: u64, now: SimTime) -> AckResult {
        if ack < self.snd_una {
            return AckResult::Stale;
        }
        if ack == self.snd_una {
            if self.outstanding() == 0 {
                return AckResult::Stale;
            }
            self.dup_acks += 1;
            // each duplicate signals a delivery: deflate the pipe
            self.pipe = (self.pipe - self.mss as f64).max(0.0);
            let third = self.dup_acks == 3
                && self.phase != Phase::FastRecovery
                && self.snd_una >= self.recover;
            return AckResult::Dup { third };
        }
        // ack advances
        let acked = ack - self.snd_una;
        self.snd_una = ack;
        self.rtx_next = self.rtx_next.max(ack);
        // duplicate copies in flight are invisible to incremental pipe
        // accounting; the outstanding range is a hard upper bound
        self.pipe = (self.pipe - acked as f64)
            .max(0.0)
            .min((self.snd_nxt - self.snd_una) as f64);
        self.dup_acks = 0;
        self.backoff = 0;
        self.acked_bytes_total += acked;
        self.bytes_since_loss += acked as f64;
        if let Some((end, sent_at)) = self.timed {
            if ack >= end {
                let sample = (now - sent_at).as_secs_f64();
                if sample > 0.0 {
                    self.est.sample(sample);
                }
                self.timed = None;
            }
        }
        let mut fr_partial = false;
        let mut fr_exit = false;
        if self.phase == Phase::FastRecovery {
            if ack >= self.recover {
                self.cwnd = self.ssthresh.max(self.mss as f64);
                self.phase = Phase::CongestionAvoidance;
                fr_exit = true;
            } else {
                fr_partial = true;
            }
        }
        if self.outstanding() > 0 {
            self.rearm_rto(now);
        } else {
            self.rto_deadline = None;
        }
        AckResult::Advanced {
            acked_bytes: acked,
            fr_partial,
            fr_exit,
        }
    }

    /// Enter fast recovery (third duplicate ACK). The caller applies the
    /// controller-specific window reduction, then retransmits the hole.
    pub fn enter_fast_recovery(&mut self) {
        self.recover = self.snd_nxt;
        self.phase = Phase::FastRecovery;
        self.loss_events += 1;
        self.bytes_since_loss = 0.0;
    }

    /// Retransmission timeout: collapse to one segment and slow start.
    pub fn on_rto(&mut self, now: SimTime) {
        self.ssthresh = (self.pipe / 2.0).max(2.0 * self.mss as f64);
        self.cwnd = self.mss as f64;
        self.phase = Phase::SlowStart;
        self.backoff += 1;
        self.rto_events += 1;
        self.loss_events += 1;
        self.bytes_since_loss = 0.0;
        self.rtx_next = self.snd_una;
        self.recover = self.snd_nxt;
        self.pipe = 0.0;
        self.dup_acks = 0;
        self.timed = None;
        self.cubic.on_rto();
        self.rearm_rto(now);
    }

    pub fn effective_rto(&self) -> SimTime {
        self.est.rto_backed_off(self.backoff)
    }

    fn arm_rto(&mut self, now: SimTime) {
        if self.rto_deadline.is_none() {
            self.rto_deadline = Some(now + self.effective_rto());
        }
    }

    fn rearm_rto(&mut self, now: SimTime) {
        self.rto_deadline = Some(now + self.effective_rto());
    }

    /// Floor the congestion window at one MSS (applied after every
    /// controller update; OLIA deltas may be negative).
    pub fn clamp_cwnd(&mut self) {
        let floor = self.mss as f64;
        if self.cwnd < floor {
            self.cwnd = floor;
        }
        if self.phase == Phase::SlowStart && self.cwnd >= self.ssthresh {
            self.phase = Phase::CongestionAvoidance;
        }
    }
}

/// Receiver half of a flow: cumulative-ACK generation over the subflow
/// byte space. Payload-to-connection mapping travels inside segments, so
/// data joins the connection-level buffer without waiting for subflow
/// order; this state only decides what to ACK.
#[derive(Debug)]
pub struct FlowRx {
    pub rcv_nxt: u64,
    /// Out-of-order spans above rcv_nxt: start -> end.
    spans: BTreeMap<u64, u64>,
    pub delayed_ack: bool,
    pub pending_acks: u32,
    pub delack_deadline: Option<SimTime>,
    pub delack_timer: SimTime,
}

impl FlowRx {
    pub fn new(cfg: &TcpConfig) -> Self {
        FlowRx {
            rcv_nxt: 0,
            spans: BTreeMap::new(),
            delayed_ack: cfg.delayed_ack,
            pending_acks: 0,
            delack_deadline: None,
            delack_timer: cfg.delack_timer,
        }
    }

    /// Register an arriving data segment. Returns true when an ACK should
    /// go out immediately (always, unless delayed ACKs absorb this one).
    pub fn on_data(&mut self, seg: &Segment, now: SimTime) -> bool {
        let in_order = seg.seq <= self.rcv_nxt;
        self.insert_span(seg.seq, seg.seq_end());
        self.advance();
        if !self.delayed_ack || !in_order {
            self.pending_acks = 0;
            self.delack_deadline = None;
            return true;
        }
        self.pending_acks += 1;
        if self.pending_acks >= 2 {
            self.pending_acks = 0;
            self.delack_deadline = None;
            true
        } else {
            self.delack_deadline = Some(now + self.delack_timer);
            false
        }
    }

    /// Flush a pending delayed ACK (timer expiry).
    pub fn delack_flush(&mut self) -> bool {
        if self.pending_acks > 0 {
            self.pending_acks = 0;
            self.delack_deadline = None;
            true
        } else {
            false
        }
    }

    fn insert_span(&mut self, start: u64, end: u64) {
        if end <= self.rcv_nxt {
            return;
        }
        let mut start = start.max(self.rcv_nxt);
        let mut end = end;
        // merge with overlapping or adjacent spans
        let mut to_remove = Vec::new();
        for (&s, &e) in self.spans.range(..=end) {
            if e >= start {
                start = start.min(s);
                end = end.max(e);
                to_remove.push(s);
            }
        }
        for s in to_remove {
            self.spans.remove(&s);
        }
        self.spans.insert(start, end);
    }

    fn advance(&mut self) {
        while let Some((&s, &e)) = self.spans.first_key_value() {
            if s > self.rcv_nxt {
                break;
            }
            self.spans.remove(&s);
            self.rcv_nxt = self.rcv_nxt.max(e);
        }
    }

    pub fn ooo_bytes(&self) -> u64 {
        self.spans.iter().map(|(s, e)| e - s).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TcpConfig {
        TcpConfig::default()
    }

    fn flow() -> TcpFlow {
        TcpFlow::new(FlowId { conn: 0, subflow: 0 }, &cfg(), true)
    }

    #[test]
    fn initial_window_is_ten_mss() {
        let f = flow();
        assert_eq!(f.cwnd as u64, 14_000);
        assert_eq!(f.phase, Phase::SlowStart);
    }

    #[test]
    fn emit_tracks_pipe_and_window_space() {
        let mut f = flow();
        let now = SimTime::ZERO;
        assert_eq!(f.window_space(), 14_000);
        f.emit(0, 1400, 0, now, false);
        f.snd_nxt = 1400;
        assert_eq!(f.window_space(), 14_000 - 1400);
        assert!(f.rto_deadline.is_some());
    }

    #[test]
    fn ack_advances_and_samples_rtt() {
        let mut f = flow();
        f.emit(0, 1400, 0, SimTime::ZERO, false);
        f.snd_nxt = 1400;
        let r = f.on_ack(1400, SimTime::from_millis(50));
        assert_eq!(
            r,
            AckResult::Advanced {
                acked_bytes: 1400,
                fr_partial: false,
                fr_exit: false
            }
        );
        assert_eq!(f.est.srtt(), Some(0.050));
        assert_eq!(f.pipe, 0.0);
        assert!(f.rto_deadline.is_none(), "nothing outstanding");
    }

    #[test]
    fn retransmission_never_produces_a_sample() {
        let mut f = flow();
        f.emit(0, 1400, 0, SimTime::ZERO, false);
        f.snd_nxt = 1400;
        // retransmit the same range: the timing slot must be voided
        f.emit(0, 1400, 0, SimTime::from_millis(10), true);
        f.on_ack(1400, SimTime::from_millis(30));
        assert_eq!(f.est.srtt(), None, "Karn's rule");
    }

    #[test]
    fn third_dupack_triggers_once() {
        let mut f = flow();
        for i in 0..5 {
            f.emit(i * 1400, 1400, i * 1400, SimTime::ZERO, false);
        }
        f.snd_nxt = 5 * 1400;
        assert_eq!(f.on_ack(0, SimTime::from_millis(1)), AckResult::Dup { third: false });
        assert_eq!(f.on_ack(0, SimTime::from_millis(2)), AckResult::Dup { third: false });
        assert_eq!(f.on_ack(0, SimTime::from_millis(3)), AckResult::Dup { third: true });
        f.enter_fast_recovery();
        assert_eq!(f.phase, Phase::FastRecovery);
        // further dups are absorbed
        assert_eq!(f.on_ack(0, SimTime::from_millis(4)), AckResult::Dup { third: false });
    }

    #[test]
    fn partial_and_full_acks_in_fast_recovery() {
        let mut f = flow();
        for i in 0..10 {
            f.emit(i * 1400, 1400, i * 1400, SimTime::ZERO, false);
        }
        f.snd_nxt = 14_000;
        for _ in 0..3 {
            f.on_ack(0, SimTime::from_millis(1));
        }
        f.enter_fast_recovery();
        f.ssthresh = f.cwnd / 2.0;
        assert_eq!(f.recover, 14_000);
        let r = f.on_ack(2800, SimTime::from_millis(5));
        match r {
            AckResult::Advanced { fr_partial, fr_exit, .. } => {
                assert!(fr_partial && !fr_exit);
            }
            other => panic!("unexpected {other:?}"),
        }
        let r = f.on_ack(14_000, SimTime::from_millis(9));
        match r {
            AckResult::Advanced { fr_exit, .. } => assert!(fr_exit),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(f.phase, Phase::CongestionAvoidance);
        assert_eq!(f.cwnd, f.ssthresh);
    }

    #[test]
    fn rto_collapses_window_and_backs_off() {
        let mut f = flow();
        for _ in 0..100 {
            f.est.sample(0.1);
        }
        for i in 0..10 {
            f.emit(i * 1400, 1400, i * 1400, SimTime::ZERO, false);
        }
        f.snd_nxt = 14_000;
        let rto0 = f.effective_rto();
        f.on_rto(SimTime::from_secs(1));
        assert_eq!(f.cwnd as u32, 1400);
        assert_eq!(f.phase, Phase::SlowStart);
        assert_eq!(f.rtx_next, 0);
        assert_eq!(f.pipe, 0.0);
        let rto1 = f.effective_rto();
        assert!((rto1.as_secs_f64() - 2.0 * rto0.as_secs_f64()).abs() < 1e-6);
        f.on_rto(SimTime::from_secs(3));
        let rto2 = f.effective_rto();
        assert!((rto2.as_secs_f64() - 4.0 * rto0.as_secs_f64()).abs() < 1e-6);
        // ssthresh collapsed: pipe was zero after the first timeout
        assert_eq!(f.ssthresh, 2.0 * 1400.0);
        // a successful ACK resets the backoff
        f.emit(0, 1400, 0, SimTime::from_secs(4), true);
        f.on_ack(14_000, SimTime::from_secs(5));
        assert_eq!(f.backoff, 0);
    }

    #[test]
    fn receiver_acks_cumulatively_and_merges_spans() {
        let mut rx = FlowRx::new(&cfg());
        let mk = |seq: u64, len: u32| Segment {
            flow: FlowId { conn: 0, subflow: 0 },
            kind: SegmentKind::Data,
            seq,
            len,
            dsn: seq,
            ack: 0,
            first_sent: SimTime::ZERO,
            sent: SimTime::ZERO,
            is_retx: false,
        };
        assert!(rx.on_data(&mk(0, 1400), SimTime::ZERO));
        assert_eq!(rx.rcv_nxt, 1400);
        // gap: 2800..4200 arrives early
        assert!(rx.on_data(&mk(2800, 1400), SimTime::ZERO));
        assert_eq!(rx.rcv_nxt, 1400);
        assert_eq!(rx.ooo_bytes(), 1400);
        // the hole fills: frontier jumps over the merged span
        assert!(rx.on_data(&mk(1400, 1400), SimTime::ZERO));
        assert_eq!(rx.rcv_nxt, 4200);
        assert_eq!(rx.ooo_bytes(), 0);
        // duplicate does nothing
        assert!(rx.on_data(&mk(0, 1400), SimTime::ZERO));
        assert_eq!(rx.rcv_nxt, 4200);
    }

    #[test]
    fn delayed_ack_coalesces_every_second_segment() {
        let mut rx = FlowRx::new(&TcpConfig {
            delayed_ack: true,
            ..cfg()
        });
        let mk = |seq: u64| Segment {
            flow: FlowId { conn: 0, subflow: 0 },
            kind: SegmentKind::Data,
            seq,
            len: 1400,
            dsn: seq,
            ack: 0,
            first_sent: SimTime::ZERO,
            sent: SimTime::ZERO,
            is_retx: false,
        };
        assert!(!rx.on_data(&mk(0), SimTime::ZERO), "first is held");
        assert!(rx.delack_deadline.is_some());
        assert!(rx.on_data(&mk(1400), SimTime::ZERO), "second acks");
        assert!(!rx.on_data(&mk(2800), SimTime::ZERO));
        assert!(rx.delack_flush(), "timer flushes the held ACK");
    }
}

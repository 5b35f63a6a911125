//! Run-time wiring: radio links, fixed-rate links (LTE and test stubs),
//! connections, and the event dispatch that moves segments between them.
//!
//! A run owns all of its state; nothing is shared across runs, so
//! independent seeds and configs parallelize trivially.

use crate::channel::ChannelProcess;
use crate::link::{Dir, RadioLink};
use crate::mptcp::{Connection, DeliveredChunk};
use crate::sim::{EventQueue, Handler, RngStream, SimTime};
use crate::tcp::{Segment, SegmentKind};

/// Fixed-rate, loss-free-in-flight link with a bounded ingress queue and
/// a fixed one-way latency: the LTE abstraction, also reused as the stub
/// link for transport-layer sanity checks.
#[derive(Debug)]
pub struct RateLink {
    pub rate_bps: [f64; 2],
    pub one_way_latency: SimTime,
    pub buffer_bytes: u64,
    busy_until: [SimTime; 2],
    pub data_bytes: [u64; 2],
    pub dropped_sdus: [u64; 2],
}

impl RateLink {
    pub fn new(ul_bps: f64, dl_bps: f64, one_way_latency: SimTime, buffer_bytes: u64) -> Self {
        RateLink {
            rate_bps: [ul_bps, dl_bps],
            one_way_latency,
            buffer_bytes,
            busy_until: [SimTime::ZERO; 2],
            data_bytes: [0; 2],
            dropped_sdus: [0; 2],
        }
    }

    /// Serialize onto the link; returns the delivery instant, or None on
    /// a queue-bound drop.
    pub fn enqueue(&mut self, dir: Dir, seg: &Segment, now: SimTime) -> Option<SimTime> {
        let d = dir.index();
        let rate = self.rate_bps[d];
        let start = self.busy_until[d].max(now);
        let backlog_bytes = (start - now).as_secs_f64() * rate / 8.0;
        let wire = seg.wire_bytes() as f64;
        if backlog_bytes + wire > self.buffer_bytes as f64 {
            self.dropped_sdus[d] += 1;
            return None;
        }
        let ser = SimTime::from_secs_f64(wire * 8.0 / rate);
        self.busy_until[d] = start + ser;
        if seg.kind == SegmentKind::Data {
            self.data_bytes[d] += seg.len as u64;
        }
        Some(self.busy_until[d] + self.one_way_latency)
    }
}

/// Which network element carries a hop.
#[derive(Debug, Clone, Copy)]
pub enum Carrier {
    Radio { link: usize, dir: Dir },
    Rate { link: usize, dir: Dir },
}

/// One direction of a subflow's path: at most a wired core hop plus one
/// carrier. `wire_first` marks the core hop preceding the carrier along
/// the direction of travel (the downlink side); otherwise it follows.
#[derive(Debug, Clone, Copy)]
pub struct HopPath {
    pub carrier: Carrier,
    pub wire_first: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SubflowWiring {
    pub data: HopPath,
    pub ack: HopPath,
}

/// Per-link random streams, kept apart so ablation arms replay the same
/// channel for a given root seed.
#[derive(Debug)]
pub struct LinkRngs {
    pub state: RngStream,
    pub shadow: RngStream,
    pub harq: RngStream,
}

impl LinkRngs {
    pub fn new(root_seed: u64, link_name: &str) -> Self {
        LinkRngs {
            state: RngStream::new(root_seed, &format!("channel/{link_name}")),
            shadow: RngStream::new(root_seed, &format!("shadow/{link_name}")),
            harq: RngStream::new(root_seed, &format!("harq/{link_name}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Action {
    MacSlot(usize),
    ChannelUpdate(usize),
    HarqFeedback(usize, Dir, u8),
    StatusTick(usize),
    UmCheck {
        link: usize,
        dir: Dir,
        deadline: SimTime,
    },
    /// Arrival at the far side of a rate link.
    RateArrive(Segment),
    /// Arrival at an endpoint after the wired core hop.
    WireArrive(Segment),
    /// Hand a segment to its carrier after the leading core hop.
    CarrierIngress(Segment),
    RtoTimer {
        conn: usize,
        sub: usize,
        deadline: SimTime,
    },
    DelAckTimer {
        conn: usize,
        sub: usize,
        deadline: SimTime,
    },
    EstablishSubflow {
        conn: usize,
        sub: usize,
    },
}

/// Delivered-goodput accounting: fixed-width bins per subflow,
/// byte-weighted latency, per-subflow contributions, all measured at
/// in-order application delivery.
#[derive(Debug)]
pub struct Metrics {
    pub bin: SimTime,
    pub warmup: SimTime,
    /// [conn][subflow][bin] -> delivered application bytes.
    pub bins: Vec<Vec<Vec<u64>>>,
    /// Post-warmup delivered bytes, per conn.
    pub delivered_bytes: Vec<u64>,
    /// Post-warmup delivered bytes, per conn and subflow.
    pub per_subflow_bytes: Vec<Vec<u64>>,
    pub latency_weighted_sum_s: Vec<f64>,
    pub latency_bytes: Vec<u64>,
    pub rlf_at: Option<SimTime>,
}

impl Metrics {
    fn new(conn_subflows: &[usize], bin: SimTime, warmup: SimTime) -> Self {
        Metrics {
            bin,
            warmup,
            bins: conn_subflows.iter().map(|&n| vec![Vec::new(); n]).collect(),
            delivered_bytes: vec![0; conn_subflows.len()],
            per_subflow_bytes: conn_subflows.iter().map(|&n| vec![0; n]).collect(),
            latency_weighted_sum_s: vec![0.0; conn_subflows.len()],
            latency_bytes: vec![0; conn_subflows.len()],
            rlf_at: None,
        }
    }

    fn on_delivered(&mut self, conn: usize, chunks: &[DeliveredChunk], now: SimTime) {
        let idx = (now.as_nanos() / self.bin.as_nanos()) as usize;
        for c in chunks {
            let sub = c.subflow as usize;
            let bins = &mut self.bins[conn][sub];
            if bins.len() <= idx {
                bins.resize(idx + 1, 0);
            }
            bins[idx] += c.bytes;
            if now >= self.warmup {
                self.delivered_bytes[conn] += c.bytes;
                self.per_subflow_bytes[conn][sub] += c.bytes;
                self.latency_weighted_sum_s[conn] +=
                    (now - c.first_sent).as_secs_f64() * c.bytes as f64;
                self.latency_bytes[conn] += c.bytes;
            }
        }
    }

    pub fn mean_latency_s(&self, conn: usize) -> f64 {
        if self.latency_bytes[conn] == 0 {
            0.0
        } else {
            self.latency_weighted_sum_s[conn] / self.latency_bytes[conn] as f64
        }
    }
}

pub struct World {
    pub ack_events: u64,
    pub data_events: u64,
    pub small_emits: u64,
    pub links: Vec<RadioLink>,
    pub link_rngs: Vec<LinkRngs>,
    pub rate_links: Vec<RateLink>,
    pub conns: Vec<Connection>,
    pub wiring: Vec<Vec<SubflowWiring>>,
    pub core_latency: SimTime,
    pub metrics: Metrics,
    /// UM reordering timers the driver has scheduled, per (link, dir).
    um_scheduled: Vec<[Option<SimTime>; 2]>,
    /// Pending late subflow starts: (conn, sub, at).
    pub subflow_starts: Vec<(usize, usize, SimTime)>,
}

impl World {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        links: Vec<RadioLink>,
        link_rngs: Vec<LinkRngs>,
        rate_links: Vec<RateLink>,
        conns: Vec<Connection>,
        wiring: Vec<Vec<SubflowWiring>>,
        core_latency: SimTime,
        bin: SimTime,
        warmup: SimTime,
    ) -> Self {
        let subs: Vec<usize> = conns.iter().map(|c| c.subflows.len()).collect();
        let um_scheduled = vec![[None; 2]; links.len()];
        World {
            ack_events: 0,
            data_events: 0,
            small_emits: 0,
            links,
            link_rngs,
            rate_links,
            conns,
            wiring,
            core_latency,
            metrics: Metrics::new(&subs, bin, warmup),
            um_scheduled,
            subflow_starts: Vec::new(),
        }
    }

    pub fn channel_of(&self, link: usize) -> &ChannelProcess {
        &self.links[link].channel
    }

    /// Schedule the self-renewing machinery and the initial transmissions.
    fn prime(&mut self, q: &mut EventQueue<Action>) {
        for l in 0..self.links.len() {
            let period = self.links[l].channel.update_period();
            q.schedule(SimTime::ZERO, Action::MacSlot(l));
            q.schedule(period, Action::ChannelUpdate(l));
            q.schedule(self.links[l].rlc_cfg.status_period, Action::StatusTick(l));
        }
        let starts = std::mem::take(&mut self.subflow_starts);
        for (conn, sub, at) in starts {
            q.schedule(at, Action::EstablishSubflow { conn, sub });
        }
        for c in 0..self.conns.len() {
            self.pump(q, c);
        }
    }

    /// Run to `horizon`, stopping early once every finite transfer is
    /// complete.
    pub fn run(&mut self, q: &mut EventQueue<Action>, horizon: SimTime) {
        self.prime(q);
        let step = SimTime::from_millis(100);
        let mut t = SimTime::ZERO;
        while t < horizon {
            t = (t + step).min(horizon);
            q.run_until(t, self);
            if self.all_transfers_complete() {
                break;
            }
        }
    }

    fn all_transfers_complete(&self) -> bool {
        self.conns
            .iter()
            .all(|c| c.app_limit != u64::MAX && c.completed_at.is_some())
    }

    fn pump(&mut self, q: &mut EventQueue<Action>, conn: usize) {
        let now = q.now();
        let segs = self.conns[conn].pump(now);
        for (sub, seg) in segs {
            self.send_segment(q, conn, sub, seg);
        }
        for sub in 0..self.conns[conn].subflows.len() {
            self.sync_rto(q, conn, sub);
        }
    }

    fn send_segment(&mut self, q: &mut EventQueue<Action>, conn: usize, sub: usize, seg: Segment) {
        let hop = match seg.kind {
            SegmentKind::Data => self.wiring[conn][sub].data,
            SegmentKind::Ack => self.wiring[conn][sub].ack,
        };
        if hop.wire_first {
            q.schedule_in(self.core_latency, Action::CarrierIngress(seg));
        } else {
            self.carrier_ingress(q, seg);
        }
    }

    fn hop_of(&self, seg: &Segment) -> HopPath {
        let w = &self.wiring[seg.flow.conn as usize][seg.flow.subflow as usize];
        match seg.kind {
            SegmentKind::Data => w.data,
            SegmentKind::Ack => w.ack,
        }
    }

    fn carrier_ingress(&mut self, q: &mut EventQueue<Action>, seg: Segment) {
        let hop = self.hop_of(&seg);
        match hop.carrier {
            Carrier::Radio { link, dir } => {
                // a drop here is silent: the transport layer sees loss
                let _ = self.links[link].enqueue(dir, seg);
            }
            Carrier::Rate { link, dir } => {
                if seg.kind == SegmentKind::Data {
                    self.small_emits += 1;
                }
                if let Some(at) = self.rate_links[link].enqueue(dir, &seg, q.now()) {
                    q.schedule(at, Action::RateArrive(seg));
                }
            }
        }
    }

    /// A segment left its carrier; the core hop follows unless the
    /// carrier was the final hop toward the endpoint.
    fn carrier_egress(&mut self, q: &mut EventQueue<Action>, seg: Segment) {
        let hop = self.hop_of(&seg);
        if hop.wire_first {
            self.endpoint_receive(q, seg);
        } else {
            q.schedule_in(self.core_latency, Action::WireArrive(seg));
        }
    }

    fn endpoint_receive(&mut self, q: &mut EventQueue<Action>, seg: Segment) {
        let conn = seg.flow.conn as usize;
        let sub = seg.flow.subflow as usize;
        let now = q.now();
        match seg.kind {
            SegmentKind::Data => {
                self.data_events += 1;
                let result = self.conns[conn].on_data(sub, &seg, now);
                self.metrics.on_delivered(conn, &result.delivered, now);
                if let Some(ack) = result.ack {
                    self.send_segment(q, conn, sub, ack);
                }
                self.sync_delack(q, conn, sub);
            }
            SegmentKind::Ack => {
                self.ack_events += 1;
                let retx = self.conns[conn].on_ack(sub, seg.ack, now);
                for (s, r) in retx {
                    self.send_segment(q, conn, s, r);
                }
                self.pump(q, conn);
            }
        }
    }

    fn sync_rto(&mut self, q: &mut EventQueue<Action>, conn: usize, sub: usize) {
        let flow = &mut self.conns[conn].subflows[sub].flow;
        if flow.dead {
            return;
        }
        if let Some(d) = flow.rto_deadline {
            let resched = match flow.rto_scheduled {
                Some(s) => s > d,
                None => true,
            };
            if resched {
                flow.rto_scheduled = Some(d);
                q.schedule(
                    d,
                    Action::RtoTimer {
                        conn,
                        sub,
                        deadline: d,
                    },
                );
            }
        }
    }

    fn sync_delack(&mut self, q: &mut EventQueue<Action>, conn: usize, sub: usize) {
        let rx = &self.conns[conn].subflows[sub].rx;
        if let Some(d) = rx.delack_deadline {
            q.schedule(
                d,
                Action::DelAckTimer {
                    conn,
                    sub,
                    deadline: d,
                },
            );
        }
    }

    fn sync_um(&mut self, q: &mut EventQueue<Action>, link: usize, dir: Dir) {
        if let Some(d) = self.links[link].bearer(dir).um_deadline() {
            let slot = &mut self.um_scheduled[link][dir.index()];
            let resched = match *slot {
                Some(s) => s > d,
                None => true,
            };
            if resched {
                *slot = Some(d);
                q.schedule(
                    d,
                    Action::UmCheck {
                        link,
                        dir,
                        deadline: d,
                    },
                );
            }
        }
    }

    fn handle_link_deliveries(
        &mut self,
        q: &mut EventQueue<Action>,
        link: usize,
        segments: Vec<Segment>,
        rlf: bool,
    ) {
        for seg in segments {
            self.carrier_egress(q, seg);
        }
        if rlf {
            self.on_rlf(q, link);
        }
        for dir in [Dir::Ul, Dir::Dl] {
            self.sync_um(q, link, dir);
        }
    }

    fn on_rlf(&mut self, q: &mut EventQueue<Action>, link: usize) {
        if self.metrics.rlf_at.is_none() {
            self.metrics.rlf_at = Some(q.now());
        }
        // every subflow riding this link loses its bearer for good
        for conn in 0..self.conns.len() {
            for sub in 0..self.conns[conn].subflows.len() {
                let on_link = matches!(
                    self.wiring[conn][sub].data.carrier,
                    Carrier::Radio { link: l, .. } if l == link
                );
                if on_link {
                    self.conns[conn].on_subflow_dead(sub);
                }
            }
            self.pump(q, conn);
        }
    }
}

impl Handler<Action> for World {
    fn handle(&mut self, q: &mut EventQueue<Action>, action: Action) {
        let now = q.now();
        match action {
            Action::MacSlot(l) => {
                let launched = self.links[l].slot_tick(now);
                let fb = self.links[l].harq_cfg.feedback_slots;
                let slot = self.links[l].channel.params().slot;
                for (dir, proc) in launched {
                    q.schedule_in(
                        SimTime(slot.as_nanos() * fb),
                        Action::HarqFeedback(l, dir, proc),
                    );
                }
                q.schedule_in(slot, Action::MacSlot(l));
            }
            Action::ChannelUpdate(l) => {
                let rngs = &mut self.link_rngs[l];
                self.links[l]
                    .channel
                    .step(now, &mut rngs.state, &mut rngs.shadow);
                let period = self.links[l].channel.update_period();
                q.schedule_in(period, Action::ChannelUpdate(l));
            }
            Action::HarqFeedback(l, dir, proc) => {
                let d = {
                    let rng = &mut self.link_rngs[l].harq;
                    self.links[l].on_feedback(dir, proc, rng, now)
                };
                self.handle_link_deliveries(q, l, d.segments, d.rlf);
            }
            Action::StatusTick(l) => {
                let d = self.links[l].status_tick(now);
                let rlf = d.rlf;
                self.handle_link_deliveries(q, l, d.segments, rlf);
                let period = self.links[l].rlc_cfg.status_period;
                q.schedule_in(period, Action::StatusTick(l));
            }
            Action::UmCheck {
                link,
                dir,
                deadline,
            } => {
                if self.um_scheduled[link][dir.index()] == Some(deadline) {
                    self.um_scheduled[link][dir.index()] = None;
                }
                let due = self.links[link]
                    .bearer(dir)
                    .um_deadline()
                    .is_some_and(|d| d <= now);
                if due {
                    let d = self.links[link].um_expire(dir, now);
                    self.handle_link_deliveries(q, link, d.segments, d.rlf);
                } else {
                    self.sync_um(q, link, dir);
                }
            }
            Action::RateArrive(seg) => self.carrier_egress(q, seg),
            Action::WireArrive(seg) => self.endpoint_receive(q, seg),
            Action::CarrierIngress(seg) => self.carrier_ingress(q, seg),
            Action::RtoTimer {
                conn,
                sub,
                deadline,
            } => {
                let fire = {
                    let flow = &mut self.conns[conn].subflows[sub].flow;
                    if flow.rto_scheduled == Some(deadline) {
                        flow.rto_scheduled = None;
                    }
                    !flow.dead && flow.rto_deadline == Some(deadline)
                };
                if fire {
                    let retx = self.conns[conn].on_rto(sub, now);
                    for (s, r) in retx {
                        self.send_segment(q, conn, s, r);
                    }
                    self.pump(q, conn);
                }
                self.sync_rto(q, conn, sub);
            }
            Action::DelAckTimer {
                conn,
                sub,
                deadline,
            } => {
                let flush = {
                    let rx = &mut self.conns[conn].subflows[sub].rx;
                    rx.delack_deadline == Some(deadline) && rx.delack_flush()
                };
                if flush {
                    let ack = self.conns[conn].make_ack(sub, now);
                    self.send_segment(q, conn, sub, ack);
                }
            }
            Action::EstablishSubflow { conn, sub } => {
                self.conns[conn].establish_subflow(sub);
                self.pump(q, conn);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mptcp::ConnCc;
    use crate::tcp::TcpConfig;

    /// Minimal world: one connection over a symmetric stub rate link
    /// (the loss-free sanity harness).
    fn stub_world(app_limit: u64, rate_bps: f64, latency: SimTime) -> World {
        let conn = Connection::new(0, ConnCc::Cubic, TcpConfig::default(), 1, app_limit);
        let wiring = vec![vec![SubflowWiring {
            data: HopPath {
                carrier: Carrier::Rate {
                    link: 0,
                    dir: Dir::Ul,
                },
                wire_first: false,
            },
            ack: HopPath {
                carrier: Carrier::Rate {
                    link: 0,
                    dir: Dir::Dl,
                },
                wire_first: true,
            },
        }]];
        World::new(
            Vec::new(),
            Vec::new(),
            vec![RateLink::new(
                rate_bps,
                rate_bps,
                latency,
                4 * 1024 * 1024,
            )],
            vec![conn],
            wiring,
            SimTime::ZERO,
            SimTime::from_millis(250),
            SimTime::from_secs(2),
        )
    }

    #[test]
    fn bulk_transfer_fills_a_stub_link() {
        let mut w = stub_world(u64::MAX, 100e6, SimTime::from_millis(5));
        let mut q = EventQueue::new();
        w.run(&mut q, SimTime::from_secs(12));
        let goodput = w.metrics.delivered_bytes[0] as f64 * 8.0 / 10.0;
        // payload share of the wire rate
        let ceiling = 100e6 * 1400.0 / 1440.0;
        assert!(
            goodput > 0.95 * ceiling && goodput <= ceiling * 1.001,
            "goodput {goodput}"
        );
    }

    #[test]
    fn download_completes_within_analytic_bracket() {
        // 1 MB at 100 Mbit/s with 10 ms RTT: pure transfer is 0.08 s and
        // the slow-start ramp adds a few round trips
        let mut w = stub_world(1_000_000, 100e6, SimTime::from_millis(5));
        let mut q = EventQueue::new();
        w.run(&mut q, SimTime::from_secs(30));
        let done = w.conns[0].completed_at.expect("download finished");
        let t = done.as_secs_f64();
        assert!((0.08..=0.2).contains(&t), "download time {t}");
    }

    #[test]
    fn slow_start_doubles_until_the_pipe_fills() {
        let mut w = stub_world(u64::MAX, 1e9, SimTime::from_millis(20));
        let mut q = EventQueue::new();
        w.prime(&mut q);
        let mut cwnds = Vec::new();
        for k in 1..=6u64 {
            q.run_until(SimTime::from_millis(40 * k + 20), &mut w);
            cwnds.push(w.conns[0].subflows[0].flow.cwnd);
        }
        for pair in cwnds.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!(
                ratio > 1.7 && ratio < 2.3,
                "slow start should double per RTT: {cwnds:?}"
            );
        }
    }

    #[test]
    fn identical_runs_reproduce_identical_metrics() {
        let run = || {
            let mut w = stub_world(u64::MAX, 50e6, SimTime::from_millis(5));
            let mut q = EventQueue::new();
            w.run(&mut q, SimTime::from_secs(6));
            (
                w.metrics.delivered_bytes[0],
                w.metrics.bins[0][0].clone(),
                w.metrics.mean_latency_s(0),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2.to_bits(), b.2.to_bits());
    }
}

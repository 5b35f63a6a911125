// scratch debug — not part of the crate
use mmtcp::mptcp::{ConnCc, Connection};
use mmtcp::sim::{EventQueue, SimTime};
use mmtcp::tcp::TcpConfig;
use mmtcp::world::*;
use mmtcp::link::Dir;

fn main() {
    let conn = Connection::new(0, ConnCc::Cubic, TcpConfig::default(), 1, u64::MAX);
    let wiring = vec![vec![SubflowWiring {
        data: HopPath { carrier: Carrier::Rate { link: 0, dir: Dir::Ul }, wire_first: false },
        ack: HopPath { carrier: Carrier::Rate { link: 0, dir: Dir::Dl }, wire_first: true },
    }]];
    let mut w = World::new(
        Vec::new(), Vec::new(),
        vec![RateLink::new(100e6, 100e6, SimTime::from_millis(5), 4 * 1024 * 1024)],
        vec![conn], wiring, SimTime::ZERO,
        SimTime::from_millis(250), SimTime::from_secs(2),
    );
    let mut q = EventQueue::new();
    // replicate run() but sample state every 100ms
    for k in 1..=60u64 {
        let t = SimTime::from_millis(k * 100);
        if k == 1 { w.run(&mut q, t); } else { q.run_until(t, &mut w); }
        let f = &w.conns[0].subflows[0].flow;
        println!(
            "t={:>5}ms cwnd={:>9.0} pipe={:>9.0} una={:>10} nxt={:>10} rtxn={:>10} rec={:>10} phase={:?} losses={} drops={:?} ev={:?}",
            k * 100, f.cwnd, f.pipe, f.snd_una, f.snd_nxt, f.rtx_next, f.recover, f.phase, f.loss_events,
            w.rate_links[0].dropped_sdus, (w.small_emits, w.conns[0].pump_calls, w.conns[0].pump_emits)
        );
    }
}

//! Minimum-RTT packet scheduler (the Linux default): among subflows with
//! congestion-window space, pick the smallest smoothed RTT; ties go to
//! the earliest-created subflow.

use crate::tcp::TcpFlow;

pub fn scheduler_pick(flows: &[TcpFlow], min_space: u64) -> Option<usize> {
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

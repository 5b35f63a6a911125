//! Coupled congestion-control update rules: LIA, OLIA and BALIA.
//!
//! All three couple the per-subflow congestion-avoidance increase through
//! shared state across paths; slow start stays per-subflow. Windows are
//! in MSS units, round-trip times in seconds. With a single subflow every
//! rule degenerates to Reno's acked/w, and the degenerate case is routed
//! through the exact same expression so trajectories match bit for bit.

use crate::tcp::reno_ca_increase_mss;

/// Snapshot of one subflow as the coupled rules see it.
#[derive(Debug, Clone, Copy)]
pub struct PathView {
    pub w_mss: f64,
    pub rtt_s: f64,
    /// Bytes acknowledged since this path's last loss event (the OLIA
    /// inter-loss path quality measure).
    pub bytes_since_loss: f64,
}

/// LIA increase for path `r` on `acked_mss` newly acked MSS:
/// alpha = w_total * max_p(w_p/rtt_p^2) / (sum_p w_p/rtt_p)^2,
/// delta = min(alpha * acked / w_total, acked / w_r).
///
/// The min() clamp is the do-no-harm bound: a subflow never grows faster
/// than a single-path Reno flow on the same path.
pub fn lia_increase(paths: &[PathView], r: usize, acked_mss: f64) -> f64 {
    if paths.len() == 1 {
        return reno_ca_increase_mss(paths[r].w_mss, acked_mss);
    }
    let w_total: f64 = paths.iter().map(|p| p.w_mss).sum();
    let best = paths
        .iter()
        .map(|p| p.w_mss / (p.rtt_s * p.rtt_s))
        .fold(f64::MIN, f64::max);
    let denom: f64 = paths.iter().map(|p| p.w_mss / p.rtt_s).sum();
    let alpha = w_total * best / (denom * denom);
    let coupled = alpha * acked_mss / w_total;
    let reno = acked_mss / paths[r].w_mss;
    coupled.min(reno)
}

/// OLIA increase for path `r`:
/// delta = acked * [ (w_r/rtt_r^2)/(sum_p w_p/rtt_p)^2 + alpha_r/w_r ].
///
/// alpha_r is +1/(n|C|) on the collected set C (best paths by inter-loss
/// bytes that do not hold the maximal window), -1/(n|M|) on the
/// max-window set M when C is non-empty, else 0. May return a negative
/// delta; the caller floors the window at one MSS.
pub fn olia_increase(paths: &[PathView], r: usize, acked_mss: f64) -> f64 {
    if paths.len() == 1 {
        return reno_ca_increase_mss(paths[r].w_mss, acked_mss);
    }
    let n = paths.len() as f64;
    let denom: f64 = paths.iter().map(|p| p.w_mss / p.rtt_s).sum();
    let base = (paths[r].w_mss / (paths[r].rtt_s * paths[r].rtt_s)) / (denom * denom);

    let max_w = paths.iter().map(|p| p.w_mss).fold(f64::MIN, f64::max);
    let best_l = paths
        .iter()
        .map(|p| p.bytes_since_loss)
        .fold(f64::MIN, f64::max);
    let in_m = |p: &PathView| p.w_mss == max_w;
    let in_c = |p: &PathView| p.bytes_since_loss == best_l && !in_m(p);
    let c_size = paths.iter().filter(|p| in_c(p)).count() as f64;
    let m_size = paths.iter().filter(|p| in_m(p)).count() as f64;

    let alpha = if c_size == 0.0 {
        0.0
    } else if in_c(&paths[r]) {
        1.0 / (n * c_size)
    } else if in_m(&paths[r]) {
        -1.0 / (n * m_size)
    } else {
        0.0
    };
    acked_mss * (base + alpha / paths[r].w_mss)
}

/// BALIA increase for path `r`, with x_p = w_p/rtt_p and
/// alpha_r = max_p(x_p)/x_r:
/// delta = acked * (x_r/rtt_r)/(sum_p x_p)^2 * ((1+a)/2) * ((4+a)/5).
pub fn balia_increase(paths: &[PathView], r: usize, acked_mss: f64) -> f64 {
    if paths.len() == 1 {
        return reno_ca_increase_mss(paths[r].w_mss, acked_mss);
    }
    let x: Vec<f64> = paths.iter().map(|p| p.w_mss / p.rtt_s).collect();
    let sum: f64 = x.iter().sum();
    let alpha = x.iter().fold(f64::MIN, |a, &b| a.max(b)) / x[r];
    acked_mss * (x[r] / paths[r].rtt_s) / (sum * sum) * ((1.0 + alpha) / 2.0) * ((4.0 + alpha) / 5.0)
}

/// BALIA multiplicative decrease on loss: w -= (w/2) * min(alpha_r, 1.5).
/// Returns the shrink fraction to remove from the window.
pub fn balia_decrease_fraction(paths: &[PathView], r: usize) -> f64 {
    if paths.len() == 1 {
        return 0.5;
    }
    let x: Vec<f64> = paths.iter().map(|p| p.w_mss / p.rtt_s).collect();
    let alpha = x.iter().fold(f64::MIN, |a, &b| a.max(b)) / x[r];
    alpha.min(1.5) / 2.0
}

//! Congestion-control window math. Windows are kept in MSS units with
//! real-valued accumulators; the flow applies the returned deltas to its
//! byte window, which avoids integer truncation starving small windows.

use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcKind {
    NewReno,
    Cubic,
}

/// Reno congestion-avoidance increase per ACK: acked/w, in MSS.
///
/// Shared by NewReno and by the coupled controllers' single-subflow
/// degenerate case, which must produce bit-identical trajectories.
pub fn reno_ca_increase_mss(w_mss: f64, acked_mss: f64) -> f64 {
    debug_assert!(w_mss > 0.0);
    acked_mss / w_mss
}

pub const CUBIC_C: f64 = 0.4;
pub const CUBIC_BETA: f64 = 0.7;

/// CUBIC epoch state.
#[derive(Debug, Clone)]
pub struct CubicState {
    pub c: f64,
    pub beta: f64,
    pub fast_convergence: bool,
    pub w_max: f64,
    pub k: f64,
    pub epoch_start: Option<SimTime>,
    w_est: f64,
    alpha_aimd: f64,
}

impl Default for CubicState {
    fn default() -> Self {
        CubicState {
            c: CUBIC_C,
            beta: CUBIC_BETA,
            fast_convergence: true,
            w_max: 0.0,
            k: 0.0,
            epoch_start: None,
            w_est: 0.0,
            alpha_aimd: 3.0 * (1.0 - CUBIC_BETA) / (1.0 + CUBIC_BETA),
        }
    }
}

impl CubicState {
    /// W_cubic(t) = c*(t - k)^3 + w_max, in MSS.
    pub fn w_cubic(&self, t_s: f64) -> f64 {
        self.c * (t_s - self.k).powi(3) + self.w_max
    }

    /// Multiplicative decrease on a loss event. Records w_max (with fast
    /// convergence) and resets the epoch. Returns the new window.
    pub fn on_loss(&mut self, cwnd_mss: f64) -> f64 {
        self.w_max = if self.fast_convergence && cwnd_mss < self.w_max {
            cwnd_mss * (2.0 - self.beta) / 2.0
        } else {
            cwnd_mss
        };
        self.epoch_start = None;
        (cwnd_mss * self.beta).max(1.0)
    }

    /// Reset window history (after RTO collapse the old epoch is void).
    pub fn on_rto(&mut self) {
        self.epoch_start = None;
    }

    fn start_epoch(&mut self, cwnd_mss: f64, now: SimTime) {
        self.epoch_start = Some(now);
        self.k = if self.w_max > cwnd_mss {
            ((self.w_max - cwnd_mss) / self.c).cbrt()
        } else {
            self.w_max = cwnd_mss;
            0.0
        };
        self.w_est = cwnd_mss;
    }

    /// Congestion-avoidance increase for `acked_mss` newly acked MSS.
    /// Moves cwnd toward the cubic target one RTT ahead, with the
    /// Reno-friendly region as a floor. Returns the delta in MSS.
    pub fn ca_increase(&mut self, cwnd_mss: f64, acked_mss: f64, srtt_s: f64, now: SimTime) -> f64 {
        if self.epoch_start.is_none() {
            self.start_epoch(cwnd_mss, now);
        }
        let t = (now - self.epoch_start.unwrap()).as_secs_f64();
        let target = self.w_cubic(t + srtt_s).clamp(cwnd_mss, 1.5 * cwnd_mss);
        let cubic_delta = acked_mss * (target - cwnd_mss) / cwnd_mss;
        // Reno-friendly region
        self.w_est += self.alpha_aimd * acked_mss / cwnd_mss;
        if self.w_est > cwnd_mss + cubic_delta {
            (self.w_est - cwnd_mss).max(0.0)
        } else {
            cubic_delta
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_formula_at_loss_epoch() {
        // w_max 100 MSS, beta 0.7, c 0.4: after the decrease the epoch
        // starts at 70 and k = cbrt(100*0.3/0.4) = cbrt(75)
        let mut s = CubicState::default();
        s.w_max = 120.0; // pre-state: fast convergence off path (cwnd >= w_max)
        s.fast_convergence = false;
        let new = s.on_loss(100.0);
        assert!((new - 70.0).abs() < 1e-12);
        assert_eq!(s.w_max, 100.0);
        s.start_epoch(70.0, SimTime::ZERO);
        assert!((s.k - 75f64.cbrt()).abs() < 1e-12);
        assert!((s.k - 4.217).abs() < 1e-3);
    }

    #[test]
    fn window_equals_w_max_at_t_equals_k() {
        let mut s = CubicState::default();
        s.fast_convergence = false;
        s.on_loss(100.0);
        s.start_epoch(70.0, SimTime::ZERO);
        assert!((s.w_cubic(s.k) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn cubic_window_is_continuous_at_epoch_boundary() {
        let mut s = CubicState::default();
        s.fast_convergence = false;
        let cwnd = s.on_loss(100.0);
        s.start_epoch(cwnd, SimTime::ZERO);
        // W(0) equals the epoch-start window
        assert!((s.w_cubic(0.0) - cwnd).abs() < 1e-9);
    }

    #[test]
    fn fast_convergence_shrinks_w_max() {
        let mut s = CubicState::default();
        s.w_max = 100.0;
        s.on_loss(80.0); // below the previous peak
        assert!((s.w_max - 80.0 * (2.0 - 0.7) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_decrease_factor() {
        let mut s = CubicState::default();
        let new = s.on_loss(100.0);
        assert!((new - 70.0).abs() < 1e-12);
    }

    #[test]
    fn growth_is_flat_near_k_and_fast_far_from_it() {
        let mut s = CubicState::default();
        s.fast_convergence = false;
        s.on_loss(1000.0);
        let cwnd = 700.0;
        s.start_epoch(cwnd, SimTime::ZERO);
        let near = s.w_cubic(s.k + 0.1) - s.w_cubic(s.k);
        let far = s.w_cubic(s.k + 5.0) - s.w_cubic(s.k + 4.9);
        assert!(far > 20.0 * near);
    }

    #[test]
    fn reno_increase_is_acked_over_window() {
        assert!((reno_ca_increase_mss(10.0, 1.0) - 0.1).abs() < 1e-15);
        // one full window acked adds about one MSS
        assert!((reno_ca_increase_mss(10.0, 10.0) - 1.0).abs() < 1e-15);
    }
}

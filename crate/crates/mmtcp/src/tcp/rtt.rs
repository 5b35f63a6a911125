//! RTT estimation and retransmission timeout, Jacobson/Karels style.

use crate::sim::SimTime;

#[derive(Debug, Clone)]
pub struct RttEstimator {
    srtt: Option<f64>,
    rttvar: f64,
    min_rto: f64,
    max_rto: f64,
    init_rto: f64,
}

impl RttEstimator {
    pub fn new(min_rto: SimTime, init_rto: SimTime, max_rto: SimTime) -> Self {
        RttEstimator {
            srtt: None,
            rttvar: 0.0,
            min_rto: min_rto.as_secs_f64(),
            max_rto: max_rto.as_secs_f64(),
            init_rto: init_rto.as_secs_f64(),
        }
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn srtt_or_init(&self) -> f64 {
        self.srtt.unwrap_or(self.init_rto)
    }

    /// Fold in a sample, seconds. Samples must come from segments that
    /// were never retransmitted (Karn's rule); the caller guarantees it.
    pub fn sample(&mut self, sample_s: f64) {
        assert!(sample_s > 0.0, "non-positive RTT sample");
        match self.srtt {
            None => {
                self.srtt = Some(sample_s);
                self.rttvar = sample_s / 2.0;
            }
            Some(srtt) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (srtt - sample_s).abs();
                self.srtt = Some(0.875 * srtt + 0.125 * sample_s);
            }
        }
    }

    /// Base RTO before exponential backoff, clamped to [min_rto, max_rto].
    pub fn rto(&self) -> SimTime {
        let rto = match self.srtt {
            None => self.init_rto,
            Some(srtt) => (srtt + 4.0 * self.rttvar).max(self.min_rto),
        };
        SimTime::from_secs_f64(rto.min(self.max_rto))
    }

    /// RTO after `backoff` consecutive timeouts (doubling, capped).
    pub fn rto_backed_off(&self, backoff: u32) -> SimTime {
        let base = self.rto().as_secs_f64();
        let scaled = base * 2f64.powi(backoff.min(16) as i32);
        SimTime::from_secs_f64(scaled.min(self.max_rto))
    }
}

//! First-order Markov chain over the link states.
//!
//! The chain is built from a stationary distribution and a persistence
//! parameter: with probability `q = 1 - 1/mean_sojourn_periods` the state
//! is kept, otherwise it is resampled from the stationary distribution.
//! This preserves the requested stationary distribution exactly for any
//! support, and `mean_sojourn_periods = 1` degenerates to i.i.d.
//! resampling. Off-diagonal transition mass is therefore split
//! proportionally to the stationary probabilities of the target states.

use super::StateDistribution;
use crate::sim::RngStream;

/// Row-stochastic 3x3 transition matrix over (LOS, NLOS, Outage).
pub fn build_transition_matrix(dist: &StateDistribution, mean_sojourn_periods: f64) -> [[f64; 3]; 3] {
    assert!(dist.is_valid(), "invalid state distribution {dist:?}");
    assert!(
        mean_sojourn_periods >= 1.0,
        "mean sojourn must be >= 1 period"
    );
    let q = 1.0 - 1.0 / mean_sojourn_periods;
    let pi = dist.as_array();
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (1.0 - q) * pi[j] + if i == j { q } else { 0.0 };
        }
    }
    t
}

/// Stateful sampler over a transition matrix.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    matrix: [[f64; 3]; 3],
    state: usize,
}

impl MarkovChain {
    /// Start the chain from a stationary draw.
    pub fn new(dist: &StateDistribution, mean_sojourn_periods: f64, rng: &mut RngStream) -> Self {
        let matrix = build_transition_matrix(dist, mean_sojourn_periods);
        let state = rng.categorical(&dist.as_array());
        MarkovChain { matrix, state }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn step(&mut self, rng: &mut RngStream) -> usize {
        self.state = rng.categorical(&self.matrix[self.state]);
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RngStream;

    #[test]
    fn rows_sum_to_one() {
        let dist = StateDistribution {
            p_los: 0.5,
            p_nlos: 0.4,
            p_out: 0.1,
        };
        let t = build_transition_matrix(&dist, 5.0);
        for row in &t {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn memoryless_limit_resamples_from_dist() {
        let dist = StateDistribution {
            p_los: 1.0 / 3.0,
            p_nlos: 1.0 / 3.0,
            p_out: 1.0 / 3.0,
        };
        let t = build_transition_matrix(&dist, 1.0);
        for row in &t {
            for (j, p) in row.iter().enumerate() {
                assert!((p - dist.as_array()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_dist_is_absorbing() {
        let dist = StateDistribution {
            p_los: 1.0,
            p_nlos: 0.0,
            p_out: 0.0,
        };
        let t = build_transition_matrix(&dist, 5.0);
        assert!((t[0][0] - 1.0).abs() < 1e-12);
        // states with zero stationary mass are never entered
        assert_eq!(t[1][1], 0.8);
        assert!((t[1][0] - 0.2).abs() < 1e-12);
        assert_eq!(t[1][2], 0.0);
    }

    #[test]
    fn empirical_frequencies_match_stationary_distribution() {
        let dist = StateDistribution {
            p_los: 0.5,
            p_nlos: 0.4,
            p_out: 0.1,
        };
        let mut rng = RngStream::new(123, "markov");
        let mut chain = MarkovChain::new(&dist, 10.0, &mut rng);
        let steps = 1_000_000;
        let mut counts = [0u64; 3];
        for _ in 0..steps {
            counts[chain.step(&mut rng)] += 1;
        }
        for (i, pi) in dist.as_array().iter().enumerate() {
            let freq = counts[i] as f64 / steps as f64;
            assert!(
                (freq - pi).abs() < 0.01,
                "state {i}: empirical {freq} vs stationary {pi}"
            );
        }
    }

    #[test]
    fn sojourn_lengthens_with_persistence() {
        let dist = StateDistribution {
            p_los: 0.5,
            p_nlos: 0.5,
            p_out: 0.0,
        };
        let mut rng = RngStream::new(5, "sojourn");
        let mut chain = MarkovChain::new(&dist, 5.0, &mut rng);
        let mut changes = 0u32;
        let steps = 100_000;
        let mut prev = chain.state();
        for _ in 0..steps {
            let s = chain.step(&mut rng);
            if s != prev {
                changes += 1;
            }
            prev = s;
        }
        // exit probability per step is (1-q)(1-pi_self) = 0.2*0.5 = 0.1
        let rate = changes as f64 / steps as f64;
        assert!((rate - 0.1).abs() < 0.01, "change rate {rate}");
    }
}

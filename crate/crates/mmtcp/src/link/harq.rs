//! Stop-and-wait HARQ process pool.
//!
//! Each direction of a link runs `processes` parallel processes; a slot
//! carries at most one transport block, and decode feedback returns a
//! fixed number of slots later. A block failing `max_tx` attempts is
//! dropped and its loss surfaces to RLC.

use super::{DataPdu, StatusPdu};
use crate::sim::RngStream;

/// PDUs riding a transport block. Status PDUs are control traffic for
/// the reverse bearer's transmitter.
#[derive(Debug, Clone)]
pub enum BlockPdu {
    Data(DataPdu),
    Status(StatusPdu),
}

#[derive(Debug, Clone)]
pub struct TransportBlock {
    pub bits: u64,
    pub pdus: Vec<BlockPdu>,
    /// 1-based transmission count.
    pub attempt: u8,
    /// SNR at (re)transmission time; decode odds are drawn against it.
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqConfig {
    pub processes: u8,
    /// Total transmissions per block (1 initial + retransmissions).
    pub max_tx: u8,
    /// Decode feedback delay, in slots.
    pub feedback_slots: u64,
    /// First-attempt block error rate in the AMC-limited region.
    pub bler_first: f64,
    /// Above this SNR the link-adaptation margin grows and the error rate
    /// decays below the AMC target.
    pub bler_knee_db: f64,
    /// dB of extra SNR per decade of BLER reduction above the knee.
    pub bler_decay_db: f64,
}

impl Default for HarqConfig {
    fn default() -> Self {
        HarqConfig {
            processes: 8,
            max_tx: 4,
            feedback_slots: 4,
            bler_first: 0.1,
            bler_knee_db: 13.0,
            bler_decay_db: 1.5,
        }
    }
}

impl HarqConfig {
    /// Per-attempt block error rate at a given SNR. Attempts are
    /// independent at this rate, so the residual loss after n attempts is
    /// `bler(snr)^n`.
    pub fn bler(&self, snr_db: f64) -> f64 {
        if snr_db <= self.bler_knee_db {
            self.bler_first
        } else {
            self.bler_first * 10f64.powf(-(snr_db - self.bler_knee_db) / self.bler_decay_db)
        }
    }
}

/// Outcome of one decode attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decode {
    Decoded,
    Failed,
}

/// Draw the decode outcome for transmission attempt `attempt` (1-based).
pub fn decode_outcome(rng: &mut RngStream, snr_db: f64, attempt: u8, cfg: &HarqConfig) -> Decode {
    debug_assert!(attempt >= 1);
    if rng.uniform() < cfg.bler(snr_db) {
        Decode::Failed
    } else {
        Decode::Decoded
    }
}

#[derive(Debug)]
pub enum FeedbackOutcome {
    /// Block decoded; PDUs go up the stack.
    Delivered(TransportBlock),
    /// Failed below the attempt limit; queued for retransmission.
    Requeued,
    /// Failed at the attempt limit; PDUs are lost.
    Dropped(TransportBlock),
}

#[derive(Debug, Clone)]
pub struct HarqPool {
    blocks: Vec<Option<TransportBlock>>,
    /// Processes whose block awaits retransmission, FIFO.
    retx_ready: std::collections::VecDeque<u8>,
    /// Processes with a block in the air awaiting feedback.
    awaiting: Vec<bool>,
    pub residual_dropped_blocks: u64,
    pub transmitted_blocks: u64,
}

impl HarqPool {
    pub fn new(processes: u8) -> Self {
        HarqPool {
            blocks: vec![None; processes as usize],
            retx_ready: std::collections::VecDeque::new(),
            awaiting: vec![false; processes as usize],
            residual_dropped_blocks: 0,
            transmitted_blocks: 0,
        }
    }

    pub fn idle_process(&self) -> Option<u8> {
        self.blocks
            .iter()
            .position(|b| b.is_none())
            .map(|p| p as u8)
    }

    pub fn has_retx_pending(&self) -> bool {
        !self.retx_ready.is_empty()
    }

    /// Place a new block on an idle process and mark it in flight.
    pub fn start_new(&mut self, proc: u8, block: TransportBlock) {
        let slot = &mut self.blocks[proc as usize];
        assert!(slot.is_none(), "process {proc} already holds a block");
        debug_assert_eq!(block.attempt, 1);
        *slot = Some(block);
        self.awaiting[proc as usize] = true;
        self.transmitted_blocks += 1;
    }

    /// Retransmit the oldest pending block. Returns the process now in
    /// flight, with the stored SNR refreshed to current conditions.
    pub fn start_retx(&mut self, snr_db: f64) -> Option<u8> {
        let proc = self.retx_ready.pop_front()?;
        let block = self.blocks[proc as usize]
            .as_mut()
            .expect("retx process must hold a block");
        block.attempt += 1;
        block.snr_db = snr_db;
        self.awaiting[proc as usize] = true;
        self.transmitted_blocks += 1;
        Some(proc)
    }

    pub fn in_flight(&self, proc: u8) -> bool {
        self.awaiting[proc as usize]
    }

    pub fn block_of(&self, proc: u8) -> Option<&TransportBlock> {
        self.blocks[proc as usize].as_ref()
    }

    /// Resolve feedback for a process that was awaiting it.
    pub fn on_feedback(&mut self, proc: u8, decode: Decode, max_tx: u8) -> FeedbackOutcome {
        assert!(
            self.awaiting[proc as usize],
            "feedback for idle HARQ process {proc}"
        );
        self.awaiting[proc as usize] = false;
        match decode {
            Decode::Decoded => {
                let block = self.blocks[proc as usize].take().unwrap();
                FeedbackOutcome::Delivered(block)
            }
            Decode::Failed => {
                let attempt = self.blocks[proc as usize].as_ref().unwrap().attempt;
                if attempt < max_tx {
                    self.retx_ready.push_back(proc);
                    FeedbackOutcome::Requeued
                } else {
                    let block = self.blocks[proc as usize].take().unwrap();
                    self.residual_dropped_blocks += 1;
                    FeedbackOutcome::Dropped(block)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(bits: u64) -> TransportBlock {
        TransportBlock {
            bits,
            pdus: Vec::new(),
            attempt: 1,
            snr_db: 10.0,
        }
    }

    #[test]
    fn first_attempt_bler_is_ten_percent() {
        let cfg = HarqConfig::default();
        let mut rng = RngStream::new(11, "harq");
        let n = 200_000;
        let fails = (0..n)
            .filter(|_| decode_outcome(&mut rng, 10.0, 1, &cfg) == Decode::Failed)
            .count();
        let rate = fails as f64 / n as f64;
        assert!((rate - 0.1).abs() < 0.005, "rate {rate}");
    }

    #[test]
    fn bler_decays_above_knee() {
        let cfg = HarqConfig::default();
        assert_eq!(cfg.bler(5.0), 0.1);
        assert_eq!(cfg.bler(13.0), 0.1);
        assert!(cfg.bler(14.5) < 0.011 && cfg.bler(14.5) > 0.009);
        assert!(cfg.bler(30.0) < 1e-10);
    }

    /// Residual loss after the full HARQ cycle matches the closed form
    /// bler^max_tx, checked to three sigma over a million blocks.
    #[test]
    fn residual_loss_matches_closed_form() {
        let cfg = HarqConfig::default();
        let mut rng = RngStream::new(7, "harq-residual");
        let n: u64 = 1_000_000;
        let mut dropped = 0u64;
        for _ in 0..n {
            let mut attempt = 1;
            loop {
                match decode_outcome(&mut rng, 10.0, attempt, &cfg) {
                    Decode::Decoded => break,
                    Decode::Failed if attempt >= cfg.max_tx => {
                        dropped += 1;
                        break;
                    }
                    Decode::Failed => attempt += 1,
                }
            }
        }
        let expect = cfg.bler_first.powi(cfg.max_tx as i32);
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        let observed = dropped as f64 / n as f64;
        assert!(
            (observed - expect).abs() <= 3.0 * sigma,
            "observed {observed}, expected {expect} +- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn no_harq_arm_drops_at_first_failure() {
        let cfg = HarqConfig {
            max_tx: 1,
            ..HarqConfig::default()
        };
        let mut rng = RngStream::new(8, "noharq");
        let n: u64 = 500_000;
        let mut dropped = 0u64;
        for _ in 0..n {
            if decode_outcome(&mut rng, 10.0, 1, &cfg) == Decode::Failed {
                dropped += 1;
            }
        }
        let rate = dropped as f64 / n as f64;
        assert!((rate - 0.1).abs() < 0.003, "rate {rate}");
    }

    #[test]
    fn pool_never_exceeds_processes_and_feedback_paths_work() {
        let mut pool = HarqPool::new(2);
        let p0 = pool.idle_process().unwrap();
        pool.start_new(p0, block(1000));
        let p1 = pool.idle_process().unwrap();
        assert_ne!(p0, p1);
        pool.start_new(p1, block(2000));
        assert!(pool.idle_process().is_none());

        // p0 fails below the limit: requeued, still occupies the process
        match pool.on_feedback(p0, Decode::Failed, 4) {
            FeedbackOutcome::Requeued => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(pool.idle_process().is_none());
        assert!(pool.has_retx_pending());
        let rp = pool.start_retx(12.0).unwrap();
        assert_eq!(rp, p0);
        assert_eq!(pool.block_of(p0).unwrap().attempt, 2);

        // p1 decodes: process freed
        match pool.on_feedback(p1, Decode::Decoded, 4) {
            FeedbackOutcome::Delivered(b) => assert_eq!(b.bits, 2000),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(pool.idle_process(), Some(p1));
    }

    #[test]
    fn drop_at_attempt_limit() {
        let mut pool = HarqPool::new(1);
        pool.start_new(0, block(500));
        for _ in 0..3 {
            match pool.on_feedback(0, Decode::Failed, 4) {
                FeedbackOutcome::Requeued => {}
                other => panic!("unexpected {other:?}"),
            }
            pool.start_retx(10.0).unwrap();
        }
        // fourth transmission fails: dropped
        match pool.on_feedback(0, Decode::Failed, 4) {
            FeedbackOutcome::Dropped(b) => assert_eq!(b.attempt, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(pool.residual_dropped_blocks, 1);
        assert_eq!(pool.idle_process(), Some(0));
    }

    #[test]
    #[should_panic(expected = "feedback for idle HARQ process")]
    fn feedback_for_idle_process_is_a_contract_violation() {
        let mut pool = HarqPool::new(1);
        pool.on_feedback(0, Decode::Decoded, 4);
    }
}

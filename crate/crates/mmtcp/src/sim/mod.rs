//! Deterministic discrete-event core: clock, queue, and partitioned RNG.

mod engine;
mod rng;
mod time;

pub use engine::{EventId, EventQueue, Handler};
pub use rng::RngStream;
pub use time::SimTime;

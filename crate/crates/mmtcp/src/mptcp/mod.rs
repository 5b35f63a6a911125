//! Multipath TCP: the meta connection over one or more subflows, the
//! min-RTT scheduler, and the coupled congestion controllers.

mod conn;
mod coupled;
mod scheduler;

pub use conn::{ConnCc, Connection, DataResult, DeliveredChunk, Subflow};
pub use coupled::{
    balia_decrease_fraction, balia_increase, lia_increase, olia_increase, PathView,
};
pub use scheduler::scheduler_pick;

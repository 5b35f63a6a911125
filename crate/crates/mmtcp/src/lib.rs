//! Discrete-event simulator of TCP and Multipath-TCP over mmWave and LTE
//! cellular links.
//!
//! The crate models the pieces that matter for transport-layer behavior
//! on millimeter-wave access links: a LOS/NLOS/outage channel process,
//! MAC-layer HARQ, RLC AM/UM retransmission and reassembly, a bounded
//! PDCP buffer, NewReno/CUBIC TCP, and MP-TCP with the LIA, OLIA and
//! BALIA coupled congestion controllers over heterogeneous paths.
//!
//! Runs are fully deterministic: a scenario plus a root seed reproduces
//! byte-identical metric output. See the `examples/` directory for one
//! runnable program per experiment family, or the `mmtcp` binary for the
//! `run` / `preset` / `list-keys` command line.

pub mod channel;
pub mod link;
pub mod mptcp;
pub mod scenario;
pub mod sim;
pub mod tcp;
pub mod world;

//! Placeholder while the scenario wiring lands.

//! Monte Carlo experiments: trial batches, sweeps, lemma checks and
//! self-stabilization probes.

pub mod lemmas;
pub mod probe;
pub mod sweep;
pub mod trials;

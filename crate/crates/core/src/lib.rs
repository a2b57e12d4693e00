//! Simulation, verification and exact analysis of stochastic spiking
//! networks that solve winner-take-all.
//!
//! Neurons fire at step `t` with probability `sigmoid(pot / λ)`, where the
//! potential sums weighted spikes over the last `h` frames minus a bias.
//! The crate builds the two-inhibitor, single-inhibitor and
//! logarithmic-inhibitor WTA networks, simulates them with counter-based
//! randomness, classifies configurations, computes exact convergence
//! distributions on small instances and runs the statistical experiments.

pub mod bits;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod nets;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod verify;

pub use bits::Configuration;
pub use dynamics::{
    firing_probabilities, potential, rescale_temperature, run, sigmoid, spike_probability, step, Execution,
    ExecutionWindow, InputTrace, Simulator,
};
pub use error::{Error, Result};
pub use experiments::lemmas::{lemma_catalog, lemma_check, BoundKind, LemmaCheckReport, LemmaParams};
pub use experiments::probe::{hold_comparison, hold_trials, self_stabilization_probe, Perturbation, PerturbationKind};
pub use experiments::sweep::{sweep, SweepCell, SweepGrid, SweepRow};
pub use experiments::trials::{run_trials, InitialPolicy, TrialPlan, TrialSummary};
pub use nets::{
    build_log_inhibitor, build_single_inhibitor, build_two_inhibitor, ceil_log2, gamma_for, tc_bound, NetworkFamily,
    TheoremMode, WtaInstance, WtaLayout, WtaNetwork, WtaVariant,
};
pub use network::{validate_network, NetworkSpec, Neuron, NeuronId, NeuronKind, Polarity, Synapse};
pub use oracle::{convergence_cdf, event_probability, exact_step_distribution, hold_probability, EventMode};
pub use rng::RandomnessContract;
pub use verify::{
    classify_log_inhibitor, classify_single_inhibitor, classify_two_inhibitor, convergence_time,
    is_valid_wta_output, ConfigClass, ConvergenceOutcome, Label, NearStable,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::dynamics::{ExecutionWindow, InputTrace, Simulator};
use crate::error::{Error, Result};
use crate::nets::{WtaInstance, WtaNetwork};
use crate::rng::{Purpose, RandomnessContract};
use crate::stats::{mean, median, wilson};
use crate::verify::{ConvergenceOutcome, ConvergenceTracker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPolicy {
    AllZero,
    AllFire,
    UniformRandom,
    Explicit(ExecutionWindow),
}

/// A batch of independent trials of one instance. `horizon` is the last
/// time step simulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub instance: WtaInstance,
    pub init: InitialPolicy,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
}

impl TrialPlan {
    /// Plan with the default horizon `4 t_c + t_s`.
    pub fn new(instance: WtaInstance, init: InitialPolicy, trials: u64, seed: u64) -> Self {
        let horizon = 4 * instance.t_c + instance.t_s;
        Self { instance, init, horizon, trials, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let required = self.instance.t_c + self.instance.t_s;
        if self.horizon < required {
            return Err(Error::HorizonTooShort { horizon: self.horizon, required });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub outcomes: Vec<ConvergenceOutcome>,
    pub trials: u64,
    /// Trials that converged at some `t <= t_c`.
    pub successes: u64,
    pub success_frac: f64,
    /// Wilson 99% interval on `success_frac`.
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Over trials that converged within the horizon.
    pub mean_tconv: Option<f64>,
    pub median_tconv: Option<f64>,
    pub timeouts: u64,
}

impl TrialSummary {
    pub fn from_outcomes(outcomes: Vec<ConvergenceOutcome>, t_c: u64) -> Self {
        let trials = outcomes.len() as u64;
        let successes = outcomes.iter().filter(|o| o.converged_at.is_some_and(|t| t <= t_c)).count() as u64;
        let times: Vec<f64> = outcomes.iter().filter_map(|o| o.converged_at).map(|t| t as f64).collect();
        let (wilson_lo, wilson_hi) = wilson(successes, trials, 0.99);
        Self {
            trials,
            successes,
            success_frac: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            wilson_lo,
            wilson_hi,
            mean_tconv: mean(&times),
            median_tconv: median(&times),
            timeouts: outcomes.iter().filter(|o| o.timed_out).count() as u64,
            outcomes,
        }
    }

    /// Half-width of the 99% interval around the point estimate.
    pub fn half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

fn frame_with(net: &WtaNetwork, input: &Configuration, fill: impl FnMut(usize) -> bool) -> Configuration {
    let mut fill = fill;
    let mut c = Configuration::zeros(net.spec.len());
    c.splice(0, input);
    for &u in net.spec.non_inputs() {
        c.set(u, fill(u));
    }
    c
}

/// Initial window for one trial under `policy`; input bits are `input`.
pub fn initial_window(
    net: &WtaNetwork,
    input: &Configuration,
    policy: &InitialPolicy,
    contract: &RandomnessContract,
    trial: u64,
) -> Result<ExecutionWindow> {
    input.check_len(net.n())?;
    let h = net.spec.history();
    match policy {
        InitialPolicy::AllZero => Ok(ExecutionWindow::repeated(frame_with(net, input, |_| false), h)),
        InitialPolicy::AllFire => Ok(ExecutionWindow::repeated(frame_with(net, input, |_| true), h)),
        InitialPolicy::UniformRandom => {
            let mut rng = contract.aux_rng(Purpose::InitialState, trial);
            let frames = (0..h).map(|_| frame_with(net, input, |_| rng.random_bool(0.5))).collect();
            ExecutionWindow::new(frames)
        }
        InitialPolicy::Explicit(w) => {
            if w.history() != h || w.width() != net.spec.len() {
                return Err(Error::WindowMismatch { expected: h, neurons: net.spec.len() });
            }
            if w.frames().iter().any(|f| net.layout.input_bits(f) != *input) {
                return Err(Error::InvalidParameter("explicit window inputs differ from the instance input".into()));
            }
            Ok(w.clone())
        }
    }
}

/// Fixed-input trial driver shared by the trial runner and the probe.
pub struct TrialRunner<'a> {
    pub net: &'a WtaNetwork,
    pub trace: InputTrace,
    pub t_s: u64,
    pub contract: RandomnessContract,
}

impl<'a> TrialRunner<'a> {
    pub fn new(net: &'a WtaNetwork, input: &Configuration, t_s: u64, seed: u64) -> Self {
        Self { net, trace: InputTrace::Fixed(input.clone()), t_s, contract: RandomnessContract::new(seed) }
    }

    /// Follow trial `trial` from `window` (latest frame at time `start`)
    /// until the convergence event is seen or time `horizon` is reached.
    /// Convergence times count from the first frame of `window`.
    pub fn follow(&self, window: &ExecutionWindow, start: u64, horizon: u64, trial: u64) -> Result<ConvergenceOutcome> {
        let h = window.history() as u64;
        let origin = start + 1 - h;
        let mut tracker = ConvergenceTracker::new(self.net.n(), self.t_s);
        for (f, frame) in window.frames().iter().enumerate() {
            tracker.observe(f as u64, frame);
        }
        let mut sim = Simulator::starting_at(&self.net.spec, window, start, &self.trace, &self.contract, trial)?;
        while tracker.converged_at().is_none() && sim.time() < horizon {
            let t = sim.time() + 1 - origin;
            tracker.observe(t, sim.advance());
        }
        Ok(tracker.outcome())
    }
}

/// Run every trial of the plan in parallel. Results do not depend on the
/// thread count.
pub fn run_trials(plan: &TrialPlan) -> Result<TrialSummary> {
    plan.validate()?;
    let inst = &plan.instance;
    let net = inst.network()?;
    let runner = TrialRunner::new(&net, &inst.input, inst.t_s, plan.seed);
    let outcomes = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let w = initial_window(&net, &inst.input, &plan.init, &runner.contract, trial)?;
            runner.follow(&w, w.history() as u64 - 1, plan.horizon, trial)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSummary::from_outcomes(outcomes, inst.t_c))
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::dynamics::{ExecutionWindow, InputTrace, Simulator};
use crate::error::{Error, Result};
use crate::experiments::trials::{initial_window, TrialPlan, TrialRunner, TrialSummary};
use crate::nets::{NetworkFamily, WtaNetwork};
use crate::rng::{Purpose, RandomnessContract};
use crate::stats::wilson;
use crate::verify::{is_stable_start, is_valid_wta_output};

/// State written over every frame of the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    AllFire,
    AllZero,
    UniformRandom,
    Explicit(ExecutionWindow),
}

/// Overwrite the window whose latest frame is time `at`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub at: u64,
    pub kind: PerturbationKind,
}

impl Perturbation {
    /// `count` perturbations of one kind, `gap` steps apart, the first at
    /// `first`.
    pub fn every(first: u64, gap: u64, count: usize, kind: PerturbationKind) -> Vec<Self> {
        (0..count as u64).map(|k| Self { at: first + k * gap, kind: kind.clone() }).collect()
    }
}

/// One summary per phase: the unperturbed start, then one after each
/// perturbation. Convergence times are relative to the phase start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub phases: Vec<TrialSummary>,
}

impl ProbeReport {
    pub fn worst_success(&self) -> f64 {
        self.phases.iter().map(|p| p.success_frac).fold(1.0, f64::min)
    }
}

fn perturbed_window(
    net: &WtaNetwork,
    input: &Configuration,
    kind: &PerturbationKind,
    rng: &mut impl Rng,
) -> Result<ExecutionWindow> {
    let h = net.spec.history();
    let frame = |fill: &mut dyn FnMut() -> bool| {
        let mut c = Configuration::zeros(net.spec.len());
        c.splice(0, input);
        for &u in net.spec.non_inputs() {
            c.set(u, fill());
        }
        c
    };
    Ok(match kind {
        PerturbationKind::AllFire => ExecutionWindow::repeated(frame(&mut || true), h),
        PerturbationKind::AllZero => ExecutionWindow::repeated(frame(&mut || false), h),
        PerturbationKind::UniformRandom => {
            ExecutionWindow::new((0..h).map(|_| frame(&mut || rng.random_bool(0.5))).collect())?
        }
        PerturbationKind::Explicit(w) => {
            if w.history() != h || w.width() != net.spec.len() {
                return Err(Error::WindowMismatch { expected: h, neurons: net.spec.len() });
            }
            w.clone()
        }
    })
}

/// Run the plan with the window overwritten at each perturbation time and
/// measure re-convergence after each one. Phase `k` is followed until
/// convergence, the plan's horizon span, or the next perturbation; a phase
/// cut short by the next perturbation counts as a timeout.
pub fn self_stabilization_probe(plan: &TrialPlan, perturbations: &[Perturbation]) -> Result<ProbeReport> {
    plan.validate()?;
    let inst = &plan.instance;
    let net = inst.network()?;
    let h = net.spec.history() as u64;
    let span = plan.horizon - (h - 1);
    let mut starts = vec![h - 1];
    for p in perturbations {
        if p.at <= *starts.last().expect("non-empty") {
            return Err(Error::InvalidParameter("perturbation times must increase and follow the initial window".into()));
        }
        starts.push(p.at);
    }
    let runner = TrialRunner::new(&net, &inst.input, inst.t_s, plan.seed);
    let per_trial = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = runner.contract.aux_rng(Purpose::Perturbation, trial);
            let mut out = Vec::with_capacity(starts.len());
            for (k, &start) in starts.iter().enumerate() {
                let window = if k == 0 {
                    initial_window(&net, &inst.input, &plan.init, &runner.contract, trial)?
                } else {
                    perturbed_window(&net, &inst.input, &perturbations[k - 1].kind, &mut rng)?
                };
                let mut horizon = start + span;
                if let Some(&next) = starts.get(k + 1) {
                    horizon = horizon.min(next);
                }
                out.push(runner.follow(&window, start, horizon, trial)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let phases = (0..starts.len())
        .map(|k| TrialSummary::from_outcomes(per_trial.iter().map(|o| o[k]).collect(), inst.t_c))
        .collect();
    Ok(ProbeReport { phases })
}

/// Window from which the variant's hold event is measured: a valid WTA
/// configuration for one-step networks, a near-stable pair with both
/// frames equal for the history network.
pub fn stable_window(net: &WtaNetwork, input: &Configuration, winner: usize) -> Result<ExecutionWindow> {
    let l = net.layout;
    input.check_len(l.n)?;
    if !input.get(winner) {
        return Err(Error::NotValidConfiguration);
    }
    let mut c = Configuration::zeros(l.len());
    c.splice(0, input);
    c.set(l.y(winner), true);
    match l.family {
        NetworkFamily::TwoInhibitor | NetworkFamily::LogInhibitor => c.set(l.a_s().expect("has a_s"), true),
        NetworkFamily::SingleInhibitor => c.set(l.a_c().expect("has a_c"), true),
    }
    let w = ExecutionWindow::repeated(c, l.family.history());
    if !is_stable_start(&l, input, &w)? {
        return Err(Error::NotValidConfiguration);
    }
    Ok(w)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldEstimate {
    pub holds: u64,
    pub trials: u64,
    pub frac: f64,
    /// Wilson 99% interval.
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl HoldEstimate {
    pub fn half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

/// Fraction of trials in which the output holds for `t_s` steps from
/// `window`. One-step networks: `Y` equals the starting output at every
/// step. History network: the next output is a valid WTA output and stays
/// fixed for `t_s` further steps.
pub fn hold_trials(
    net: &WtaNetwork,
    input: &Configuration,
    window: &ExecutionWindow,
    t_s: u64,
    trials: u64,
    seed: u64,
) -> Result<HoldEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let l = net.layout;
    if !is_stable_start(&l, input, window)? {
        return Err(Error::NotValidConfiguration);
    }
    let contract = RandomnessContract::new(seed);
    let trace = InputTrace::Fixed(input.clone());
    let h = window.history() as u64;
    let holds = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut sim = Simulator::starting_at(&net.spec, window, h - 1, &trace, &contract, trial)?;
            let target = match l.family {
                NetworkFamily::LogInhibitor => {
                    let y = l.output_bits(sim.advance());
                    if !is_valid_wta_output(input, &y)? {
                        return Ok(false);
                    }
                    y
                }
                _ => l.output_bits(window.latest()),
            };
            for _ in 0..t_s {
                if l.output_bits(sim.advance()) != target {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count() as u64;
    let (wilson_lo, wilson_hi) = wilson(holds, trials, 0.99);
    Ok(HoldEstimate { holds, trials, frac: holds as f64 / trials as f64, wilson_lo, wilson_hi })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldComparison {
    pub single: HoldEstimate,
    pub two: HoldEstimate,
}

/// Hold fractions of the single- and two-inhibitor networks with the same
/// `n`, γ and all-ones input, both started from a valid configuration.
pub fn hold_comparison(n: usize, gamma: f64, t_s: u64, trials: u64, seed: u64) -> Result<HoldComparison> {
    let input = Configuration::ones(n);
    let est = |family| -> Result<HoldEstimate> {
        let net = WtaNetwork::new(family, n, gamma)?;
        let w = stable_window(&net, &input, 0)?;
        hold_trials(&net, &input, &w, t_s, trials, seed)
    };
    Ok(HoldComparison { single: est(NetworkFamily::SingleInhibitor)?, two: est(NetworkFamily::TwoInhibitor)? })
}

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::error::{Error, Result};
use crate::network::{NetworkSpec, NeuronKind};
use crate::rng::{RandomnessContract, TrialStream};

/// The last `h` configurations, most recent last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionWindow {
    frames: Vec<Configuration>,
}

impl ExecutionWindow {
    pub fn new(frames: Vec<Configuration>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::InvalidParameter("a window needs at least one frame".into()));
        };
        let len = first.len();
        for f in &frames {
            f.check_len(len)?;
        }
        Ok(Self { frames })
    }

    /// `h` copies of one configuration.
    pub fn repeated(config: Configuration, h: usize) -> Self {
        assert!(h >= 1);
        Self { frames: vec![config; h] }
    }

    pub fn history(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frames(&self) -> &[Configuration] {
        &self.frames
    }

    pub fn latest(&self) -> &Configuration {
        self.frames.last().expect("window is never empty")
    }

    /// Frame `lag` steps back; lag 1 is the latest frame.
    pub fn back(&self, lag: usize) -> &Configuration {
        &self.frames[self.frames.len() - lag]
    }

    /// Drop the oldest frame and append `next`.
    pub fn push(&mut self, next: Configuration) {
        self.frames.remove(0);
        self.frames.push(next);
    }

    fn check(&self, spec: &NetworkSpec) -> Result<()> {
        if self.history() != spec.history() || self.width() != spec.len() {
            return Err(Error::WindowMismatch { expected: spec.history(), neurons: spec.len() });
        }
        Ok(())
    }
}

/// Input bits over time. `Bernoulli` fires input `j` at time `t` iff the
/// contract's draw for that input neuron at `t` is below `rates[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputTrace {
    Fixed(Configuration),
    Bernoulli(Vec<f64>),
}

impl InputTrace {
    fn check(&self, spec: &NetworkSpec) -> Result<()> {
        let n_in = spec.inputs().len();
        match self {
            InputTrace::Fixed(c) => c.check_len(n_in),
            InputTrace::Bernoulli(rates) => {
                if rates.len() != n_in {
                    return Err(Error::LengthMismatch { expected: n_in, found: rates.len() });
                }
                if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                    return Err(Error::InvalidParameter(format!("input rate {r} outside [0, 1]")));
                }
                Ok(())
            }
        }
    }
}

/// A finite execution: the initial window followed by simulated frames.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub frames: Vec<Configuration>,
    pub input: InputTrace,
}

impl Execution {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn spike_probability(spec: &NetworkSpec, pot: f64) -> f64 {
    sigmoid(pot / spec.lambda())
}

#[inline]
fn potential_with<'w>(spec: &NetworkSpec, back: impl Fn(usize) -> &'w Configuration, u: usize) -> f64 {
    let mut sum = 0.0;
    for e in spec.incoming(u) {
        if back(e.lag).get(e.pre) {
            sum += e.weight;
        }
    }
    sum - spec.bias(u)
}

fn check_lags(spec: &NetworkSpec) -> Result<()> {
    match spec.edges().iter().find(|e| e.lag == 0 || e.lag > spec.history()) {
        Some(e) => Err(Error::LagOutOfRange { lag: e.lag, history: spec.history() }),
        None => Ok(()),
    }
}

/// Membrane potential of non-input neuron `u` given the window.
pub fn potential(spec: &NetworkSpec, window: &ExecutionWindow, u: usize) -> Result<f64> {
    window.check(spec)?;
    if spec.neuron(u)?.kind == NeuronKind::Input {
        return Err(Error::InputNeuronPotential(u));
    }
    for e in spec.incoming(u) {
        if e.lag == 0 || e.lag > spec.history() {
            return Err(Error::LagOutOfRange { lag: e.lag, history: spec.history() });
        }
    }
    Ok(potential_with(spec, |lag| window.back(lag), u))
}

/// Firing probability of every non-input neuron, in `non_inputs` order.
pub fn firing_probabilities(spec: &NetworkSpec, window: &ExecutionWindow) -> Result<Vec<f64>> {
    spec.non_inputs()
        .iter()
        .map(|&u| potential(spec, window, u).map(|p| spike_probability(spec, p)))
        .collect()
}

/// One synchronous step. `next_input` holds the input bits in `inputs`
/// order; `draws[k]` belongs to the `k`-th non-input neuron.
pub fn step(
    spec: &NetworkSpec,
    window: &ExecutionWindow,
    next_input: &Configuration,
    draws: &[f64],
) -> Result<Configuration> {
    window.check(spec)?;
    check_lags(spec)?;
    next_input.check_len(spec.inputs().len())?;
    if let Some(&u) = spec.non_inputs().get(draws.len()) {
        return Err(Error::MissingDraw(u));
    }
    let mut next = Configuration::zeros(spec.len());
    for (j, &x) in spec.inputs().iter().enumerate() {
        next.set(x, next_input.get(j));
    }
    for (k, &u) in spec.non_inputs().iter().enumerate() {
        let p = spike_probability(spec, potential_with(spec, |lag| window.back(lag), u));
        next.set(u, draws[k] < p);
    }
    Ok(next)
}

/// Streaming simulator for one trial. Frame `t` is computed from the
/// window ending at `t - 1` with the contract's draws at `(trial, t, .)`.
pub struct Simulator<'a> {
    spec: &'a NetworkSpec,
    trace: &'a InputTrace,
    stream: TrialStream,
    frames: VecDeque<Configuration>,
    draws: Vec<f64>,
    fire: Vec<bool>,
    time: u64,
}

impl<'a> Simulator<'a> {
    /// Start from `initial`, whose latest frame is time `h - 1`.
    pub fn new(
        spec: &'a NetworkSpec,
        initial: &ExecutionWindow,
        trace: &'a InputTrace,
        contract: &RandomnessContract,
        trial: u64,
    ) -> Result<Self> {
        let start = spec.history() as u64 - 1;
        Self::starting_at(spec, initial, start, trace, contract, trial)
    }

    /// Start from `window` with its latest frame at time `time`.
    pub fn starting_at(
        spec: &'a NetworkSpec,
        window: &ExecutionWindow,
        time: u64,
        trace: &'a InputTrace,
        contract: &RandomnessContract,
        trial: u64,
    ) -> Result<Self> {
        window.check(spec)?;
        check_lags(spec)?;
        trace.check(spec)?;
        Ok(Self {
            spec,
            trace,
            stream: contract.stream(trial, spec.len()),
            frames: window.frames().iter().cloned().collect(),
            draws: vec![0.0; spec.len()],
            fire: Vec::with_capacity(spec.non_inputs().len()),
            time,
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn latest(&self) -> &Configuration {
        self.frames.back().expect("window is never empty")
    }

    pub fn window(&self) -> ExecutionWindow {
        ExecutionWindow { frames: self.frames.iter().cloned().collect() }
    }

    /// Replace the whole window, keeping the clock.
    pub fn overwrite(&mut self, window: &ExecutionWindow) -> Result<()> {
        window.check(self.spec)?;
        self.frames = window.frames().iter().cloned().collect();
        Ok(())
    }

    /// Jump the clock; the window is left as is.
    pub fn set_time(&mut self, time: u64) {
        self.time = time;
    }

    /// Compute the next frame and return it.
    pub fn advance(&mut self) -> &Configuration {
        let t = self.time + 1;
        self.stream.fill(t, &mut self.draws);
        let spec = self.spec;
        let h = self.frames.len();
        let frames = &self.frames;
        self.fire.clear();
        for &u in spec.non_inputs() {
            let pot = potential_with(spec, |lag| &frames[h - lag], u);
            self.fire.push(self.draws[u] < spike_probability(spec, pot));
        }
        let mut next = self.frames.pop_front().expect("window is never empty");
        for (&u, &f) in spec.non_inputs().iter().zip(&self.fire) {
            next.set(u, f);
        }
        match self.trace {
            InputTrace::Fixed(x) => {
                for (j, &u) in spec.inputs().iter().enumerate() {
                    next.set(u, x.get(j));
                }
            }
            InputTrace::Bernoulli(rates) => {
                for (j, &u) in spec.inputs().iter().enumerate() {
                    next.set(u, self.draws[u] < rates[j]);
                }
            }
        }
        self.frames.push_back(next);
        self.time = t;
        self.latest()
    }
}

/// Simulate `horizon` frames in total, the first `h` being `initial`.
pub fn run(
    spec: &NetworkSpec,
    initial: &ExecutionWindow,
    input_trace: &InputTrace,
    horizon: usize,
    randomness: &RandomnessContract,
    trial: u64,
) -> Result<Execution> {
    let h = spec.history();
    if horizon < h {
        return Err(Error::HorizonTooShort { horizon: horizon as u64, required: h as u64 });
    }
    let mut sim = Simulator::new(spec, initial, input_trace, randomness, trial)?;
    let mut frames = initial.frames().to_vec();
    while frames.len() < horizon {
        frames.push(sim.advance().clone());
    }
    Ok(Execution { frames, input: input_trace.clone() })
}

/// Same dynamics at temperature `new_lambda`: weights and biases scale by
/// `new_lambda / lambda`, which leaves every `pot / lambda` unchanged.
pub fn rescale_temperature(spec: &NetworkSpec, new_lambda: f64) -> Result<NetworkSpec> {
    if !(new_lambda > 0.0 && new_lambda.is_finite()) {
        return Err(Error::NonpositiveTemperature(new_lambda));
    }
    if new_lambda == spec.lambda() {
        return Ok(spec.clone());
    }
    let factor = new_lambda / spec.lambda();
    spec.map_parameters(|v| v * factor, new_lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Neuron, NeuronId, Polarity, Synapse};

    fn chain(history: usize, bias: f64) -> NetworkSpec {
        let neurons = vec![
            Neuron { id: NeuronId(0), kind: NeuronKind::Input, polarity: Polarity::Excitatory },
            Neuron { id: NeuronId(1), kind: NeuronKind::Output, polarity: Polarity::Excitatory },
        ];
        let edges = (1..=history)
            .map(|lag| Synapse { pre: NeuronId(0), post: NeuronId(1), lag, weight: lag as f64 })
            .collect();
        NetworkSpec::from_parts(neurons, edges, vec![0.0, bias], 1.0, history).unwrap()
    }

    #[test]
    fn sigmoid_saturates_and_is_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        for x in [0.3, 2.0, 17.5] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn potential_reads_lags() {
        let spec = chain(2, 0.5);
        let w = ExecutionWindow::new(vec![
            "10".parse().unwrap(), // older, lag 2
            "00".parse().unwrap(), // latest, lag 1
        ])
        .unwrap();
        assert_eq!(potential(&spec, &w, 1).unwrap(), 2.0 - 0.5);
        assert!(matches!(potential(&spec, &w, 0), Err(Error::InputNeuronPotential(0))));
        let short = ExecutionWindow::repeated("10".parse().unwrap(), 1);
        assert!(matches!(potential(&spec, &short, 1), Err(Error::WindowMismatch { .. })));
    }

    #[test]
    fn step_threshold_and_missing_draw() {
        let spec = chain(1, 0.0);
        let w = ExecutionWindow::repeated("00".parse().unwrap(), 1);
        let x: Configuration = "1".parse().unwrap();
        assert!(step(&spec, &w, &x, &[0.49]).unwrap().get(1));
        assert!(!step(&spec, &w, &x, &[0.51]).unwrap().get(1));
        assert!(step(&spec, &w, &x, &[0.51]).unwrap().get(0));
        assert!(matches!(step(&spec, &w, &x, &[]), Err(Error::MissingDraw(1))));
    }

    #[test]
    fn simulator_matches_pointwise_step() {
        let spec = chain(2, 1.0);
        let c = RandomnessContract::new(4);
        let init = ExecutionWindow::new(vec!["11".parse().unwrap(), "01".parse().unwrap()]).unwrap();
        let trace = InputTrace::Bernoulli(vec![0.5]);
        let exec = run(&spec, &init, &trace, 30, &c, 9).unwrap();
        assert_eq!(exec.len(), 30);
        assert_eq!(&exec.frames[..2], init.frames());
        let mut w = init.clone();
        for t in 2..30u64 {
            let x0 = c.draw(9, t, 0, 2) < 0.5;
            let d = c.draw(9, t, 1, 2);
            let next = step(&spec, &w, &Configuration::from_bools(&[x0]), &[d]).unwrap();
            assert_eq!(next, exec.frames[t as usize]);
            w.push(next);
        }
    }

    #[test]
    fn horizon_equal_to_history_returns_initial() {
        let spec = chain(2, 1.0);
        let init = ExecutionWindow::new(vec!["11".parse().unwrap(), "01".parse().unwrap()]).unwrap();
        let trace = InputTrace::Fixed("1".parse().unwrap());
        let exec = run(&spec, &init, &trace, 2, &RandomnessContract::new(0), 0).unwrap();
        assert_eq!(exec.frames, init.frames());
        assert!(run(&spec, &init, &trace, 1, &RandomnessContract::new(0), 0).is_err());
    }

    #[test]
    fn rescale_identity_and_errors() {
        let spec = chain(1, 2.0);
        assert_eq!(rescale_temperature(&spec, 1.0).unwrap(), spec);
        assert!(matches!(rescale_temperature(&spec, 0.0), Err(Error::NonpositiveTemperature(_))));
        assert!(matches!(rescale_temperature(&spec, -1.0), Err(Error::NonpositiveTemperature(_))));
    }
}

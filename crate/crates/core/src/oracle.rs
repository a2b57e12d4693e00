use std::collections::{BTreeMap, HashMap};

use crate::bits::Configuration;
use crate::dynamics::{potential, spike_probability, ExecutionWindow};
use crate::error::{Error, Result};
use crate::nets::{NetworkFamily, WtaNetwork};
use crate::network::{NetworkSpec, NeuronKind};
use crate::verify::{is_stable_start, is_valid_wta_output};

pub const DEFAULT_STATE_CAP: usize = 1 << 22;

/// Product-form distribution over the non-input bits of the next frame.
/// Entry `z` has bit `k` set iff the `k`-th non-input neuron fires.
fn outcome_probs(p: &[f64]) -> Vec<f64> {
    let mut probs = Vec::with_capacity(1 << p.len());
    probs.push(1.0);
    for &pk in p {
        let len = probs.len();
        for i in 0..len {
            let v = probs[i];
            probs[i] = v * (1.0 - pk);
            probs.push(v * pk);
        }
    }
    probs
}

fn check_guard(bits: usize, cap: usize) -> Result<()> {
    if bits >= usize::BITS as usize || (1usize << bits) > cap {
        return Err(Error::StateSpaceTooLarge { log2_states: bits, cap });
    }
    Ok(())
}

fn check_input(spec: &NetworkSpec, input: &Configuration) -> Result<()> {
    input.check_len(spec.inputs().len())
}

fn next_frame(spec: &NetworkSpec, input: &Configuration, z: usize) -> Configuration {
    let mut c = Configuration::zeros(spec.len());
    for (j, &x) in spec.inputs().iter().enumerate() {
        c.set(x, input.get(j));
    }
    for (k, &u) in spec.non_inputs().iter().enumerate() {
        c.set(u, (z >> k) & 1 == 1);
    }
    c
}

/// Exact distribution of the next configuration given the window, with the
/// input bits set to `input`.
pub fn exact_step_distribution(
    spec: &NetworkSpec,
    window: &ExecutionWindow,
    input: &Configuration,
) -> Result<BTreeMap<Configuration, f64>> {
    check_input(spec, input)?;
    check_guard(spec.non_inputs().len(), DEFAULT_STATE_CAP)?;
    let p = non_input_probabilities(spec, window)?;
    Ok(outcome_probs(&p)
        .into_iter()
        .enumerate()
        .map(|(z, pr)| (next_frame(spec, input, z), pr))
        .collect())
}

fn non_input_probabilities(spec: &NetworkSpec, window: &ExecutionWindow) -> Result<Vec<f64>> {
    spec.non_inputs()
        .iter()
        .map(|&u| potential(spec, window, u).map(|pot| spike_probability(spec, pot)))
        .collect()
}

/// All windows over a fixed input vector, indexed by their non-input bits:
/// frame `f` (oldest first) occupies bits `m*f .. m*(f+1)`.
pub struct WindowStateSpace<'a> {
    spec: &'a NetworkSpec,
    input: Configuration,
    m: usize,
    h: usize,
}

impl<'a> WindowStateSpace<'a> {
    pub fn new(spec: &'a NetworkSpec, input: &Configuration, cap: usize) -> Result<Self> {
        check_input(spec, input)?;
        let m = spec.non_inputs().len();
        let h = spec.history();
        check_guard(m * h, cap)?;
        Ok(Self { spec, input: input.clone(), m, h })
    }

    pub fn len(&self) -> usize {
        1 << (self.m * self.h)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn window_of(&self, index: usize) -> ExecutionWindow {
        let mask = (1usize << self.m) - 1;
        let frames = (0..self.h)
            .map(|f| next_frame(self.spec, &self.input, (index >> (self.m * f)) & mask))
            .collect();
        ExecutionWindow::new(frames).expect("frames share a length")
    }

    pub fn index_of(&self, window: &ExecutionWindow) -> Result<usize> {
        if window.history() != self.h || window.width() != self.spec.len() {
            return Err(Error::WindowMismatch { expected: self.h, neurons: self.spec.len() });
        }
        let mut index = 0;
        for (f, frame) in window.frames().iter().enumerate() {
            for (j, &x) in self.spec.inputs().iter().enumerate() {
                if frame.get(x) != self.input.get(j) {
                    return Err(Error::InvalidParameter(
                        "window input bits differ from the fixed input".into(),
                    ));
                }
            }
            for (k, &u) in self.spec.non_inputs().iter().enumerate() {
                if frame.get(u) {
                    index |= 1 << (self.m * f + k);
                }
            }
        }
        Ok(index)
    }

    /// Index reached from `index` when the next frame has non-input bits `z`.
    #[inline]
    pub fn successor(&self, index: usize, z: usize) -> usize {
        (index >> self.m) | (z << (self.m * (self.h - 1)))
    }

    #[inline]
    pub fn latest(&self, index: usize) -> usize {
        index >> (self.m * (self.h - 1))
    }

    /// Outcome probabilities of the next frame from state `index`.
    pub fn transition(&self, index: usize) -> Vec<f64> {
        let p = non_input_probabilities(self.spec, &self.window_of(index)).expect("windows come from the space");
        outcome_probs(&p)
    }
}

/// Validity and output projection of every non-input frame pattern.
struct OutputTable {
    valid: Vec<bool>,
    out_mask: usize,
}

impl OutputTable {
    fn new(spec: &NetworkSpec, input: &Configuration) -> Result<Self> {
        let outputs: Vec<usize> = spec.of_kind(NeuronKind::Output).collect();
        if outputs.len() != input.len() {
            return Err(Error::TopologyMismatch(format!(
                "{} outputs for {} inputs",
                outputs.len(),
                input.len()
            )));
        }
        let ord: Vec<usize> = outputs
            .iter()
            .map(|&u| spec.non_input_ordinal(u).expect("outputs are not inputs"))
            .collect();
        let m = spec.non_inputs().len();
        let out_mask = ord.iter().fold(0usize, |acc, &k| acc | (1 << k));
        let valid = (0..1usize << m)
            .map(|z| {
                let y = Configuration::from_bools(&ord.iter().map(|&k| (z >> k) & 1 == 1).collect::<Vec<_>>());
                is_valid_wta_output(input, &y).expect("lengths match")
            })
            .collect();
        Ok(Self { valid, out_mask })
    }
}

/// `cdf[t]` is the probability that the convergence event has been
/// witnessed by frame `t`: some `t0` with `t0 + t_s <= t` has a valid output
/// held fixed over frames `t0..=t0 + t_s`. Frames `0..h` are the initial
/// window; later frames carry `input`.
pub fn convergence_cdf(
    spec: &NetworkSpec,
    input: &Configuration,
    initial: &ExecutionWindow,
    t_s: u64,
    t_max: u64,
) -> Result<Vec<f64>> {
    convergence_cdf_capped(spec, input, initial, t_s, t_max, DEFAULT_STATE_CAP)
}

pub fn convergence_cdf_capped(
    spec: &NetworkSpec,
    input: &Configuration,
    initial: &ExecutionWindow,
    t_s: u64,
    t_max: u64,
    cap: usize,
) -> Result<Vec<f64>> {
    let space = WindowStateSpace::new(spec, input, cap)?;
    let table = OutputTable::new(spec, input)?;
    let start = space.index_of(initial)?;
    let m = space.m;
    let h = space.h as u64;
    let ts = t_s as usize;
    let frame_mask = (1usize << m) - 1;

    // run length (in frames) of the trailing valid constant output
    let mut run = 0usize;
    let mut prev: Option<usize> = None;
    let mut witnessed: Option<u64> = None;
    for f in 0..space.h {
        let z = (start >> (m * f)) & frame_mask;
        run = match (table.valid[z], prev) {
            (false, _) => 0,
            (true, Some(p)) if run > 0 && (p & table.out_mask) == (z & table.out_mask) => run + 1,
            (true, _) => 1,
        };
        prev = Some(z);
        if witnessed.is_none() && run > ts {
            witnessed = Some(f as u64);
        }
    }
    let mut cdf = Vec::with_capacity(t_max as usize + 1);
    if let Some(w) = witnessed {
        for t in 0..=t_max {
            cdf.push(if t >= w { 1.0 } else { 0.0 });
        }
        return Ok(cdf);
    }
    cdf.resize(t_max.min(h - 1) as usize + 1, 0.0);

    let n_states = space.len();
    let mut mass = vec![vec![0.0f64; n_states]; ts + 1];
    mass[run][start] = 1.0;
    let mut absorbed = 0.0f64;
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    for _t in h..=t_max {
        let mut next = vec![vec![0.0f64; n_states]; ts + 1];
        for s in 0..n_states {
            let total: f64 = (0..=ts).map(|r| mass[r][s]).sum();
            if total == 0.0 {
                continue;
            }
            let probs = cache.entry(s).or_insert_with(|| space.transition(s));
            let last = space.latest(s);
            for (z, &pz) in probs.iter().enumerate() {
                if pz == 0.0 {
                    continue;
                }
                let s2 = space.successor(s, z);
                if !table.valid[z] {
                    next[0][s2] += total * pz;
                    continue;
                }
                let same = (last & table.out_mask) == (z & table.out_mask);
                for r in 0..=ts {
                    let w = mass[r][s];
                    if w == 0.0 {
                        continue;
                    }
                    let r2 = if same && r > 0 { r + 1 } else { 1 };
                    if r2 > ts {
                        absorbed += w * pz;
                    } else {
                        next[r2][s2] += w * pz;
                    }
                }
            }
        }
        mass = next;
        cdf.push(absorbed.min(1.0));
    }
    Ok(cdf)
}

/// Mean of the witnessed convergence time `t0` restricted to `t0 + t_s <=
/// t_max`, together with the residual mass `1 - cdf[t_max]`.
pub fn truncated_expectation(cdf: &[f64], t_s: u64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut prev = 0.0;
    for (t, &c) in cdf.iter().enumerate() {
        mean += (c - prev) * (t as f64 - t_s as f64).max(0.0);
        prev = c;
    }
    (mean, 1.0 - prev)
}

/// Which frames an event predicate is evaluated on.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EventMode {
    /// Only the frame after the last step.
    Final,
    /// At least one of the frames after steps `1..=steps`.
    Any,
    /// Every frame after steps `1..=steps`.
    All,
}

/// Exact probability of an event over the next `steps` frames, by
/// propagating the distribution over windows. The predicate receives the
/// step number (1-based) and the window ending at that step.
pub fn event_probability(
    spec: &NetworkSpec,
    window: &ExecutionWindow,
    input: &Configuration,
    steps: usize,
    mode: EventMode,
    pred: impl Fn(usize, &ExecutionWindow) -> bool,
) -> Result<f64> {
    check_input(spec, input)?;
    check_guard(spec.non_inputs().len(), DEFAULT_STATE_CAP)?;
    let mut states: HashMap<ExecutionWindow, f64> = HashMap::new();
    states.insert(window.clone(), 1.0);
    let mut hit = 0.0;
    for k in 1..=steps {
        let mut next: HashMap<ExecutionWindow, f64> = HashMap::new();
        for (w, mass) in states {
            let probs = outcome_probs(&non_input_probabilities(spec, &w)?);
            for (z, pz) in probs.into_iter().enumerate() {
                if pz == 0.0 {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(next_frame(spec, input, z));
                let p = mass * pz;
                match mode {
                    EventMode::Any if pred(k, &w2) => hit += p,
                    EventMode::All if !pred(k, &w2) => {}
                    EventMode::Final if k == steps => {
                        if pred(k, &w2) {
                            hit += p;
                        }
                    }
                    _ => *next.entry(w2).or_insert(0.0) += p,
                }
            }
        }
        states = next;
    }
    if mode == EventMode::All {
        hit = states.values().sum();
    }
    Ok(hit)
}

/// Exact probability of the variant's stability event from `window`.
/// One-step networks: the full configuration repeats for `t_s` steps, the
/// product of the self-transition probability. History network: the next
/// output is a valid WTA output and stays fixed for `t_s` further steps.
pub fn hold_probability(net: &WtaNetwork, input: &Configuration, window: &ExecutionWindow, t_s: u64) -> Result<f64> {
    let spec = &net.spec;
    check_input(spec, input)?;
    let l = net.layout;
    for frame in window.frames() {
        if frame.len() != spec.len() || l.input_bits(frame) != *input {
            return Err(Error::NotValidConfiguration);
        }
    }
    if !is_stable_start(&l, input, window)? {
        return Err(Error::NotValidConfiguration);
    }
    if t_s == 0 {
        return Ok(1.0);
    }
    match l.family {
        NetworkFamily::TwoInhibitor | NetworkFamily::SingleInhibitor => {
            let c = window.latest();
            let p = non_input_probabilities(spec, window)?;
            let q: f64 = spec
                .non_inputs()
                .iter()
                .zip(&p)
                .map(|(&u, &pu)| if c.get(u) { pu } else { 1.0 - pu })
                .product();
            Ok(q.powi(t_s as i32))
        }
        NetworkFamily::LogInhibitor => event_probability(
            spec,
            window,
            input,
            t_s as usize + 1,
            EventMode::All,
            |k, w| {
                let y = l.output_bits(w.latest());
                if k == 1 {
                    is_valid_wta_output(input, &y).unwrap_or(false)
                } else {
                    y == l.output_bits(w.back(2))
                }
            },
        ),
    }
}

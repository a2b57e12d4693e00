use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::dynamics::{Execution, ExecutionWindow};
use crate::error::{Error, Result};
use crate::nets::{NetworkFamily, WtaLayout};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    ValidWtaOutput,
    ValidWta,
    NearValid,
    KWta(usize),
    Reset,
    Good,
    Active,
    Terminal,
    Typical,
    NearStablePair,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::ValidWtaOutput => f.write_str("valid_wta_output"),
            Label::ValidWta => f.write_str("valid_wta"),
            Label::NearValid => f.write_str("near_valid"),
            Label::KWta(k) => write!(f, "k_wta({k})"),
            Label::Reset => f.write_str("reset"),
            Label::Good => f.write_str("good"),
            Label::Active => f.write_str("active"),
            Label::Terminal => f.write_str("terminal"),
            Label::Typical => f.write_str("typical"),
            Label::NearStablePair => f.write_str("near_stable_pair"),
        }
    }
}

/// Label set of one configuration or window. Classes overlap, so this is a
/// set rather than a single tag.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigClass {
    labels: BTreeSet<Label>,
}

impl ConfigClass {
    pub fn contains(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    pub fn k_wta(&self) -> Option<usize> {
        self.labels.iter().find_map(|l| match l {
            Label::KWta(k) => Some(*k),
            _ => None,
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.labels.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn insert_if(&mut self, cond: bool, label: Label) {
        if cond {
            self.labels.insert(label);
        }
    }
}

impl FromIterator<Label> for ConfigClass {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        Self { labels: iter.into_iter().collect() }
    }
}

impl fmt::Display for ConfigClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.labels.iter().map(Label::to_string).collect();
        f.write_str(&names.join("|"))
    }
}

/// `y_i <= x_i` for all `i` and `‖Y‖ = min(1, ‖X‖)`.
pub fn is_valid_wta_output(x: &Configuration, y: &Configuration) -> Result<bool> {
    y.check_len(x.len())?;
    Ok(valid_output(x, y))
}

fn valid_output(x: &Configuration, y: &Configuration) -> bool {
    let covered = y.words().iter().zip(x.words()).all(|(yw, xw)| yw & !xw == 0);
    covered && y.count_ones() == x.count_ones().min(1)
}

fn dominated(x: &Configuration, y: &Configuration) -> bool {
    y.words().iter().zip(x.words()).all(|(yw, xw)| yw & !xw == 0)
}

fn check_topology(family: NetworkFamily, x: &Configuration, c: &Configuration) -> Result<WtaLayout> {
    let layout = WtaLayout::new(family, x.len());
    if c.len() != layout.len() {
        return Err(Error::TopologyMismatch(format!(
            "{family} with n = {} has {} neurons, configuration has {}",
            x.len(),
            layout.len(),
            c.len()
        )));
    }
    Ok(layout)
}

/// Labels of a configuration of the two-inhibitor network.
pub fn classify_two_inhibitor(x: &Configuration, c: &Configuration) -> Result<ConfigClass> {
    let l = check_topology(NetworkFamily::TwoInhibitor, x, c)?;
    let y = l.output_bits(c);
    let a_s = c.get(l.a_s().expect("two inhibitors"));
    let a_c = c.get(l.a_c().expect("two inhibitors"));
    let k = y.count_ones();
    let x_any = x.count_ones() >= 1;
    let below = dominated(x, &y);
    let out_ok = valid_output(x, &y);

    let valid = out_ok && !a_c && a_s == x_any;
    let k_wta = below && k >= 2 && a_s && a_c;
    let near = out_ok && a_s && a_c;
    let reset = !a_s && !a_c;
    let active = valid || k_wta || near;

    let mut class = ConfigClass::default();
    class.insert_if(valid, Label::ValidWta);
    class.insert_if(k_wta, Label::KWta(k));
    class.insert_if(near, Label::NearValid);
    class.insert_if(reset, Label::Reset);
    class.insert_if(active || reset, Label::Good);
    class.insert_if(active, Label::Active);
    class.insert_if(near || k == 0, Label::Terminal);
    Ok(class)
}

/// Labels of a configuration of the single-inhibitor network. Valid means a
/// valid output with `a_c = min(1, ‖X‖)`; the k-WTA and reset classes key on
/// `a_c` alone.
pub fn classify_single_inhibitor(x: &Configuration, c: &Configuration) -> Result<ConfigClass> {
    let l = check_topology(NetworkFamily::SingleInhibitor, x, c)?;
    let y = l.output_bits(c);
    let a_c = c.get(l.a_c().expect("single inhibitor"));
    let k = y.count_ones();
    let valid = valid_output(x, &y) && a_c == (x.count_ones() >= 1);
    let k_wta = dominated(x, &y) && k >= 2 && a_c;
    let reset = !a_c;

    let mut class = ConfigClass::default();
    class.insert_if(valid, Label::ValidWta);
    class.insert_if(k_wta, Label::KWta(k));
    class.insert_if(reset, Label::Reset);
    class.insert_if(valid || k_wta || reset, Label::Good);
    class.insert_if(valid || k_wta, Label::Active);
    Ok(class)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NearStable {
    Yes,
    No,
    /// No input fires, so the notion is undefined.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogClassification {
    /// Typicality of each frame, oldest first.
    pub frames_typical: Vec<bool>,
    pub near_stable: NearStable,
    /// `typical` for the latest frame and `near_stable_pair` for the window.
    pub labels: ConfigClass,
}

/// `y <= x` and `a_s >= a_1 >= ... >= a_L`.
pub fn is_typical(l: &WtaLayout, x: &Configuration, c: &Configuration) -> bool {
    let mut prev = c.get(l.a_s().expect("log network has a_s"));
    for j in 1..=l.levels() {
        let cur = c.get(l.a(j));
        if cur && !prev {
            return false;
        }
        prev = cur;
    }
    dominated(x, &l.output_bits(c))
}

fn near_stable(l: &WtaLayout, x: &Configuration, older: &Configuration, latest: &Configuration) -> NearStable {
    if x.count_ones() == 0 {
        return NearStable::NotApplicable;
    }
    let a_s = l.a_s().expect("log network has a_s");
    let y_old = l.output_bits(older);
    let y_new = l.output_bits(latest);
    let union = l.outputs().filter(|&u| older.get(u) || latest.get(u)).count();
    let ok = union == 1
        && older.get(a_s)
        && latest.get(a_s)
        && (1..=l.levels()).all(|j| !latest.get(l.a(j)))
        && dominated(x, &y_old)
        && dominated(x, &y_new);
    if ok {
        NearStable::Yes
    } else {
        NearStable::No
    }
}

/// Classify a two-frame window of the history network.
pub fn classify_log_inhibitor(x: &Configuration, window: &ExecutionWindow) -> Result<LogClassification> {
    if window.history() != 2 {
        return Err(Error::TopologyMismatch(format!(
            "log_inhibitor windows have 2 frames, got {}",
            window.history()
        )));
    }
    let l = check_topology(NetworkFamily::LogInhibitor, x, window.latest())?;
    let frames_typical: Vec<bool> = window.frames().iter().map(|c| is_typical(&l, x, c)).collect();
    let ns = near_stable(&l, x, window.back(2), window.back(1));
    let mut labels = ConfigClass::default();
    labels.insert_if(frames_typical[1], Label::Typical);
    labels.insert_if(ns == NearStable::Yes, Label::NearStablePair);
    Ok(LogClassification { frames_typical, near_stable: ns, labels })
}

/// Whether `window` is a starting point of the variant's stability
/// guarantee: a valid WTA configuration for the one-step networks, a
/// near-stable pair for the history network.
pub fn is_stable_start(layout: &WtaLayout, x: &Configuration, window: &ExecutionWindow) -> Result<bool> {
    match layout.family {
        NetworkFamily::TwoInhibitor => {
            Ok(classify_two_inhibitor(x, window.latest())?.contains(Label::ValidWta))
        }
        NetworkFamily::SingleInhibitor => {
            Ok(classify_single_inhibitor(x, window.latest())?.contains(Label::ValidWta))
        }
        NetworkFamily::LogInhibitor => {
            Ok(classify_log_inhibitor(x, window)?.near_stable == NearStable::Yes)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceOutcome {
    /// Earliest `t` with a valid output held through `t + t_s`.
    pub converged_at: Option<u64>,
    /// Steps the output held after `converged_at`, or after the start of the
    /// trailing valid run when no convergence was seen.
    pub stable_for: u64,
    pub timed_out: bool,
}

/// Streaming form of [`convergence_time`]: feed frames in time order and
/// stop as soon as [`ConvergenceTracker::observe`] reports convergence.
/// Validity of frame `t` is judged against the input bits of frame `t`.
#[derive(Clone, Debug)]
pub struct ConvergenceTracker {
    n: usize,
    t_s: u64,
    run: Option<(u64, Option<usize>)>,
    last_t: Option<u64>,
    converged: Option<u64>,
}

impl ConvergenceTracker {
    pub fn new(n: usize, t_s: u64) -> Self {
        Self { n, t_s, run: None, last_t: None, converged: None }
    }

    /// Winner index if the output of `c` is valid for its own inputs.
    fn valid_key(&self, c: &Configuration) -> Option<Option<usize>> {
        let n = self.n;
        let mut winner = None;
        let mut fired = 0usize;
        for i in 0..n {
            if c.get(n + i) {
                if !c.get(i) {
                    return None;
                }
                fired += 1;
                if fired > 1 {
                    return None;
                }
                winner = Some(i);
            }
        }
        let x_any = (0..n).any(|i| c.get(i));
        (fired == usize::from(x_any)).then_some(winner)
    }

    /// Observe frame `t`; returns `converged_at` once known.
    pub fn observe(&mut self, t: u64, c: &Configuration) -> Option<u64> {
        if self.converged.is_some() {
            return self.converged;
        }
        if let Some(prev) = self.last_t {
            assert_eq!(t, prev + 1, "frames must be observed consecutively");
        }
        self.last_t = Some(t);
        self.run = match (self.valid_key(c), self.run) {
            (None, _) => None,
            (Some(k), Some((start, key))) if key == k => Some((start, key)),
            (Some(k), _) => Some((t, k)),
        };
        if let Some((start, _)) = self.run {
            if t - start >= self.t_s {
                self.converged = Some(start);
            }
        }
        self.converged
    }

    pub fn converged_at(&self) -> Option<u64> {
        self.converged
    }

    pub fn outcome(&self) -> ConvergenceOutcome {
        match (self.converged, self.run, self.last_t) {
            (Some(t), _, _) => ConvergenceOutcome { converged_at: Some(t), stable_for: self.t_s, timed_out: false },
            (None, Some((start, _)), Some(last)) => {
                ConvergenceOutcome { converged_at: None, stable_for: last - start, timed_out: true }
            }
            _ => ConvergenceOutcome { converged_at: None, stable_for: 0, timed_out: true },
        }
    }
}

/// Earliest `t` whose output is a valid WTA output configuration and stays
/// fixed through `t + t_s`. Uses the layout convention of the built
/// networks: inputs `0..n`, outputs `n..2n`, with `n = input.len()`.
/// Validity of frame `t` is judged against that frame's own input bits, so
/// `input` only fixes `n` when the trace is fixed.
pub fn convergence_time(execution: &Execution, input: &Configuration, t_s: u64) -> Result<ConvergenceOutcome> {
    let n = input.len();
    if let Some(f) = execution.frames.iter().find(|f| f.len() < 2 * n) {
        return Err(Error::LengthMismatch { expected: 2 * n, found: f.len() });
    }
    let mut tracker = ConvergenceTracker::new(n, t_s);
    for (t, f) in execution.frames.iter().enumerate() {
        if tracker.observe(t as u64, f).is_some() {
            break;
        }
    }
    if let Some(at) = tracker.converged_at() {
        let winner = execution.frames[at as usize].slice(n..2 * n);
        let held = execution.frames[at as usize..]
            .iter()
            .take_while(|f| f.slice(n..2 * n) == winner)
            .count() as u64;
        return Ok(ConvergenceOutcome { converged_at: Some(at), stable_for: held - 1, timed_out: false });
    }
    Ok(tracker.outcome())
}

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::dynamics::{ExecutionWindow, InputTrace, Simulator};
use crate::error::{Error, Result};
use crate::nets::{NetworkFamily, WtaLayout, WtaNetwork};
use crate::oracle::{event_probability, EventMode};
use crate::rng::{Purpose, RandomnessContract};
use crate::stats::{wilson, z_for};
use crate::verify::{classify_two_inhibitor, is_typical, is_valid_wta_output, Label};

/// How the measured probability is compared with the bound.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    AtLeast,
    AtMost,
    /// The event probability equals the bound exactly.
    Exact,
    /// `P(first event) - P(second event) >= bound`.
    Difference,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    /// Number of firing counting inhibitors for the history-network
    /// convergence lemmas; drawn per case when unset, except for the exact
    /// entry which defaults to all of them.
    pub l: Option<usize>,
    /// Sampled cases whose exact probability is also computed.
    pub exact_cases: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckReport {
    pub lemma_id: String,
    pub condition: String,
    pub event: String,
    pub kind: BoundKind,
    pub frequency: f64,
    pub bound: f64,
    pub samples: u64,
    /// 99.9% interval on `frequency`.
    pub interval_lo: f64,
    pub interval_hi: f64,
    pub exact_cases: usize,
    pub exact_min: Option<f64>,
    pub exact_max: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaInfo {
    pub id: &'static str,
    pub family: NetworkFamily,
    pub condition: &'static str,
    pub event: &'static str,
    pub kind: BoundKind,
    pub steps: usize,
}

struct Ctx {
    layout: WtaLayout,
    gamma: f64,
    l_param: Option<usize>,
}

impl Ctx {
    fn n(&self) -> usize {
        self.layout.n
    }

    fn levels(&self) -> usize {
        self.layout.levels()
    }

    fn e(&self) -> f64 {
        (-self.gamma / 2.0).exp()
    }
}

struct Case {
    window: ExecutionWindow,
    input: Configuration,
    focus: usize,
    l: usize,
    k: usize,
}

type Sampler = fn(&Ctx, &mut ChaCha8Rng) -> Case;
type Event = fn(&Ctx, &Case, usize, &ExecutionWindow) -> bool;
type Bound = fn(&Ctx) -> f64;

struct Lemma {
    info: LemmaInfo,
    mode: EventMode,
    sample: Sampler,
    event: Event,
    second: Option<Event>,
    bound: Bound,
}

// ---- case construction -------------------------------------------------

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Configuration {
    Configuration::from_bools(&(0..len).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>())
}

fn input_with_at_least(rng: &mut ChaCha8Rng, n: usize, min: usize) -> Configuration {
    assert!(min <= n);
    loop {
        let x = random_bits(rng, n);
        if x.count_ones() >= min {
            return x;
        }
    }
}

fn subset_of(rng: &mut ChaCha8Rng, set: &[usize], k: usize, n: usize) -> Configuration {
    let mut y = Configuration::zeros(n);
    for j in sample_indices(rng, set.len(), k) {
        y.set(set[j], true);
    }
    y
}

/// Random subset of the firing inputs.
fn below(rng: &mut ChaCha8Rng, x: &Configuration) -> Configuration {
    let mut y = Configuration::zeros(x.len());
    for i in x.ones_iter() {
        y.set(i, rng.random_bool(0.5));
    }
    y
}

fn pick(rng: &mut ChaCha8Rng, set: &[usize]) -> usize {
    set[rng.random_range(0..set.len())]
}

fn frame(l: &WtaLayout, x: &Configuration, y: &Configuration, aux: &[bool]) -> Configuration {
    let mut c = Configuration::zeros(l.len());
    c.splice(0, x);
    c.splice(l.n, y);
    for (j, &b) in aux.iter().enumerate() {
        c.set(2 * l.n + j, b);
    }
    c
}

fn t_case(ctx: &Ctx, x: Configuration, y: &Configuration, a_s: bool, a_c: bool) -> Case {
    let c = frame(&ctx.layout, &x, y, &[a_s, a_c]);
    Case { window: ExecutionWindow::repeated(c, 1), input: x, focus: 0, l: 0, k: y.count_ones() }
}

fn random_aux(rng: &mut ChaCha8Rng, count: usize) -> Vec<bool> {
    (0..count).map(|_| rng.random_bool(0.5)).collect()
}

/// Inhibitor pattern `a_s = 1, a_1..a_l = 1`, the rest silent.
fn ladder(levels: usize, l: usize) -> Vec<bool> {
    (0..=levels).map(|j| j <= l).collect()
}

fn l_case(ctx: &Ctx, x: Configuration, older: (&Configuration, &[bool]), latest: (&Configuration, &[bool])) -> Case {
    let lay = &ctx.layout;
    let w = ExecutionWindow::new(vec![frame(lay, &x, older.0, older.1), frame(lay, &x, latest.0, latest.1)])
        .expect("frames share a length");
    Case { window: w, input: x, focus: 0, l: 0, k: latest.0.count_ones() }
}

// ---- observation helpers -----------------------------------------------

fn outputs(ctx: &Ctx, c: &Configuration) -> Configuration {
    ctx.layout.output_bits(c)
}

fn y_count(ctx: &Ctx, c: &Configuration) -> usize {
    c.count_range(ctx.layout.outputs())
}

fn a_s(ctx: &Ctx, c: &Configuration) -> bool {
    c.get(ctx.layout.a_s().expect("network has a_s"))
}

fn a_c(ctx: &Ctx, c: &Configuration) -> bool {
    c.get(ctx.layout.a_c().expect("network has a_c"))
}

fn counters(ctx: &Ctx, c: &Configuration) -> Vec<bool> {
    (1..=ctx.levels()).map(|j| c.get(ctx.layout.a(j))).collect()
}

fn labels(case: &Case, c: &Configuration) -> crate::verify::ConfigClass {
    classify_two_inhibitor(&case.input, c).expect("configurations come from the layout")
}

// ---- the catalog -------------------------------------------------------

fn feasible_l(ctx: &Ctx, rng: &mut ChaCha8Rng, max: usize) -> usize {
    ctx.l_param.unwrap_or_else(|| rng.random_range(1..=max.max(1)))
}

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

fn section5_convergence_case(ctx: &Ctx, rng: &mut ChaCha8Rng, l: usize, min_range: (usize, usize)) -> Case {
    // frames with y <= x in both, a_s and a_1..a_l firing in the latest frame
    let n = ctx.n();
    let (lo, hi) = min_range;
    let hi = hi.min(n);
    loop {
        let x = input_with_at_least(rng, n, lo.max(1));
        let ones: Vec<usize> = x.ones_iter().collect();
        let top = hi.min(ones.len());
        if lo > top {
            continue;
        }
        let m = rng.random_range(lo..=top);
        let common = subset_of(rng, &ones, m, n);
        let mut older = common.clone();
        let mut latest = common.clone();
        for &i in &ones {
            if !common.get(i) {
                match rng.random_range(0..3) {
                    0 => older.set(i, true),
                    1 => latest.set(i, true),
                    _ => {}
                }
            }
        }
        let aux_old = random_aux(rng, 1 + ctx.levels());
        let mut case = l_case(ctx, x, (&older, &aux_old), (&latest, &ladder(ctx.levels(), l)));
        case.l = l;
        case.k = m;
        if m > 0 {
            case.focus = pick(rng, &common.ones_iter().collect::<Vec<_>>());
        }
        return case;
    }
}

fn catalog() -> Vec<Lemma> {
    use BoundKind::*;
    use EventMode::*;
    use NetworkFamily::{LogInhibitor as L, TwoInhibitor as T};
    let info = |id, family, condition, event, kind, steps| LemmaInfo { id, family, condition, event, kind, steps };
    vec![
        Lemma {
            info: info("3.4", T, "x_i = 0", "y_i fires next; at most e^(-γ/2)", AtMost, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = loop {
                    let x = random_bits(rng, n);
                    if x.count_ones() < n {
                        break x;
                    }
                };
                let y = random_bits(rng, n);
                let mut case = t_case(ctx, x.clone(), &y, rng.random_bool(0.5), rng.random_bool(0.5));
                case.focus = pick(rng, &(0..n).filter(|&i| !x.get(i)).collect::<Vec<_>>());
                case
            },
            event: |ctx, case, _, w| w.latest().get(ctx.layout.y(case.focus)),
            second: None,
            bound: |ctx| ctx.e(),
        },
        Lemma {
            info: info("3.5.1", T, "no output fires", "a_s = a_c = 0 next; at least 1 - 2e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let x = random_bits(rng, ctx.n());
                t_case(ctx, x, &Configuration::zeros(ctx.n()), rng.random_bool(0.5), rng.random_bool(0.5))
            },
            event: |ctx, _, _, w| !a_s(ctx, w.latest()) && !a_c(ctx, w.latest()),
            second: None,
            bound: |ctx| 1.0 - 2.0 * ctx.e(),
        },
        Lemma {
            info: info("3.5.2", T, "exactly one output fires", "a_s = 1 and a_c = 0 next; at least 1 - 2e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let y = subset_of(rng, &(0..n).collect::<Vec<_>>(), 1, n);
                t_case(ctx, x, &y, rng.random_bool(0.5), rng.random_bool(0.5))
            },
            event: |ctx, _, _, w| a_s(ctx, w.latest()) && !a_c(ctx, w.latest()),
            second: None,
            bound: |ctx| 1.0 - 2.0 * ctx.e(),
        },
        Lemma {
            info: info("3.5.3", T, "at least two outputs fire", "a_s = a_c = 1 next; at least 1 - 2e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let k = rng.random_range(2..=n.max(2)).min(n);
                let y = subset_of(rng, &(0..n).collect::<Vec<_>>(), k, n);
                t_case(ctx, x, &y, rng.random_bool(0.5), rng.random_bool(0.5))
            },
            event: |ctx, _, _, w| a_s(ctx, w.latest()) && a_c(ctx, w.latest()),
            second: None,
            bound: |ctx| 1.0 - 2.0 * ctx.e(),
        },
        Lemma {
            info: info("3.6", T, "valid WTA configuration", "configuration repeats; at least 1 - (n+2)e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let ones: Vec<usize> = x.ones_iter().collect();
                let y = subset_of(rng, &ones, ones.len().min(1), n);
                t_case(ctx, x, &y, !ones.is_empty(), false)
            },
            event: |_, case, _, w| w.latest() == case.window.latest(),
            second: None,
            bound: |ctx| 1.0 - (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info("3.7", T, "no input fires", "every neuron silent two steps later; at least 1 - 2(n+1)e^(-γ/2)", AtLeast, 2),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let y = random_bits(rng, n);
                t_case(ctx, Configuration::zeros(n), &y, rng.random_bool(0.5), rng.random_bool(0.5))
            },
            event: |_, _, _, w| w.latest().count_ones() == 0,
            second: None,
            bound: |ctx| 1.0 - 2.0 * (ctx.n() as f64 + 1.0) * ctx.e(),
        },
        Lemma {
            info: info("3.8", T, "exactly one inhibitor fires, y <= x", "outputs repeat; at least 1 - n e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let x = random_bits(rng, ctx.n());
                let y = below(rng, &x);
                let s = rng.random_bool(0.5);
                t_case(ctx, x, &y, s, !s)
            },
            event: |ctx, case, _, w| outputs(ctx, w.latest()) == outputs(ctx, case.window.latest()),
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * ctx.e(),
        },
        Lemma {
            info: info("3.9.1", T, "both inhibitors fire, y <= x", "no output switches on; at least 1 - n e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let x = random_bits(rng, ctx.n());
                let y = below(rng, &x);
                t_case(ctx, x, &y, true, true)
            },
            event: |ctx, case, _, w| {
                let before = outputs(ctx, case.window.latest());
                outputs(ctx, w.latest()).ones_iter().all(|i| before.get(i))
            },
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * ctx.e(),
        },
        Lemma {
            info: info("3.9.2", T, "both inhibitors fire, y <= x, y_i = 1", "y_i fires next; exactly 1/2", Exact, 1),
            mode: Final,
            sample: |ctx, rng| {
                let x = input_with_at_least(rng, ctx.n(), 1);
                let y = loop {
                    let y = below(rng, &x);
                    if y.count_ones() >= 1 {
                        break y;
                    }
                };
                let mut case = t_case(ctx, x, &y, true, true);
                case.focus = pick(rng, &y.ones_iter().collect::<Vec<_>>());
                case
            },
            event: |ctx, case, _, w| w.latest().get(ctx.layout.y(case.focus)),
            second: None,
            bound: |_| 0.5,
        },
        Lemma {
            info: info(
                "3.10",
                T,
                "exactly one inhibitor fires, at least one output, y <= x",
                "next is valid WTA or valid k-WTA; at least 1 - (n+2)e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let x = input_with_at_least(rng, ctx.n(), 1);
                let y = loop {
                    let y = below(rng, &x);
                    if y.count_ones() >= 1 {
                        break y;
                    }
                };
                let s = rng.random_bool(0.5);
                t_case(ctx, x, &y, s, !s)
            },
            event: |_, case, _, w| {
                let c = labels(case, w.latest());
                c.contains(Label::ValidWta) || c.k_wta().is_some()
            },
            second: None,
            bound: |ctx| 1.0 - (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info(
                "3.11.1",
                T,
                "valid k-WTA configuration",
                "next is near-valid, k'-WTA with k' <= k, or has no output; at least 1 - (n+2)e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: k_wta_case,
            event: |ctx, case, _, w| {
                let c = labels(case, w.latest());
                let k2 = y_count(ctx, w.latest());
                c.contains(Label::NearValid) || c.k_wta().is_some_and(|k| k <= case.k) || k2 == 0
            },
            second: None,
            bound: |ctx| 1.0 - (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info(
                "3.11.2",
                T,
                "valid k-WTA configuration",
                "at most ceil(k/2) outputs next; at least 1/2 - (n+2)e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: k_wta_case,
            event: |ctx, case, _, w| y_count(ctx, w.latest()) <= case.k.div_ceil(2),
            second: None,
            bound: |ctx| 0.5 - (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info(
                "3.11.3",
                T,
                "valid k-WTA configuration",
                "P(near-valid next) - P(no output next) at least -(n+2)e^(-γ/2)",
                Difference,
                1,
            ),
            mode: Final,
            sample: k_wta_case,
            event: |_, case, _, w| labels(case, w.latest()).contains(Label::NearValid),
            second: Some(|ctx, _, _, w| y_count(ctx, w.latest()) == 0),
            bound: |ctx| -(ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info(
                "3.12",
                T,
                "reset configuration",
                "one of the next three configurations is active; at least 1/2 - 3(n+2)e^(-γ/2)",
                AtLeast,
                3,
            ),
            mode: Any,
            sample: |ctx, rng| {
                let x = random_bits(rng, ctx.n());
                let y = random_bits(rng, ctx.n());
                t_case(ctx, x, &y, false, false)
            },
            event: |_, case, _, w| labels(case, w.latest()).contains(Label::Active),
            second: None,
            bound: |ctx| 0.5 - 3.0 * (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info(
                "3.13",
                T,
                "near-valid configuration",
                "next is a valid WTA configuration; at least 1/2 - (n+2)e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = input_with_at_least(rng, n, 1);
                let y = subset_of(rng, &x.ones_iter().collect::<Vec<_>>(), 1, n);
                t_case(ctx, x, &y, true, true)
            },
            event: |_, case, _, w| labels(case, w.latest()).contains(Label::ValidWta),
            second: None,
            bound: |ctx| 0.5 - (ctx.n() as f64 + 2.0) * ctx.e(),
        },
        Lemma {
            info: info("5.2", L, "x_i = 0", "y_i fires next; at most e^(-3γ/2)", AtMost, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = loop {
                    let x = random_bits(rng, n);
                    if x.count_ones() < n {
                        break x;
                    }
                };
                let (y0, y1) = (random_bits(rng, n), random_bits(rng, n));
                let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
                let mut case = l_case(ctx, x.clone(), (&y0, &a0), (&y1, &a1));
                case.focus = pick(rng, &(0..n).filter(|&i| !x.get(i)).collect::<Vec<_>>());
                case
            },
            event: |ctx, case, _, w| w.latest().get(ctx.layout.y(case.focus)),
            second: None,
            bound: |ctx| (-1.5 * ctx.gamma).exp(),
        },
        Lemma {
            info: info("5.3.1", L, "no output fires in either frame", "a_s silent next; at least 1 - e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let z = Configuration::zeros(n);
                let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
                l_case(ctx, x, (&z, &a0), (&z, &a1))
            },
            event: |ctx, _, _, w| !a_s(ctx, w.latest()),
            second: None,
            bound: |ctx| 1.0 - ctx.e(),
        },
        Lemma {
            info: info("5.3.2", L, "an output fires in either frame", "a_s fires next; at least 1 - e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let (y0, y1) = loop {
                    let (y0, y1) = (random_bits(rng, n), random_bits(rng, n));
                    if y0.count_ones() + y1.count_ones() >= 1 {
                        break (y0, y1);
                    }
                };
                let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
                l_case(ctx, x, (&y0, &a0), (&y1, &a1))
            },
            event: |ctx, _, _, w| a_s(ctx, w.latest()),
            second: None,
            bound: |ctx| 1.0 - ctx.e(),
        },
        Lemma {
            info: info(
                "5.4.1",
                L,
                "at most one output fires in the latest frame",
                "all counting inhibitors silent next; at least 1 - L e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let y0 = random_bits(rng, n);
                let k = rng.random_range(0..=1);
                let y1 = subset_of(rng, &(0..n).collect::<Vec<_>>(), k, n);
                let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
                l_case(ctx, x, (&y0, &a0), (&y1, &a1))
            },
            event: |ctx, _, _, w| counters(ctx, w.latest()).iter().all(|&b| !b),
            second: None,
            bound: |ctx| 1.0 - ctx.levels() as f64 * ctx.e(),
        },
        Lemma {
            info: info(
                "5.4.2",
                L,
                "k outputs fire in the latest frame, 2^i <= k < 2^(i+1)",
                "exactly a_1..a_i fire next; at least 1 - L e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let y0 = random_bits(rng, n);
                let k = rng.random_range(2..=n);
                let y1 = subset_of(rng, &(0..n).collect::<Vec<_>>(), k, n);
                let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
                l_case(ctx, x, (&y0, &a0), (&y1, &a1))
            },
            event: |ctx, case, _, w| {
                let i = floor_log2(case.k);
                counters(ctx, w.latest()).iter().enumerate().all(|(j, &b)| b == (j < i))
            },
            second: None,
            bound: |ctx| 1.0 - ctx.levels() as f64 * ctx.e(),
        },
        Lemma {
            info: info("5.5", L, "any window", "y_i <= x_i for all i next; at least 1 - n e^(-3γ/2)", AtLeast, 1),
            mode: Final,
            sample: any_log_window,
            event: |ctx, case, _, w| outputs(ctx, w.latest()).ones_iter().all(|i| case.input.get(i)),
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * (-1.5 * ctx.gamma).exp(),
        },
        Lemma {
            info: info("5.6", L, "any window", "next is typical; at least 1 - (n+L+1)e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: any_log_window,
            event: |ctx, case, _, w| is_typical(&ctx.layout, &case.input, w.latest()),
            second: None,
            bound: |ctx| 1.0 - (ctx.n() + ctx.levels() + 1) as f64 * ctx.e(),
        },
        Lemma {
            info: info(
                "5.7",
                L,
                "only a_s fires in the latest frame, y <= x in both frames",
                "y = max(y^t, y^(t-1)) next; at least 1 - n e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let x = random_bits(rng, ctx.n());
                let (y0, y1) = (below(rng, &x), below(rng, &x));
                let a0 = random_aux(rng, 1 + ctx.levels());
                l_case(ctx, x, (&y0, &a0), (&y1, &ladder(ctx.levels(), 0)))
            },
            event: |ctx, case, _, w| {
                let (old, new) = (outputs(ctx, case.window.back(2)), outputs(ctx, case.window.back(1)));
                let next = outputs(ctx, w.latest());
                (0..ctx.n()).all(|i| next.get(i) == (old.get(i) || new.get(i)))
            },
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * ctx.e(),
        },
        Lemma {
            info: info(
                "5.8.1",
                L,
                "a_s and a_1..a_l fire in the latest frame, y <= x in both frames",
                "y <= min(y^t, y^(t-1)) next; at least 1 - n e^(-2γ)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let l = feasible_l(ctx, rng, ctx.levels());
                section5_convergence_case(ctx, rng, l, (0, ctx.n()))
            },
            event: |ctx, case, _, w| {
                let (old, new) = (outputs(ctx, case.window.back(2)), outputs(ctx, case.window.back(1)));
                outputs(ctx, w.latest()).ones_iter().all(|i| old.get(i) && new.get(i))
            },
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * (-2.0 * ctx.gamma).exp(),
        },
        Lemma {
            info: info(
                "5.8.2",
                L,
                "a_s and a_1..a_l fire in the latest frame, y <= x in both frames, y_i fired in both",
                "y_i fires next; exactly 1/(1+2^l)",
                Exact,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let l = ctx.l_param.unwrap_or(ctx.levels());
                section5_convergence_case(ctx, rng, l, (1, ctx.n()))
            },
            event: |ctx, case, _, w| w.latest().get(ctx.layout.y(case.focus)),
            second: None,
            bound: |ctx| 1.0 / (1.0 + (ctx.l_param.unwrap_or(ctx.levels()) as f64).exp2()),
        },
        Lemma {
            info: info(
                "5.9",
                L,
                "as 5.8.1 with 2^l <= |min(y^t, y^(t-1))| < 2^(l+1)",
                "next output is a valid WTA output; at least 1/16 - n e^(-2γ)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let l = feasible_l(ctx, rng, floor_log2(ctx.n()).min(ctx.levels()));
                section5_convergence_case(ctx, rng, l, (1 << l, (1 << (l + 1)) - 1))
            },
            event: |ctx, case, _, w| is_valid_wta_output(&case.input, &outputs(ctx, w.latest())).unwrap_or(false),
            second: None,
            bound: |ctx| 1.0 / 16.0 - ctx.n() as f64 * (-2.0 * ctx.gamma).exp(),
        },
        Lemma {
            info: info(
                "5.10",
                L,
                "as 5.8.1 with |min(y^t, y^(t-1))| < 2^(l+1)",
                "no output fires next; at least 1/8 - n e^(-2γ)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let l = feasible_l(ctx, rng, ctx.levels());
                section5_convergence_case(ctx, rng, l, (0, (1 << (l + 1)) - 1))
            },
            event: |ctx, _, _, w| y_count(ctx, w.latest()) == 0,
            second: None,
            bound: |ctx| 1.0 / 8.0 - ctx.n() as f64 * (-2.0 * ctx.gamma).exp(),
        },
        Lemma {
            info: info("5.11", L, "no inhibitor fires in the latest frame", "y = x next; at least 1 - n e^(-γ/2)", AtLeast, 1),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = random_bits(rng, n);
                let (y0, y1) = (random_bits(rng, n), random_bits(rng, n));
                let a0 = random_aux(rng, 1 + ctx.levels());
                l_case(ctx, x, (&y0, &a0), (&y1, &vec![false; 1 + ctx.levels()]))
            },
            event: |ctx, case, _, w| outputs(ctx, w.latest()) == case.input,
            second: None,
            bound: |ctx| 1.0 - ctx.n() as f64 * ctx.e(),
        },
        Lemma {
            info: info(
                "5.12",
                L,
                "near-stable pair",
                "next output valid with the same winner and the new pair near-stable; at least 1 - (n+L+1)e^(-γ/2)",
                AtLeast,
                1,
            ),
            mode: Final,
            sample: |ctx, rng| {
                let n = ctx.n();
                let x = input_with_at_least(rng, n, 1);
                let winner = pick(rng, &x.ones_iter().collect::<Vec<_>>());
                let mut one = Configuration::zeros(n);
                one.set(winner, true);
                let zero = Configuration::zeros(n);
                let (y0, y1) = match rng.random_range(0..3) {
                    0 => (one.clone(), one.clone()),
                    1 => (one.clone(), zero),
                    _ => (zero, one.clone()),
                };
                let mut a0 = random_aux(rng, 1 + ctx.levels());
                a0[0] = true;
                let mut case = l_case(ctx, x, (&y0, &a0), (&y1, &ladder(ctx.levels(), 0)));
                case.focus = winner;
                case
            },
            event: |ctx, case, _, w| {
                let y = outputs(ctx, w.latest());
                is_valid_wta_output(&case.input, &y).unwrap_or(false)
                    && y.get(case.focus)
                    && crate::verify::classify_log_inhibitor(&case.input, w)
                        .map(|c| c.near_stable == crate::verify::NearStable::Yes)
                        .unwrap_or(false)
            },
            second: None,
            bound: |ctx| 1.0 - (ctx.n() + ctx.levels() + 1) as f64 * ctx.e(),
        },
    ]
}

fn k_wta_case(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Case {
    let n = ctx.n();
    let x = input_with_at_least(rng, n, 2);
    let ones: Vec<usize> = x.ones_iter().collect();
    let k = rng.random_range(2..=ones.len());
    let y = subset_of(rng, &ones, k, n);
    t_case(ctx, x, &y, true, true)
}

fn any_log_window(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Case {
    let n = ctx.n();
    let x = random_bits(rng, n);
    let (y0, y1) = (random_bits(rng, n), random_bits(rng, n));
    let (a0, a1) = (random_aux(rng, 1 + ctx.levels()), random_aux(rng, 1 + ctx.levels()));
    l_case(ctx, x, (&y0, &a0), (&y1, &a1))
}

/// Ids, conditions and events of every implemented lemma check.
pub fn lemma_catalog() -> Vec<LemmaInfo> {
    catalog().into_iter().map(|l| l.info).collect()
}

fn observe(net: &WtaNetwork, lemma: &Lemma, ctx: &Ctx, case: &Case, contract: &RandomnessContract, trial: u64) -> Result<(bool, bool)> {
    let trace = InputTrace::Fixed(case.input.clone());
    let h = case.window.history() as u64;
    let mut sim = Simulator::starting_at(&net.spec, &case.window, h - 1, &trace, contract, trial)?;
    let (mut first, mut second) = (false, false);
    for k in 1..=lemma.info.steps {
        sim.advance();
        let w = sim.window();
        let check = match lemma.mode {
            EventMode::Final => k == lemma.info.steps,
            _ => true,
        };
        if check {
            first |= (lemma.event)(ctx, case, k, &w);
            if let Some(ev) = lemma.second {
                second |= ev(ctx, case, k, &w);
            }
        }
        if lemma.mode == EventMode::Any && first && lemma.second.is_none() {
            break;
        }
    }
    Ok((first, second))
}

fn exact(net: &WtaNetwork, lemma: &Lemma, ctx: &Ctx, case: &Case, ev: Event) -> Result<f64> {
    event_probability(&net.spec, &case.window, &case.input, lemma.info.steps, lemma.mode, |k, w| ev(ctx, case, k, w))
}

/// Check one lemma on `samples` sampled cases. Each case is stepped with
/// the counter-based draws and the event frequency is compared with the
/// bound; the first few cases are also evaluated exactly.
pub fn lemma_check(id: &str, net: &WtaNetwork, params: &LemmaParams, samples: u64, seed: u64) -> Result<LemmaCheckReport> {
    let lemma = catalog().into_iter().find(|l| l.info.id == id).ok_or_else(|| Error::UnknownLemma(id.to_string()))?;
    if net.family() != lemma.info.family {
        return Err(Error::VariantMismatch { lemma: id.to_string(), expected: lemma.info.family.to_string() });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let n = net.n();
    if matches!(id, "3.5.3" | "3.11.1" | "3.11.2" | "3.11.3" | "5.4.2") && n < 2 {
        return Err(Error::InvalidSize(format!("lemma {id} needs n >= 2")));
    }
    let ctx = Ctx { layout: net.layout, gamma: net.gamma, l_param: params.l };
    if let Some(l) = params.l {
        if l == 0 || l > ctx.levels() {
            return Err(Error::InvalidParameter(format!("l = {l} outside 1..={}", ctx.levels())));
        }
        if id == "5.9" && (1usize << l) > n {
            return Err(Error::InvalidParameter(format!("l = {l} needs at least 2^l outputs")));
        }
    }
    let contract = RandomnessContract::new(seed);
    let case_for = |s: u64| (lemma.sample)(&ctx, &mut contract.aux_rng(Purpose::Sampling, s));

    let hits = (0..samples)
        .into_par_iter()
        .map(|s| observe(net, &lemma, &ctx, &case_for(s), &contract, s))
        .collect::<Result<Vec<_>>>()?;

    let bound = (lemma.bound)(&ctx);
    let exact_cases = params.exact_cases.unwrap_or(16).min(samples as usize);
    let exact_values = (0..exact_cases as u64)
        .map(|s| {
            let case = case_for(s);
            let p = exact(net, &lemma, &ctx, &case, lemma.event)?;
            match lemma.second {
                Some(ev) => Ok(p - exact(net, &lemma, &ctx, &case, ev)?),
                None => Ok(p),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let exact_min = exact_values.iter().copied().reduce(f64::min);
    let exact_max = exact_values.iter().copied().reduce(f64::max);
    let exact_ok = exact_values.iter().all(|&p| match lemma.info.kind {
        BoundKind::AtLeast | BoundKind::Difference => p >= bound - 1e-12,
        BoundKind::AtMost => p <= bound + 1e-12,
        BoundKind::Exact => (p - bound).abs() <= 1e-9,
    });

    let n_s = samples as f64;
    let (frequency, lo, hi, stat_ok) = match lemma.info.kind {
        BoundKind::Difference => {
            let d: Vec<f64> = hits.iter().map(|&(a, b)| f64::from(u8::from(a)) - f64::from(u8::from(b))).collect();
            let mean = d.iter().sum::<f64>() / n_s;
            let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_s - 1.0).max(1.0);
            let half = z_for(0.999) * (var / n_s).sqrt();
            (mean, mean - half, mean + half, mean + half >= bound)
        }
        kind => {
            let k = hits.iter().filter(|h| h.0).count() as u64;
            let freq = k as f64 / n_s;
            let (lo, hi) = wilson(k, samples, 0.999);
            let ok = match kind {
                BoundKind::AtLeast => hi >= bound,
                BoundKind::AtMost => lo <= bound,
                _ => (freq - bound).abs() <= 3.0 * (bound * (1.0 - bound) / n_s).sqrt(),
            };
            (freq, lo, hi, ok)
        }
    };

    Ok(LemmaCheckReport {
        lemma_id: id.to_string(),
        condition: lemma.info.condition.to_string(),
        event: lemma.info.event.to_string(),
        kind: lemma.info.kind,
        frequency,
        bound,
        samples,
        interval_lo: lo,
        interval_hi: hi,
        exact_cases,
        exact_min,
        exact_max,
        pass: stat_ok && exact_ok,
    })
}

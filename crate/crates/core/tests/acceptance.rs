//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wta_core::experiments::probe::{stable_window, Perturbation, PerturbationKind};
use wta_core::experiments::trials::TrialRunner;
use wta_core::stats::wilson;
use wta_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn frame(net: &WtaNetwork, x: &[bool], y: &[bool], aux: &[bool]) -> Configuration {
    let n = net.n();
    let mut c = Configuration::zeros(net.spec.len());
    for i in 0..n {
        c.set(i, x[i]);
        c.set(n + i, y[i]);
    }
    for (j, &b) in aux.iter().enumerate() {
        c.set(2 * n + j, b);
    }
    c
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    for &(n, gamma) in &[(4usize, 14.0), (8, 20.0), (16, 37.5)] {
        let net = WtaNetwork::new(NetworkFamily::TwoInhibitor, n, gamma).unwrap();
        let pot = |c: Configuration, u: usize| potential(&net.spec, &ExecutionWindow::repeated(c, 1), u).unwrap();
        let ones = vec![true; n];
        let mut one = vec![false; n];
        one[0] = true;
        let y0 = net.layout.y(0);
        let checks = [
            ("winner under a_s", pot(frame(&net, &ones, &one, &[true, false]), y0), gamma),
            ("winner under both", pot(frame(&net, &ones, &one, &[true, true]), y0), 0.0),
            ("a_s with one output", pot(frame(&net, &ones, &one, &[false, false]), 2 * n), gamma / 2.0),
            ("a_c with one output", pot(frame(&net, &ones, &one, &[false, false]), 2 * n + 1), -gamma / 2.0),
        ];
        for (name, got, want) in checks {
            if !close(got, want) {
                failures.push(format!("T n={n} {name}: {got} != {want}"));
            }
        }
        let mut x = vec![true; n];
        x[0] = false;
        for bits in 0u8..8 {
            let mut y = vec![false; n];
            y[0] = bits & 1 != 0;
            let c = frame(&net, &x, &y, &[bits & 2 != 0, bits & 4 != 0]);
            let p = pot(c, y0);
            if p > -gamma + 1e-9 * gamma {
                failures.push(format!("T n={n} silent input: pot {p} > -γ"));
            }
        }

        let lnet = WtaNetwork::new(NetworkFamily::LogInhibitor, n, gamma).unwrap();
        let levels = lnet.layout.levels();
        for l in 1..=levels {
            let aux: Vec<bool> = (0..=levels).map(|j| j <= l).collect();
            let c = frame(&lnet, &ones, &ones, &aux);
            let w = ExecutionWindow::new(vec![c.clone(), c]).unwrap();
            let got = potential(&lnet.spec, &w, lnet.layout.y(0)).unwrap();
            let want = -(l as f64) * std::f64::consts::LN_2;
            let p = spike_probability(&lnet.spec, got);
            let p_want = 1.0 / (1.0 + (l as f64).exp2());
            if !close(got, want) || !close(p, p_want) {
                failures.push(format!("L n={n} l={l}: pot {got} p {p}"));
            }
        }
    }
    outcome(failures.is_empty(), if failures.is_empty() { "all potentials exact".into() } else { failures.join("; ") })
}

fn criterion_2() -> Outcome {
    let trials = 100_000u64;
    let t_s = 3u64;
    let points = [1u64, 5, 10, 20];
    let mut worst = String::new();
    let mut pass = true;
    let mut checked = 0;
    for n in 1..=3usize {
        for gamma in [6.0, 10.0] {
            let net = WtaNetwork::new(NetworkFamily::TwoInhibitor, n, gamma).unwrap();
            let input = Configuration::ones(n);
            let mut start = Configuration::zeros(net.spec.len());
            start.splice(0, &input);
            let window = ExecutionWindow::repeated(start, 1);
            let cdf = convergence_cdf(&net.spec, &input, &window, t_s, 20).unwrap();
            let runner = TrialRunner::new(&net, &input, t_s, 1000 + n as u64);
            let witnessed: Vec<Option<u64>> = (0..trials)
                .map(|trial| runner.follow(&window, 0, 20, trial).unwrap().converged_at.map(|t| t + t_s))
                .collect();
            for &t in &points {
                let k = witnessed.iter().filter(|w| w.is_some_and(|w| w <= t)).count() as u64;
                let (lo, hi) = wilson(k, trials, 0.999);
                let exact = cdf[t as usize];
                checked += 1;
                if exact < lo - 1e-12 || exact > hi + 1e-12 {
                    pass = false;
                    worst = format!("n={n} γ={gamma} t={t}: exact {exact:.5} outside [{lo:.5}, {hi:.5}]");
                }
            }
        }
    }
    outcome(pass, if pass { format!("{checked} CDF points inside 99.9% intervals") } else { worst })
}

fn criterion_3() -> Outcome {
    let (t_s, delta) = (10u64, 0.1);
    let variant = WtaVariant::new(NetworkFamily::TwoInhibitor, TheoremMode::HighProbability);
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [8usize, 64, 256] {
        let inst = WtaInstance::from_theorem(variant, Configuration::ones(n), t_s, Some(delta)).unwrap();
        for (name, init) in [("random", InitialPolicy::UniformRandom), ("all-fire", InitialPolicy::AllFire)] {
            let mut plan = TrialPlan::new(inst.clone(), init, 2000, 31 + n as u64);
            plan.horizon = inst.t_c + inst.t_s;
            let s = run_trials(&plan).unwrap();
            let ok = s.success_frac >= 1.0 - delta - s.half_width();
            pass &= ok;
            lines.push(format!("n={n} {name} t_c={} frac={:.4}", inst.t_c, s.success_frac));
        }
    }
    outcome(pass, lines.join(", "))
}

fn means(family: NetworkFamily, ns: &[usize], t_s: u64, delta: Option<f64>, trials: u64) -> Vec<(usize, f64, TrialSummary)> {
    let mode = if delta.is_some() { TheoremMode::HighProbability } else { TheoremMode::ExpectedTime };
    let variant = WtaVariant::new(family, mode);
    ns.iter()
        .map(|&n| {
            let inst = WtaInstance::from_theorem(variant, Configuration::ones(n), t_s, delta).unwrap();
            let plan = TrialPlan::new(inst, InitialPolicy::UniformRandom, trials, 77 + n as u64);
            let s = run_trials(&plan).unwrap();
            (n, s.mean_tconv.unwrap_or(f64::INFINITY), s)
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let rows = means(NetworkFamily::TwoInhibitor, &[16, 64, 256, 1024], 10, None, 1000);
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, mean, s) in &rows {
        let bound = 108.0 * ((*n as f64).log2() + 3.0);
        pass &= *mean <= bound && s.timeouts == 0;
        parts.push(format!("n={n} mean={mean:.1}"));
    }
    let ratio = rows[3].1 / rows[0].1;
    let envelope = 10.0 * 2.0 / 4.0;
    pass &= ratio <= envelope;
    parts.push(format!("ratio={ratio:.2} <= {envelope}"));
    outcome(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let delta = 0.1;
    let rows = means(NetworkFamily::LogInhibitor, &[16, 256, 1024], 10, Some(delta), 1000);
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, mean, s) in &rows {
        pass &= *mean <= 4001.0 && s.success_frac >= 1.0 - delta - s.half_width();
        parts.push(format!("n={n} mean={mean:.1} frac={:.4}", s.success_frac));
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ratio = ms.iter().cloned().fold(0.0, f64::max) / ms.iter().cloned().fold(f64::INFINITY, f64::min);
    pass &= ratio <= 2.0;
    parts.push(format!("max/min={ratio:.2}"));
    outcome(pass, parts.join(", "))
}

fn criterion_6() -> Outcome {
    let (n, t_s, delta, trials) = (64usize, 100u64, 0.1, 5000u64);
    let input = Configuration::ones(n);
    let mut pass = true;
    let mut parts = Vec::new();
    for family in [NetworkFamily::TwoInhibitor, NetworkFamily::LogInhibitor] {
        let variant = WtaVariant::new(family, TheoremMode::HighProbability);
        let gamma = gamma_for(variant, n, t_s, Some(delta)).unwrap();
        let net = WtaNetwork::new(family, n, gamma).unwrap();
        let e = (-gamma / 2.0).exp();
        let bound = match family {
            NetworkFamily::LogInhibitor => 1.0 - 3.0 * t_s as f64 * n as f64 * e,
            _ => 1.0 - t_s as f64 * (n as f64 + 2.0) * e,
        };
        let w = stable_window(&net, &input, 0).unwrap();
        let est = hold_trials(&net, &input, &w, t_s, trials, 5).unwrap();
        pass &= est.frac >= bound - est.half_width();
        parts.push(format!("{family} hold={:.4} bound={bound:.6}", est.frac));
    }
    outcome(pass, parts.join(", "))
}

fn random_network(rng: &mut ChaCha8Rng) -> NetworkSpec {
    let history = rng.random_range(1..=3usize);
    let n_in = rng.random_range(1..=3usize);
    let n_other = rng.random_range(1..=6usize);
    let mut neurons = Vec::new();
    for i in 0..n_in + n_other {
        let kind = if i < n_in {
            NeuronKind::Input
        } else if rng.random_bool(0.5) {
            NeuronKind::Output
        } else {
            NeuronKind::Auxiliary
        };
        let polarity = if kind == NeuronKind::Auxiliary && rng.random_bool(0.5) {
            Polarity::Inhibitory
        } else {
            Polarity::Excitatory
        };
        neurons.push(Neuron { id: NeuronId(i), kind, polarity });
    }
    let mut edges = Vec::new();
    for pre in 0..neurons.len() {
        for post in n_in..neurons.len() {
            for lag in 1..=history {
                if rng.random_bool(0.3) {
                    let mag = rng.random_range(0.1..8.0);
                    let weight = match neurons[pre].polarity {
                        Polarity::Excitatory => mag,
                        Polarity::Inhibitory => -mag,
                    };
                    edges.push(Synapse { pre: NeuronId(pre), post: NeuronId(post), lag, weight });
                }
            }
        }
    }
    let biases = (0..neurons.len()).map(|_| rng.random_range(-4.0..4.0)).collect();
    let lambda = rng.random_range(0.5..3.0);
    validate_network(NetworkSpec::from_parts(neurons, edges, biases, lambda, history).unwrap()).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for k in 0..100u64 {
        let spec = random_network(&mut rng);
        let n_in = spec.inputs().len();
        let rates: Vec<f64> = (0..n_in).map(|_| rng.random_range(0.0..1.0)).collect();
        let trace = InputTrace::Bernoulli(rates);
        let frames = (0..spec.history())
            .map(|_| Configuration::from_bools(&(0..spec.len()).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>()))
            .collect();
        let initial = ExecutionWindow::new(frames).unwrap();
        let contract = RandomnessContract::new(k);
        let base = run(&spec, &initial, &trace, 200, &contract, 0).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let scaled = rescale_temperature(&spec, lambda).unwrap();
            if run(&scaled, &initial, &trace, 200, &contract, 0).unwrap() != base {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("300 rescaled executions, {mismatches} mismatches"))
}

fn criterion_8() -> Outcome {
    let (n, t_s, delta) = (64usize, 10u64, 0.1);
    let variant = WtaVariant::new(NetworkFamily::TwoInhibitor, TheoremMode::HighProbability);
    let inst = WtaInstance::from_theorem(variant, Configuration::ones(n), t_s, Some(delta)).unwrap();
    let gap = inst.t_c + inst.t_s;
    let plan = TrialPlan::new(inst.clone(), InitialPolicy::UniformRandom, 1000, 88);
    let perturbations = Perturbation::every(gap, gap, 5, PerturbationKind::AllFire);
    let report = self_stabilization_probe(&plan, &perturbations).unwrap();
    let mut pass = report.phases.len() == 6;
    for s in &report.phases[1..] {
        pass &= s.success_frac >= 1.0 - delta - s.half_width();
    }
    let fracs: Vec<String> = report.phases.iter().map(|s| format!("{:.3}", s.success_frac)).collect();

    let cmp = hold_comparison(n, inst.gamma, 100, 1000, 9).unwrap();
    pass &= cmp.single.wilson_hi < cmp.two.wilson_lo;
    outcome(
        pass,
        format!(
            "phase success [{}]; hold single={:.3} two={:.3}",
            fracs.join(", "),
            cmp.single.frac,
            cmp.two.frac
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut failed = Vec::new();
    let mut count = 0;
    for info in lemma_catalog() {
        let net = WtaNetwork::new(info.family, 8, 14.0).unwrap();
        let r = lemma_check(info.id, &net, &LemmaParams::default(), 100_000, 900).unwrap();
        count += 1;
        if !r.pass {
            failed.push(format!(
                "{} freq={:.5} bound={:.5} exact=[{:?}, {:?}]",
                r.lemma_id, r.frequency, r.bound, r.exact_min, r.exact_max
            ));
        }
    }
    let pass = failed.is_empty();
    outcome(pass, if pass { format!("{count} lemma checks pass") } else { failed.join("; ") })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("exact potential table", criterion_1, Duration::from_secs(1)),
        ("oracle vs Monte Carlo CDF", criterion_2, Duration::from_secs(120)),
        ("two-inhibitor high-probability convergence", criterion_3, Duration::from_secs(600)),
        ("two-inhibitor expected convergence time", criterion_4, Duration::from_secs(600)),
        ("log-inhibitor constant expected time", criterion_5, Duration::from_secs(900)),
        ("stability from a stable start", criterion_6, Duration::from_secs(300)),
        ("temperature equivalence", criterion_7, Duration::from_secs(10)),
        ("self-stabilization under perturbation", criterion_8, Duration::from_secs(300)),
        ("lemma catalog", criterion_9, Duration::from_secs(600)),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let o = check();
        let took = t0.elapsed();
        let pass = o.pass && took <= *budget;
        all &= pass;
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name}: {} ({:.1}s, budget {}s)", o.detail, took.as_secs_f64(), budget.as_secs());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

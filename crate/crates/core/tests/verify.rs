use proptest::prelude::*;
use wta_core::*;

fn cfg(s: &str) -> Configuration {
    s.parse().unwrap()
}

fn bit(v: u32, k: usize) -> bool {
    v >> k & 1 == 1
}

/// Labels re-derived from the definitions one clause at a time.
fn slow_two_inhibitor(n: usize, x: &[bool], y: &[bool], a_s: bool, a_c: bool) -> ConfigClass {
    let x_count = x.iter().filter(|&&b| b).count();
    let y_count = y.iter().filter(|&&b| b).count();
    let y_le_x = (0..n).all(|i| !y[i] || x[i]);
    let valid_output = if x_count == 0 { y_count == 0 } else { y_count == 1 && y_le_x };
    let valid = valid_output && !a_c && a_s == (x_count.min(1) == 1);
    let k_wta = y_le_x && y_count >= 2 && a_s && a_c;
    let near = valid_output && a_s && a_c;
    let reset = !a_s && !a_c;
    let mut labels = Vec::new();
    if valid {
        labels.push(Label::ValidWta);
    }
    if k_wta {
        labels.push(Label::KWta(y_count));
    }
    if near {
        labels.push(Label::NearValid);
    }
    if reset {
        labels.push(Label::Reset);
    }
    if valid || k_wta || near || reset {
        labels.push(Label::Good);
    }
    if valid || k_wta || near {
        labels.push(Label::Active);
    }
    if near || y_count == 0 {
        labels.push(Label::Terminal);
    }
    labels.into_iter().collect()
}

#[test]
fn classifier_matches_definitions_exhaustively() {
    for n in 1..=3usize {
        for xs in 0u32..1 << n {
            for rest in 0u32..1 << (n + 2) {
                let x: Vec<bool> = (0..n).map(|i| bit(xs, i)).collect();
                let y: Vec<bool> = (0..n).map(|i| bit(rest, i)).collect();
                let (a_s, a_c) = (bit(rest, n), bit(rest, n + 1));
                let mut all = x.clone();
                all.extend(&y);
                all.extend([a_s, a_c]);
                let c = Configuration::from_bools(&all);
                let got = classify_two_inhibitor(&Configuration::from_bools(&x), &c).unwrap();
                assert_eq!(got, slow_two_inhibitor(n, &x, &y, a_s, a_c), "x={x:?} c={c}");

                // label algebra
                assert!(!got.contains(Label::Active) || got.contains(Label::Good));
                if got.contains(Label::Reset) && got.contains(Label::Active) {
                    assert!(xs == 0);
                }
                let y_count = y.iter().filter(|&&b| b).count();
                assert_eq!(got.contains(Label::Terminal), got.contains(Label::NearValid) || y_count == 0);
            }
        }
    }
}

#[test]
fn two_inhibitor_examples() {
    let show = |x: &str, c: &str| classify_two_inhibitor(&cfg(x), &cfg(c)).unwrap().to_string();
    assert_eq!(show("11", "111010"), "valid_wta|good|active");
    assert_eq!(show("11", "111111"), "k_wta(2)|good|active");
    assert_eq!(show("00", "000000"), "valid_wta|reset|good|active|terminal");
    assert_eq!(show("11", "111011"), "near_valid|good|active|terminal");
}

#[test]
fn valid_output_examples() {
    let v = |x: &str, y: &str| is_valid_wta_output(&cfg(x), &cfg(y)).unwrap();
    assert!(v("0000", "0000"));
    assert!(v("1101", "0100"));
    assert!(!v("1101", "0010"));
    assert!(!v("1100", "1100"));
}

/// Typical and near-stable re-derived from the definitions.
fn slow_log(n: usize, levels: usize, x: &[bool], frames: [&[bool]; 2]) -> (bool, NearStable) {
    let y = |f: &[bool], i: usize| f[n + i];
    let a = |f: &[bool], j: usize| f[2 * n + j];
    let typical = (0..n).all(|i| !y(frames[1], i) || x[i]) && (1..=levels).all(|j| a(frames[1], j - 1) >= a(frames[1], j));
    if !x.iter().any(|&b| b) {
        return (typical, NearStable::NotApplicable);
    }
    let union = (0..n).filter(|&i| y(frames[0], i) || y(frames[1], i)).count();
    let ok = union == 1
        && a(frames[0], 0)
        && a(frames[1], 0)
        && (1..=levels).all(|j| !a(frames[1], j))
        && frames.iter().all(|f| (0..n).all(|i| !y(f, i) || x[i]));
    (typical, if ok { NearStable::Yes } else { NearStable::No })
}

#[test]
fn log_classifier_matches_definitions_exhaustively() {
    for n in 2..=3usize {
        let levels = ceil_log2(n);
        let m = n + 1 + levels;
        for xs in 0u32..1 << n {
            let x: Vec<bool> = (0..n).map(|i| bit(xs, i)).collect();
            for pair in 0u32..1 << (2 * m) {
                let frame = |k: usize| {
                    let mut f = x.clone();
                    f.extend((0..m).map(|j| bit(pair, k * m + j)));
                    f
                };
                let (older, latest) = (frame(0), frame(1));
                let w = ExecutionWindow::new(vec![Configuration::from_bools(&older), Configuration::from_bools(&latest)]).unwrap();
                let got = classify_log_inhibitor(&Configuration::from_bools(&x), &w).unwrap();
                let (typical, ns) = slow_log(n, levels, &x, [&older, &latest]);
                assert_eq!(got.frames_typical[1], typical);
                assert_eq!(got.near_stable, ns);
            }
        }
    }
}

#[test]
fn log_examples() {
    // n = 2: x1 x2 y1 y2 a_s a_1
    let x = cfg("11");
    let w = |a: &str, b: &str| ExecutionWindow::new(vec![cfg(a), cfg(b)]).unwrap();
    // winner fired only in the older frame, a_s fired in both
    let c = classify_log_inhibitor(&x, &w("111010", "110010")).unwrap();
    assert_eq!(c.near_stable, NearStable::Yes);
    assert!(c.labels.contains(Label::NearStablePair));
    // a_s only in the latest frame does not qualify
    assert_eq!(classify_log_inhibitor(&x, &w("111000", "110010")).unwrap().near_stable, NearStable::No);
    // two outputs across the frames
    assert_eq!(classify_log_inhibitor(&x, &w("111010", "110110")).unwrap().near_stable, NearStable::No);
    // n = 4: a_2 without a_1 is not typical
    let x4 = cfg("1111");
    let c = cfg("1111_0000_1_01");
    let c = classify_log_inhibitor(&x4, &ExecutionWindow::repeated(c, 2)).unwrap();
    assert!(!c.frames_typical[1]);
}

fn execution(frames: &[&str], x: &str) -> Execution {
    Execution { frames: frames.iter().map(|f| cfg(f)).collect(), input: InputTrace::Fixed(cfg(x)) }
}

#[test]
fn convergence_examples() {
    let e = execution(&["111010", "111010", "111010", "111010"], "11");
    assert_eq!(convergence_time(&e, &cfg("11"), 3).unwrap().converged_at, Some(0));
    // valid and constant over 3..5 but switching winner at 6
    let e = execution(
        &["111111", "111111", "110000", "111010", "111010", "111010", "110110", "110110", "110110", "110110"],
        "11",
    );
    assert_eq!(convergence_time(&e, &cfg("11"), 3).unwrap().converged_at, Some(6));
}

/// Scan every start time directly.
fn brute_force(frames: &[Configuration], n: usize, t_s: usize) -> Option<u64> {
    let outputs = |c: &Configuration| c.slice(n..2 * n);
    let valid = |c: &Configuration| is_valid_wta_output(&c.slice(0..n), &outputs(c)).unwrap();
    (0..frames.len())
        .find(|&t| t + t_s < frames.len() && (t..=t + t_s).all(|u| valid(&frames[u]) && outputs(&frames[u]) == outputs(&frames[t])))
        .map(|t| t as u64)
}

#[test]
fn convergence_time_matches_brute_force_on_a_recorded_run() {
    let net = WtaNetwork::new(NetworkFamily::TwoInhibitor, 2, 12.0).unwrap();
    let init = ExecutionWindow::repeated(cfg("110000"), 1);
    let trace = InputTrace::Fixed(cfg("11"));
    let e = run(&net.spec, &init, &trace, 200, &RandomnessContract::new(7), 0).unwrap();
    let got = convergence_time(&e, &cfg("11"), 5).unwrap();
    assert_eq!(got.converged_at, brute_force(&e.frames, 2, 5));
    assert!(got.converged_at.is_some());
}

proptest! {
    #[test]
    fn convergence_time_agrees_with_brute_force(
        n in 1usize..4,
        t_s in 0usize..5,
        raw in proptest::collection::vec(any::<u8>(), 1..40),
    ) {
        // low-entropy frames so that valid runs actually occur
        let x = Configuration::ones(n);
        let frames: Vec<Configuration> = raw.iter().map(|&b| {
            let mut c = Configuration::zeros(2 * n + 2);
            c.splice(0, &x);
            if b % 4 != 0 {
                c.set(n + (b as usize / 4) % n, true);
            }
            c
        }).collect();
        let e = Execution { frames: frames.clone(), input: InputTrace::Fixed(x.clone()) };
        prop_assert_eq!(convergence_time(&e, &x, t_s as u64).unwrap().converged_at, brute_force(&frames, n, t_s));
    }

    #[test]
    fn extending_an_execution_never_delays_convergence(
        seed in any::<u64>(),
        len in 2usize..60,
        extra in 1usize..60,
    ) {
        let net = WtaNetwork::new(NetworkFamily::TwoInhibitor, 3, 6.0).unwrap();
        let init = ExecutionWindow::repeated(cfg("11100000"), 1);
        let trace = InputTrace::Fixed(cfg("111"));
        let contract = RandomnessContract::new(seed);
        let short = run(&net.spec, &init, &trace, len, &contract, 0).unwrap();
        let long = run(&net.spec, &init, &trace, len + extra, &contract, 0).unwrap();
        let a = convergence_time(&short, &cfg("111"), 2).unwrap().converged_at;
        let b = convergence_time(&long, &cfg("111"), 2).unwrap().converged_at;
        if let Some(a) = a {
            prop_assert_eq!(b, Some(a));
        }
    }
}

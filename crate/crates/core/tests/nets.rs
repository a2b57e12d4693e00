use std::f64::consts::LN_2;

use proptest::prelude::*;
use wta_core::*;

/// (pre, post, lag, weight) sorted, weights rounded for comparison.
fn table(spec: &NetworkSpec) -> Vec<(usize, usize, usize, i64)> {
    let mut rows: Vec<_> = spec
        .edges()
        .iter()
        .map(|e| (e.pre.0, e.post.0, e.lag, (e.weight * 1e9).round() as i64))
        .collect();
    rows.sort();
    rows
}

fn rows(raw: &[(usize, usize, usize, f64)]) -> Vec<(usize, usize, usize, i64)> {
    let mut rows: Vec<_> = raw.iter().map(|&(a, b, l, w)| (a, b, l, (w * 1e9).round() as i64)).collect();
    rows.sort();
    rows
}

#[test]
fn two_inhibitor_golden_table() {
    // T_{2,2}: x1 x2 y1 y2 a_s a_c = 0..6
    let golden = rows(&[
        (0, 2, 1, 6.0),
        (1, 3, 1, 6.0),
        (2, 2, 1, 4.0),
        (3, 3, 1, 4.0),
        (4, 2, 1, -2.0),
        (4, 3, 1, -2.0),
        (5, 2, 1, -2.0),
        (5, 3, 1, -2.0),
        (2, 4, 1, 2.0),
        (3, 4, 1, 2.0),
        (2, 5, 1, 2.0),
        (3, 5, 1, 2.0),
    ]);
    let spec = build_two_inhibitor(2, 2.0).unwrap();
    assert_eq!(table(&spec), golden);
    assert_eq!(spec.biases(), &[0.0, 0.0, 6.0, 6.0, 1.0, 3.0]);
    assert_eq!(spec.history(), 1);
}

#[test]
fn log_inhibitor_golden_table() {
    // L_{4,2}: x 0..4, y 4..8, a_s 8, a_1 9, a_2 10
    let mut raw = Vec::new();
    for i in 0..4 {
        let (x, y) = (i, 4 + i);
        raw.push((x, y, 1, 12.0));
        raw.push((y, y, 1, 4.0));
        raw.push((y, y, 2, 4.0));
        raw.push((8, y, 1, -2.0));
        raw.push((9, y, 1, -7.0 - LN_2));
        raw.push((10, y, 1, -LN_2));
        raw.push((y, 8, 1, 2.0));
        raw.push((y, 8, 2, 2.0));
        raw.push((y, 9, 1, 2.0));
        raw.push((y, 10, 1, 2.0));
    }
    let spec = build_log_inhibitor(4, 2.0).unwrap();
    assert_eq!(table(&spec), rows(&raw));
    assert_eq!(spec.biases(), &[0.0, 0.0, 0.0, 0.0, 11.0, 11.0, 11.0, 11.0, 1.0, 3.0, 7.0]);
    assert_eq!(spec.history(), 2);
}

#[test]
fn builder_examples() {
    let spec = build_two_inhibitor(1, 10.0).unwrap();
    assert_eq!(spec.bias(3), 15.0);
    assert_eq!(build_two_inhibitor(4, 2.0).unwrap().edges().len(), 24);

    let single = build_single_inhibitor(3, 8.0).unwrap();
    assert_eq!(single.len(), 7);
    let mut c = Configuration::zeros(7);
    for u in [0, 1, 2, 3, 6] {
        c.set(u, true);
    }
    let w = ExecutionWindow::repeated(c, 1);
    assert_eq!(potential(&single, &w, 3).unwrap(), 0.0);
    assert_eq!(firing_probabilities(&single, &w).unwrap()[0], 0.5);

    let log = WtaNetwork::new(NetworkFamily::LogInhibitor, 8, 20.0).unwrap();
    assert_eq!(log.layout.aux_count(), 4);
    assert_eq!(log.spec.bias(log.layout.a(2)), 70.0);
    // five outputs firing: a_2 pushed above threshold, a_3 below
    let mut c = Configuration::zeros(log.spec.len());
    for i in 0..5 {
        c.set(log.layout.y(i), true);
    }
    let w = ExecutionWindow::repeated(c, 2);
    assert_eq!(potential(&log.spec, &w, log.layout.a(2)).unwrap(), 30.0);
    assert!(potential(&log.spec, &w, log.layout.a(3)).unwrap() < 0.0);
}

#[test]
fn theorem_parameter_examples() {
    let high = WtaVariant::new(NetworkFamily::TwoInhibitor, TheoremMode::HighProbability);
    let g = gamma_for(high, 8, 10, Some(0.1)).unwrap();
    assert!((g - (4.0 * 1000f64.ln() + 10.0)).abs() < 1e-9);
    assert!((g - 37.631).abs() < 1e-3);
    assert_eq!(tc_bound(high, 8, Some(0.1)).unwrap(), 1245);
    assert_eq!(tc_bound(high, 256, Some(0.1)).unwrap(), 2801);
    let log_exp = WtaVariant::new(NetworkFamily::LogInhibitor, TheoremMode::ExpectedTime);
    assert_eq!(tc_bound(log_exp, 16, None).unwrap(), 4001);
    assert!(matches!(gamma_for(high, 8, 10, None), Err(Error::MissingDelta)));
    assert!(matches!(WtaNetwork::new(NetworkFamily::TwoInhibitor, 4, 0.0), Err(Error::InvalidGamma(_))));
    assert!(matches!(WtaNetwork::new(NetworkFamily::LogInhibitor, 1, 5.0), Err(Error::InvalidSize(_))));
}

proptest! {
    #[test]
    fn builders_are_deterministic_and_valid(n in 2usize..40, gamma in 0.01f64..100.0) {
        for family in [NetworkFamily::TwoInhibitor, NetworkFamily::SingleInhibitor, NetworkFamily::LogInhibitor] {
            let a = WtaNetwork::new(family, n, gamma).unwrap();
            let b = WtaNetwork::new(family, n, gamma).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(validate_network(a.spec.clone()).unwrap(), a.spec.clone());
            prop_assert_eq!(a.spec.len(), a.layout.len());
            prop_assert_eq!(NetworkSpec::from_json(&a.spec.to_json()).unwrap(), a.spec);
        }
    }

    #[test]
    fn two_inhibitors_share_outgoing_weights(n in 1usize..30, gamma in 0.01f64..100.0) {
        let net = WtaNetwork::new(NetworkFamily::TwoInhibitor, n, gamma).unwrap();
        let (s, c) = (net.layout.a_s().unwrap(), net.layout.a_c().unwrap());
        for post in 0..net.spec.len() {
            prop_assert_eq!(net.spec.weight(s, post, 1), net.spec.weight(c, post, 1));
        }
    }

    #[test]
    fn log_levels_use_integer_bit_length(n in 2usize..100_000) {
        let l = ceil_log2(n);
        prop_assert!(1usize << l >= n);
        prop_assert!(1usize << (l - 1) < n);
    }
}

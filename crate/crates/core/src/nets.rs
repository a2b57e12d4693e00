use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::error::{Error, Result};
use crate::network::{NetworkSpec, Neuron, NeuronId, NeuronKind, Polarity, Synapse};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkFamily {
    TwoInhibitor,
    SingleInhibitor,
    LogInhibitor,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremMode {
    HighProbability,
    ExpectedTime,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WtaVariant {
    pub tag: NetworkFamily,
    pub mode: TheoremMode,
}

impl WtaVariant {
    pub fn new(tag: NetworkFamily, mode: TheoremMode) -> Self {
        Self { tag, mode }
    }
}

impl NetworkFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkFamily::TwoInhibitor => "two_inhibitor",
            NetworkFamily::SingleInhibitor => "single_inhibitor",
            NetworkFamily::LogInhibitor => "log_inhibitor",
        }
    }

    pub fn history(self) -> usize {
        match self {
            NetworkFamily::LogInhibitor => 2,
            _ => 1,
        }
    }

    fn min_n(self) -> usize {
        match self {
            NetworkFamily::LogInhibitor => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for NetworkFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "two_inhibitor" => Ok(NetworkFamily::TwoInhibitor),
            "single_inhibitor" => Ok(NetworkFamily::SingleInhibitor),
            "log_inhibitor" => Ok(NetworkFamily::LogInhibitor),
            _ => Err(Error::InvalidParameter(format!("unknown variant {s:?}"))),
        }
    }
}

/// `⌈log₂ n⌉` over the integers.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Neuron indices of a built WTA network: inputs `0..n`, outputs `n..2n`,
/// inhibitors from `2n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WtaLayout {
    pub family: NetworkFamily,
    pub n: usize,
}

impl WtaLayout {
    pub fn new(family: NetworkFamily, n: usize) -> Self {
        Self { family, n }
    }

    pub fn x(&self, i: usize) -> usize {
        i
    }

    pub fn y(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn inputs(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn outputs(&self) -> std::ops::Range<usize> {
        self.n..2 * self.n
    }

    /// Stability inhibitor `a_s`, absent in the single-inhibitor network.
    pub fn a_s(&self) -> Option<usize> {
        match self.family {
            NetworkFamily::SingleInhibitor => None,
            _ => Some(2 * self.n),
        }
    }

    /// Convergence inhibitor `a_c` of the one-step networks.
    pub fn a_c(&self) -> Option<usize> {
        match self.family {
            NetworkFamily::TwoInhibitor => Some(2 * self.n + 1),
            NetworkFamily::SingleInhibitor => Some(2 * self.n),
            NetworkFamily::LogInhibitor => None,
        }
    }

    /// Number of counting inhibitors `a_1..a_L` of the history network.
    pub fn levels(&self) -> usize {
        match self.family {
            NetworkFamily::LogInhibitor => ceil_log2(self.n),
            _ => 0,
        }
    }

    /// Counting inhibitor `a_j`, `1 <= j <= levels()`.
    pub fn a(&self, j: usize) -> usize {
        assert!(j >= 1 && j <= self.levels());
        2 * self.n + j
    }

    pub fn aux_count(&self) -> usize {
        match self.family {
            NetworkFamily::TwoInhibitor => 2,
            NetworkFamily::SingleInhibitor => 1,
            NetworkFamily::LogInhibitor => 1 + self.levels(),
        }
    }

    pub fn len(&self) -> usize {
        2 * self.n + self.aux_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn aux(&self) -> std::ops::Range<usize> {
        2 * self.n..self.len()
    }

    pub fn output_bits(&self, c: &Configuration) -> Configuration {
        c.slice(self.outputs())
    }

    pub fn input_bits(&self, c: &Configuration) -> Configuration {
        c.slice(self.inputs())
    }
}

/// A built WTA network with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct WtaNetwork {
    pub spec: NetworkSpec,
    pub layout: WtaLayout,
    pub gamma: f64,
}

impl WtaNetwork {
    pub fn new(family: NetworkFamily, n: usize, gamma: f64) -> Result<Self> {
        let spec = match family {
            NetworkFamily::TwoInhibitor => build_two_inhibitor(n, gamma)?,
            NetworkFamily::SingleInhibitor => build_single_inhibitor(n, gamma)?,
            NetworkFamily::LogInhibitor => build_log_inhibitor(n, gamma)?,
        };
        Ok(Self { spec, layout: WtaLayout::new(family, n), gamma })
    }

    pub fn family(&self) -> NetworkFamily {
        self.layout.family
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }
}

fn check_args(family: NetworkFamily, n: usize, gamma: f64) -> Result<()> {
    if n < family.min_n() {
        return Err(Error::InvalidSize(format!("{family} needs n >= {}, got {n}", family.min_n())));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidGamma(gamma));
    }
    Ok(())
}

fn neurons(layout: &WtaLayout) -> Vec<Neuron> {
    (0..layout.len())
        .map(|i| {
            let (kind, polarity) = if i < layout.n {
                (NeuronKind::Input, Polarity::Excitatory)
            } else if i < 2 * layout.n {
                (NeuronKind::Output, Polarity::Excitatory)
            } else {
                (NeuronKind::Auxiliary, Polarity::Inhibitory)
            };
            Neuron { id: NeuronId(i), kind, polarity }
        })
        .collect()
}

fn syn(pre: usize, post: usize, lag: usize, weight: f64) -> Synapse {
    Synapse { pre: NeuronId(pre), post: NeuronId(post), lag, weight }
}

fn build_one_step(family: NetworkFamily, n: usize, gamma: f64) -> Result<NetworkSpec> {
    check_args(family, n, gamma)?;
    let l = WtaLayout::new(family, n);
    let a_c = l.a_c().expect("one-step networks have a_c");
    let a_c_weight = if l.a_s().is_some() { -gamma } else { -2.0 * gamma };
    let mut edges = Vec::with_capacity(6 * n);
    for i in 0..n {
        edges.push(syn(l.x(i), l.y(i), 1, 3.0 * gamma));
        edges.push(syn(l.y(i), l.y(i), 1, 2.0 * gamma));
        if let Some(a_s) = l.a_s() {
            edges.push(syn(a_s, l.y(i), 1, -gamma));
        }
        edges.push(syn(a_c, l.y(i), 1, a_c_weight));
        if let Some(a_s) = l.a_s() {
            edges.push(syn(l.y(i), a_s, 1, gamma));
        }
        edges.push(syn(l.y(i), a_c, 1, gamma));
    }
    let mut biases = vec![0.0; l.len()];
    for i in 0..n {
        biases[l.y(i)] = 3.0 * gamma;
    }
    if let Some(a_s) = l.a_s() {
        biases[a_s] = gamma / 2.0;
    }
    biases[a_c] = 3.0 * gamma / 2.0;
    NetworkSpec::from_parts(neurons(&l), edges, biases, 1.0, 1)
}

/// Two-inhibitor network `T_{n,γ}` (history 1).
pub fn build_two_inhibitor(n: usize, gamma: f64) -> Result<NetworkSpec> {
    build_one_step(NetworkFamily::TwoInhibitor, n, gamma)
}

/// `T_{n,γ}` without `a_s` and with `w(a_c, y_i) = -2γ`.
pub fn build_single_inhibitor(n: usize, gamma: f64) -> Result<NetworkSpec> {
    build_one_step(NetworkFamily::SingleInhibitor, n, gamma)
}

/// History-2 network `L_{n,γ}` with inhibitors `a_s, a_1..a_⌈log₂ n⌉`.
pub fn build_log_inhibitor(n: usize, gamma: f64) -> Result<NetworkSpec> {
    let family = NetworkFamily::LogInhibitor;
    check_args(family, n, gamma)?;
    let l = WtaLayout::new(family, n);
    let a_s = l.a_s().expect("log network has a_s");
    let ln2 = std::f64::consts::LN_2;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push(syn(l.x(i), l.y(i), 1, 6.0 * gamma));
        edges.push(syn(l.y(i), l.y(i), 1, 2.0 * gamma));
        edges.push(syn(l.y(i), l.y(i), 2, 2.0 * gamma));
        edges.push(syn(a_s, l.y(i), 1, -gamma));
        for j in 1..=l.levels() {
            let w = if j == 1 { -3.5 * gamma - ln2 } else { -ln2 };
            edges.push(syn(l.a(j), l.y(i), 1, w));
        }
        edges.push(syn(l.y(i), a_s, 1, gamma));
        edges.push(syn(l.y(i), a_s, 2, gamma));
        for j in 1..=l.levels() {
            edges.push(syn(l.y(i), l.a(j), 1, gamma));
        }
    }
    let mut biases = vec![0.0; l.len()];
    for i in 0..n {
        biases[l.y(i)] = 5.5 * gamma;
    }
    biases[a_s] = gamma / 2.0;
    for j in 1..=l.levels() {
        biases[l.a(j)] = (1u64 << j) as f64 * gamma - gamma / 2.0;
    }
    NetworkSpec::from_parts(neurons(&l), edges, biases, 1.0, 2)
}

fn check_delta(mode: TheoremMode, delta: Option<f64>) -> Result<Option<f64>> {
    match (mode, delta) {
        (TheoremMode::HighProbability, None) => Err(Error::MissingDelta),
        (_, Some(d)) if !(d > 0.0 && d < 1.0) => {
            Err(Error::InvalidParameter(format!("delta {d} outside (0, 1)")))
        }
        (_, d) => Ok(d),
    }
}

/// Smallest γ the variant's theorem admits.
pub fn gamma_for(variant: WtaVariant, n: usize, t_s: u64, delta: Option<f64>) -> Result<f64> {
    if n < variant.tag.min_n() {
        return Err(Error::InvalidSize(format!("{} needs n >= {}", variant.tag, variant.tag.min_n())));
    }
    if t_s == 0 {
        return Err(Error::InvalidParameter("t_s must be at least 1".into()));
    }
    let delta = check_delta(variant.mode, delta)?;
    let (n, t_s) = (n as f64, t_s as f64);
    let slack = match variant.mode {
        TheoremMode::HighProbability => 1.0 / delta.expect("checked"),
        TheoremMode::ExpectedTime => 1.0,
    };
    Ok(match variant.tag {
        NetworkFamily::TwoInhibitor | NetworkFamily::SingleInhibitor => {
            4.0 * ((n + 2.0) * t_s * slack).ln() + 10.0
        }
        NetworkFamily::LogInhibitor => 12.0 * (39.0 * t_s * n * slack).ln(),
    })
}

fn ceil_int(x: f64) -> u64 {
    (x - 1e-9).ceil() as u64
}

/// Smallest convergence time the variant's theorem admits.
pub fn tc_bound(variant: WtaVariant, n: usize, delta: Option<f64>) -> Result<u64> {
    if n < variant.tag.min_n() {
        return Err(Error::InvalidSize(format!("{} needs n >= {}", variant.tag, variant.tag.min_n())));
    }
    let delta = check_delta(variant.mode, delta)?;
    let log_n = (n as f64).log2();
    Ok(match (variant.tag, variant.mode) {
        (NetworkFamily::LogInhibitor, TheoremMode::HighProbability) => {
            ceil_int(2086.0 * ((1.0 / delta.expect("checked")).log2() + 1.0))
        }
        (NetworkFamily::LogInhibitor, TheoremMode::ExpectedTime) => 4001,
        (_, TheoremMode::HighProbability) => {
            ceil_int(72.0 * (log_n + 1.0) * ((1.0 / delta.expect("checked")).log2() + 1.0))
        }
        (_, TheoremMode::ExpectedTime) => ceil_int(108.0 * (log_n + 3.0)),
    })
}

/// One WTA problem instance with a fixed input vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WtaInstance {
    pub variant: WtaVariant,
    pub n: usize,
    pub gamma: f64,
    pub t_s: u64,
    pub delta: Option<f64>,
    pub t_c: u64,
    pub input: Configuration,
}

impl WtaInstance {
    pub fn new(
        variant: WtaVariant,
        input: Configuration,
        gamma: f64,
        t_s: u64,
        delta: Option<f64>,
        t_c: u64,
    ) -> Result<Self> {
        let n = input.len();
        check_args(variant.tag, n, gamma)?;
        if t_s == 0 || t_c == 0 {
            return Err(Error::InvalidParameter("t_s and t_c must be positive".into()));
        }
        let delta = check_delta(TheoremMode::ExpectedTime, delta)?;
        Ok(Self { variant, n, gamma, t_s, delta, t_c, input })
    }

    /// γ and t_c set to the theorem's thresholds.
    pub fn from_theorem(
        variant: WtaVariant,
        input: Configuration,
        t_s: u64,
        delta: Option<f64>,
    ) -> Result<Self> {
        let n = input.len();
        let gamma = gamma_for(variant, n, t_s, delta)?;
        let t_c = tc_bound(variant, n, delta)?;
        Self::new(variant, input, gamma, t_s, delta, t_c)
    }

    /// Whether γ and t_c satisfy the variant's theorem.
    pub fn meets_theorem(&self) -> bool {
        match (gamma_for(self.variant, self.n, self.t_s, self.delta), tc_bound(self.variant, self.n, self.delta)) {
            (Ok(g), Ok(tc)) => self.gamma >= g && self.t_c >= tc,
            _ => false,
        }
    }

    pub fn network(&self) -> Result<WtaNetwork> {
        WtaNetwork::new(self.variant.tag, self.n, self.gamma)
    }
}

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeuronId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronKind {
    Input,
    Output,
    Auxiliary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub id: NeuronId,
    pub kind: NeuronKind,
    pub polarity: Polarity,
}

/// Weighted synapse `pre -> post` acting on the spike from `lag` steps ago.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub lag: usize,
    pub weight: f64,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct InEdge {
    pub pre: usize,
    pub lag: usize,
    pub weight: f64,
}

/// Immutable network description. Construction only checks indexing;
/// [`validate_network`] checks the model restrictions.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    neurons: Vec<Neuron>,
    edges: Vec<Synapse>,
    biases: Vec<f64>,
    lambda: f64,
    history: usize,
    in_offsets: Vec<usize>,
    in_edges: Vec<InEdge>,
    inputs: Vec<usize>,
    non_inputs: Vec<usize>,
    ordinal: Vec<Option<usize>>,
}

impl NetworkSpec {
    pub fn from_parts(
        neurons: Vec<Neuron>,
        edges: Vec<Synapse>,
        biases: Vec<f64>,
        lambda: f64,
        history: usize,
    ) -> Result<Self> {
        let n = neurons.len();
        if history == 0 {
            return Err(Error::InvalidNetwork("history must be at least 1".into()));
        }
        for (i, nr) in neurons.iter().enumerate() {
            if nr.id.0 != i {
                return Err(Error::InvalidNetwork(format!(
                    "neuron ids must be dense: position {i} holds id {}",
                    nr.id.0
                )));
            }
        }
        if biases.len() != n {
            return Err(Error::InvalidNetwork(format!("{} biases for {n} neurons", biases.len())));
        }
        if let Some(i) = biases.iter().position(|b| !b.is_finite()) {
            return Err(Error::InvalidNetwork(format!("bias of neuron {i} is not finite")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.pre.0 >= n {
                return Err(Error::UnknownNeuron(e.pre.0));
            }
            if e.post.0 >= n {
                return Err(Error::UnknownNeuron(e.post.0));
            }
            if !e.weight.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "weight {} -> {} is not finite",
                    e.pre.0, e.post.0
                )));
            }
            if !seen.insert((e.pre, e.post, e.lag)) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {} -> {} at lag {}",
                    e.pre.0, e.post.0, e.lag
                )));
            }
        }

        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            counts[e.post.0 + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let in_offsets = counts.clone();
        let mut fill = counts;
        let mut in_edges = vec![InEdge { pre: 0, lag: 0, weight: 0.0 }; edges.len()];
        for e in &edges {
            let slot = &mut fill[e.post.0];
            in_edges[*slot] = InEdge { pre: e.pre.0, lag: e.lag, weight: e.weight };
            *slot += 1;
        }

        let inputs: Vec<usize> =
            (0..n).filter(|&i| neurons[i].kind == NeuronKind::Input).collect();
        let non_inputs: Vec<usize> =
            (0..n).filter(|&i| neurons[i].kind != NeuronKind::Input).collect();
        let mut ordinal = vec![None; n];
        for (k, &u) in non_inputs.iter().enumerate() {
            ordinal[u] = Some(k);
        }

        Ok(Self {
            neurons,
            edges,
            biases,
            lambda,
            history,
            in_offsets,
            in_edges,
            inputs,
            non_inputs,
            ordinal,
        })
    }

    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn neuron(&self, u: usize) -> Result<&Neuron> {
        self.neurons.get(u).ok_or(Error::UnknownNeuron(u))
    }

    pub fn edges(&self) -> &[Synapse] {
        &self.edges
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn bias(&self, u: usize) -> f64 {
        self.biases[u]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn history(&self) -> usize {
        self.history
    }

    #[inline]
    pub fn incoming(&self, post: usize) -> &[InEdge] {
        &self.in_edges[self.in_offsets[post]..self.in_offsets[post + 1]]
    }

    /// Weight of `pre -> post` at `lag`, zero when absent.
    pub fn weight(&self, pre: usize, post: usize, lag: usize) -> f64 {
        self.incoming(post)
            .iter()
            .find(|e| e.pre == pre && e.lag == lag)
            .map_or(0.0, |e| e.weight)
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn non_inputs(&self) -> &[usize] {
        &self.non_inputs
    }

    pub fn non_input_ordinal(&self, u: usize) -> Option<usize> {
        self.ordinal.get(u).copied().flatten()
    }

    pub fn of_kind(&self, kind: NeuronKind) -> impl Iterator<Item = usize> + '_ {
        self.neurons.iter().filter(move |nr| nr.kind == kind).map(|nr| nr.id.0)
    }

    /// Same topology with every weight and bias mapped through `f`.
    pub fn map_parameters(&self, f: impl Fn(f64) -> f64, lambda: f64) -> Result<Self> {
        let edges = self.edges.iter().map(|e| Synapse { weight: f(e.weight), ..*e }).collect();
        let biases = self.biases.iter().map(|&b| f(b)).collect();
        Self::from_parts(self.neurons.clone(), edges, biases, lambda, self.history)
    }

    pub fn to_raw(&self) -> RawNetwork {
        RawNetwork {
            lambda: self.lambda,
            history: self.history,
            neurons: self.neurons.clone(),
            edges: self.edges.clone(),
            biases: self
                .biases
                .iter()
                .enumerate()
                .map(|(i, &bias)| RawBias { id: NeuronId(i), bias })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("network serializes")
    }

    /// Parse and validate a network in the JSON interchange format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawNetwork = serde_json::from_str(text)?;
        validate_network(raw.into_spec()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawBias {
    pub id: NeuronId,
    pub bias: f64,
}

/// Serialized form of a [`NetworkSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawNetwork {
    pub lambda: f64,
    pub history: usize,
    pub neurons: Vec<Neuron>,
    pub edges: Vec<Synapse>,
    pub biases: Vec<RawBias>,
}

impl RawNetwork {
    /// Missing biases default to zero; a repeated id is rejected.
    pub fn into_spec(self) -> Result<NetworkSpec> {
        let mut biases = vec![None; self.neurons.len()];
        for b in &self.biases {
            let slot = biases.get_mut(b.id.0).ok_or(Error::UnknownNeuron(b.id.0))?;
            if slot.replace(b.bias).is_some() {
                return Err(Error::InvalidNetwork(format!("bias for neuron {} given twice", b.id.0)));
            }
        }
        let biases = biases.into_iter().map(|b| b.unwrap_or(0.0)).collect();
        NetworkSpec::from_parts(self.neurons, self.edges, biases, self.lambda, self.history)
    }
}

/// Check the model restrictions and hand the spec back unchanged.
pub fn validate_network(spec: NetworkSpec) -> Result<NetworkSpec> {
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::NonpositiveTemperature(spec.lambda));
    }
    for nr in &spec.neurons {
        if nr.kind != NeuronKind::Auxiliary && nr.polarity != Polarity::Excitatory {
            return Err(Error::InvalidNetwork(format!(
                "{:?} neuron {} must be excitatory",
                nr.kind, nr.id.0
            )));
        }
    }
    for e in &spec.edges {
        if e.lag == 0 || e.lag > spec.history {
            return Err(Error::LagOutOfRange { lag: e.lag, history: spec.history });
        }
        if spec.neurons[e.post.0].kind == NeuronKind::Input {
            return Err(Error::InputTargeted { pre: e.pre.0, post: e.post.0 });
        }
        let ok = match spec.neurons[e.pre.0].polarity {
            Polarity::Excitatory => e.weight >= 0.0,
            Polarity::Inhibitory => e.weight <= 0.0,
        };
        if !ok {
            return Err(Error::DalesPrincipleViolation { neuron: e.pre.0, weight: e.weight });
        }
    }
    Ok(spec)
}

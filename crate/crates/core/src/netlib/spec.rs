//! Architecture descriptions, parameter accounting and size planning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::CircuitLayout;

/// Width of the hidden layers of the hybrid encoder and decoder.
pub const HYBRID_HIDDEN_WIDTH: usize = 6;
/// Qubits in the hybrid circuit.
pub const HYBRID_QUBITS: usize = 3;
/// Hidden-layer counts searched when sizing a classical network.
pub const CPINN_DEPTHS: std::ops::RangeInclusive<usize> = 1..=6;

const MAX_WIDTH: usize = 4096;
const MAX_PARAMS: usize = 1 << 22;
const MAX_LAYERS: usize = 64;

/// Fully connected tanh network; hidden layers use tanh, the output layer is affine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSpec {
    pub widths: Vec<usize>,
}

impl DenseSpec {
    pub fn new(widths: Vec<usize>) -> Self {
        DenseSpec { widths }
    }

    /// `n_in → [width; depth] → n_out`.
    pub fn uniform(n_in: usize, width: usize, depth: usize, n_out: usize) -> Self {
        let mut widths = vec![n_in];
        widths.extend(std::iter::repeat_n(width, depth));
        widths.push(n_out);
        DenseSpec { widths }
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.widths.last().expect("validated spec has layers")
    }

    pub fn hidden_layers(&self) -> usize {
        self.widths.len().saturating_sub(2)
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    /// `(fan_in, fan_out, offset)` of every layer in parameter order.
    pub fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut off = 0;
        self.widths.windows(2).map(move |w| {
            let layer = (w[0], w[1], off);
            off += (w[0] + 1) * w[1];
            layer
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::Config("a dense network needs at least two layer widths".into()));
        }
        if let Some(w) = self.widths.iter().find(|&&w| w == 0 || w > MAX_WIDTH) {
            return Err(Error::Config(format!("layer width {w} outside 1..={MAX_WIDTH}")));
        }
        if self.widths.len() > MAX_LAYERS {
            return Err(Error::Config(format!("{} layers is too deep", self.widths.len())));
        }
        if self.n_params() > MAX_PARAMS {
            return Err(Error::Config(format!("{} parameters is too many", self.n_params())));
        }
        Ok(())
    }
}

/// Classical encoder → circuit → classical decoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridSpec {
    pub encoder: DenseSpec,
    pub circuit: CircuitLayout,
    pub decoder: DenseSpec,
}

impl HybridSpec {
    /// The standard layout: width-6 hidden layers, `classical_depth` of them on
    /// each side, three qubits and `circuit_depth` re-uploading blocks.
    pub fn standard(classical_depth: usize, circuit_depth: usize) -> Self {
        let nq = HYBRID_QUBITS;
        HybridSpec {
            encoder: DenseSpec::uniform(2, HYBRID_HIDDEN_WIDTH, classical_depth, nq),
            circuit: CircuitLayout::new(nq, circuit_depth),
            decoder: DenseSpec::uniform(nq, HYBRID_HIDDEN_WIDTH, classical_depth, 1),
        }
    }

    pub fn classical_params(&self) -> usize {
        self.encoder.n_params() + self.decoder.n_params()
    }

    pub fn n_params(&self) -> usize {
        self.classical_params() + self.circuit.n_params()
    }

    /// Parameter ranges `(encoder, circuit, decoder)`.
    pub fn ranges(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>) {
        let e = self.encoder.n_params();
        let c = e + self.circuit.n_params();
        (0..e, e..c, c..c + self.decoder.n_params())
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.decoder.validate()?;
        self.circuit.validate()?;
        let nq = self.circuit.n_qubits;
        if self.encoder.n_inputs() != 2 || self.encoder.n_outputs() != nq {
            return Err(Error::Config(format!(
                "encoder must map 2 inputs to {nq} circuit inputs, got {:?}",
                self.encoder.widths
            )));
        }
        if self.decoder.n_inputs() != nq || self.decoder.n_outputs() != 1 {
            return Err(Error::Config(format!(
                "decoder must map {nq} circuit outputs to 1, got {:?}",
                self.decoder.widths
            )));
        }
        if self.circuit.depth > 10_000 {
            return Err(Error::Config(format!(
                "circuit depth {} is too deep",
                self.circuit.depth
            )));
        }
        Ok(())
    }
}

/// Either network kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    #[serde(rename = "cpinn")]
    Dense(DenseSpec),
    #[serde(rename = "qpinn")]
    Hybrid(HybridSpec),
}

impl ModelSpec {
    pub fn n_params(&self) -> usize {
        match self {
            ModelSpec::Dense(d) => d.n_params(),
            ModelSpec::Hybrid(h) => h.n_params(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Dense(d) => {
                d.validate()?;
                if d.n_inputs() != 2 || d.n_outputs() != 1 {
                    return Err(Error::Config(format!(
                        "a PINN maps (t, x) to u; widths {:?} do not",
                        d.widths
                    )));
                }
                Ok(())
            }
            ModelSpec::Hybrid(h) => h.validate(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Dense(_) => ModelKind::Cpinn,
            ModelSpec::Hybrid(_) => ModelKind::Qpinn,
        }
    }

    /// Short architecture label, e.g. `dense[2,8,8,1]` or `hybrid[c1,d30]`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Dense(d) => {
                let w: Vec<String> = d.widths.iter().map(|w| w.to_string()).collect();
                format!("dense[{}]", w.join(","))
            }
            ModelSpec::Hybrid(h) => {
                format!("hybrid[c{},d{}]", h.encoder.hidden_layers(), h.circuit.depth)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cpinn,
    Qpinn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cpinn => "cpinn",
            ModelKind::Qpinn => "qpinn",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn count_params(spec: &ModelSpec) -> usize {
    spec.n_params()
}

/// Uniform-width classical PINN with `depth` hidden layers whose parameter
/// count is closest to `target`; ties go to the smaller width.
pub fn plan_cpinn(target: usize, depth: usize) -> Result<DenseSpec> {
    if target > MAX_PARAMS {
        return Err(Error::Config(format!(
            "target {target} exceeds the {MAX_PARAMS}-parameter limit"
        )));
    }
    if depth == 0 || depth > MAX_LAYERS - 2 {
        return Err(Error::Config(format!(
            "a classical PINN needs 1..={} hidden layers, got {depth}",
            MAX_LAYERS - 2
        )));
    }
    let count = |w: usize| DenseSpec::uniform(2, w, depth, 1).n_params();
    if target < count(1) {
        return Err(Error::Config(format!(
            "target {target} is below the minimum {} for depth {depth}",
            count(1)
        )));
    }
    let mut w = 1;
    while count(w + 1) <= target {
        w += 1;
    }
    let below = target - count(w);
    let above = count(w + 1) - target;
    let width = if above < below { w + 1 } else { w };
    Ok(DenseSpec::uniform(2, width, depth, 1))
}

/// Standard hybrid PINN whose circuit depth brings the total closest to
/// `target`; half-way ties go to the deeper circuit.
pub fn plan_qpinn(target: usize, classical_depth: usize) -> Result<HybridSpec> {
    if target > MAX_PARAMS {
        return Err(Error::Config(format!(
            "target {target} exceeds the {MAX_PARAMS}-parameter limit"
        )));
    }
    if classical_depth > 1 {
        return Err(Error::Config(format!(
            "hybrid classical depth must be 0 or 1, got {classical_depth}"
        )));
    }
    let base = HybridSpec::standard(classical_depth, 0);
    let classical = base.classical_params();
    if target <= classical {
        return Err(Error::Config(format!(
            "target {target} leaves no room for circuit angles after {classical} classical parameters"
        )));
    }
    let per_block = base.circuit.n_qubits * CircuitLayout::ROTATIONS_PER_QUBIT;
    let rem = target - classical;
    let depth = ((rem + per_block / 2) / per_block).max(1);
    Ok(HybridSpec::standard(classical_depth, depth))
}

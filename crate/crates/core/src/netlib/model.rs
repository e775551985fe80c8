//! Parameter initialisation and the forward pass.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{DenseSpec, HybridSpec, ModelSpec};
use crate::diffkit::{Arith, Jet2, JetEval, ParamVector, ValueEval};
use crate::error::{Error, Result};
use crate::qsim::run_circuit;

/// Glorot-uniform weights, zero biases, circuit angles uniform in `[0, 2π)`.
pub fn init_params(spec: &ModelSpec, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(spec.n_params());
    match spec {
        ModelSpec::Dense(d) => init_dense(d, &mut rng, &mut values),
        ModelSpec::Hybrid(h) => {
            init_dense(&h.encoder, &mut rng, &mut values);
            values.extend((0..h.circuit.n_params()).map(|_| rng.gen_range(0.0..TAU)));
            init_dense(&h.decoder, &mut rng, &mut values);
        }
    }
    ParamVector::new(values)
}

fn init_dense(spec: &DenseSpec, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    for (fan_in, fan_out, _) in spec.layers() {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        out.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)));
        out.extend(std::iter::repeat_n(0.0, fan_out));
    }
}

/// Dense forward pass over `params` laid out layer by layer as row-major
/// weights `[out][in]` followed by biases.
pub fn dense_forward<A: Arith>(spec: &DenseSpec, ar: &mut A, params: &[A::V], inputs: &[A::V]) -> Vec<A::V> {
    let n_layers = spec.widths.len() - 1;
    let mut cur = inputs.to_vec();
    for (l, (fan_in, fan_out, off)) in spec.layers().enumerate() {
        let w = &params[off..off + fan_in * fan_out];
        let b = &params[off + fan_in * fan_out..off + (fan_in + 1) * fan_out];
        let mut next = Vec::with_capacity(fan_out);
        for j in 0..fan_out {
            let z = ar.affine(b[j], &w[j * fan_in..(j + 1) * fan_in], &cur);
            next.push(if l + 1 < n_layers { ar.tanh(z) } else { z });
        }
        cur = next;
    }
    cur
}

/// Encoder outputs `i_j` and circuit outputs `o_j` of a hybrid network.
pub fn hybrid_stages<A: Arith>(
    spec: &HybridSpec,
    ar: &mut A,
    params: &[A::V],
    t: A::V,
    x: A::V,
) -> (Vec<A::V>, Vec<A::V>) {
    let (enc, circ, _) = spec.ranges();
    let inner = dense_forward(&spec.encoder, ar, &params[enc], &[t, x]);
    let outer =
        run_circuit(&spec.circuit, ar, &inner, &params[circ]).expect("validated hybrid spec matches its circuit");
    (inner, outer)
}

impl ModelSpec {
    /// `u(t, x)` as produced by the network.
    pub fn forward<A: Arith>(&self, ar: &mut A, params: &[A::V], t: A::V, x: A::V) -> A::V {
        match self {
            ModelSpec::Dense(d) => dense_forward(d, ar, params, &[t, x])[0],
            ModelSpec::Hybrid(h) => {
                let (_, outer) = hybrid_stages(h, ar, params, t, x);
                let (_, _, dec) = h.ranges();
                dense_forward(&h.decoder, ar, &params[dec], &outer)[0]
            }
        }
    }
}

/// A specification together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelHandle {
    pub spec: ModelSpec,
    pub params: ParamVector,
    /// Parameter budget the architecture was planned for, if any.
    pub target_params: Option<usize>,
    pub seed: u64,
}

impl ModelHandle {
    pub fn new(spec: ModelSpec, params: ParamVector, target_params: Option<usize>, seed: u64) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.n_params() {
            return Err(Error::Structural(format!(
                "{} parameters supplied for an architecture with {}",
                params.len(),
                spec.n_params()
            )));
        }
        Ok(ModelHandle {
            spec,
            params,
            target_params,
            seed,
        })
    }

    /// Freshly initialised model.
    pub fn init(spec: ModelSpec, target_params: Option<usize>, seed: u64) -> Result<Self> {
        spec.validate()?;
        let params = init_params(&spec, seed);
        ModelHandle::new(spec, params, target_params, seed)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Parameters lifted to constant jets.
    pub fn jet_params(&self) -> Vec<Jet2> {
        self.params.values().iter().map(|&p| Jet2::constant(p)).collect()
    }

    /// `u` with its `t`, `x` and `xx` derivatives at one point.
    pub fn eval_jet(&self, t: f64, x: f64) -> Jet2 {
        let p = self.jet_params();
        self.spec.forward(&mut JetEval, &p, Jet2::seed_t(t), Jet2::seed_x(x))
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.spec.forward(&mut ValueEval, self.params.values(), t, x)
    }
}

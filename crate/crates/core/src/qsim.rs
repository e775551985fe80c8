//! Dense statevector simulation of the data re-uploading circuit.
//!
//! Amplitudes are stored as separate real and imaginary parts in any
//! [`Arith`] backend, so the same circuit code yields plain values, input
//! derivatives (jets) or a recorded tape for parameter gradients.
//!
//! Qubit `j` maps to bit `n_q − 1 − j` of the basis index, matching ket
//! notation `|q0 q1 … ⟩`.

use serde::{Deserialize, Serialize};

use crate::diffkit::{Arith, Jet2};
use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone)]
pub struct Statevector<V> {
    n_qubits: usize,
    re: Vec<V>,
    im: Vec<V>,
}

impl<V: Copy> Statevector<V> {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero<A: Arith<V = V>>(ar: &mut A, n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Unsupported(format!(
                "{n_qubits} qubits exceeds the dense simulator limit of {MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n_qubits;
        let zero = ar.constant(Jet2::ZERO);
        let one = ar.constant(Jet2::constant(1.0));
        let mut re = vec![zero; dim];
        re[0] = one;
        Ok(Statevector {
            n_qubits,
            re,
            im: vec![zero; dim],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    /// Amplitude `k` as (real, imaginary) parts.
    pub fn amplitude(&self, k: usize) -> (V, V) {
        (self.re[k], self.im[k])
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(Error::Structural(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(1 << (self.n_qubits - 1 - qubit))
    }

    /// `exp(−i·angle·σ/2)` on `qubit`; the angle may depend on the inputs.
    pub fn apply_rotation<A: Arith<V = V>>(&mut self, ar: &mut A, axis: Axis, qubit: usize, angle: V) -> Result<()> {
        self.rotate(ar, axis, qubit, angle, false)
    }

    /// Like [`apply_rotation`](Self::apply_rotation) for an angle that is
    /// constant in `(t, x)`, e.g. a trainable parameter.
    pub fn apply_fixed_rotation<A: Arith<V = V>>(
        &mut self,
        ar: &mut A,
        axis: Axis,
        qubit: usize,
        angle: V,
    ) -> Result<()> {
        self.rotate(ar, axis, qubit, angle, true)
    }

    fn rotate<A: Arith<V = V>>(&mut self, ar: &mut A, axis: Axis, qubit: usize, angle: V, fixed: bool) -> Result<()> {
        let mask = self.mask(qubit)?;
        let half = ar.scale(angle, 0.5);
        let c = ar.cos(half);
        let s = ar.sin(half);
        let ns = ar.neg(s);
        let mix = |ar: &mut A, a: V, x: V, b: V, y: V| {
            if fixed {
                ar.const_mix2(a, x, b, y)
            } else {
                ar.mix2(a, x, b, y)
            }
        };
        for k0 in (0..self.dim()).filter(|k| k & mask == 0) {
            let k1 = k0 | mask;
            let (r0, i0, r1, i1) = (self.re[k0], self.im[k0], self.re[k1], self.im[k1]);
            let out = match axis {
                // [[c, −s], [s, c]]
                Axis::Y => [
                    mix(ar, c, r0, ns, r1),
                    mix(ar, c, i0, ns, i1),
                    mix(ar, s, r0, c, r1),
                    mix(ar, s, i0, c, i1),
                ],
                // [[c, −is], [−is, c]]
                Axis::X => [
                    mix(ar, c, r0, s, i1),
                    mix(ar, c, i0, ns, r1),
                    mix(ar, c, r1, s, i0),
                    mix(ar, c, i1, ns, r0),
                ],
                // diag(c − is, c + is)
                Axis::Z => [
                    mix(ar, c, r0, s, i0),
                    mix(ar, c, i0, ns, r0),
                    mix(ar, c, r1, ns, i1),
                    mix(ar, c, i1, s, r1),
                ],
            };
            self.re[k0] = out[0];
            self.im[k0] = out[1];
            self.re[k1] = out[2];
            self.im[k1] = out[3];
        }
        Ok(())
    }

    /// Flips `target` on the subspace where `control` is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::Structural(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cm = self.mask(control)?;
        let tm = self.mask(target)?;
        for k in 0..self.dim() {
            if k & cm != 0 && k & tm == 0 {
                self.re.swap(k, k | tm);
                self.im.swap(k, k | tm);
            }
        }
        Ok(())
    }

    /// `⟨Z⟩` on `qubit`.
    pub fn expect_z<A: Arith<V = V>>(&self, ar: &mut A, qubit: usize) -> Result<V> {
        let mask = self.mask(qubit)?;
        let mut total: Option<V> = None;
        for k in 0..self.dim() {
            let p = ar.mix2(self.re[k], self.re[k], self.im[k], self.im[k]);
            total = Some(match total {
                None if k & mask == 0 => p,
                None => ar.neg(p),
                Some(acc) if k & mask == 0 => ar.add(acc, p),
                Some(acc) => ar.sub(acc, p),
            });
        }
        Ok(total.expect("statevector has at least one amplitude"))
    }

    /// Value-level squared norm.
    pub fn norm_sqr<A: Arith<V = V>>(&self, ar: &A) -> f64 {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| {
                let (r, i) = (ar.value(r), ar.value(i));
                r * r + i * i
            })
            .sum()
    }
}

/// How input angles are written into the register before each variational block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingSchedule {
    /// Block `ℓ` encodes with `R_Y` when `ℓ` is even and `R_X` when odd.
    #[default]
    AlternatingBlocks,
    /// Every block encodes with `R_Y` followed by `R_X`.
    YThenX,
}

/// Hardware-efficient re-uploading layout: `depth` repetitions of an encoding
/// block followed by a variational block (`R_Y(θ)`, `R_Z(θ)` per qubit, then a
/// CNOT ring `0→1, …, n_q−1→0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitLayout {
    pub n_qubits: usize,
    pub depth: usize,
    #[serde(default)]
    pub encoding: EncodingSchedule,
}

impl CircuitLayout {
    /// Trainable rotations per qubit per variational block.
    pub const ROTATIONS_PER_QUBIT: usize = 2;

    pub fn new(n_qubits: usize, depth: usize) -> Self {
        CircuitLayout {
            n_qubits,
            depth,
            encoding: EncodingSchedule::AlternatingBlocks,
        }
    }

    pub fn n_params(&self) -> usize {
        self.depth * self.n_qubits * Self::ROTATIONS_PER_QUBIT
    }

    pub fn encoding_axes(&self, block: usize) -> &'static [Axis] {
        match self.encoding {
            EncodingSchedule::AlternatingBlocks if block.is_multiple_of(2) => &[Axis::Y],
            EncodingSchedule::AlternatingBlocks => &[Axis::X],
            EncodingSchedule::YThenX => &[Axis::Y, Axis::X],
        }
    }

    /// Index of the trainable angle for `(block, qubit, rotation)`.
    pub fn param_index(&self, block: usize, qubit: usize, rotation: usize) -> usize {
        (block * self.n_qubits + qubit) * Self::ROTATIONS_PER_QUBIT + rotation
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// Runs the circuit from `|0…0⟩` and returns `⟨Z⟩` for every qubit.
pub fn run_circuit<A: Arith>(
    layout: &CircuitLayout,
    ar: &mut A,
    inputs: &[A::V],
    thetas: &[A::V],
) -> Result<Vec<A::V>> {
    layout.validate()?;
    let nq = layout.n_qubits;
    if inputs.len() != nq {
        return Err(Error::Structural(format!(
            "circuit expects {nq} inputs, got {}",
            inputs.len()
        )));
    }
    if thetas.len() != layout.n_params() {
        return Err(Error::Structural(format!(
            "circuit expects {} angles, got {}",
            layout.n_params(),
            thetas.len()
        )));
    }
    let mut sv = Statevector::zero(ar, nq)?;
    for block in 0..layout.depth {
        for &axis in layout.encoding_axes(block) {
            for (q, &angle) in inputs.iter().enumerate() {
                sv.apply_rotation(ar, axis, q, angle)?;
            }
        }
        for q in 0..nq {
            sv.apply_fixed_rotation(ar, Axis::Y, q, thetas[layout.param_index(block, q, 0)])?;
            sv.apply_fixed_rotation(ar, Axis::Z, q, thetas[layout.param_index(block, q, 1)])?;
        }
        if nq > 1 {
            for q in 0..nq {
                sv.apply_cnot(q, (q + 1) % nq)?;
            }
        }
    }
    (0..nq).map(|q| sv.expect_z(ar, q)).collect()
}

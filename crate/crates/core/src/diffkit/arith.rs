//! Evaluation backends shared by every model and loss.
//!
//! Models are written once against [`Arith`]; the same code then runs on
//! plain values ([`ValueEval`]), on jets ([`JetEval`]) or on a recording
//! [`Tape`](super::Tape) when parameter gradients are needed.

use super::jet::{Component, Jet2};

pub trait Arith {
    type V: Copy;

    fn constant(&mut self, c: Jet2) -> Self::V;
    /// Value-level part of `a`.
    fn value(&self, a: Self::V) -> f64;

    fn add(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn sub(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn mul(&mut self, a: Self::V, b: Self::V) -> Self::V;
    fn scale(&mut self, a: Self::V, s: f64) -> Self::V;
    fn tanh(&mut self, a: Self::V) -> Self::V;
    fn sin(&mut self, a: Self::V) -> Self::V;
    fn cos(&mut self, a: Self::V) -> Self::V;

    /// `bias + Σ weights[k]·inputs[k]`.
    ///
    /// Weights must be constant in `(t, x)`; only their values take part.
    fn affine(&mut self, bias: Self::V, weights: &[Self::V], inputs: &[Self::V]) -> Self::V;

    /// `a·x + b·y` with jet-valued coefficients.
    fn mix2(&mut self, a: Self::V, x: Self::V, b: Self::V, y: Self::V) -> Self::V;

    /// `a·x + b·y` where `a` and `b` are constant in `(t, x)`.
    fn const_mix2(&mut self, a: Self::V, x: Self::V, b: Self::V, y: Self::V) -> Self::V;

    fn neg(&mut self, a: Self::V) -> Self::V {
        self.scale(a, -1.0)
    }

    fn square(&mut self, a: Self::V) -> Self::V {
        self.mul(a, a)
    }
}

/// Backends that carry the full jet, so derivative coefficients can be read.
pub trait JetArith: Arith {
    fn jet(&self, a: Self::V) -> Jet2;
    /// Lifts one coefficient of `a` to a constant jet.
    fn component(&mut self, a: Self::V, c: Component) -> Self::V;
}

/// Direct jet evaluation without recording.
#[derive(Debug, Default, Clone, Copy)]
pub struct JetEval;

impl Arith for JetEval {
    type V = Jet2;

    #[inline]
    fn constant(&mut self, c: Jet2) -> Jet2 {
        c
    }
    #[inline]
    fn value(&self, a: Jet2) -> f64 {
        a.v
    }
    #[inline]
    fn add(&mut self, a: Jet2, b: Jet2) -> Jet2 {
        a + b
    }
    #[inline]
    fn sub(&mut self, a: Jet2, b: Jet2) -> Jet2 {
        a - b
    }
    #[inline]
    fn mul(&mut self, a: Jet2, b: Jet2) -> Jet2 {
        a * b
    }
    #[inline]
    fn scale(&mut self, a: Jet2, s: f64) -> Jet2 {
        a.scale(s)
    }
    #[inline]
    fn tanh(&mut self, a: Jet2) -> Jet2 {
        a.tanh()
    }
    #[inline]
    fn sin(&mut self, a: Jet2) -> Jet2 {
        a.sin()
    }
    #[inline]
    fn cos(&mut self, a: Jet2) -> Jet2 {
        a.cos()
    }
    #[inline]
    fn affine(&mut self, bias: Jet2, weights: &[Jet2], inputs: &[Jet2]) -> Jet2 {
        debug_assert_eq!(weights.len(), inputs.len());
        let mut acc = bias;
        for (w, x) in weights.iter().zip(inputs) {
            debug_assert!(w.is_constant());
            acc.v += w.v * x.v;
            acc.dt += w.v * x.dt;
            acc.dx += w.v * x.dx;
            acc.dxx += w.v * x.dxx;
        }
        acc
    }
    #[inline]
    fn mix2(&mut self, a: Jet2, x: Jet2, b: Jet2, y: Jet2) -> Jet2 {
        a * x + b * y
    }
    #[inline]
    fn const_mix2(&mut self, a: Jet2, x: Jet2, b: Jet2, y: Jet2) -> Jet2 {
        debug_assert!(a.is_constant() && b.is_constant());
        x.scale(a.v) + y.scale(b.v)
    }
}

impl JetArith for JetEval {
    fn jet(&self, a: Jet2) -> Jet2 {
        a
    }
    fn component(&mut self, a: Jet2, c: Component) -> Jet2 {
        Jet2::constant(a.get(c))
    }
}

/// Value-only evaluation; derivative coefficients are dropped.
#[derive(Debug, Default, Clone, Copy)]
pub struct ValueEval;

impl Arith for ValueEval {
    type V = f64;

    #[inline]
    fn constant(&mut self, c: Jet2) -> f64 {
        c.v
    }
    #[inline]
    fn value(&self, a: f64) -> f64 {
        a
    }
    #[inline]
    fn add(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn sub(&mut self, a: f64, b: f64) -> f64 {
        a - b
    }
    #[inline]
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
    #[inline]
    fn scale(&mut self, a: f64, s: f64) -> f64 {
        a * s
    }
    #[inline]
    fn tanh(&mut self, a: f64) -> f64 {
        a.tanh()
    }
    #[inline]
    fn sin(&mut self, a: f64) -> f64 {
        a.sin()
    }
    #[inline]
    fn cos(&mut self, a: f64) -> f64 {
        a.cos()
    }
    #[inline]
    fn affine(&mut self, bias: f64, weights: &[f64], inputs: &[f64]) -> f64 {
        let mut acc = bias;
        for (w, x) in weights.iter().zip(inputs) {
            acc += w * x;
        }
        acc
    }
    #[inline]
    fn mix2(&mut self, a: f64, x: f64, b: f64, y: f64) -> f64 {
        a * x + b * y
    }
    #[inline]
    fn const_mix2(&mut self, a: f64, x: f64, b: f64, y: f64) -> f64 {
        a * x + b * y
    }
}

//! Reverse-mode tape over jet-valued nodes.
//!
//! Every node holds a [`Jet2`]; the reverse sweep carries a four-component
//! adjoint per node, so parameter gradients flow through the derivative
//! coefficients as well as through values. Parameters are leaves whose
//! derivative coefficients are zero, so their gradient is the value part of
//! their adjoint.

use super::arith::{Arith, JetArith};
use super::jet::{Component, Jet2};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Scale(u32, f64),
    Tanh(u32),
    Sin(u32),
    Cos(u32),
    Component(u32, Component),
    // operands[start..start+len] are weights, the next len entries inputs
    Affine { bias: u32, start: u32, len: u32 },
    Mix2([u32; 4]),
    ConstMix2([u32; 4]),
}

/// Trainable parameter values with stable identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    ids: Vec<u32>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        let ids = (0..values.len() as u32).collect();
        ParamVector { values, ids }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to values; the length stays fixed.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }
}

/// Per-parameter partial derivatives, aligned with a [`ParamVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient(pub Vec<f64>);

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Gradient(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    vals: Vec<Jet2>,
    ops: Vec<Op>,
    operands: Vec<u32>,
    adj: Vec<Jet2>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn clear(&mut self) {
        self.vals.clear();
        self.ops.clear();
        self.operands.clear();
    }

    /// Drops every node recorded after `mark` (a previous [`Tape::len`]).
    pub fn rewind(&mut self, mark: usize) {
        self.vals.truncate(mark);
        self.ops.truncate(mark);
        let keep = self.ops.iter().rev().find_map(|op| match op {
            Op::Affine { start, len, .. } => Some((start + 2 * len) as usize),
            _ => None,
        });
        self.operands.truncate(keep.unwrap_or(0));
    }

    pub fn leaf(&mut self, j: Jet2) -> Var {
        self.push(j, Op::Leaf)
    }

    /// Records one leaf per parameter, in order.
    pub fn register(&mut self, params: &ParamVector) -> Vec<Var> {
        params.values().iter().map(|&p| self.leaf(Jet2::constant(p))).collect()
    }

    pub fn get(&self, v: Var) -> Jet2 {
        self.vals[v.index()]
    }

    #[inline]
    fn push(&mut self, j: Jet2, op: Op) -> Var {
        let idx = self.vals.len() as u32;
        self.vals.push(j);
        self.ops.push(op);
        Var(idx)
    }

    /// Gradient of `loss.v` with respect to the leaves in `params`.
    pub fn grad(&mut self, loss: Var, params: &[Var]) -> Result<Gradient> {
        let mut out = Gradient::zeros(params.len());
        self.accumulate_grad(loss, 1.0, params, &mut out.0)?;
        Ok(out)
    }

    /// Adds `scale · ∂loss.v/∂params` into `out`.
    pub fn accumulate_grad(&mut self, loss: Var, scale: f64, params: &[Var], out: &mut [f64]) -> Result<()> {
        if out.len() != params.len() {
            return Err(Error::Structural(format!(
                "gradient buffer length {} does not match {} parameters",
                out.len(),
                params.len()
            )));
        }
        let n = self.vals.len();
        if loss.index() >= n {
            return Err(Error::Structural(format!(
                "loss node {} is not on a tape of {n} nodes",
                loss.index()
            )));
        }
        if let Some(p) = params.iter().find(|p| p.index() >= n) {
            return Err(Error::Structural(format!(
                "parameter node {} is not on a tape of {n} nodes",
                p.index()
            )));
        }
        self.sweep(loss);
        for (o, p) in out.iter_mut().zip(params) {
            *o += scale * self.adj[p.index()].v;
        }
        Ok(())
    }

    fn sweep(&mut self, loss: Var) {
        let top = loss.index() + 1;
        self.adj.clear();
        self.adj.resize(top, Jet2::ZERO);
        self.adj[loss.index()] = Jet2::constant(1.0);
        let vals = &self.vals;
        let adj = &mut self.adj;
        for i in (0..top).rev() {
            let g = adj[i];
            if g == Jet2::ZERO {
                continue;
            }
            match self.ops[i] {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    acc(adj, a, g);
                    acc(adj, b, g);
                }
                Op::Sub(a, b) => {
                    acc(adj, a, g);
                    acc(adj, b, -g);
                }
                Op::Mul(a, b) => {
                    let (ga, gb) = mul_vjp(g, vals[a as usize], vals[b as usize]);
                    acc(adj, a, ga);
                    acc(adj, b, gb);
                }
                Op::Scale(a, s) => acc(adj, a, g.scale(s)),
                Op::Tanh(a) => {
                    let t = vals[i].v;
                    let s = 1.0 - t * t;
                    let d2 = -2.0 * t * s;
                    let d3 = -2.0 * s * s + 4.0 * t * t * s;
                    acc(adj, a, unary_vjp(g, vals[a as usize], s, d2, d3));
                }
                Op::Sin(a) => {
                    let x = vals[a as usize];
                    let (s, c) = x.v.sin_cos();
                    acc(adj, a, unary_vjp(g, x, c, -s, -c));
                }
                Op::Cos(a) => {
                    let x = vals[a as usize];
                    let (s, c) = x.v.sin_cos();
                    acc(adj, a, unary_vjp(g, x, -s, -c, s));
                }
                Op::Component(a, c) => {
                    let slot = &mut adj[a as usize];
                    match c {
                        Component::Value => slot.v += g.v,
                        Component::Dt => slot.dt += g.v,
                        Component::Dx => slot.dx += g.v,
                        Component::Dxx => slot.dxx += g.v,
                    }
                }
                Op::Affine { bias, start, len } => {
                    acc(adj, bias, g);
                    let (start, len) = (start as usize, len as usize);
                    for k in 0..len {
                        let w = self.operands[start + k] as usize;
                        let x = self.operands[start + len + k] as usize;
                        adj[w].v += g.dot(&vals[x]);
                        let wv = vals[w].v;
                        acc(adj, x as u32, g.scale(wv));
                    }
                }
                Op::Mix2([a, x, b, y]) => {
                    let (ga, gx) = mul_vjp(g, vals[a as usize], vals[x as usize]);
                    let (gb, gy) = mul_vjp(g, vals[b as usize], vals[y as usize]);
                    acc(adj, a, ga);
                    acc(adj, x, gx);
                    acc(adj, b, gb);
                    acc(adj, y, gy);
                }
                Op::ConstMix2([a, x, b, y]) => {
                    adj[a as usize].v += g.dot(&vals[x as usize]);
                    adj[b as usize].v += g.dot(&vals[y as usize]);
                    let (av, bv) = (vals[a as usize].v, vals[b as usize].v);
                    acc(adj, x, g.scale(av));
                    acc(adj, y, g.scale(bv));
                }
            }
        }
    }
}

#[inline]
fn acc(adj: &mut [Jet2], idx: u32, g: Jet2) {
    let slot = &mut adj[idx as usize];
    *slot = *slot + g;
}

/// Adjoints of both operands of a jet product.
#[inline]
fn mul_vjp(g: Jet2, a: Jet2, b: Jet2) -> (Jet2, Jet2) {
    let ga = Jet2::new(g.dot(&b), g.dt * b.v, g.dx * b.v + 2.0 * g.dxx * b.dx, g.dxx * b.v);
    let gb = Jet2::new(g.dot(&a), g.dt * a.v, g.dx * a.v + 2.0 * g.dxx * a.dx, g.dxx * a.v);
    (ga, gb)
}

/// Adjoint of `x` for `f(x)` lifted to jets, given `f'`, `f''`, `f'''` at `x.v`.
#[inline]
fn unary_vjp(g: Jet2, x: Jet2, d1: f64, d2: f64, d3: f64) -> Jet2 {
    Jet2::new(
        g.v * d1 + (g.dt * x.dt + g.dx * x.dx + g.dxx * x.dxx) * d2 + g.dxx * x.dx * x.dx * d3,
        g.dt * d1,
        g.dx * d1 + 2.0 * g.dxx * d2 * x.dx,
        g.dxx * d1,
    )
}

impl Arith for Tape {
    type V = Var;

    fn constant(&mut self, c: Jet2) -> Var {
        self.leaf(c)
    }
    fn value(&self, a: Var) -> f64 {
        self.vals[a.index()].v
    }
    fn add(&mut self, a: Var, b: Var) -> Var {
        let j = self.get(a) + self.get(b);
        self.push(j, Op::Add(a.0, b.0))
    }
    fn sub(&mut self, a: Var, b: Var) -> Var {
        let j = self.get(a) - self.get(b);
        self.push(j, Op::Sub(a.0, b.0))
    }
    fn mul(&mut self, a: Var, b: Var) -> Var {
        let j = self.get(a) * self.get(b);
        self.push(j, Op::Mul(a.0, b.0))
    }
    fn scale(&mut self, a: Var, s: f64) -> Var {
        let j = self.get(a).scale(s);
        self.push(j, Op::Scale(a.0, s))
    }
    fn tanh(&mut self, a: Var) -> Var {
        let j = self.get(a).tanh();
        self.push(j, Op::Tanh(a.0))
    }
    fn sin(&mut self, a: Var) -> Var {
        let j = self.get(a).sin();
        self.push(j, Op::Sin(a.0))
    }
    fn cos(&mut self, a: Var) -> Var {
        let j = self.get(a).cos();
        self.push(j, Op::Cos(a.0))
    }
    fn affine(&mut self, bias: Var, weights: &[Var], inputs: &[Var]) -> Var {
        debug_assert_eq!(weights.len(), inputs.len());
        let mut j = self.get(bias);
        for (w, x) in weights.iter().zip(inputs) {
            let w = self.vals[w.index()];
            debug_assert!(w.is_constant());
            let x = self.vals[x.index()];
            j.v += w.v * x.v;
            j.dt += w.v * x.dt;
            j.dx += w.v * x.dx;
            j.dxx += w.v * x.dxx;
        }
        let start = self.operands.len() as u32;
        self.operands.extend(weights.iter().map(|w| w.0));
        self.operands.extend(inputs.iter().map(|x| x.0));
        let op = Op::Affine {
            bias: bias.0,
            start,
            len: weights.len() as u32,
        };
        self.push(j, op)
    }
    fn mix2(&mut self, a: Var, x: Var, b: Var, y: Var) -> Var {
        let j = self.get(a) * self.get(x) + self.get(b) * self.get(y);
        self.push(j, Op::Mix2([a.0, x.0, b.0, y.0]))
    }
    fn const_mix2(&mut self, a: Var, x: Var, b: Var, y: Var) -> Var {
        let (ja, jb) = (self.get(a), self.get(b));
        debug_assert!(ja.is_constant() && jb.is_constant());
        let j = self.get(x).scale(ja.v) + self.get(y).scale(jb.v);
        self.push(j, Op::ConstMix2([a.0, x.0, b.0, y.0]))
    }
}

impl JetArith for Tape {
    fn jet(&self, a: Var) -> Jet2 {
        self.get(a)
    }
    fn component(&mut self, a: Var, c: Component) -> Var {
        let j = Jet2::constant(self.get(a).get(c));
        self.push(j, Op::Component(a.0, c))
    }
}

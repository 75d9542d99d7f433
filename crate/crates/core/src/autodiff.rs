//! Reverse-mode differentiation of scalar losses with respect to all
//! network parameters.
//!
//! A [`Tape`] records one loss evaluation as a sequence of registered
//! primitives: scalar arithmetic, `tanh`, reductions, and whole jet
//! propagations through the network. The jet forward pass is first-order in
//! the parameters, so a single reverse sweep over the tape — with a
//! closed-form reverse rule for the recorded jet propagation steps — yields
//! exact gradients even for losses containing second spatial derivatives.
//! Accumulation follows tape order, so gradients are bitwise reproducible.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::network::{
    GenComplexJet, GenJet, JetScratch, JetShape, NetworkParams, ParamLayout, PointRecord,
};
use crate::rng::SeededRng;

/// Scalar algebra shared by plain `f64` evaluation and taped [`Var`]s, so
/// residual assembly is written once and differentiated for free.
pub trait Field: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `c * self`.
    fn scale(&self, c: f64) -> Self;
    /// `self + c`.
    fn shift(&self, c: f64) -> Self;
    fn sqr(&self) -> Self;
}

impl Field for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: f64) -> Self {
        c * self
    }
    fn shift(&self, c: f64) -> Self {
        self + c
    }
    fn sqr(&self) -> Self {
        self * self
    }
}

/// Recorded primitive operations; operands are value indices.
#[derive(Debug, Clone, Copy)]
enum Op {
    Const,
    Param(u32),
    /// One component of a recorded jet propagation (leaf for the scalar
    /// sweep; its adjoint seeds the structured reverse pass).
    JetOut {
        rec: u32,
        comp: u8,
    },
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Tanh(u32),
    Sqr(u32),
    MulC(u32, f64),
    AddC(u32, f64),
}

struct TapeInner {
    params: NetworkParams,
    flat: Vec<f64>,
    shape: JetShape,
    layout: ParamLayout,
    ops: Vec<Op>,
    vals: Vec<f64>,
    records: Vec<PointRecord>,
}

impl TapeInner {
    fn push(&mut self, op: Op, v: f64) -> u32 {
        let idx = self.vals.len() as u32;
        self.ops.push(op);
        self.vals.push(v);
        idx
    }
}

/// Records one loss evaluation for reverse-mode differentiation.
pub struct Tape {
    inner: Rc<RefCell<TapeInner>>,
}

/// A scalar value recorded on a [`Tape`].
#[derive(Clone)]
pub struct Var {
    inner: Rc<RefCell<TapeInner>>,
    idx: u32,
}

impl Tape {
    pub fn new(params: &NetworkParams) -> Self {
        let shape = JetShape::new(params.layer_sizes());
        let layout = ParamLayout::new(params.layer_sizes());
        let flat = params.flatten();
        Self {
            inner: Rc::new(RefCell::new(TapeInner {
                params: params.clone(),
                flat,
                shape,
                layout,
                ops: Vec::new(),
                vals: Vec::new(),
                records: Vec::new(),
            })),
        }
    }

    pub fn n_params(&self) -> usize {
        self.inner.borrow().flat.len()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.inner.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn constant(&self, c: f64) -> Var {
        let idx = self.inner.borrow_mut().push(Op::Const, c);
        self.var(idx)
    }

    /// Leaf bound to flat parameter coordinate `i`.
    pub fn param(&self, i: usize) -> Var {
        let mut t = self.inner.borrow_mut();
        let v = t.flat[i];
        let idx = t.push(Op::Param(i as u32), v);
        drop(t);
        self.var(idx)
    }

    /// Records a jet propagation through the network at `(x, z)` and
    /// returns its ten output components as tape leaves.
    pub fn jet(&self, x: f64, z: f64) -> GenComplexJet<Var> {
        let mut t = self.inner.borrow_mut();
        let t = &mut *t;
        let mut rec = PointRecord::new(&t.shape);
        let jet = t.params.jet_record(&t.shape, x, z, &mut rec);
        let rec_idx = t.records.len() as u32;
        t.records.push(rec);
        let comps = [
            jet.re.v, jet.re.dx, jet.re.dz, jet.re.dxx, jet.re.dzz, jet.im.v, jet.im.dx, jet.im.dz,
            jet.im.dxx, jet.im.dzz,
        ];
        let mut idxs = [0u32; 10];
        for (c, (slot, val)) in idxs.iter_mut().zip(comps).enumerate() {
            *slot = t.push(
                Op::JetOut {
                    rec: rec_idx,
                    comp: c as u8,
                },
                val,
            );
        }
        GenComplexJet {
            re: GenJet {
                v: self.var(idxs[0]),
                dx: self.var(idxs[1]),
                dz: self.var(idxs[2]),
                dxx: self.var(idxs[3]),
                dzz: self.var(idxs[4]),
            },
            im: GenJet {
                v: self.var(idxs[5]),
                dx: self.var(idxs[6]),
                dz: self.var(idxs[7]),
                dxx: self.var(idxs[8]),
                dzz: self.var(idxs[9]),
            },
        }
    }

    fn var(&self, idx: u32) -> Var {
        Var {
            inner: Rc::clone(&self.inner),
            idx,
        }
    }

    /// Re-evaluates every recorded node in order and returns the value of
    /// `of`. Jet propagation steps are recomputed from their stored point
    /// and the tape's parameters.
    pub fn replay(&self, of: &Var) -> f64 {
        let t = self.inner.borrow();
        let mut jet_vals: Vec<[f64; 10]> = Vec::with_capacity(t.records.len());
        for rec in &t.records {
            let mut fresh = PointRecord::new(&t.shape);
            let jet = t.params.jet_record(&t.shape, rec.x, rec.z, &mut fresh);
            jet_vals.push([
                jet.re.v, jet.re.dx, jet.re.dz, jet.re.dxx, jet.re.dzz, jet.im.v, jet.im.dx,
                jet.im.dz, jet.im.dxx, jet.im.dzz,
            ]);
        }
        let mut vals = vec![0.0; t.vals.len()];
        for (i, op) in t.ops.iter().enumerate() {
            vals[i] = match *op {
                Op::Const => t.vals[i],
                Op::Param(p) => t.flat[p as usize],
                Op::JetOut { rec, comp } => jet_vals[rec as usize][comp as usize],
                Op::Add(a, b) => vals[a as usize] + vals[b as usize],
                Op::Sub(a, b) => vals[a as usize] - vals[b as usize],
                Op::Mul(a, b) => vals[a as usize] * vals[b as usize],
                Op::Div(a, b) => vals[a as usize] / vals[b as usize],
                Op::Neg(a) => -vals[a as usize],
                Op::Tanh(a) => vals[a as usize].tanh(),
                Op::Sqr(a) => vals[a as usize] * vals[a as usize],
                Op::MulC(a, c) => c * vals[a as usize],
                Op::AddC(a, c) => vals[a as usize] + c,
            };
        }
        vals[of.idx as usize]
    }

    /// Reverse sweep from `loss`: one visit per tape node in reverse order,
    /// then the structured jet reverse passes in record order.
    pub fn backward(&self, loss: &Var) -> Result<(f64, ParamGradient)> {
        assert!(
            Rc::ptr_eq(&self.inner, &loss.inner),
            "loss was recorded on a different tape"
        );
        let t = self.inner.borrow();
        let loss_val = t.vals[loss.idx as usize];
        if !loss_val.is_finite() {
            return Err(Error::numeric("loss value is not finite"));
        }

        let mut adj = vec![0.0; t.vals.len()];
        adj[loss.idx as usize] = 1.0;
        for i in (0..t.ops.len()).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match t.ops[i] {
                Op::Const | Op::Param(_) | Op::JetOut { .. } => {}
                Op::Add(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    adj[a as usize] += g * t.vals[b as usize];
                    adj[b as usize] += g * t.vals[a as usize];
                }
                Op::Div(a, b) => {
                    let bv = t.vals[b as usize];
                    adj[a as usize] += g / bv;
                    adj[b as usize] -= g * t.vals[a as usize] / (bv * bv);
                }
                Op::Neg(a) => adj[a as usize] -= g,
                Op::Tanh(a) => {
                    let u = t.vals[i];
                    adj[a as usize] += g * (1.0 - u * u);
                }
                Op::Sqr(a) => adj[a as usize] += 2.0 * g * t.vals[a as usize],
                Op::MulC(a, c) => adj[a as usize] += g * c,
                Op::AddC(a, _) => adj[a as usize] += g,
            }
        }

        // Collect parameter-leaf adjoints and jet seeds in tape order.
        let mut grad = vec![0.0; t.flat.len()];
        let mut seeds = vec![[0.0; 10]; t.records.len()];
        for (i, op) in t.ops.iter().enumerate() {
            match *op {
                Op::Param(p) => grad[p as usize] += adj[i],
                Op::JetOut { rec, comp } => seeds[rec as usize][comp as usize] += adj[i],
                _ => {}
            }
        }
        let mut scratch = JetScratch::new(t.params.layer_sizes());
        for (rec, seed) in t.records.iter().zip(&seeds) {
            if seed.iter().all(|&s| s == 0.0) {
                continue;
            }
            t.params
                .jet_backprop(&t.shape, &t.layout, rec, seed, &mut grad, &mut scratch);
        }

        if !grad.iter().all(|x| x.is_finite()) {
            return Err(Error::numeric("gradient adjoint is not finite"));
        }
        let grad = ParamGradient {
            layer_sizes: t.params.layer_sizes().to_vec(),
            flat: grad,
        };
        Ok((loss_val, grad))
    }
}

impl Var {
    pub fn value(&self) -> f64 {
        self.inner.borrow().vals[self.idx as usize]
    }

    pub fn tanh(&self) -> Var {
        let mut t = self.inner.borrow_mut();
        let v = t.vals[self.idx as usize].tanh();
        let idx = t.push(Op::Tanh(self.idx), v);
        drop(t);
        Var {
            inner: Rc::clone(&self.inner),
            idx,
        }
    }

    fn binary(&self, o: &Var, f: impl FnOnce(u32, u32) -> Op, v: f64) -> Var {
        assert!(
            Rc::ptr_eq(&self.inner, &o.inner),
            "operands live on different tapes"
        );
        let idx = self.inner.borrow_mut().push(f(self.idx, o.idx), v);
        Var {
            inner: Rc::clone(&self.inner),
            idx,
        }
    }

    fn unary(&self, op: Op, v: f64) -> Var {
        let idx = self.inner.borrow_mut().push(op, v);
        Var {
            inner: Rc::clone(&self.inner),
            idx,
        }
    }
}

impl Field for Var {
    fn add(&self, o: &Self) -> Self {
        let v = self.value() + o.value();
        self.binary(o, Op::Add, v)
    }
    fn sub(&self, o: &Self) -> Self {
        let v = self.value() - o.value();
        self.binary(o, Op::Sub, v)
    }
    fn mul(&self, o: &Self) -> Self {
        let v = self.value() * o.value();
        self.binary(o, Op::Mul, v)
    }
    fn neg(&self) -> Self {
        let v = -self.value();
        self.unary(Op::Neg(self.idx), v)
    }
    fn scale(&self, c: f64) -> Self {
        let v = c * self.value();
        self.unary(Op::MulC(self.idx, c), v)
    }
    fn shift(&self, c: f64) -> Self {
        let v = self.value() + c;
        self.unary(Op::AddC(self.idx, c), v)
    }
    fn sqr(&self) -> Self {
        let x = self.value();
        self.unary(Op::Sqr(self.idx), x * x)
    }
}

macro_rules! var_binop {
    ($trait:ident, $method:ident, $field:ident) => {
        impl $trait for &Var {
            type Output = Var;
            fn $method(self, rhs: &Var) -> Var {
                Field::$field(self, rhs)
            }
        }
        impl $trait for Var {
            type Output = Var;
            fn $method(self, rhs: Var) -> Var {
                Field::$field(&self, &rhs)
            }
        }
    };
}

var_binop!(Add, add, add);
var_binop!(Sub, sub, sub);
var_binop!(Mul, mul, mul);

impl Div for &Var {
    type Output = Var;
    fn div(self, rhs: &Var) -> Var {
        let v = self.value() / rhs.value();
        self.binary(rhs, Op::Div, v)
    }
}

impl Div for Var {
    type Output = Var;
    fn div(self, rhs: Var) -> Var {
        &self / &rhs
    }
}

impl Neg for &Var {
    type Output = Var;
    fn neg(self) -> Var {
        Field::neg(self)
    }
}

impl Mul<f64> for &Var {
    type Output = Var;
    fn mul(self, c: f64) -> Var {
        self.scale(c)
    }
}

impl Add<f64> for &Var {
    type Output = Var;
    fn add(self, c: f64) -> Var {
        self.shift(c)
    }
}

impl Sub<f64> for &Var {
    type Output = Var;
    fn sub(self, c: f64) -> Var {
        self.shift(-c)
    }
}

/// Gradient of a scalar loss with respect to every network parameter,
/// shape-congruent with [`NetworkParams`] through the flat layout.
#[derive(Debug, Clone)]
pub struct ParamGradient {
    layer_sizes: Vec<usize>,
    flat: Vec<f64>,
}

impl ParamGradient {
    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.flat
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Row-major gradient block of weight matrix `layer`.
    pub fn weight(&self, layer: usize) -> &[f64] {
        let layout = ParamLayout::new(&self.layer_sizes);
        let off = layout.weight_offset(layer);
        let n = self.layer_sizes[layer] * self.layer_sizes[layer + 1];
        &self.flat[off..off + n]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let layout = ParamLayout::new(&self.layer_sizes);
        let off = layout.bias_offset(layer);
        &self.flat[off..off + self.layer_sizes[layer + 1]]
    }

    pub fn alpha(&self, hidden_layer: usize) -> f64 {
        let layout = ParamLayout::new(&self.layer_sizes);
        self.flat[layout.alpha_offset + hidden_layer]
    }
}

/// Evaluates `loss_fn` once and returns the loss with its exact gradient.
pub fn grad_loss<F>(params: &NetworkParams, loss_fn: F) -> Result<(f64, ParamGradient)>
where
    F: FnOnce(&Tape) -> Var,
{
    let tape = Tape::new(params);
    let loss = loss_fn(&tape);
    tape.backward(&loss)
}

/// Evaluates `loss_fn` without differentiating.
pub fn eval_loss<F>(params: &NetworkParams, loss_fn: F) -> Result<f64>
where
    F: FnOnce(&Tape) -> Var,
{
    let tape = Tape::new(params);
    let v = loss_fn(&tape).value();
    if !v.is_finite() {
        return Err(Error::numeric("loss value is not finite"));
    }
    Ok(v)
}

/// Probe seed fixed so the checked coordinates are reproducible.
const FD_PROBE_SEED: u64 = 0xFDC4EC;

/// Compares the reverse-mode gradient against central finite differences on
/// `n_probes` randomly chosen parameter coordinates; returns the largest
/// relative discrepancy `|analytic - fd| / max(|analytic|, 1e-12)`.
pub fn fd_check<F>(params: &NetworkParams, loss_fn: F, n_probes: usize, step: f64) -> Result<f64>
where
    F: Fn(&Tape) -> Var,
{
    if step <= 0.0 {
        return Err(Error::contract("finite-difference step must be positive"));
    }
    let (_, grad) = grad_loss(params, &loss_fn)?;
    let flat = params.flatten();
    let mut rng = SeededRng::new(FD_PROBE_SEED);
    let mut max_rel = 0.0f64;
    for _ in 0..n_probes {
        let i = rng.index(flat.len());
        let mut p = flat.clone();
        p[i] += step;
        let plus = eval_loss(
            &NetworkParams::unflatten(params.layer_sizes(), &p)?,
            &loss_fn,
        )?;
        p[i] -= 2.0 * step;
        let minus = eval_loss(
            &NetworkParams::unflatten(params.layer_sizes(), &p)?,
            &loss_fn,
        )?;
        let fd = (plus - minus) / (2.0 * step);
        let a = grad.as_flat()[i];
        let rel = (a - fd).abs() / a.abs().max(1e-12);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

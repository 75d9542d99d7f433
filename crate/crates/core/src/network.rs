//! MLP surrogate with layer-wise adaptive tanh activations and jet
//! propagation.
//!
//! The network maps `(x, z)` to two outputs interpreted as the real and
//! imaginary parts of a complex field. `jet_forward` propagates the value
//! together with first and second spatial derivatives through every layer in
//! one pass, using the closed-form tanh chain rule, so residuals involving
//! the Laplacian need no numerical differentiation.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::SeededRng;

/// Value and spatial derivatives of a scalar quantity at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenJet<T> {
    pub v: T,
    pub dx: T,
    pub dz: T,
    pub dxx: T,
    pub dzz: T,
}

/// Jet of a complex field, stored as real/imaginary jet pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenComplexJet<T> {
    pub re: GenJet<T>,
    pub im: GenJet<T>,
}

pub type RealJet = GenJet<f64>;
pub type ComplexJet = GenComplexJet<f64>;

impl RealJet {
    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.dx.is_finite()
            && self.dz.is_finite()
            && self.dxx.is_finite()
            && self.dzz.is_finite()
    }
}

impl ComplexJet {
    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// All trainable parameters: weight matrices, bias vectors, and per-layer
/// activation slopes.
///
/// `layer_sizes` is `[2, N_1, .., N_M, 2]`: two inputs `(x, z)`, `M` hidden
/// layers, and two outputs (real and imaginary part). The output layer is
/// affine; only hidden layers carry an adaptive slope.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vector>,
    alphas: Vec<f64>,
}

impl NetworkParams {
    /// Glorot-normal weights, zero biases, every slope set to `alpha0`.
    ///
    /// The Glorot fans count weight connections only; biases start at zero.
    pub fn init(rng: &mut SeededRng, layer_sizes: &[usize], alpha0: f64) -> Result<Self> {
        validate_layer_sizes(layer_sizes)?;
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            weights.push(rng.glorot_normal(fan_in, fan_out)?);
            biases.push(Vector::zeros(fan_out));
        }
        let alphas = vec![alpha0; layer_sizes.len() - 2];
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            alphas,
        })
    }

    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Matrix>,
        biases: Vec<Vector>,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        validate_layer_sizes(&layer_sizes)?;
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::contract("weight/bias count does not match layers"));
        }
        if alphas.len() != n_layers - 1 {
            return Err(Error::contract("one slope per hidden layer expected"));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.rows() != layer_sizes[i + 1] || w.cols() != layer_sizes[i] {
                return Err(Error::contract(format!("weight {i} has wrong shape")));
            }
            if biases[i].len() != layer_sizes[i + 1] {
                return Err(Error::contract(format!("bias {i} has wrong length")));
            }
        }
        if !alphas.iter().all(|a| a.is_finite()) {
            return Err(Error::numeric("slope is not finite"));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
            alphas,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Number of hidden layers.
    pub fn hidden_layers(&self) -> usize {
        self.layer_sizes.len() - 2
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vector] {
        &self.biases
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn n_params(&self) -> usize {
        ParamLayout::new(&self.layer_sizes).len
    }

    /// Serializes all parameters into one flat vector.
    ///
    /// Layout: for each layer, weight entries row-major then biases; the
    /// hidden-layer slopes follow at the end. `unflatten` inverts this
    /// exactly.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w.as_slice());
            flat.extend_from_slice(b.as_slice());
        }
        flat.extend_from_slice(&self.alphas);
        flat
    }

    pub fn unflatten(layer_sizes: &[usize], flat: &[f64]) -> Result<Self> {
        validate_layer_sizes(layer_sizes)?;
        let layout = ParamLayout::new(layer_sizes);
        if flat.len() != layout.len {
            return Err(Error::contract(format!(
                "flat parameter vector has length {}, expected {}",
                flat.len(),
                layout.len
            )));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (i, w) in layer_sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let wo = layout.weight_offset(i);
            let bo = layout.bias_offset(i);
            weights.push(Matrix::from_vec(
                n_out,
                n_in,
                flat[wo..wo + n_in * n_out].to_vec(),
            )?);
            biases.push(Vector::from_vec(flat[bo..bo + n_out].to_vec())?);
        }
        let alphas = flat[layout.alpha_offset..].to_vec();
        Self::from_parts(layer_sizes.to_vec(), weights, biases, alphas)
    }

    /// Plain forward pass; returns the two outputs `(re, im)`.
    pub fn forward(&self, x: f64, z: f64) -> Result<(f64, f64)> {
        let mut cur = vec![x, z];
        let mut next = Vec::new();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            next.clear();
            next.resize(w.rows(), 0.0);
            let ws = w.as_slice();
            let n_in = w.cols();
            for (r, o) in next.iter_mut().enumerate() {
                let row = &ws[r * n_in..(r + 1) * n_in];
                let mut acc = b.get(r);
                for (wij, lj) in row.iter().zip(&cur) {
                    acc += wij * lj;
                }
                *o = acc;
            }
            if l < self.alphas.len() {
                let a = self.alphas[l];
                for t in next.iter_mut() {
                    *t = (a * *t).tanh();
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let (re, im) = (cur[0], cur[1]);
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::numeric(format!(
                "network output not finite at ({x}, {z})"
            )));
        }
        Ok((re, im))
    }

    /// Value and exact first/second spatial derivatives of both outputs.
    pub fn jet_forward(&self, x: f64, z: f64) -> Result<ComplexJet> {
        let shape = JetShape::new(&self.layer_sizes);
        let mut rec = PointRecord::new(&shape);
        let jet = self.jet_record(&shape, x, z, &mut rec);
        if !jet.is_finite() {
            return Err(Error::numeric(format!(
                "network jet not finite at ({x}, {z})"
            )));
        }
        Ok(jet)
    }

    /// Propagates jets through every layer, storing the per-layer pre- and
    /// post-activation jets in `rec` for a later reverse sweep.
    pub(crate) fn jet_record(
        &self,
        shape: &JetShape,
        x: f64,
        z: f64,
        rec: &mut PointRecord,
    ) -> ComplexJet {
        rec.x = x;
        rec.z = z;
        let input = [x, z, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let m = self.alphas.len();
        for l in 0..=m {
            let n_in = self.layer_sizes[l];
            let n_out = self.layer_sizes[l + 1];
            // Borrow the previous post block and this layer's pre block
            // disjointly out of the flat arena.
            let hi = shape.pre_offset(l) + 5 * n_out;
            let (head, tail) = rec.data[..hi].split_at_mut(shape.pre_offset(l));
            let inp = if l == 0 {
                JetView::from_flat(&input, 2)
            } else {
                JetView::from_flat(&head[head.len() - 5 * n_in..], n_in)
            };
            let mut out = JetViewMut::from_flat(tail, n_out);
            affine_jets(
                self.weights[l].as_slice(),
                self.biases[l].as_slice(),
                n_in,
                n_out,
                &inp,
                &mut out,
            );
            if l < m {
                let (pre, post) = rec.data[shape.pre_offset(l)..shape.post_offset(l) + 5 * n_out]
                    .split_at_mut(5 * n_out);
                let pre = JetView::from_flat(pre, n_out);
                let mut post = JetViewMut::from_flat(post, n_out);
                tanh_jets(self.alphas[l], &pre, &mut post);
            }
        }
        let out = JetView::from_flat(&rec.data[shape.pre_offset(m)..], 2);
        ComplexJet {
            re: GenJet {
                v: out.v[0],
                dx: out.dx[0],
                dz: out.dz[0],
                dxx: out.dxx[0],
                dzz: out.dzz[0],
            },
            im: GenJet {
                v: out.v[1],
                dx: out.dx[1],
                dz: out.dz[1],
                dxx: out.dxx[1],
                dzz: out.dzz[1],
            },
        }
    }

    /// Reverse sweep over one recorded jet propagation.
    ///
    /// `seed` holds the adjoints of the ten outputs in record layout
    /// (re then im, each `v, dx, dz, dxx, dzz`); gradients accumulate into
    /// `grad`, a flat vector in `flatten` layout.
    pub(crate) fn jet_backprop(
        &self,
        shape: &JetShape,
        layout: &ParamLayout,
        rec: &PointRecord,
        seed: &[f64; 10],
        grad: &mut [f64],
        scratch: &mut JetScratch,
    ) {
        let m = self.alphas.len();
        // Seed layout is component-contiguous per output: re/im interleave
        // as columns of the 5 x 2 output block.
        let mut bar_out = [0.0; 10];
        for c in 0..5 {
            bar_out[2 * c] = seed[c]; // re component c
            bar_out[2 * c + 1] = seed[5 + c]; // im component c
        }
        let input = [rec.x, rec.z, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];

        // Output affine layer.
        {
            let n_in = self.layer_sizes[m];
            let inp = if m == 0 {
                JetView::from_flat(&input, 2)
            } else {
                JetView::from_flat(
                    &rec.data[shape.post_offset(m - 1)..shape.pre_offset(m)],
                    n_in,
                )
            };
            scratch.a[..5 * n_in].fill(0.0);
            let mut bar_in = JetViewMut::from_flat(&mut scratch.a[..5 * n_in], n_in);
            let bar = JetView::from_flat(&bar_out, 2);
            let (gw, gb) = layout.grad_blocks(grad, m, n_in, 2);
            affine_jets_rev(
                self.weights[m].as_slice(),
                n_in,
                2,
                &inp,
                &bar,
                &mut bar_in,
                gw,
                gb,
                m > 0,
            );
        }

        for l in (0..m).rev() {
            let n_in = self.layer_sizes[l];
            let n_out = self.layer_sizes[l + 1];
            // Activation: scratch.a holds the post-jet adjoints; produce the
            // pre-jet adjoints into scratch.b.
            {
                let pre = JetView::from_flat(
                    &rec.data[shape.pre_offset(l)..shape.pre_offset(l) + 5 * n_out],
                    n_out,
                );
                let post_v = &rec.data[shape.post_offset(l)..shape.post_offset(l) + n_out];
                let bar_post = JetView::from_flat(&scratch.a[..5 * n_out], n_out);
                let mut bar_pre = JetViewMut::from_flat(&mut scratch.b[..5 * n_out], n_out);
                let mut bar_alpha = 0.0;
                tanh_jets_rev(
                    self.alphas[l],
                    &pre,
                    post_v,
                    &bar_post,
                    &mut bar_pre,
                    &mut bar_alpha,
                );
                grad[layout.alpha_offset + l] += bar_alpha;
            }
            // Affine: pre-jet adjoints sit in scratch.b; input adjoints (if
            // any) go back into scratch.a.
            let inp = if l == 0 {
                JetView::from_flat(&input, 2)
            } else {
                JetView::from_flat(
                    &rec.data[shape.post_offset(l - 1)..shape.pre_offset(l)],
                    n_in,
                )
            };
            scratch.a[..5 * n_in].fill(0.0);
            let mut bar_in = JetViewMut::from_flat(&mut scratch.a[..5 * n_in], n_in);
            let bar = JetView::from_flat(&scratch.b[..5 * n_out], n_out);
            let (gw, gb) = layout.grad_blocks(grad, l, n_in, n_out);
            affine_jets_rev(
                self.weights[l].as_slice(),
                n_in,
                n_out,
                &inp,
                &bar,
                &mut bar_in,
                gw,
                gb,
                l > 0,
            );
        }
    }
}

fn validate_layer_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::contract("need at least input and output layers"));
    }
    if layer_sizes[0] != 2 || *layer_sizes.last().unwrap() != 2 {
        return Err(Error::contract(
            "layer sizes must start with 2 inputs and end with 2 outputs",
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::contract("layer sizes must be positive"));
    }
    Ok(())
}

/// Offsets of each layer's blocks inside a flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct ParamLayout {
    w_off: Vec<usize>,
    b_off: Vec<usize>,
    pub(crate) alpha_offset: usize,
    pub(crate) len: usize,
}

impl ParamLayout {
    pub(crate) fn new(layer_sizes: &[usize]) -> Self {
        let mut w_off = Vec::new();
        let mut b_off = Vec::new();
        let mut off = 0;
        for w in layer_sizes.windows(2) {
            w_off.push(off);
            off += w[0] * w[1];
            b_off.push(off);
            off += w[1];
        }
        let alpha_offset = off;
        let len = off + layer_sizes.len() - 2;
        Self {
            w_off,
            b_off,
            alpha_offset,
            len,
        }
    }

    pub(crate) fn weight_offset(&self, layer: usize) -> usize {
        self.w_off[layer]
    }

    pub(crate) fn bias_offset(&self, layer: usize) -> usize {
        self.b_off[layer]
    }

    /// Disjoint weight and bias gradient blocks for one layer.
    fn grad_blocks<'g>(
        &self,
        grad: &'g mut [f64],
        layer: usize,
        n_in: usize,
        n_out: usize,
    ) -> (&'g mut [f64], &'g mut [f64]) {
        let wo = self.w_off[layer];
        let (_, rest) = grad.split_at_mut(wo);
        let (gw, rest) = rest.split_at_mut(n_in * n_out);
        let (gb, _) = rest.split_at_mut(n_out);
        (gw, gb)
    }
}

/// Arena layout of the per-point jet record: one pre- and one
/// post-activation block of `5 * N_l` values per hidden layer, then the ten
/// output values.
#[derive(Debug, Clone)]
pub(crate) struct JetShape {
    offsets: Vec<usize>, // pre_0, post_0, pre_1, post_1, .., out
    pub(crate) arena_len: usize,
}

impl JetShape {
    pub(crate) fn new(layer_sizes: &[usize]) -> Self {
        let m = layer_sizes.len() - 2;
        let mut offsets = Vec::with_capacity(2 * m + 1);
        let mut off = 0;
        for &n in &layer_sizes[1..=m] {
            offsets.push(off);
            off += 5 * n;
            offsets.push(off);
            off += 5 * n;
        }
        offsets.push(off);
        off += 10;
        Self {
            offsets,
            arena_len: off,
        }
    }

    fn pre_offset(&self, layer: usize) -> usize {
        self.offsets[2 * layer]
    }

    fn post_offset(&self, layer: usize) -> usize {
        self.offsets[2 * layer + 1]
    }
}

/// Recorded jet propagation for one collocation point.
#[derive(Debug, Clone)]
pub(crate) struct PointRecord {
    pub(crate) x: f64,
    pub(crate) z: f64,
    data: Vec<f64>,
}

impl PointRecord {
    pub(crate) fn new(shape: &JetShape) -> Self {
        Self {
            x: 0.0,
            z: 0.0,
            data: vec![0.0; shape.arena_len],
        }
    }
}

/// Reusable adjoint buffers for the reverse sweep.
pub(crate) struct JetScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl JetScratch {
    pub(crate) fn new(layer_sizes: &[usize]) -> Self {
        let max = 5 * layer_sizes.iter().copied().max().unwrap_or(2);
        Self {
            a: vec![0.0; max],
            b: vec![0.0; max],
        }
    }
}

struct JetView<'a> {
    v: &'a [f64],
    dx: &'a [f64],
    dz: &'a [f64],
    dxx: &'a [f64],
    dzz: &'a [f64],
}

impl<'a> JetView<'a> {
    fn from_flat(data: &'a [f64], n: usize) -> Self {
        let (v, r) = data.split_at(n);
        let (dx, r) = r.split_at(n);
        let (dz, r) = r.split_at(n);
        let (dxx, r) = r.split_at(n);
        let (dzz, _) = r.split_at(n);
        Self {
            v,
            dx,
            dz,
            dxx,
            dzz,
        }
    }
}

struct JetViewMut<'a> {
    v: &'a mut [f64],
    dx: &'a mut [f64],
    dz: &'a mut [f64],
    dxx: &'a mut [f64],
    dzz: &'a mut [f64],
}

impl<'a> JetViewMut<'a> {
    fn from_flat(data: &'a mut [f64], n: usize) -> Self {
        let (v, r) = data.split_at_mut(n);
        let (dx, r) = r.split_at_mut(n);
        let (dz, r) = r.split_at_mut(n);
        let (dxx, r) = r.split_at_mut(n);
        let (dzz, _) = r.split_at_mut(n);
        Self {
            v,
            dx,
            dz,
            dxx,
            dzz,
        }
    }
}

/// Affine layer applied to all five jet components; the bias enters the
/// value component only, derivatives of a constant being zero.
fn affine_jets(
    w: &[f64],
    b: &[f64],
    n_in: usize,
    n_out: usize,
    inp: &JetView,
    out: &mut JetViewMut,
) {
    let (iv, ix, iz, ixx, izz) = (
        &inp.v[..n_in],
        &inp.dx[..n_in],
        &inp.dz[..n_in],
        &inp.dxx[..n_in],
        &inp.dzz[..n_in],
    );
    for r in 0..n_out {
        let row = &w[r * n_in..(r + 1) * n_in];
        let mut av = b[r];
        let mut ax = 0.0;
        let mut az = 0.0;
        let mut axx = 0.0;
        let mut azz = 0.0;
        for c in 0..n_in {
            let wij = row[c];
            av += wij * iv[c];
            ax += wij * ix[c];
            az += wij * iz[c];
            axx += wij * ixx[c];
            azz += wij * izz[c];
        }
        out.v[r] = av;
        out.dx[r] = ax;
        out.dz[r] = az;
        out.dxx[r] = axx;
        out.dzz[r] = azz;
    }
}

/// Adaptive tanh applied to a jet: with `u = tanh(a t)` and `w = 1 - u^2`,
/// first derivatives scale by `w a` and second derivatives pick up the
/// curvature term `-2 u w (a t')^2`.
fn tanh_jets(a: f64, pre: &JetView, post: &mut JetViewMut) {
    for j in 0..pre.v.len() {
        let u = (a * pre.v[j]).tanh();
        let w = 1.0 - u * u;
        let hx = a * pre.dx[j];
        let hz = a * pre.dz[j];
        let p = -2.0 * u * w;
        post.v[j] = u;
        post.dx[j] = w * hx;
        post.dz[j] = w * hz;
        post.dxx[j] = w * (a * pre.dxx[j]) + p * hx * hx;
        post.dzz[j] = w * (a * pre.dzz[j]) + p * hz * hz;
    }
}

/// Adjoint of `tanh_jets`: mechanical mirror of its straight-line form,
/// processed in reverse assignment order.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn tanh_jets_rev(
    a: f64,
    pre: &JetView,
    post_v: &[f64],
    bar_post: &JetView,
    bar_pre: &mut JetViewMut,
    bar_alpha: &mut f64,
) {
    let mut ba = 0.0;
    for j in 0..pre.v.len() {
        let (tv, tx, tz, txx, tzz) = (pre.v[j], pre.dx[j], pre.dz[j], pre.dxx[j], pre.dzz[j]);
        let u = post_v[j];
        let w = 1.0 - u * u;
        let hx = a * tx;
        let hz = a * tz;
        let hxx = a * txx;
        let hzz = a * tzz;
        let p = -2.0 * u * w;
        let (bv, bx, bz, bxx, bzz) = (
            bar_post.v[j],
            bar_post.dx[j],
            bar_post.dz[j],
            bar_post.dxx[j],
            bar_post.dzz[j],
        );

        // szz = w*hzz + p*hz*hz
        let mut bw = bzz * hzz;
        let bhzz = bzz * w;
        let mut bp = bzz * hz * hz;
        let mut bhz = bzz * p * 2.0 * hz;
        // sxx = w*hxx + p*hx*hx
        bw += bxx * hxx;
        let bhxx = bxx * w;
        bp += bxx * hx * hx;
        let mut bhx = bxx * p * 2.0 * hx;
        // sz = w*hz
        bw += bz * hz;
        bhz += bz * w;
        // sx = w*hx
        bw += bx * hx;
        bhx += bx * w;
        // sv = u
        let mut bu = bv;
        // p = -2*u*w
        bu += bp * (-2.0) * w;
        bw += bp * (-2.0) * u;
        // h* = a*t*
        ba += bhzz * tzz + bhxx * txx + bhz * tz + bhx * tx;
        bar_pre.dzz[j] = bhzz * a;
        bar_pre.dxx[j] = bhxx * a;
        bar_pre.dz[j] = bhz * a;
        bar_pre.dx[j] = bhx * a;
        // w = 1 - u*u
        bu += bw * (-2.0 * u);
        // u = tanh(g), g = a*tv
        let bg = bu * w;
        ba += bg * tv;
        bar_pre.v[j] = bg * a;
    }
    *bar_alpha += ba;
}

/// Adjoint of `affine_jets`. Accumulates weight and bias gradients and,
/// when `want_input` is set, the input-jet adjoints (zeroed by the caller).
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn affine_jets_rev(
    w: &[f64],
    n_in: usize,
    n_out: usize,
    inp: &JetView,
    bar_out: &JetView,
    bar_in: &mut JetViewMut,
    gw: &mut [f64],
    gb: &mut [f64],
    want_input: bool,
) {
    let (iv, ix, iz, ixx, izz) = (
        &inp.v[..n_in],
        &inp.dx[..n_in],
        &inp.dz[..n_in],
        &inp.dxx[..n_in],
        &inp.dzz[..n_in],
    );
    for r in 0..n_out {
        let (bv, bx, bz, bxx, bzz) = (
            bar_out.v[r],
            bar_out.dx[r],
            bar_out.dz[r],
            bar_out.dxx[r],
            bar_out.dzz[r],
        );
        gb[r] += bv;
        let row = &w[r * n_in..(r + 1) * n_in];
        let grow = &mut gw[r * n_in..(r + 1) * n_in];
        for c in 0..n_in {
            grow[c] += bv * iv[c] + bx * ix[c] + bz * iz[c] + bxx * ixx[c] + bzz * izz[c];
        }
        if want_input {
            for c in 0..n_in {
                let wij = row[c];
                bar_in.v[c] += wij * bv;
                bar_in.dx[c] += wij * bx;
                bar_in.dz[c] += wij * bz;
                bar_in.dxx[c] += wij * bxx;
                bar_in.dzz[c] += wij * bzz;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params(seed: u64, layer_sizes: &[usize]) -> NetworkParams {
        let mut rng = SeededRng::new(seed);
        NetworkParams::init(&mut rng, layer_sizes, 2.0).unwrap()
    }

    #[test]
    fn init_default_config_shapes() {
        let mut sizes = vec![2];
        sizes.extend(std::iter::repeat_n(45, 10));
        sizes.push(2);
        let p = small_params(11, &sizes);
        assert_eq!(p.hidden_layers(), 10);
        assert_eq!(p.alphas().len(), 10);
        assert!(p.alphas().iter().all(|&a| a == 2.0));
        assert_eq!(p.weights()[0].rows(), 45);
        assert_eq!(p.weights()[0].cols(), 2);
        assert_eq!(p.weights()[10].rows(), 2);
        assert_eq!(p.weights()[10].cols(), 45);
        assert!(p
            .biases()
            .iter()
            .all(|b| b.as_slice().iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn init_is_deterministic() {
        let a = small_params(11, &[2, 8, 8, 2]);
        let b = small_params(11, &[2, 8, 8, 2]);
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_malformed_layer_sizes() {
        let mut rng = SeededRng::new(1);
        assert!(NetworkParams::init(&mut rng, &[3, 8, 2], 2.0).is_err());
        assert!(NetworkParams::init(&mut rng, &[2, 8, 1], 2.0).is_err());
        assert!(NetworkParams::init(&mut rng, &[2], 2.0).is_err());
    }

    #[test]
    fn flatten_unflatten_roundtrip() {
        let p = small_params(3, &[2, 5, 7, 2]);
        let flat = p.flatten();
        assert_eq!(flat.len(), p.n_params());
        let q = NetworkParams::unflatten(p.layer_sizes(), &flat).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let sizes = [2usize, 4, 2];
        let weights = vec![Matrix::zeros(4, 2), Matrix::zeros(2, 4)];
        let biases = vec![Vector::zeros(4), Vector::zeros(2)];
        let p = NetworkParams::from_parts(sizes.to_vec(), weights, biases, vec![2.0]).unwrap();
        assert_eq!(p.forward(0.3, -0.7).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn forward_matches_hand_computed_tanh_chain() {
        // One hidden neuron: u = tanh(a*(w1*x + w2*z + b)), outputs affine.
        let w1 = Matrix::from_vec(1, 2, vec![0.3, -0.5]).unwrap();
        let b1 = Vector::from_vec(vec![0.1]).unwrap();
        let w2 = Matrix::from_vec(2, 1, vec![1.5, -2.0]).unwrap();
        let b2 = Vector::from_vec(vec![0.2, 0.4]).unwrap();
        let p = NetworkParams::from_parts(vec![2, 1, 2], vec![w1, w2], vec![b1, b2], vec![2.0])
            .unwrap();
        let (x, z) = (0.7_f64, -0.2_f64);
        let u = (2.0 * (0.3 * x - 0.5 * z + 0.1)).tanh();
        let (re, im) = p.forward(x, z).unwrap();
        assert!((re - (1.5 * u + 0.2)).abs() < 1e-12);
        assert!((im - (-2.0 * u + 0.4)).abs() < 1e-12);
    }

    #[test]
    fn forward_agrees_with_jet_value() {
        let p = small_params(17, &[2, 10, 10, 2]);
        for &(x, z) in &[(0.1, 0.2), (-1.3, 0.8), (1.9, 0.05), (-0.4, 0.96)] {
            let (re, im) = p.forward(x, z).unwrap();
            let jet = p.jet_forward(x, z).unwrap();
            assert!((re - jet.re.v).abs() < 1e-12);
            assert!((im - jet.im.v).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_network_has_zero_second_derivatives() {
        // Zero hidden weights kill every nonlinear path, so the composition
        // is constant and all derivatives vanish.
        let sizes = [2usize, 3, 2];
        let weights = vec![
            Matrix::zeros(3, 2),
            Matrix::from_vec(2, 3, vec![0.5, -0.25, 1.0, 2.0, 0.0, -1.0]).unwrap(),
        ];
        let biases = vec![
            Vector::from_vec(vec![0.3, -0.1, 0.9]).unwrap(),
            Vector::zeros(2),
        ];
        let p = NetworkParams::from_parts(sizes.to_vec(), weights, biases, vec![2.0]).unwrap();
        let jet = p.jet_forward(0.4, 0.6).unwrap();
        assert_eq!(jet.re.dxx, 0.0);
        assert_eq!(jet.re.dzz, 0.0);
        assert_eq!(jet.im.dxx, 0.0);
        assert_eq!(jet.im.dzz, 0.0);
        assert_eq!(jet.re.dx, 0.0);
        assert_eq!(jet.im.dz, 0.0);
    }

    /// Central finite differences of the plain forward pass, the
    /// implementation-independent oracle for the jet derivatives.
    fn fd_jet(p: &NetworkParams, x: f64, z: f64, h: f64) -> ComplexJet {
        let f = |x: f64, z: f64| p.forward(x, z).unwrap();
        let (c_re, c_im) = f(x, z);
        let (xp, xm) = (f(x + h, z), f(x - h, z));
        let (zp, zm) = (f(x, z + h), f(x, z - h));
        let d = |p: (f64, f64), m: (f64, f64)| ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h));
        let dd = |p: (f64, f64), m: (f64, f64), c: (f64, f64)| {
            (
                (p.0 - 2.0 * c.0 + m.0) / (h * h),
                (p.1 - 2.0 * c.1 + m.1) / (h * h),
            )
        };
        let (dx, dz) = (d(xp, xm), d(zp, zm));
        let (dxx, dzz) = (dd(xp, xm, (c_re, c_im)), dd(zp, zm, (c_re, c_im)));
        ComplexJet {
            re: GenJet {
                v: c_re,
                dx: dx.0,
                dz: dz.0,
                dxx: dxx.0,
                dzz: dzz.0,
            },
            im: GenJet {
                v: c_im,
                dx: dx.1,
                dz: dz.1,
                dxx: dxx.1,
                dzz: dzz.1,
            },
        }
    }

    fn assert_close_rel(a: f64, b: f64, tol: f64, what: &str) {
        let denom = a.abs().max(b.abs()).max(1e-3);
        assert!(
            (a - b).abs() / denom < tol,
            "{what}: {a} vs {b} (rel {})",
            (a - b).abs() / denom
        );
    }

    #[test]
    fn jet_matches_finite_differences() {
        // Scaled-down weights keep activations well inside (-3, 3) so the
        // finite-difference truncation error stays benign.
        let mut rng = SeededRng::new(23);
        for trial in 0..100 {
            let p = {
                let base = NetworkParams::init(&mut rng, &[2, 6, 6, 2], 1.3).unwrap();
                let flat: Vec<f64> = base.flatten().iter().map(|w| 0.6 * w).collect();
                NetworkParams::unflatten(base.layer_sizes(), &flat).unwrap()
            };
            let x = rng.uniform(-2.0, 2.0);
            let z = rng.uniform(0.0, 1.0);
            let jet = p.jet_forward(x, z).unwrap();
            let fd = fd_jet(&p, x, z, 1e-4);
            for (a, b, what) in [
                (jet.re.dx, fd.re.dx, "re.dx"),
                (jet.re.dz, fd.re.dz, "re.dz"),
                (jet.re.dxx, fd.re.dxx, "re.dxx"),
                (jet.re.dzz, fd.re.dzz, "re.dzz"),
                (jet.im.dx, fd.im.dx, "im.dx"),
                (jet.im.dz, fd.im.dz, "im.dz"),
                (jet.im.dxx, fd.im.dxx, "im.dxx"),
                (jet.im.dzz, fd.im.dzz, "im.dzz"),
            ] {
                assert_close_rel(a, b, 1e-5, &format!("trial {trial} {what}"));
            }
        }
    }

    #[test]
    fn swapping_first_layer_columns_swaps_dx_and_dz() {
        let p = small_params(31, &[2, 9, 9, 2]);
        // Swap the two columns of the first weight matrix; the new network
        // evaluates the old one at (z, x).
        let mut w0 = p.weights()[0].clone();
        for r in 0..w0.rows() {
            let (a, b) = (w0.get(r, 0), w0.get(r, 1));
            w0.set(r, 0, b);
            w0.set(r, 1, a);
        }
        let mut weights = p.weights().to_vec();
        weights[0] = w0;
        let q = NetworkParams::from_parts(
            p.layer_sizes().to_vec(),
            weights,
            p.biases().to_vec(),
            p.alphas().to_vec(),
        )
        .unwrap();
        let (x, z) = (0.37, 0.81);
        let jp = p.jet_forward(z, x).unwrap();
        let jq = q.jet_forward(x, z).unwrap();
        assert!((jq.re.dx - jp.re.dz).abs() < 1e-12);
        assert!((jq.re.dz - jp.re.dx).abs() < 1e-12);
        assert!((jq.re.dxx - jp.re.dzz).abs() < 1e-12);
        assert!((jq.re.dzz - jp.re.dxx).abs() < 1e-12);
        assert!((jq.im.dx - jp.im.dz).abs() < 1e-12);
        assert!((jq.im.v - jp.im.v).abs() < 1e-12);
    }

    #[test]
    fn slope_weight_rescaling_identity() {
        // With zero biases, doubling alpha_i and halving W_i leaves the
        // pre-activation product unchanged.
        let base = small_params(41, &[2, 7, 7, 2]);
        let weights: Vec<Matrix> = base.weights().to_vec();
        let zero_biases: Vec<Vector> = base
            .biases()
            .iter()
            .map(|b| Vector::zeros(b.len()))
            .collect();
        let p = NetworkParams::from_parts(
            base.layer_sizes().to_vec(),
            weights.clone(),
            zero_biases.clone(),
            base.alphas().to_vec(),
        )
        .unwrap();

        let layer = 1usize;
        let mut w2 = weights.clone();
        let halved: Vec<f64> = w2[layer].as_slice().iter().map(|x| 0.5 * x).collect();
        w2[layer] = Matrix::from_vec(w2[layer].rows(), w2[layer].cols(), halved).unwrap();
        let mut alphas = base.alphas().to_vec();
        alphas[layer] *= 2.0;
        let q = NetworkParams::from_parts(base.layer_sizes().to_vec(), w2, zero_biases, alphas)
            .unwrap();

        for &(x, z) in &[(0.2, 0.9), (-1.7, 0.1), (1.1, 0.5)] {
            let (pr, pi) = p.forward(x, z).unwrap();
            let (qr, qi) = q.forward(x, z).unwrap();
            assert!((pr - qr).abs() < 1e-12);
            assert!((pi - qi).abs() < 1e-12);
        }
    }

    #[test]
    fn jet_forward_reports_non_finite() {
        let sizes = [2usize, 2, 2];
        let weights = vec![
            Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
            Matrix::from_vec(2, 2, vec![f64::MAX, f64::MAX, 0.0, 0.0]).unwrap(),
        ];
        let biases = vec![
            Vector::zeros(2),
            Vector::from_vec(vec![f64::MAX, 0.0]).unwrap(),
        ];
        let p = NetworkParams::from_parts(sizes.to_vec(), weights, biases, vec![1.0]).unwrap();
        assert!(matches!(p.jet_forward(1.0, 1.0), Err(Error::Numeric(_))));
    }
}

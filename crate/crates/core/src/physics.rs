//! Waveguide-junction geometry, incoming wave, taper function, truncated
//! Dirichlet-to-Neumann operator, and the residual operators of both
//! problem formulations.
//!
//! The junction is the rectangle `(-b, b) x (0, 1)`. Mode `n` has transverse
//! shape `phi_n(z) = sqrt(2) sin(n pi z)` and longitudinal frequency
//! `lambda_n = sqrt(k^2 - n^2 pi^2)` when propagating, `i sqrt(n^2 pi^2 - k^2)`
//! when evanescent. Residuals are assembled generically over [`Field`], so
//! the same code path serves plain evaluation and taped differentiation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::Field;
use crate::error::{Error, Result};
use crate::network::{ComplexJet, GenComplexJet, GenJet};

/// Complex value over any scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx<F> {
    pub re: F,
    pub im: F,
}

pub type C64 = Cplx<f64>;

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl<F: Field> Cplx<F> {
    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            re: self.re.scale(c),
            im: self.im.scale(c),
        }
    }

    /// Adds the complex constant `c`.
    pub fn shift(&self, c: C64) -> Self {
        Self {
            re: self.re.shift(c.re),
            im: self.im.shift(c.im),
        }
    }

    /// Multiplies by the complex constant `c`.
    pub fn mul_const(&self, c: C64) -> Self {
        Self {
            re: self.re.scale(c.re).sub(&self.im.scale(c.im)),
            im: self.re.scale(c.im).add(&self.im.scale(c.re)),
        }
    }

    /// Squared magnitude `re^2 + im^2`.
    pub fn sq_norm(&self) -> F {
        self.re.sqr().add(&self.im.sqr())
    }
}

/// Which boundary value problem the loss enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Solve for the total wave directly.
    Classical,
    /// Split off a tapered copy of the incoming wave and solve for the
    /// remaining scattered wave; the splitting moves the excitation into an
    /// inhomogeneous right-hand side.
    Taper,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formulation::Classical => write!(f, "classical"),
            Formulation::Taper => write!(f, "taper"),
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Formulation::Classical),
            "taper" => Ok(Formulation::Taper),
            other => Err(Error::Config(format!("unknown formulation '{other}'"))),
        }
    }
}

/// Problem description: wave number, junction half-length, formulation, and
/// the truncation count of the DtN series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    k: f64,
    b: f64,
    formulation: Formulation,
    n_modes: usize,
}

impl ProblemSpec {
    /// Validates the wave number against the DtN proviso `k != n pi` (a
    /// resonant `k` makes some longitudinal frequency vanish) and requires
    /// the first mode to propagate so the incoming wave is defined.
    pub fn new(k: f64, b: f64, formulation: Formulation, n_modes: usize) -> Result<Self> {
        if k <= 0.0 || !k.is_finite() {
            return Err(Error::contract("wave number k must be positive"));
        }
        if b <= 0.0 || !b.is_finite() {
            return Err(Error::contract("half-length b must be positive"));
        }
        if n_modes == 0 {
            return Err(Error::contract("DtN truncation needs at least one mode"));
        }
        let nearest = (k / PI).round();
        if nearest >= 1.0 && (k - nearest * PI).abs() < 1e-9 * k.max(1.0) {
            return Err(Error::contract(format!(
                "k = {k} is resonant: k^2 = ({nearest} pi)^2 breaks the DtN definition"
            )));
        }
        if k <= PI {
            return Err(Error::contract(format!(
                "k = {k} <= pi: mode 1 is evanescent, no incoming wave propagates"
            )));
        }
        Ok(Self {
            k,
            b,
            formulation,
            n_modes,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn with_formulation(mut self, f: Formulation) -> Self {
        self.formulation = f;
        self
    }

    /// Longitudinal frequency of the propagating first mode.
    pub fn lambda1(&self) -> f64 {
        (self.k * self.k - PI * PI).sqrt()
    }

    /// Taper value and its first two derivatives at `x in [-b, b]`.
    ///
    /// The taper is the quintic `-6 x^5/b^5 - 15 x^4/b^4 - 10 x^3/b^3` for
    /// `x < 0` and zero from the midpoint on; it reaches 1 at the inflow
    /// interface with vanishing first and second derivatives at both ends,
    /// so it is C^2 across `x = 0`.
    pub fn taper(&self, x: f64) -> (f64, f64, f64) {
        debug_assert!((-self.b..=self.b).contains(&x), "taper argument {x}");
        if x >= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let b = self.b;
        let (b3, b4, b5) = (b * b * b, b * b * b * b, b * b * b * b * b);
        let (x2, x3, x4, x5) = (x * x, x * x * x, x * x * x * x, x * x * x * x * x);
        let chi = -6.0 * x5 / b5 - 15.0 * x4 / b4 - 10.0 * x3 / b3;
        let dchi = -30.0 * x4 / b5 - 60.0 * x3 / b4 - 30.0 * x2 / b3;
        let ddchi = -120.0 * x3 / b5 - 180.0 * x2 / b4 - 60.0 * x / b3;
        (chi, dchi, ddchi)
    }
}

/// First-mode incoming wave `u_inc = (1/sqrt(2)) e^{i (x+b) lambda_1} phi_1(z)`
/// with all derivatives analytic.
pub fn incoming_wave(spec: &ProblemSpec, x: f64, z: f64) -> ComplexJet {
    let l1 = spec.lambda1();
    let theta = (x + spec.b) * l1;
    let (sin_t, cos_t) = theta.sin_cos();
    // (1/sqrt(2)) phi_1(z) = sin(pi z)
    let s = (PI * z).sin();
    let c = PI * (PI * z).cos();
    let re = cos_t;
    let im = sin_t;
    ComplexJet {
        re: GenJet {
            v: re * s,
            dx: -l1 * im * s,
            dz: re * c,
            dxx: -l1 * l1 * re * s,
            dzz: -PI * PI * re * s,
        },
        im: GenJet {
            v: im * s,
            dx: l1 * re * s,
            dz: im * c,
            dxx: -l1 * l1 * im * s,
            dzz: -PI * PI * im * s,
        },
    }
}

/// Exact solution for the rectangular junction: transmission is total, so
/// the reference field is the incoming wave itself.
pub fn reference_solution(spec: &ProblemSpec, x: f64, z: f64) -> C64 {
    let u = incoming_wave(spec, x, z);
    C64::new(u.re.v, u.im.v)
}

/// Exact scattered wave `(1 - chi) u_inc` for the rectangular junction,
/// with derivatives by the product rule. This is the analytic witness that
/// the two formulations describe the same field.
pub fn scattered_reference_jet(spec: &ProblemSpec, x: f64, z: f64) -> ComplexJet {
    let (chi, dchi, ddchi) = spec.taper(x);
    scattered_jet_from_taper(spec, x, z, chi, dchi, ddchi)
}

/// Scattered wave built from explicitly supplied taper values, so checks
/// can inject a perturbed taper and confirm they notice.
pub fn scattered_jet_from_taper(
    spec: &ProblemSpec,
    x: f64,
    z: f64,
    chi: f64,
    dchi: f64,
    ddchi: f64,
) -> ComplexJet {
    let u = incoming_wave(spec, x, z);
    let g = 1.0 - chi;
    let part = |u: &GenJet<f64>| GenJet {
        v: g * u.v,
        dx: g * u.dx - dchi * u.v,
        dz: g * u.dz,
        dxx: g * u.dxx - 2.0 * dchi * u.dx - ddchi * u.v,
        dzz: g * u.dzz,
    };
    ComplexJet {
        re: part(&u.re),
        im: part(&u.im),
    }
}

/// Right-hand side of the scattered-wave Helmholtz equation:
/// `f = -2 d_x(u_inc) chi' - u_inc chi''`.
pub fn taper_rhs(spec: &ProblemSpec, x: f64, z: f64) -> C64 {
    let u = incoming_wave(spec, x, z);
    let (_, dchi, ddchi) = spec.taper(x);
    C64::new(
        -2.0 * u.re.dx * dchi - u.re.v * ddchi,
        -2.0 * u.im.dx * dchi - u.im.v * ddchi,
    )
}

/// Interior Helmholtz residual `Delta u + k^2 u (- f)` at one point.
pub fn pde_residual<F: Field>(
    spec: &ProblemSpec,
    jet: &GenComplexJet<F>,
    x: f64,
    z: f64,
) -> Cplx<F> {
    let k2 = spec.k * spec.k;
    let r = Cplx {
        re: jet.re.dxx.add(&jet.re.dzz).add(&jet.re.v.scale(k2)),
        im: jet.im.dxx.add(&jet.im.dzz).add(&jet.im.v.scale(k2)),
    };
    match spec.formulation {
        Formulation::Classical => r,
        Formulation::Taper => {
            let f = taper_rhs(spec, x, z);
            r.shift(C64::new(-f.re, -f.im))
        }
    }
}

/// Identifies one edge of the junction boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryId {
    /// Lower wall `z = 0`.
    WallBottom,
    /// Upper wall `z = 1`.
    WallTop,
    /// Inflow interface `x = -b`.
    InflowLeft,
    /// Outflow interface `x = +b`.
    OutflowRight,
}

impl BoundaryId {
    pub const ALL: [BoundaryId; 4] = [
        BoundaryId::WallBottom,
        BoundaryId::WallTop,
        BoundaryId::InflowLeft,
        BoundaryId::OutflowRight,
    ];

    /// Outward unit normal of this edge.
    pub fn normal(&self) -> (f64, f64) {
        match self {
            BoundaryId::WallBottom => (0.0, -1.0),
            BoundaryId::WallTop => (0.0, 1.0),
            BoundaryId::InflowLeft => (-1.0, 0.0),
            BoundaryId::OutflowRight => (1.0, 0.0),
        }
    }
}

/// A collocation point on a named boundary edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub which: BoundaryId,
    pub x: f64,
    pub z: f64,
    pub normal: (f64, f64),
}

impl BoundarySample {
    pub fn new(which: BoundaryId, x: f64, z: f64) -> Self {
        Self {
            which,
            x,
            z,
            normal: which.normal(),
        }
    }
}

struct Mode {
    /// `i lambda_n`: purely imaginary for propagating modes, real and
    /// negative for evanescent ones.
    iota_lambda: C64,
    /// `phi_n` sampled at the quadrature nodes.
    phi: Vec<f64>,
}

/// Truncated DtN operator data on the transverse interval `(0, 1)`.
///
/// Quadrature nodes are the `n_b` interior points of a uniform grid with
/// `n_b + 1` subintervals; the composite trapezoid rule over the closed grid
/// reduces to `h * sum` because every mode shape vanishes at the walls. On
/// this grid the discrete sine products are exactly orthogonal for modes up
/// to `n_b`.
pub struct DtnContext {
    z_nodes: Vec<f64>,
    weight: f64,
    modes: Vec<Mode>,
}

impl DtnContext {
    pub fn new(spec: &ProblemSpec, n_b: usize) -> Result<Self> {
        if n_b < 2 {
            return Err(Error::contract("need at least two quadrature nodes"));
        }
        if spec.n_modes > n_b {
            return Err(Error::contract(format!(
                "DtN truncation {} exceeds quadrature resolution {}",
                spec.n_modes, n_b
            )));
        }
        let h = 1.0 / (n_b + 1) as f64;
        let z_nodes: Vec<f64> = (1..=n_b).map(|j| j as f64 * h).collect();
        let k2 = spec.k * spec.k;
        let modes = (1..=spec.n_modes)
            .map(|n| {
                let mu2 = (n as f64 * PI).powi(2);
                let iota_lambda = if k2 > mu2 {
                    C64::new(0.0, (k2 - mu2).sqrt())
                } else {
                    C64::new(-(mu2 - k2).sqrt(), 0.0)
                };
                let phi = z_nodes
                    .iter()
                    .map(|&z| 2.0_f64.sqrt() * (n as f64 * PI * z).sin())
                    .collect();
                Mode { iota_lambda, phi }
            })
            .collect();
        Ok(Self {
            z_nodes,
            weight: h,
            modes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.z_nodes.len()
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z_nodes
    }

    /// `i lambda_n` for mode `n` (1-based).
    pub fn iota_lambda(&self, n: usize) -> C64 {
        self.modes[n - 1].iota_lambda
    }

    /// Samples of `phi_n` at the quadrature nodes (1-based mode index).
    pub fn phi(&self, n: usize) -> &[f64] {
        &self.modes[n - 1].phi
    }

    /// Applies the truncated operator to a boundary trace sampled at the
    /// quadrature nodes: `sum_n i lambda_n (phi_n, w) phi_n`.
    pub fn apply<F: Field>(&self, trace: &[Cplx<F>]) -> Result<Vec<Cplx<F>>> {
        if trace.len() != self.z_nodes.len() {
            return Err(Error::contract(format!(
                "trace has {} samples, quadrature has {} nodes",
                trace.len(),
                self.z_nodes.len()
            )));
        }
        let mut out: Option<Vec<Cplx<F>>> = None;
        for mode in &self.modes {
            // (phi_n, w) with trapezoid weights h.
            let mut coeff = trace[0].scale(self.weight * mode.phi[0]);
            for (w, &p) in trace.iter().zip(&mode.phi).skip(1) {
                coeff = coeff.add(&w.scale(self.weight * p));
            }
            let scaled = coeff.mul_const(mode.iota_lambda);
            let contrib: Vec<Cplx<F>> = mode.phi.iter().map(|&p| scaled.scale(p)).collect();
            out = Some(match out {
                None => contrib,
                Some(prev) => prev.iter().zip(&contrib).map(|(a, b)| a.add(b)).collect(),
            });
        }
        Ok(out.expect("at least one mode"))
    }
}

/// Pointwise residuals of the boundary condition on one edge.
///
/// The Neumann trace comes from the jets through the edge's outward normal;
/// DtN terms use the trace of the values at the same nodes.
pub fn boundary_residuals<F: Field>(
    spec: &ProblemSpec,
    ctx: &DtnContext,
    which: BoundaryId,
    samples: &[BoundarySample],
    jets: &[GenComplexJet<F>],
) -> Result<Vec<Cplx<F>>> {
    if samples.len() != jets.len() {
        return Err(Error::contract("sample/jet count mismatch"));
    }
    if samples.iter().any(|s| s.which != which) {
        return Err(Error::contract("sample on the wrong boundary"));
    }
    match which {
        BoundaryId::WallBottom | BoundaryId::WallTop => {
            // Dirichlet: u = 0 classically, u_sct = -u_inc chi after the
            // splitting.
            let res = samples
                .iter()
                .zip(jets)
                .map(|(s, jet)| {
                    let v = Cplx {
                        re: jet.re.v.clone(),
                        im: jet.im.v.clone(),
                    };
                    match spec.formulation {
                        Formulation::Classical => v,
                        Formulation::Taper => {
                            let u = incoming_wave(spec, s.x, s.z);
                            let chi = spec.taper(s.x).0;
                            v.shift(C64::new(chi * u.re.v, chi * u.im.v))
                        }
                    }
                })
                .collect();
            Ok(res)
        }
        BoundaryId::InflowLeft | BoundaryId::OutflowRight => {
            if samples.len() != ctx.n_nodes() {
                return Err(Error::contract(
                    "interface samples must coincide with the DtN quadrature nodes",
                ));
            }
            let sign = which.normal().0;
            let trace: Vec<Cplx<F>> = jets
                .iter()
                .map(|jet| Cplx {
                    re: jet.re.v.clone(),
                    im: jet.im.v.clone(),
                })
                .collect();
            let lambda_u = ctx.apply(&trace)?;
            // Classical inflow carries the excitation 2 Lambda u_inc.
            let excitation =
                if spec.formulation == Formulation::Classical && which == BoundaryId::InflowLeft {
                    Some(incoming_excitation(spec, ctx))
                } else {
                    None
                };
            let res = jets
                .iter()
                .zip(lambda_u)
                .enumerate()
                .map(|(i, (jet, lu))| {
                    let dn = Cplx {
                        re: jet.re.dx.scale(sign),
                        im: jet.im.dx.scale(sign),
                    };
                    let r = dn.sub(&lu);
                    match &excitation {
                        Some(g) => r.shift(g[i]),
                        None => r,
                    }
                })
                .collect();
            Ok(res)
        }
    }
}

/// `2 Lambda u_inc` sampled at the quadrature nodes of the inflow interface.
pub fn incoming_excitation(spec: &ProblemSpec, ctx: &DtnContext) -> Vec<C64> {
    let trace: Vec<C64> = ctx
        .z_nodes
        .iter()
        .map(|&z| {
            let u = incoming_wave(spec, -spec.b, z);
            C64::new(u.re.v, u.im.v)
        })
        .collect();
    ctx.apply(&trace)
        .expect("trace sampled at context nodes")
        .iter()
        .map(|c| c.scale(2.0))
        .collect()
}

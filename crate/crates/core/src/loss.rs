//! Collocation-set construction and the self-adaptive total loss.
//!
//! The loss is the mean of masked squared residuals
//! `L = L_r + sum_j L_bj` with `L_r = (1/N_r) sum_i m(lambda_i) |r_i|^2`
//! and analogous boundary terms. Complex residuals contribute
//! `Re^2 + Im^2` under one shared weight per point; the mask `m(x) = x^2`
//! keeps effective weights nonnegative while the raw weights evolve freely
//! under ascent.

use crate::autodiff::{Field, Tape, Var};
use crate::error::{Error, Result};
use crate::network::{GenComplexJet, NetworkParams};
use crate::physics::{
    boundary_residuals, pde_residual, BoundaryId, BoundarySample, Cplx, DtnContext, ProblemSpec,
    C64,
};
use crate::rng::SeededRng;

/// Interior collocation grid and the four boundary point sets.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub interior: Vec<(f64, f64)>,
    /// Ordered as bottom wall, top wall, inflow, outflow.
    pub boundary: [Vec<BoundarySample>; 4],
}

impl TrainingSet {
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary[0].len()
    }
}

/// Uniform collocation grids.
///
/// Interior points are cell centers of a `grid_x x grid_z` partition, so
/// they stay strictly inside the junction. Wall points include the corner
/// endpoints; interface points exclude them (the walls own the corners, so
/// the Dirichlet condition is never double-counted against the DtN
/// condition) and coincide with the DtN quadrature nodes.
pub fn build_training_set(
    spec: &ProblemSpec,
    grid_x: usize,
    grid_z: usize,
    n_b: usize,
) -> Result<TrainingSet> {
    if grid_x < 2 || grid_z < 2 || n_b < 2 {
        return Err(Error::contract("grid sizes must be at least 2"));
    }
    let b = spec.b();
    let mut interior = Vec::with_capacity(grid_x * grid_z);
    for i in 0..grid_x {
        let x = -b + 2.0 * b * (i as f64 + 0.5) / grid_x as f64;
        for j in 0..grid_z {
            let z = (j as f64 + 0.5) / grid_z as f64;
            interior.push((x, z));
        }
    }
    let wall_xs: Vec<f64> = (0..n_b)
        .map(|i| -b + 2.0 * b * i as f64 / (n_b - 1) as f64)
        .collect();
    let iface_zs: Vec<f64> = (1..=n_b).map(|j| j as f64 / (n_b + 1) as f64).collect();
    let bottom = wall_xs
        .iter()
        .map(|&x| BoundarySample::new(BoundaryId::WallBottom, x, 0.0))
        .collect();
    let top = wall_xs
        .iter()
        .map(|&x| BoundarySample::new(BoundaryId::WallTop, x, 1.0))
        .collect();
    let inflow = iface_zs
        .iter()
        .map(|&z| BoundarySample::new(BoundaryId::InflowLeft, -b, z))
        .collect();
    let outflow = iface_zs
        .iter()
        .map(|&z| BoundarySample::new(BoundaryId::OutflowRight, b, z))
        .collect();
    Ok(TrainingSet {
        interior,
        boundary: [bottom, top, inflow, outflow],
    })
}

/// Trainable per-point weights of the saddle-point loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAdaptiveWeights {
    pub residual: Vec<f64>,
    pub boundary: [Vec<f64>; 4],
}

/// Draws initial weights from the configured uniform ranges: `U(0, 0.5)`
/// for interior residuals, `U(0, 30)` for the wall terms, and `U(0, 10)`
/// for the interface terms.
pub fn init_sa_weights(rng: &mut SeededRng, ts: &TrainingSet) -> Result<SelfAdaptiveWeights> {
    let residual = rng
        .sample_uniform(0.0, 0.5, ts.n_interior())?
        .as_slice()
        .to_vec();
    let mut boundary: [Vec<f64>; 4] = Default::default();
    for (j, out) in boundary.iter_mut().enumerate() {
        let hi = if j < 2 { 30.0 } else { 10.0 };
        *out = rng
            .sample_uniform(0.0, hi, ts.boundary[j].len())?
            .as_slice()
            .to_vec();
    }
    Ok(SelfAdaptiveWeights { residual, boundary })
}

impl SelfAdaptiveWeights {
    pub fn n_total(&self) -> usize {
        self.residual.len() + self.boundary.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat layout: interior weights, then the four boundary groups.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_total());
        flat.extend_from_slice(&self.residual);
        for b in &self.boundary {
            flat.extend_from_slice(b);
        }
        flat
    }

    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_total() {
            return Err(Error::contract("flat weight vector has wrong length"));
        }
        let (r, mut rest) = flat.split_at(self.residual.len());
        self.residual.copy_from_slice(r);
        for b in self.boundary.iter_mut() {
            let (head, tail) = rest.split_at(b.len());
            b.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }
}

/// Self-adaptive mask applied to every raw weight.
pub fn mask(x: f64) -> f64 {
    x * x
}

pub fn mask_deriv(x: f64) -> f64 {
    2.0 * x
}

/// Loss value split into its five constituent terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub total: f64,
    pub residual_term: f64,
    pub boundary_terms: [f64; 4],
}

/// Assembled loss over any scalar field, with the per-point squared
/// residual magnitudes kept for the weight-ascent gradient.
pub struct LossBreakdown<F> {
    pub residual_term: F,
    pub boundary_terms: [F; 4],
    pub total: F,
    /// Unmasked `|r_i|^2` per interior point.
    pub interior_sq: Vec<F>,
    /// Unmasked `|r_i|^2` per boundary point, per edge.
    pub boundary_sq: [Vec<F>; 4],
}

/// Weighted mean `(1/N) sum m(lambda_i) sq_i`, accumulated in index order.
fn masked_mean<F: Field>(sqs: &[F], lambdas: &[f64]) -> F {
    let n = sqs.len() as f64;
    let mut acc = sqs[0].scale(mask(lambdas[0]) / n);
    for (sq, &l) in sqs.iter().zip(lambdas).skip(1) {
        acc = acc.add(&sq.scale(mask(l) / n));
    }
    acc
}

/// Builds the total loss from per-point jets of the surrogate field.
///
/// DtN traces for the interfaces are taken from the jet values before
/// residual formation, so the operator acts on the same discrete trace the
/// Neumann term is compared against.
pub fn assemble_loss<F: Field>(
    spec: &ProblemSpec,
    ctx: &DtnContext,
    ts: &TrainingSet,
    sa: &SelfAdaptiveWeights,
    interior_jets: &[GenComplexJet<F>],
    boundary_jets: &[Vec<GenComplexJet<F>>; 4],
) -> Result<LossBreakdown<F>> {
    if interior_jets.len() != ts.n_interior() || sa.residual.len() != ts.n_interior() {
        return Err(Error::contract("interior shape mismatch"));
    }
    for (j, jets) in boundary_jets.iter().enumerate() {
        if jets.len() != ts.boundary[j].len() || sa.boundary[j].len() != ts.boundary[j].len() {
            return Err(Error::contract("boundary shape mismatch"));
        }
    }

    let interior_sq: Vec<F> = ts
        .interior
        .iter()
        .zip(interior_jets)
        .map(|(&(x, z), jet)| pde_residual(spec, jet, x, z).sq_norm())
        .collect();

    let mut boundary_sq: [Vec<F>; 4] = Default::default();
    for (j, which) in BoundaryId::ALL.iter().enumerate() {
        let res: Vec<Cplx<F>> =
            boundary_residuals(spec, ctx, *which, &ts.boundary[j], &boundary_jets[j])?;
        boundary_sq[j] = res.iter().map(Cplx::sq_norm).collect();
    }

    let residual_term = masked_mean(&interior_sq, &sa.residual);
    let boundary_terms: [F; 4] =
        std::array::from_fn(|j| masked_mean(&boundary_sq[j], &sa.boundary[j]));
    let mut total = residual_term.clone();
    for t in &boundary_terms {
        total = total.add(t);
    }
    Ok(LossBreakdown {
        residual_term,
        boundary_terms,
        total,
        interior_sq,
        boundary_sq,
    })
}

/// Plain (untaped) loss evaluation.
pub fn total_loss(
    params: &NetworkParams,
    sa: &SelfAdaptiveWeights,
    ts: &TrainingSet,
    spec: &ProblemSpec,
    ctx: &DtnContext,
) -> Result<LossReport> {
    let interior_jets = ts
        .interior
        .iter()
        .map(|&(x, z)| params.jet_forward(x, z))
        .collect::<Result<Vec<_>>>()?;
    let mut boundary_jets: [Vec<_>; 4] = Default::default();
    for (j, edge) in ts.boundary.iter().enumerate() {
        boundary_jets[j] = edge
            .iter()
            .map(|s| params.jet_forward(s.x, s.z))
            .collect::<Result<Vec<_>>>()?;
    }
    let bd = assemble_loss(spec, ctx, ts, sa, &interior_jets, &boundary_jets)?;
    Ok(LossReport {
        total: bd.total,
        residual_term: bd.residual_term,
        boundary_terms: bd.boundary_terms,
    })
}

/// Records the full loss on a tape; jets are recorded network primitives,
/// so one reverse sweep differentiates everything with respect to the
/// parameters. The mask weights enter as constants.
pub fn taped_loss(
    tape: &Tape,
    spec: &ProblemSpec,
    ctx: &DtnContext,
    ts: &TrainingSet,
    sa: &SelfAdaptiveWeights,
) -> Result<LossBreakdown<Var>> {
    let interior_jets: Vec<GenComplexJet<Var>> =
        ts.interior.iter().map(|&(x, z)| tape.jet(x, z)).collect();
    let mut boundary_jets: [Vec<GenComplexJet<Var>>; 4] = Default::default();
    for (j, edge) in ts.boundary.iter().enumerate() {
        boundary_jets[j] = edge.iter().map(|s| tape.jet(s.x, s.z)).collect();
    }
    assemble_loss(spec, ctx, ts, sa, &interior_jets, &boundary_jets)
}

/// Analytic gradient of the loss with respect to the raw weights, in the
/// flat layout of [`SelfAdaptiveWeights::flatten`]: each weight multiplies
/// exactly one squared residual through the mask, so
/// `dL/dlambda_i = m'(lambda_i) |r_i|^2 / N`.
pub fn sa_gradient(
    sa: &SelfAdaptiveWeights,
    interior_sq: &[f64],
    boundary_sq: &[Vec<f64>; 4],
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(sa.n_total());
    let nr = sa.residual.len() as f64;
    grad.extend(
        sa.residual
            .iter()
            .zip(interior_sq)
            .map(|(&l, sq)| mask_deriv(l) * sq / nr),
    );
    for (lams, sqs) in sa.boundary.iter().zip(boundary_sq) {
        let nb = lams.len() as f64;
        grad.extend(lams.iter().zip(sqs).map(|(&l, sq)| mask_deriv(l) * sq / nb));
    }
    grad
}

/// Euclidean-norm relative errors of the real and imaginary parts,
/// computed separately.
pub fn relative_error(field: &[C64], reference: &[C64]) -> Result<(f64, f64)> {
    if field.len() != reference.len() {
        return Err(Error::contract("field/reference length mismatch"));
    }
    let norm = |sel: fn(&C64) -> f64, v: &[C64]| -> f64 {
        v.iter().map(|c| sel(c) * sel(c)).sum::<f64>().sqrt()
    };
    let diff_norm = |sel: fn(&C64) -> f64| -> f64 {
        field
            .iter()
            .zip(reference)
            .map(|(f, r)| (sel(f) - sel(r)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (nr, ni) = (norm(|c| c.re, reference), norm(|c| c.im, reference));
    if nr == 0.0 || ni == 0.0 {
        return Err(Error::contract(
            "reference norm vanishes in the real or imaginary part",
        ));
    }
    Ok((diff_norm(|c| c.re) / nr, diff_norm(|c| c.im) / ni))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::fd_check;
    use crate::network::ComplexJet;
    use crate::physics::{scattered_reference_jet, Formulation};

    fn spec(k: f64, formulation: Formulation) -> ProblemSpec {
        ProblemSpec::new(k, 2.0, formulation, 1).unwrap()
    }

    fn tiny_setup(
        k: f64,
        formulation: Formulation,
    ) -> (ProblemSpec, DtnContext, TrainingSet, SelfAdaptiveWeights) {
        let s = spec(k, formulation);
        let ctx = DtnContext::new(&s, 4).unwrap();
        let ts = build_training_set(&s, 4, 4, 4).unwrap();
        let mut rng = SeededRng::new(11);
        let sa = init_sa_weights(&mut rng, &ts).unwrap();
        (s, ctx, ts, sa)
    }

    #[test]
    fn paper_grid_produces_1200_interior_points() {
        let s = spec(8.0, Formulation::Classical);
        let ts = build_training_set(&s, 120, 10, 80).unwrap();
        assert_eq!(ts.n_interior(), 1200);
        assert!(ts
            .interior
            .iter()
            .all(|&(x, z)| -2.0 < x && x < 2.0 && 0.0 < z && z < 1.0));
    }

    #[test]
    fn smallest_grid_is_cell_centers() {
        let s = spec(8.0, Formulation::Classical);
        let ts = build_training_set(&s, 2, 2, 2).unwrap();
        assert_eq!(
            ts.interior,
            vec![(-1.0, 0.25), (-1.0, 0.75), (1.0, 0.25), (1.0, 0.75)]
        );
    }

    #[test]
    fn interfaces_exclude_corners() {
        let s = spec(8.0, Formulation::Classical);
        let ts = build_training_set(&s, 4, 4, 80).unwrap();
        let inflow = &ts.boundary[2];
        assert_eq!(inflow.len(), 80);
        assert!(inflow.iter().all(|p| p.x == -2.0 && 0.0 < p.z && p.z < 1.0));
        // Walls include the corners.
        assert_eq!(ts.boundary[0][0].x, -2.0);
        assert_eq!(ts.boundary[0].last().unwrap().x, 2.0);
    }

    #[test]
    fn sa_weights_respect_ranges_and_seed() {
        let s = spec(8.0, Formulation::Classical);
        let ts = build_training_set(&s, 10, 5, 16).unwrap();
        let a = init_sa_weights(&mut SeededRng::new(11), &ts).unwrap();
        let b = init_sa_weights(&mut SeededRng::new(11), &ts).unwrap();
        assert_eq!(a, b);
        assert!(a.residual.iter().all(|&l| (0.0..0.5).contains(&l)));
        assert!(a.boundary[0].iter().all(|&l| (0.0..30.0).contains(&l)));
        assert!(a.boundary[1].iter().all(|&l| (0.0..30.0).contains(&l)));
        assert!(a.boundary[2].iter().all(|&l| (0.0..10.0).contains(&l)));
        assert!(a.boundary[3].iter().all(|&l| (0.0..10.0).contains(&l)));
    }

    #[test]
    fn sa_flatten_roundtrip() {
        let s = spec(8.0, Formulation::Classical);
        let ts = build_training_set(&s, 3, 3, 5).unwrap();
        let sa = init_sa_weights(&mut SeededRng::new(2), &ts).unwrap();
        let mut other = init_sa_weights(&mut SeededRng::new(3), &ts).unwrap();
        other.assign_flat(&sa.flatten()).unwrap();
        assert_eq!(sa, other);
    }

    #[test]
    fn zero_weights_annihilate_loss() {
        let (s, ctx, ts, mut sa) = tiny_setup(8.0, Formulation::Classical);
        sa.residual.iter_mut().for_each(|l| *l = 0.0);
        sa.boundary
            .iter_mut()
            .for_each(|b| b.iter_mut().for_each(|l| *l = 0.0));
        let mut rng = SeededRng::new(5);
        let params = NetworkParams::init(&mut rng, &[2, 6, 2], 2.0).unwrap();
        let report = total_loss(&params, &sa, &ts, &s, &ctx).unwrap();
        assert_eq!(report.total, 0.0);
    }

    #[test]
    fn doubling_weights_quadruples_terms() {
        let (s, ctx, ts, sa) = tiny_setup(8.0, Formulation::Taper);
        let mut rng = SeededRng::new(5);
        let params = NetworkParams::init(&mut rng, &[2, 6, 2], 2.0).unwrap();
        let base = total_loss(&params, &sa, &ts, &s, &ctx).unwrap();
        let mut doubled = sa.clone();
        doubled.residual.iter_mut().for_each(|l| *l *= 2.0);
        doubled
            .boundary
            .iter_mut()
            .for_each(|b| b.iter_mut().for_each(|l| *l *= 2.0));
        let four = total_loss(&params, &doubled, &ts, &s, &ctx).unwrap();
        assert!((four.residual_term - 4.0 * base.residual_term).abs() < 1e-12 * four.total);
        for j in 0..4 {
            assert!(
                (four.boundary_terms[j] - 4.0 * base.boundary_terms[j]).abs()
                    < 1e-12 * four.total.max(1.0)
            );
        }
    }

    #[test]
    fn report_total_is_sum_of_terms() {
        let (s, ctx, ts, sa) = tiny_setup(13.0, Formulation::Taper);
        let mut rng = SeededRng::new(6);
        let params = NetworkParams::init(&mut rng, &[2, 8, 8, 2], 2.0).unwrap();
        let r = total_loss(&params, &sa, &ts, &s, &ctx).unwrap();
        let sum = r.residual_term + r.boundary_terms.iter().sum::<f64>();
        assert!((r.total - sum).abs() <= 1e-12 * r.total.max(1.0));
        assert!(r.total >= 0.0);
    }

    /// The assembled loss evaluated on the exact scattered wave is zero to
    /// floating-point noise, confirming residual operators and right-hand
    /// sides are mutually consistent.
    #[test]
    fn exact_scattered_wave_has_vanishing_loss() {
        let (s, ctx, ts, sa) = tiny_setup(8.0, Formulation::Taper);
        let interior: Vec<ComplexJet> = ts
            .interior
            .iter()
            .map(|&(x, z)| scattered_reference_jet(&s, x, z))
            .collect();
        let mut boundary: [Vec<ComplexJet>; 4] = Default::default();
        for (j, edge) in ts.boundary.iter().enumerate() {
            boundary[j] = edge
                .iter()
                .map(|p| scattered_reference_jet(&s, p.x, p.z))
                .collect();
        }
        let bd = assemble_loss(&s, &ctx, &ts, &sa, &interior, &boundary).unwrap();
        assert!(bd.total < 1e-16, "loss {}", bd.total);
    }

    #[test]
    fn exact_incoming_wave_has_vanishing_classical_loss() {
        let (s, ctx, ts, sa) = tiny_setup(8.0, Formulation::Classical);
        let interior: Vec<ComplexJet> = ts
            .interior
            .iter()
            .map(|&(x, z)| crate::physics::incoming_wave(&s, x, z))
            .collect();
        let mut boundary: [Vec<ComplexJet>; 4] = Default::default();
        for (j, edge) in ts.boundary.iter().enumerate() {
            boundary[j] = edge
                .iter()
                .map(|p| crate::physics::incoming_wave(&s, p.x, p.z))
                .collect();
        }
        let bd = assemble_loss(&s, &ctx, &ts, &sa, &interior, &boundary).unwrap();
        assert!(bd.total < 1e-16, "loss {}", bd.total);
    }

    #[test]
    fn mask_monotonicity() {
        let (s, ctx, ts, sa) = tiny_setup(8.0, Formulation::Classical);
        let mut rng = SeededRng::new(77);
        let params = NetworkParams::init(&mut rng, &[2, 6, 2], 2.0).unwrap();
        let base = total_loss(&params, &sa, &ts, &s, &ctx).unwrap();
        let mut bumped = sa.clone();
        bumped.residual[3] += 1.0;
        let after = total_loss(&params, &bumped, &ts, &s, &ctx).unwrap();
        assert!(after.residual_term >= base.residual_term);
    }

    #[test]
    fn taped_loss_matches_untaped() {
        for formulation in [Formulation::Classical, Formulation::Taper] {
            let (s, ctx, ts, sa) = tiny_setup(8.0, formulation);
            let mut rng = SeededRng::new(9);
            let params = NetworkParams::init(&mut rng, &[2, 8, 8, 2], 2.0).unwrap();
            let plain = total_loss(&params, &sa, &ts, &s, &ctx).unwrap();
            let tape = Tape::new(&params);
            let bd = taped_loss(&tape, &s, &ctx, &ts, &sa).unwrap();
            assert!((plain.total - bd.total.value()).abs() <= 1e-12 * plain.total.max(1.0));
            let replayed = tape.replay(&bd.total);
            assert!((replayed - bd.total.value()).abs() <= 1e-12 * plain.total.max(1.0));
        }
    }

    /// Full SA-PINN loss gradient against finite differences, both
    /// formulations, on the small reference configuration.
    #[test]
    fn full_loss_gradient_matches_finite_differences() {
        for formulation in [Formulation::Classical, Formulation::Taper] {
            let (s, ctx, ts, sa) = tiny_setup(8.0, formulation);
            assert_eq!(ts.n_interior(), 16);
            assert_eq!(ts.n_boundary(), 4);
            let mut rng = SeededRng::new(11);
            let params = NetworkParams::init(&mut rng, &[2, 8, 8, 2], 2.0).unwrap();
            let loss_fn = |tape: &Tape| taped_loss(tape, &s, &ctx, &ts, &sa).unwrap().total;
            let max_rel = fd_check(&params, loss_fn, 20, 1e-6).unwrap();
            assert!(max_rel < 1e-4, "{formulation}: max rel {max_rel}");
        }
    }

    #[test]
    fn sa_gradient_matches_finite_differences() {
        let (s, ctx, ts, sa) = tiny_setup(8.0, Formulation::Taper);
        let mut rng = SeededRng::new(13);
        let params = NetworkParams::init(&mut rng, &[2, 6, 2], 2.0).unwrap();
        let tape = Tape::new(&params);
        let bd = taped_loss(&tape, &s, &ctx, &ts, &sa).unwrap();
        let interior_sq: Vec<f64> = bd.interior_sq.iter().map(Var::value).collect();
        let boundary_sq: [Vec<f64>; 4] =
            std::array::from_fn(|j| bd.boundary_sq[j].iter().map(Var::value).collect());
        let grad = sa_gradient(&sa, &interior_sq, &boundary_sq);

        let flat = sa.flatten();
        let h = 1e-6;
        let probe = [0usize, 7, 16, 18, 21, 25, 29];
        for &i in &probe {
            let mut plus = sa.clone();
            let mut f = flat.clone();
            f[i] += h;
            plus.assign_flat(&f).unwrap();
            let lp = total_loss(&params, &plus, &ts, &s, &ctx).unwrap().total;
            f[i] -= 2.0 * h;
            plus.assign_flat(&f).unwrap();
            let lm = total_loss(&params, &plus, &ts, &s, &ctx).unwrap().total;
            let fd = (lp - lm) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() <= 1e-6 * grad[i].abs().max(1e-6),
                "lambda {i}: {} vs {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn relative_error_identities() {
        let reference: Vec<C64> = (0..10)
            .map(|i| C64::new(1.0 + i as f64, 2.0 - i as f64))
            .collect();
        let (er, ei) = relative_error(&reference, &reference).unwrap();
        assert_eq!((er, ei), (0.0, 0.0));

        let zero = vec![C64::ZERO; 10];
        let (er, ei) = relative_error(&zero, &reference).unwrap();
        assert!((er - 1.0).abs() < 1e-12 && (ei - 1.0).abs() < 1e-12);

        let scaled: Vec<C64> = reference
            .iter()
            .map(|c| C64::new(1.1 * c.re, 1.1 * c.im))
            .collect();
        let (er, ei) = relative_error(&scaled, &reference).unwrap();
        assert!((er - 0.1).abs() < 1e-12 && (ei - 0.1).abs() < 1e-12);
    }

    #[test]
    fn relative_error_rejects_zero_reference() {
        let reference = vec![C64::new(1.0, 0.0); 4];
        let field = vec![C64::ZERO; 4];
        assert!(relative_error(&field, &reference).is_err());
    }
}

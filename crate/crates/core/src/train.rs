//! Saddle-point training: Adam descent on the network parameters with
//! simultaneous Adam ascent on the self-adaptive weights, under an
//! exponential learning-rate decay.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::loss::{
    build_training_set, init_sa_weights, sa_gradient, taped_loss, total_loss, LossReport,
    SelfAdaptiveWeights, TrainingSet,
};
use crate::network::NetworkParams;
use crate::physics::{
    incoming_wave, reference_solution, DtnContext, Formulation, ProblemSpec, C64,
};
use crate::rng::SeededRng;

/// Bias-corrected first/second moment accumulators for one flat parameter
/// vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    pub fn new(n: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// One standard Adam update of `params` in the descent direction of
    /// `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::contract("adam state shape mismatch"));
        }
        if !grad.iter().all(|g| g.is_finite()) {
            return Err(Error::numeric("gradient is not finite"));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Full description of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub formulation: Formulation,
    pub k: f64,
    pub b: f64,
    pub n_modes: usize,
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub alpha0: f64,
    pub total_steps: u64,
    pub eval_every: u64,
    pub seed: u64,
    pub lr0: f64,
    /// Base learning rate of the weight ascent; `None` ties it to `lr0`.
    pub lr0_lambda: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    /// Decay factor applied per `decay_every` steps.
    pub decay_rate: f64,
    pub decay_every: f64,
    /// Continuous decay exponent by default; set for stepwise decay.
    pub staircase: bool,
    pub grid_x: usize,
    pub grid_z: usize,
    pub n_boundary: usize,
    pub eval_grid_x: usize,
    pub eval_grid_z: usize,
    /// Global-norm gradient clip; disabled by default so numeric failures
    /// abort loudly instead of being masked.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::Taper,
            k: 8.0,
            b: 2.0,
            n_modes: 1,
            hidden_layers: 10,
            neurons_per_layer: 45,
            alpha0: 2.0,
            total_steps: 50_000,
            eval_every: 100,
            seed: 11,
            lr0: 1e-3,
            lr0_lambda: None,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            decay_rate: 0.95,
            decay_every: 1000.0,
            staircase: false,
            grid_x: 120,
            grid_z: 10,
            n_boundary: 80,
            eval_grid_x: 240,
            eval_grid_z: 20,
            grad_clip: None,
        }
    }
}

impl TrainConfig {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers + 2);
        sizes.push(2);
        sizes.extend(std::iter::repeat_n(
            self.neurons_per_layer,
            self.hidden_layers,
        ));
        sizes.push(2);
        sizes
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.k, self.b, self.formulation, self.n_modes)
    }

    /// `lr(t) = lr0 * rate^(t / every)`, with the exponent floored in
    /// staircase mode.
    pub fn learning_rate(&self, step: u64) -> f64 {
        self.lr0 * self.decay_factor(step)
    }

    /// Ascent learning rate for the self-adaptive weights, under the same
    /// decay.
    pub fn learning_rate_lambda(&self, step: u64) -> f64 {
        self.lr0_lambda.unwrap_or(self.lr0) * self.decay_factor(step)
    }

    fn decay_factor(&self, step: u64) -> f64 {
        let exponent = if self.staircase {
            (step as f64 / self.decay_every).floor()
        } else {
            step as f64 / self.decay_every
        };
        self.decay_rate.powf(exponent)
    }
}

/// One logged evaluation: loss terms plus relative errors on the
/// evaluation grid and on the training grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub total: f64,
    pub residual_term: f64,
    pub boundary_terms: [f64; 4],
    pub eps_r: f64,
    pub eps_i: f64,
    pub eps_r_train: f64,
    pub eps_i_train: f64,
}

/// Metric history of one run, recorded every `eval_every` steps and at the
/// final step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

pub struct TrainOutput {
    pub params: NetworkParams,
    pub sa: SelfAdaptiveWeights,
    pub trace: TrainTrace,
    pub final_report: LossReport,
}

/// Why a run stopped early; the trace collected so far stays available.
#[derive(Debug)]
pub enum TrainError {
    /// Invalid configuration; nothing ran.
    Setup(Error),
    /// Non-finite loss or gradient at `step`.
    Numeric {
        step: u64,
        message: String,
        trace: TrainTrace,
    },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Setup(e) => write!(f, "setup failed: {e}"),
            TrainError::Numeric { step, message, .. } => {
                write!(f, "numeric failure at step {step}: {message}")
            }
        }
    }
}

impl std::error::Error for TrainError {}

/// Cell centers of an `nx x nz` partition of the junction.
pub fn grid_points(b: f64, nx: usize, nz: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(nx * nz);
    for i in 0..nx {
        let x = -b + 2.0 * b * (i as f64 + 0.5) / nx as f64;
        for j in 0..nz {
            let z = (j as f64 + 0.5) / nz as f64;
            pts.push((x, z));
        }
    }
    pts
}

/// Reconstructed solution on `grid`: the raw network output for the
/// classical formulation, `u_theta + chi u_inc` for the taper formulation.
pub fn evaluate_field(
    params: &NetworkParams,
    spec: &ProblemSpec,
    grid: &[(f64, f64)],
) -> Result<Vec<C64>> {
    grid.iter()
        .map(|&(x, z)| {
            let (re, im) = params.forward(x, z)?;
            Ok(match spec.formulation() {
                Formulation::Classical => C64::new(re, im),
                Formulation::Taper => {
                    let chi = spec.taper(x).0;
                    let u = incoming_wave(spec, x, z);
                    C64::new(re + chi * u.re.v, im + chi * u.im.v)
                }
            })
        })
        .collect()
}

struct EvalContext {
    eval_pts: Vec<(f64, f64)>,
    eval_ref: Vec<C64>,
    train_pts: Vec<(f64, f64)>,
    train_ref: Vec<C64>,
}

impl EvalContext {
    fn record(
        &self,
        step: u64,
        report: &LossReport,
        params: &NetworkParams,
        spec: &ProblemSpec,
    ) -> Result<TraceRecord> {
        let field = evaluate_field(params, spec, &self.eval_pts)?;
        let (eps_r, eps_i) = crate::loss::relative_error(&field, &self.eval_ref)?;
        let field_t = evaluate_field(params, spec, &self.train_pts)?;
        let (eps_r_train, eps_i_train) = crate::loss::relative_error(&field_t, &self.train_ref)?;
        Ok(TraceRecord {
            step,
            total: report.total,
            residual_term: report.residual_term,
            boundary_terms: report.boundary_terms,
            eps_r,
            eps_i,
            eps_r_train,
            eps_i_train,
        })
    }
}

/// Runs the saddle-point loop and returns the trained parameters, final
/// weights, and metric trace.
pub fn train(cfg: &TrainConfig) -> std::result::Result<TrainOutput, TrainError> {
    train_with_observer(cfg, |_| {})
}

/// Like [`train`], invoking `observer` on every trace record as it is
/// produced so callers can stream the log.
pub fn train_with_observer(
    cfg: &TrainConfig,
    mut observer: impl FnMut(&TraceRecord),
) -> std::result::Result<TrainOutput, TrainError> {
    let spec = cfg.problem_spec().map_err(TrainError::Setup)?;
    let ctx = DtnContext::new(&spec, cfg.n_boundary).map_err(TrainError::Setup)?;
    if cfg.eval_every == 0 {
        return Err(TrainError::Setup(Error::contract(
            "eval_every must be positive",
        )));
    }

    // One generator drives the whole run: network init first, then the
    // self-adaptive weights, in that order.
    let mut rng = SeededRng::new(cfg.seed);
    let layer_sizes = cfg.layer_sizes();
    let mut params =
        NetworkParams::init(&mut rng, &layer_sizes, cfg.alpha0).map_err(TrainError::Setup)?;
    let ts = build_training_set(&spec, cfg.grid_x, cfg.grid_z, cfg.n_boundary)
        .map_err(TrainError::Setup)?;
    let mut sa = init_sa_weights(&mut rng, &ts).map_err(TrainError::Setup)?;

    let eval_pts = grid_points(cfg.b, cfg.eval_grid_x, cfg.eval_grid_z);
    let eval = EvalContext {
        eval_ref: eval_pts
            .iter()
            .map(|&(x, z)| reference_solution(&spec, x, z))
            .collect(),
        eval_pts,
        train_ref: ts
            .interior
            .iter()
            .map(|&(x, z)| reference_solution(&spec, x, z))
            .collect(),
        train_pts: ts.interior.clone(),
    };

    let mut theta = params.flatten();
    let mut lambda = sa.flatten();
    let mut adam_theta = AdamState::new(theta.len(), cfg.beta1, cfg.beta2, cfg.eps_adam);
    let mut adam_lambda = AdamState::new(lambda.len(), cfg.beta1, cfg.beta2, cfg.eps_adam);
    let mut trace = TrainTrace::default();

    let numeric = |step: u64, trace: &TrainTrace, e: &dyn fmt::Display| TrainError::Numeric {
        step,
        message: e.to_string(),
        trace: trace.clone(),
    };

    for step in 0..cfg.total_steps {
        let tape = Tape::new(&params);
        let bd = taped_loss(&tape, &spec, &ctx, &ts, &sa).map_err(|e| numeric(step, &trace, &e))?;
        let (_, grad) = tape
            .backward(&bd.total)
            .map_err(|e| numeric(step, &trace, &e))?;

        if step % cfg.eval_every == 0 {
            let report = LossReport {
                total: bd.total.value(),
                residual_term: bd.residual_term.value(),
                boundary_terms: std::array::from_fn(|j| bd.boundary_terms[j].value()),
            };
            let rec = eval
                .record(step, &report, &params, &spec)
                .map_err(|e| numeric(step, &trace, &e))?;
            observer(&rec);
            trace.records.push(rec);
        }

        let interior_sq: Vec<f64> = bd.interior_sq.iter().map(Var::value).collect();
        let boundary_sq: [Vec<f64>; 4] =
            std::array::from_fn(|j| bd.boundary_sq[j].iter().map(Var::value).collect());
        let ascent_grad = sa_gradient(&sa, &interior_sq, &boundary_sq);

        let lr = cfg.learning_rate(step);
        let mut theta_grad = grad.into_flat();
        if let Some(max_norm) = cfg.grad_clip {
            clip_global_norm(&mut theta_grad, max_norm);
        }
        adam_theta
            .step(&mut theta, &theta_grad, lr)
            .map_err(|e| numeric(step, &trace, &e))?;
        // Ascent: Adam applied to the negated gradient.
        let descent_on_neg: Vec<f64> = ascent_grad.iter().map(|g| -g).collect();
        adam_lambda
            .step(&mut lambda, &descent_on_neg, cfg.learning_rate_lambda(step))
            .map_err(|e| numeric(step, &trace, &e))?;

        params = NetworkParams::unflatten(&layer_sizes, &theta)
            .map_err(|e| numeric(step, &trace, &e))?;
        sa.assign_flat(&lambda)
            .map_err(|e| numeric(step, &trace, &e))?;
    }

    let final_report = total_loss(&params, &sa, &ts, &spec, &ctx)
        .map_err(|e| numeric(cfg.total_steps, &trace, &e))?;
    let rec = eval
        .record(cfg.total_steps, &final_report, &params, &spec)
        .map_err(|e| numeric(cfg.total_steps, &trace, &e))?;
    observer(&rec);
    trace.records.push(rec);

    Ok(TrainOutput {
        params,
        sa,
        trace,
        final_report,
    })
}

/// Training set accessor for callers that need the collocation layout of a
/// config (error metrics, reporting).
pub fn training_set_for(cfg: &TrainConfig) -> Result<TrainingSet> {
    let spec = cfg.problem_spec()?;
    build_training_set(&spec, cfg.grid_x, cfg.grid_z, cfg.n_boundary)
}

fn clip_global_norm(grad: &mut [f64], max_norm: f64) {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
}

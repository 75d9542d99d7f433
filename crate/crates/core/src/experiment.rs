//! Experiment orchestration: config files, single runs, the
//! formulation-by-wave-number matrix, and all file outputs.
//!
//! Every run writes four artifacts into its output directory:
//! `config.resolved.toml` (the fully resolved configuration),
//! `trace.csv` (one row per metric evaluation, written incrementally),
//! `field.csv` (the reconstructed solution on the evaluation grid), and
//! `checkpoint.json` (reloadable parameters). Outputs are reproducible
//! bitwise from the stored config.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::checkpoint::{load_checkpoint, save_checkpoint, ProblemMeta};
use crate::checks::{run_verification, VerifyReport};
use crate::error::{Error, Result};
use crate::physics::{Formulation, C64};
use crate::train::{
    evaluate_field, grid_points, train_with_observer, TraceRecord, TrainConfig, TrainError,
};

/// Environment variable overriding the root that relative output
/// directories are resolved against.
pub const OUT_ROOT_ENV: &str = "WGPINN_OUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Experiment matrix: the cartesian product of formulations and wave
/// numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixConfig {
    pub formulations: Vec<Formulation>,
    pub k_values: Vec<f64>,
    /// Run independent cells on threads; cells share no mutable state.
    pub parallel: bool,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            formulations: vec![Formulation::Classical, Formulation::Taper],
            k_values: vec![8.0, 9.0, 10.0, 13.0, 15.0, 16.0],
            parallel: false,
        }
    }
}

/// A full experiment description as read from a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub output: OutputConfig,
    pub matrix: MatrixConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Output directory with the optional environment root applied.
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ROOT_ENV) {
            Some(root) if self.output.dir.is_relative() => {
                PathBuf::from(root).join(&self.output.dir)
            }
            _ => self.output.dir.clone(),
        }
    }
}

/// Final metrics of one completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub formulation: Formulation,
    pub k: f64,
    pub eps_r: f64,
    pub eps_i: f64,
    pub final_loss: f64,
    pub wall_time_s: f64,
    pub out_dir: PathBuf,
}

/// One row of the aggregated error table; failed cells carry the error
/// message instead of metrics.
#[derive(Debug, Clone)]
pub enum MatrixCell {
    Ok(RunSummary),
    Failed {
        formulation: Formulation,
        k: f64,
        message: String,
    },
}

fn fmt_float(v: f64) -> String {
    // Shortest-roundtrip formatting; '.' decimal separator always.
    format!("{v}")
}

const TRACE_HEADER: &str = "step,loss_total,loss_residual,loss_wall_bottom,loss_wall_top,loss_inflow,loss_outflow,eps_r,eps_i,eps_r_train,eps_i_train";

fn write_trace_row(w: &mut impl Write, r: &TraceRecord) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.step,
        fmt_float(r.total),
        fmt_float(r.residual_term),
        fmt_float(r.boundary_terms[0]),
        fmt_float(r.boundary_terms[1]),
        fmt_float(r.boundary_terms[2]),
        fmt_float(r.boundary_terms[3]),
        fmt_float(r.eps_r),
        fmt_float(r.eps_i),
        fmt_float(r.eps_r_train),
        fmt_float(r.eps_i_train),
    )
}

/// Writes a field as `x,z,re_u,im_u` rows in grid order (x outer, z inner).
pub fn write_field_csv(path: &Path, grid: &[(f64, f64)], field: &[C64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,z,re_u,im_u")?;
    for ((x, z), c) in grid.iter().zip(field) {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_float(*x),
            fmt_float(*z),
            fmt_float(c.re),
            fmt_float(c.im)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Trains one configuration and writes all artifacts into `out_dir`.
///
/// On numeric failure the resolved config and the trace rows written so
/// far are left in place and the error is propagated.
pub fn run_single_at(cfg: &TrainConfig, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let echo = ExperimentConfig {
        train: cfg.clone(),
        output: OutputConfig {
            dir: out_dir.to_path_buf(),
        },
        matrix: MatrixConfig::default(),
    };
    std::fs::write(
        out_dir.join("config.resolved.toml"),
        toml::to_string_pretty(&echo).map_err(|e| Error::Config(e.to_string()))?,
    )?;

    let trace_file = File::create(out_dir.join("trace.csv"))?;
    let mut trace_writer = BufWriter::new(trace_file);
    writeln!(trace_writer, "{TRACE_HEADER}")?;
    trace_writer.flush()?;

    let started = Instant::now();
    let mut io_error: Option<std::io::Error> = None;
    let outcome = train_with_observer(cfg, |rec| {
        // One line per evaluation, flushed so an interrupted run keeps its
        // partial curve.
        if io_error.is_none() {
            if let Err(e) =
                write_trace_row(&mut trace_writer, rec).and_then(|_| trace_writer.flush())
            {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let out = outcome.map_err(|e| match e {
        TrainError::Setup(err) => err,
        TrainError::Numeric { step, message, .. } => {
            Error::Numeric(format!("training aborted at step {step}: {message}"))
        }
    })?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let spec = cfg.problem_spec()?;
    let grid = grid_points(cfg.b, cfg.eval_grid_x, cfg.eval_grid_z);
    let field = evaluate_field(&out.params, &spec, &grid)?;
    write_field_csv(&out_dir.join("field.csv"), &grid, &field)?;
    save_checkpoint(
        &out_dir.join("checkpoint.json"),
        &out.params,
        Some(&ProblemMeta::from_spec(&spec)),
    )?;

    let last = out.trace.last().expect("trace always has a final record");
    Ok(RunSummary {
        formulation: cfg.formulation,
        k: cfg.k,
        eps_r: last.eps_r,
        eps_i: last.eps_i,
        final_loss: last.total,
        wall_time_s,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Runs the configured single experiment.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunSummary> {
    run_single_at(&cfg.train, &cfg.out_dir())
}

fn cell_dir_name(formulation: Formulation, k: f64) -> String {
    if k.fract() == 0.0 {
        format!("{formulation}_k{}", k as i64)
    } else {
        format!("{formulation}_k{k}")
    }
}

/// Runs the experiment matrix sequentially (or on threads when configured)
/// and writes `error_table.csv` under the output root. A failed cell is
/// recorded and the matrix continues.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<Vec<MatrixCell>> {
    if cfg.matrix.formulations.is_empty() || cfg.matrix.k_values.is_empty() {
        return Err(Error::Config("matrix lists must be nonempty".into()));
    }
    let root = cfg.out_dir();
    std::fs::create_dir_all(&root)?;

    let mut cells: Vec<(Formulation, f64)> = Vec::new();
    let mut seen: HashSet<(Formulation, u64)> = HashSet::new();
    for &f in &cfg.matrix.formulations {
        for &k in &cfg.matrix.k_values {
            if seen.insert((f, k.to_bits())) {
                cells.push((f, k));
            } else {
                eprintln!("warning: duplicate matrix cell ({f}, k={k}) skipped");
            }
        }
    }

    let run_cell = |&(formulation, k): &(Formulation, f64)| -> MatrixCell {
        let cell_cfg = TrainConfig {
            formulation,
            k,
            ..cfg.train.clone()
        };
        let dir = root.join(cell_dir_name(formulation, k));
        match run_single_at(&cell_cfg, &dir) {
            Ok(summary) => MatrixCell::Ok(summary),
            Err(e) => MatrixCell::Failed {
                formulation,
                k,
                message: e.to_string(),
            },
        }
    };

    let results: Vec<MatrixCell> = if cfg.matrix.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cells
                .iter()
                .map(|c| scope.spawn(move || run_cell(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("cell thread"))
                .collect()
        })
    } else {
        cells.iter().map(run_cell).collect()
    };

    write_error_table(&root.join("error_table.csv"), &results)?;
    Ok(results)
}

pub fn write_error_table(path: &Path, cells: &[MatrixCell]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "formulation,k,status,eps_r,eps_i,wall_time_s,final_loss")?;
    for cell in cells {
        match cell {
            MatrixCell::Ok(s) => writeln!(
                w,
                "{},{},ok,{},{},{},{}",
                s.formulation,
                fmt_float(s.k),
                fmt_float(s.eps_r),
                fmt_float(s.eps_i),
                fmt_float(s.wall_time_s),
                fmt_float(s.final_loss)
            )?,
            MatrixCell::Failed {
                formulation,
                k,
                message,
            } => writeln!(
                w,
                "{},{},failed,,,,\"{}\"",
                formulation,
                fmt_float(*k),
                message.replace('"', "'")
            )?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Evaluates a stored checkpoint on an `nx x nz` grid; the checkpoint must
/// carry its problem block for the reconstruction to be defined.
pub fn eval_checkpoint(path: &Path, nx: usize, nz: usize, out: Option<&Path>) -> Result<()> {
    let (params, meta) = load_checkpoint(path)?;
    let meta = meta.ok_or_else(|| {
        Error::Config("checkpoint carries no problem block; cannot reconstruct the field".into())
    })?;
    let spec = meta.to_spec()?;
    let grid = grid_points(spec.b(), nx, nz);
    let field = evaluate_field(&params, &spec, &grid)?;
    match out {
        Some(p) => write_field_csv(p, &grid, &field)?,
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            writeln!(w, "x,z,re_u,im_u")?;
            for ((x, z), c) in grid.iter().zip(&field) {
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_float(*x),
                    fmt_float(*z),
                    fmt_float(c.re),
                    fmt_float(c.im)
                )?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs the verification suite for the config's problem parameters (or the
/// defaults when no config is given).
pub fn verify(cfg: Option<&ExperimentConfig>) -> VerifyReport {
    let (k, b) = match cfg {
        Some(c) => (c.train.k, c.train.b),
        None => (8.0, 2.0),
    };
    run_verification(k, b)
}

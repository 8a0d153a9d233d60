//! Drivers behind the command-line tool: single solves, ε sweeps against a
//! reference, mesh-refinement studies and remainder curves, with their CSV
//! and VTK output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::asymptotics::{remainder_curve, Expansion, RemainderRow};
use crate::config::{ReferenceKind, RunConfig};
use crate::dofs::{write_vtk, Field};
use crate::error::{Error, Result};
use crate::norms::{dual_norm_q, error_norm, l2_error, Analytic, ErrorReport, Reference};
use crate::systems::{solve, solve_es, solve_pp, solve_stokes, Discretization, ProblemKind, Solution};

/// Rows whose value is not above this multiple of the noise level are left
/// out of slope fits.
pub const WINDOW_FACTOR: f64 = 10.0;

pub const SWEEP_HEADER: &str = "eps,err_u_l2,err_u_h1semi,err_p_l2,err_p_h1semi,reference";
pub const FIT_HEADER: &str = "column,slope,intercept,window_lo,window_hi";
pub const REMAINDER_HEADER: &str = "eps,rem_u_h1,rem_p_h1,k";

/// Least-squares line through `(log10 x, log10 y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest `x` used.
    pub window_lo: f64,
    pub window_hi: f64,
    pub points: usize,
}

pub fn fit_slope(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} usable point(s), need at least 2",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::DegenerateFit(format!("point ({x:e}, {y:e}) has no logarithm")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all points share one abscissa".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(Fit {
        slope,
        intercept: my - slope * mx,
        window_lo: lo,
        window_hi: hi,
        points: points.len(),
    })
}

/// Fit over the `(x, value, noise)` rows with `value > WINDOW_FACTOR · noise`.
pub fn fit_window(rows: &[(f64, f64, f64)]) -> Result<Fit> {
    let kept: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(_, v, noise)| v > WINDOW_FACTOR * noise)
        .map(|&(x, v, _)| (x, v))
        .collect();
    if kept.is_empty() {
        return Err(Error::DegenerateFit(
            "fit window is empty: every row is at the noise floor".into(),
        ));
    }
    fit_slope(&kept)
}

fn compare(field: &Field, exact: &Analytic) -> Result<ErrorReport> {
    if exact.has_gradient() {
        error_norm(field, Reference::Analytic(exact))
    } else {
        l2_error(field, Reference::Analytic(exact))
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub problem: ProblemKind,
    pub eps: Option<f64>,
    pub solution: Solution,
    pub velocity_error: Option<ErrorReport>,
    pub pressure_error: Option<ErrorReport>,
    pub pressure_mean: f64,
}

/// One problem at one ε (the first of the grid if only a grid is given).
pub fn run_solve(cfg: &RunConfig) -> Result<SolveReport> {
    let data = cfg.problem_data()?;
    let eps = match cfg.problem {
        ProblemKind::Es => Some(cfg.eps_values()?[0]),
        _ => None,
    };
    let disc = Discretization::new(cfg.build_mesh(None)?, cfg.regime()?)?;
    let solution = solve(&disc, &data, cfg.problem, eps)?;
    let velocity_error = cfg
        .exact_velocity()?
        .map(|u| compare(&solution.velocity, &u))
        .transpose()?;
    let pressure_error = cfg
        .exact_pressure()?
        .map(|p| compare(&solution.pressure, &p))
        .transpose()?;
    let pressure_mean = solution.pressure.mean_value()?;
    Ok(SolveReport {
        problem: cfg.problem,
        eps,
        solution,
        velocity_error,
        pressure_error,
        pressure_mean,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:e}"))
}

/// `solution.vtk` and `summary.csv`.
pub fn write_solve(dir: &Path, report: &SolveReport) -> Result<()> {
    let sol = &report.solution;
    let mut w = create(dir, "solution.vtk")?;
    write_vtk(
        &mut w,
        sol.velocity.mesh(),
        &[("velocity", &sol.velocity), ("pressure", &sol.pressure)],
    )?;
    w.flush()?;

    let mut w = create(dir, "summary.csv")?;
    writeln!(
        w,
        "problem,eps,velocity_dofs,pressure_dofs,residual,correction,pressure_mean,err_u_l2,err_u_h1,err_p_l2,err_p_l2_mean_zero,err_p_h1"
    )?;
    let ve = report.velocity_error;
    let pe = report.pressure_error;
    writeln!(
        w,
        "{},{},{},{},{:e},{:e},{:e},{},{},{},{},{}",
        report.problem,
        opt(report.eps),
        sol.velocity.dofmap().num_dofs(),
        sol.pressure.dofmap().num_dofs(),
        sol.residual_norm,
        sol.correction,
        report.pressure_mean,
        opt(ve.map(|e| e.l2)),
        opt(ve.map(|e| e.h1)),
        opt(pe.map(|e| e.l2)),
        opt(pe.map(|e| e.l2_mean_zero)),
        opt(pe.map(|e| e.h1)),
    )?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub eps: f64,
    /// `u_ε − u_ref`
    pub velocity: ErrorReport,
    /// `p_ε − p_ref`, with `[p_ε]` in place of `p_ε` against Stokes.
    pub pressure: ErrorReport,
    pub residual: f64,
    pub correction: f64,
    /// H¹ norms of `u_ε` and `p_ε`, the scale of the solver noise.
    pub velocity_norm: f64,
    pub pressure_norm: f64,
}

/// Fitted columns, in CSV order.
pub const SWEEP_COLUMNS: [&str; 6] = [
    "err_u_l2",
    "err_u_h1semi",
    "err_u_h1",
    "err_p_l2",
    "err_p_h1semi",
    "err_p_h1",
];

fn column_value(r: &ErrorReport, c: usize) -> f64 {
    match c % 3 {
        0 => r.l2,
        1 => r.h1_semi,
        _ => r.h1,
    }
}

impl SweepRow {
    pub fn value(&self, column: usize) -> f64 {
        column_value(if column < 3 { &self.velocity } else { &self.pressure }, column)
    }

    /// The solver's forward-error estimate is relative to the whole
    /// unknown vector, so it is scaled by both norms.
    fn noise(&self) -> f64 {
        self.residual.max(self.correction) * (self.velocity_norm + self.pressure_norm)
    }
}

#[derive(Clone, Debug)]
pub struct ColumnFit {
    pub column: &'static str,
    /// Distance between the reference on the sweep mesh and on the 2×
    /// refined mesh, in the column's norm (zero when not estimated).
    pub floor: f64,
    pub fit: std::result::Result<Fit, String>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub reference: ReferenceKind,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<ColumnFit>,
}

impl SweepResult {
    pub fn fit(&self, column: &str) -> Option<&ColumnFit> {
        self.fits.iter().find(|f| f.column == column)
    }

    pub fn column(&self, column: &str) -> Option<Vec<f64>> {
        let c = SWEEP_COLUMNS.iter().position(|&n| n == column)?;
        Some(self.rows.iter().map(|r| r.value(c)).collect())
    }
}

fn reference_solve(disc: &Discretization, cfg: &RunConfig, reference: ReferenceKind) -> Result<Solution> {
    let data = cfg.problem_data()?;
    match reference {
        ReferenceKind::Pp => solve_pp(disc, &data),
        ReferenceKind::Stokes => solve_stokes(disc, &data),
    }
}

/// Fresh ε-Stokes solves over the configured grid, compared with the
/// reference solved once on the same mesh.
pub fn run_sweep(cfg: &RunConfig, reference: ReferenceKind) -> Result<SweepResult> {
    let data = cfg.problem_data()?;
    let eps = cfg.eps_values()?;
    let regime = cfg.regime()?;
    let disc = Discretization::new(cfg.build_mesh(None)?, regime)?;
    let refsol = reference_solve(&disc, cfg, reference)?;
    let align = reference == ReferenceKind::Stokes;

    let floor = if cfg.sweep.floor {
        let fine_mesh = crate::mesh::build_structured(2 * cfg.mesh.nx, 2 * cfg.mesh.ny, cfg.rect()?)?;
        let fine = Discretization::new(std::sync::Arc::new(fine_mesh), regime)?;
        let fine_sol = reference_solve(&fine, cfg, reference)?;
        let fu = error_norm(&refsol.velocity, Reference::Field(&fine_sol.velocity))?;
        let fp = error_norm(&refsol.pressure, Reference::Field(&fine_sol.pressure))?;
        [fu.l2, fu.h1_semi, fu.h1, fp.l2, fp.h1_semi, fp.h1]
    } else {
        [0.0; 6]
    };

    let rows = eps
        .par_iter()
        .map(|&e| -> Result<SweepRow> {
            let es = solve_es(&disc, &data, e)?;
            let p = if align {
                es.pressure.subtract_mean()?
            } else {
                es.pressure.clone()
            };
            let velocity = error_norm(&es.velocity, Reference::Field(&refsol.velocity)).map_err(Error::at_eps(e))?;
            let pressure = error_norm(&p, Reference::Field(&refsol.pressure)).map_err(Error::at_eps(e))?;
            Ok(SweepRow {
                eps: e,
                velocity,
                pressure,
                residual: es.residual_norm,
                correction: es.correction,
                velocity_norm: error_norm(&es.velocity, Reference::Zero)?.h1,
                pressure_norm: error_norm(&p, Reference::Zero)?.h1,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fits = SWEEP_COLUMNS
        .iter()
        .enumerate()
        .map(|(c, &column)| {
            let pts: Vec<(f64, f64, f64)> = rows
                .iter()
                .map(|r| (r.eps, r.value(c), r.noise().max(floor[c])))
                .collect();
            ColumnFit {
                column,
                floor: floor[c],
                fit: fit_window(&pts).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(SweepResult { reference, rows, fits })
}

fn write_fit_row<W: Write>(w: &mut W, column: &str, fit: &std::result::Result<Fit, String>) -> Result<()> {
    match fit {
        Ok(f) => writeln!(
            w,
            "{column},{:e},{:e},{:e},{:e}",
            f.slope, f.intercept, f.window_lo, f.window_hi
        )?,
        Err(_) => writeln!(w, "{column},NaN,NaN,NaN,NaN")?,
    }
    Ok(())
}

/// `sweep_<reference>.csv` and `fit_<reference>.csv`.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    let name = result.reference.name();
    let mut w = create(dir, &format!("sweep_{name}.csv"))?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &result.rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{name}",
            r.eps, r.velocity.l2, r.velocity.h1_semi, r.pressure.l2, r.pressure.h1_semi
        )?;
    }
    w.flush()?;
    let mut w = create(dir, &format!("fit_{name}.csv"))?;
    writeln!(w, "{FIT_HEADER}")?;
    for f in &result.fits {
        write_fit_row(&mut w, f.column, &f.fit)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct MmsRow {
    pub n: usize,
    pub h: f64,
    pub velocity: ErrorReport,
    /// Against the exact pressure, both shifted to zero mean when the
    /// pressure is only determined up to a constant.
    pub pressure: ErrorReport,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct MmsResult {
    pub problem: ProblemKind,
    pub rows: Vec<MmsRow>,
    /// Slope of the velocity H¹ error against `h`.
    pub velocity_h1_rate: std::result::Result<Fit, String>,
    /// Slope of the pressure L² error against `h`.
    pub pressure_l2_rate: std::result::Result<Fit, String>,
}

/// Solves the configured problem on `n × n` meshes for each `n` in
/// `sizes` and measures errors against the exact solution.
pub fn run_mms(cfg: &RunConfig, sizes: &[usize]) -> Result<MmsResult> {
    let u = cfg
        .exact_velocity()?
        .ok_or_else(|| Error::Config("mms needs exact.u and exact.grad_u".into()))?;
    let p = cfg
        .exact_pressure()?
        .ok_or_else(|| Error::Config("mms needs exact.p and exact.grad_p".into()))?;
    if !u.has_gradient() || !p.has_gradient() {
        return Err(Error::Config("mms needs exact.grad_u and exact.grad_p".into()));
    }
    let data = cfg.problem_data()?;
    let regime = cfg.regime()?;
    let eps = match cfg.problem {
        ProblemKind::Es => Some(cfg.eps_values()?[0]),
        _ => None,
    };
    let mean_free = cfg.problem == ProblemKind::Stokes || regime.is_neumann();
    let rows = sizes
        .par_iter()
        .map(|&n| -> Result<MmsRow> {
            let disc = Discretization::new(cfg.build_mesh(Some(n))?, regime)?;
            let sol = solve(&disc, &data, cfg.problem, eps)?;
            let velocity = error_norm(&sol.velocity, Reference::Analytic(&u))?;
            let mut pressure = error_norm(&sol.pressure, Reference::Analytic(&p))?;
            if mean_free {
                pressure.l2 = pressure.l2_mean_zero;
            }
            let rect = cfg.rect()?;
            Ok(MmsRow {
                n,
                h: rect.width().max(rect.height()) / n as f64,
                velocity,
                pressure,
                residual: sol.residual_norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = |f: &dyn Fn(&MmsRow) -> f64| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, f(r))).collect();
        fit_slope(&pts).map_err(|e| e.to_string())
    };
    let velocity_h1_rate = rate(&|r| r.velocity.h1);
    let pressure_l2_rate = rate(&|r| r.pressure.l2);
    Ok(MmsResult {
        problem: cfg.problem,
        rows,
        velocity_h1_rate,
        pressure_l2_rate,
    })
}

/// `mms.csv` and `mms_rates.csv`.
pub fn write_mms(dir: &Path, result: &MmsResult) -> Result<()> {
    let mut w = create(dir, "mms.csv")?;
    writeln!(w, "n,h,err_u_l2,err_u_h1semi,err_u_h1,err_p_l2,err_p_h1semi,residual")?;
    for r in &result.rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.n, r.h, r.velocity.l2, r.velocity.h1_semi, r.velocity.h1, r.pressure.l2, r.pressure.h1_semi, r.residual
        )?;
    }
    w.flush()?;
    let mut w = create(dir, "mms_rates.csv")?;
    writeln!(w, "{FIT_HEADER}")?;
    write_fit_row(&mut w, "err_u_h1", &result.velocity_h1_rate)?;
    write_fit_row(&mut w, "err_p_l2", &result.pressure_l2_rate)?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AsymptoticsResult {
    pub k: usize,
    pub rows: Vec<RemainderRow>,
    pub velocity_fit: std::result::Result<Fit, String>,
    pub pressure_fit: std::result::Result<Fit, String>,
    /// `‖div v⁽ᵏ⁾‖_{Q*}` through the discrete Riesz representative, the
    /// constant of the remainder bound.
    pub dual_norm: f64,
    pub expansion: Expansion,
}

/// Remainder curve of order `k` over the configured ε grid. Both sides
/// of each remainder live on the same mesh, so only solver noise limits the
/// fit window.
pub fn run_asymptotics(cfg: &RunConfig, k: usize) -> Result<AsymptoticsResult> {
    let data = cfg.problem_data()?;
    let eps = cfg.eps_values()?;
    let disc = Discretization::new(cfg.build_mesh(None)?, cfg.regime()?)?;
    let expansion = Expansion::new(&disc, &data, k)?;
    let rows = remainder_curve(&disc, &data, &expansion, k, &eps)?;
    let noise = |r: &RemainderRow| r.residual.max(r.correction) * (r.u_h1 + r.p_h1);
    let vu: Vec<_> = rows.iter().map(|r| (r.eps, r.rem_u_h1, noise(r))).collect();
    let vp: Vec<_> = rows.iter().map(|r| (r.eps, r.rem_p_h1, noise(r))).collect();
    let last = match k {
        0 => &expansion.pp.velocity,
        _ => &expansion.terms[k - 1].velocity,
    };
    let mut f = disc.div_u_times_q().matvec(last.coeffs());
    f.iter_mut().for_each(|v| *v = -*v);
    let dual_norm = dual_norm_q(&f, disc.pressure_space())?;
    Ok(AsymptoticsResult {
        k,
        rows,
        velocity_fit: fit_window(&vu).map_err(|e| e.to_string()),
        pressure_fit: fit_window(&vp).map_err(|e| e.to_string()),
        dual_norm,
        expansion,
    })
}

/// `remainder_k<k>.csv` and `remainder_fit_k<k>.csv`.
pub fn write_asymptotics(dir: &Path, result: &AsymptoticsResult) -> Result<()> {
    let k = result.k;
    let mut w = create(dir, &format!("remainder_k{k}.csv"))?;
    writeln!(w, "{REMAINDER_HEADER}")?;
    for r in &result.rows {
        writeln!(w, "{:e},{:e},{:e},{k}", r.eps, r.rem_u_h1, r.rem_p_h1)?;
    }
    w.flush()?;
    let mut w = create(dir, &format!("remainder_fit_k{k}.csv"))?;
    writeln!(w, "{FIT_HEADER}")?;
    write_fit_row(&mut w, "rem_u_h1", &result.velocity_fit)?;
    write_fit_row(&mut w, "rem_p_h1", &result.pressure_fit)?;
    w.flush()?;
    Ok(())
}

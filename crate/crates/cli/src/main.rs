use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use estokes::config::{EpsGrid, PressureBcKind, ReferenceKind, RunConfig};
use estokes::experiment::{
    run_asymptotics, run_mms, run_solve, run_sweep, write_asymptotics, write_mms, write_solve, write_sweep, Fit,
};
use estokes::systems::ProblemKind;

/// Taylor–Hood solver for the Stokes, pressure-Poisson and ε-Stokes problems.
#[derive(Parser)]
#[command(name = "estokes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem at one ε; writes solution.vtk and summary.csv.
    Solve(Common),
    /// ε sweep against the pressure-Poisson or Stokes solution.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Reference problem (overrides sweep.reference).
        #[arg(long)]
        reference: Option<ReferenceKind>,
    },
    /// Mesh-refinement study against the exact solution in the config.
    Mms(Common),
    /// Remainders of the 1/ε expansion around the pressure-Poisson solution.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        /// Expansion order (overrides asymptotics.k).
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use an n × n mesh.
    #[arg(long)]
    mesh_n: Option<usize>,
    #[arg(long, conflicts_with = "eps_grid", allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Geometric grid `start:stop:factor`.
    #[arg(long)]
    eps_grid: Option<EpsGrid>,
    #[arg(long)]
    pressure_bc: Option<PressureBcKind>,
    /// stokes, pp or es (overrides problem).
    #[arg(long)]
    problem: Option<ProblemKind>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(n) = self.mesh_n {
            cfg.mesh.nx = n;
            cfg.mesh.ny = n;
        }
        if let Some(e) = self.eps {
            cfg.eps = Some(e);
            cfg.eps_grid = None;
        }
        if let Some(g) = self.eps_grid {
            cfg.eps_grid = Some(g);
        }
        if let Some(p) = self.problem {
            cfg.problem = p;
        }
        if let Some(kind) = self.pressure_bc {
            cfg.set_regime(kind);
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate().context("after applying command-line overrides")?;
        Ok(cfg)
    }
}

fn show(fit: &std::result::Result<Fit, String>) -> String {
    match fit {
        Ok(f) => format!(
            "slope {:+.4} over [{:e}, {:e}] ({} points)",
            f.slope, f.window_lo, f.window_hi, f.points
        ),
        Err(e) => e.clone(),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(common) => {
            let cfg = common.load()?;
            let report = run_solve(&cfg)?;
            write_solve(&cfg.output.dir, &report)?;
            let sol = &report.solution;
            println!(
                "{} solve: residual {:e}, pressure mean {:e}",
                report.problem, sol.residual_norm, report.pressure_mean
            );
            if let Some(e) = report.velocity_error {
                println!("velocity error: L2 {:e}, H1 {:e}", e.l2, e.h1);
            }
            if let Some(e) = report.pressure_error {
                println!("pressure error: L2 {:e}, H1 {:e}", e.l2, e.h1);
            }
        }
        Command::Sweep { common, reference } => {
            let cfg = common.load()?;
            let reference = reference.unwrap_or(cfg.sweep.reference);
            let result = run_sweep(&cfg, reference)?;
            write_sweep(&cfg.output.dir, &result)?;
            for f in &result.fits {
                println!("{:<13} {}", f.column, show(&f.fit));
            }
        }
        Command::Mms(common) => {
            let cfg = common.load()?;
            let result = run_mms(&cfg, &cfg.mms.sizes)?;
            write_mms(&cfg.output.dir, &result)?;
            for r in &result.rows {
                println!(
                    "n {:>4}  velocity H1 {:e}  pressure L2 {:e}",
                    r.n, r.velocity.h1, r.pressure.l2
                );
            }
            println!("velocity H1 rate: {}", show(&result.velocity_h1_rate));
            println!("pressure L2 rate: {}", show(&result.pressure_l2_rate));
        }
        Command::Asymptotics { common, k } => {
            let cfg = common.load()?;
            let k = k.unwrap_or(cfg.asymptotics.k);
            let result = run_asymptotics(&cfg, k)?;
            write_asymptotics(&cfg.output.dir, &result)?;
            println!("velocity remainder: {}", show(&result.velocity_fit));
            println!("pressure remainder: {}", show(&result.pressure_fit));
            println!("dual norm of div v^({k}): {:e}", result.dual_norm);
        }
    }
    Ok(())
}

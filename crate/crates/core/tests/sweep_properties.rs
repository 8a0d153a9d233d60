use std::path::Path;

use estokes::config::{ReferenceKind, RunConfig};
use estokes::experiment::{run_solve, run_sweep, SWEEP_COLUMNS};

fn config(name: &str, n: usize) -> RunConfig {
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap();
    cfg.mesh.nx = n;
    cfg.mesh.ny = n;
    cfg
}

#[test]
fn sweeps_are_bitwise_reproducible() {
    let cfg = config("benchmark.toml", 8);
    let a = run_sweep(&cfg, ReferenceKind::Pp).unwrap();
    let b = run_sweep(&cfg, ReferenceKind::Pp).unwrap();
    assert_eq!(a.rows.len(), 4);
    for (r, s) in a.rows.iter().zip(&b.rows) {
        for c in 0..SWEEP_COLUMNS.len() {
            assert_eq!(r.value(c).to_bits(), s.value(c).to_bits());
        }
    }
}

#[test]
fn divergence_free_sweep_has_only_degenerate_fits() {
    let r = run_sweep(&config("divergence_free.toml", 16), ReferenceKind::Pp).unwrap();
    for row in &r.rows {
        assert!(row.velocity.h1 <= 1e-9 && row.pressure.h1 <= 1e-9, "eps {:e}", row.eps);
    }
    for f in &r.fits {
        assert!(f.fit.is_err(), "{} fitted {:?}", f.column, f.fit);
    }
}

#[test]
fn pp_solve_on_benchmark_data_is_exact() {
    let mut cfg = config("benchmark.toml", 32);
    cfg.problem = "pp".parse().unwrap();
    let r = run_solve(&cfg).unwrap();
    let (u, p) = (r.velocity_error.unwrap(), r.pressure_error.unwrap());
    assert!(u.h1 <= 1e-9 && p.h1 <= 1e-9, "u {:e}, p {:e}", u.h1, p.h1);
}

#[test]
fn stokes_solve_on_harmonic_data_is_exact() {
    let mut cfg = config("divergence_free.toml", 8);
    cfg.problem = "stokes".parse().unwrap();
    let r = run_solve(&cfg).unwrap();
    let (u, p) = (r.velocity_error.unwrap(), r.pressure_error.unwrap());
    assert!(u.h1 <= 1e-10 && p.h1 <= 1e-10, "u {:e}, p {:e}", u.h1, p.h1);
}

#[test]
fn nonpositive_eps_is_rejected_before_solving() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/benchmark.toml");
    let text = std::fs::read_to_string(path).unwrap();
    let text = text.replace("eps_grid = { start = 10.0, stop = 1e4, factor = 10.0 }", "eps = -1.0");
    let err = RunConfig::from_toml(&text).unwrap_err().to_string();
    assert!(err.contains("eps"), "{err}");
}

#[test]
fn every_eps_gets_its_own_factorization() {
    let r = run_sweep(&config("benchmark.toml", 8), ReferenceKind::Pp).unwrap();
    let residuals: Vec<u64> = r.rows.iter().map(|row| row.residual.to_bits()).collect();
    for (i, a) in residuals.iter().enumerate() {
        assert!(
            residuals[i + 1..].iter().all(|b| b != a),
            "repeated residual in {residuals:?}"
        );
    }
}

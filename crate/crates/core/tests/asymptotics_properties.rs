mod common;

use std::path::Path;

use common::{benchmark_data, disc};
use estokes::assembly::{apply_dirichlet, assemble_load, assemble_matrix, integral_row, Form, LoadKind};
use estokes::asymptotics::{expansion_terms, Expansion};
use estokes::config::RunConfig;
use estokes::dofs::Field;
use estokes::experiment::run_asymptotics;
use estokes::functions::ScalarFunction;
use estokes::norms::{dual_norm_q, error_norm, Reference};
use estokes::systems::{solve_pp, PressureBc};

fn div_upp_dual_norm(n: usize) -> f64 {
    let d = disc(n, PressureBc::Neumann);
    let pp = solve_pp(&d, &benchmark_data(PressureBc::Neumann)).unwrap();
    let mut f = d.div_u_times_q().matvec(pp.velocity.coeffs());
    f.iter_mut().for_each(|v| *v = -*v);
    dual_norm_q(&f, d.pressure_space()).unwrap()
}

#[test]
fn dual_norm_of_divergence_settles_under_refinement() {
    let values: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| div_upp_dual_norm(n)).collect();
    assert!(values.iter().all(|&v| v > 0.0));
    let gaps: Vec<f64> = values[..3].iter().map(|v| (v - values[3]).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "values {values:?}");
}

#[test]
fn first_pressure_term_matches_fine_mesh_poisson_solve() {
    // Fine oracle: ∫ ∇q·∇ψ = −∫ (2x+2y−2) ψ with zero mean, solved directly.
    let fine = disc(128, PressureBc::Neumann);
    let space = fine.pressure_space();
    let l = assemble_matrix(space, space, Form::LaplacianScalar).unwrap();
    let source = ScalarFunction::parse("2*x+2*y-2").unwrap();
    let mut rhs = assemble_load(space, LoadKind::DivFVolume(&source)).unwrap();
    rhs.iter_mut().for_each(|v| *v = -*v);
    let mean = integral_row(space).unwrap();
    let zeros = vec![0.0; space.num_dofs()];
    let sys = apply_dirichlet(&l, &rhs, &vec![false; space.num_dofs()], &zeros, Some(&mean));
    let q_fine = Field::new(space.clone(), sys.solve().unwrap().full).unwrap();

    let coarse = disc(16, PressureBc::Neumann);
    let pp = solve_pp(&coarse, &benchmark_data(PressureBc::Neumann)).unwrap();
    let terms = expansion_terms(&coarse, &pp.velocity, 1).unwrap();
    let q1 = &terms[0].pressure;

    let cp = coarse.pressure_space();
    let nodal: Vec<f64> = cp.nodes().iter().map(|&x| q_fine.value_at(x).unwrap()[0]).collect();
    let interp = Field::new(cp.clone(), nodal).unwrap();
    let interp_err = error_norm(&interp, Reference::Field(&q_fine)).unwrap().l2_mean_zero;
    let diff = error_norm(q1, Reference::Field(&q_fine)).unwrap().l2_mean_zero;
    assert!(
        diff <= 2.0 * interp_err,
        "difference {diff:e}, interpolation error {interp_err:e}"
    );
}

#[test]
fn second_order_terms_are_nonzero_and_reproducible() {
    let d = disc(16, PressureBc::Neumann);
    let data = benchmark_data(PressureBc::Neumann);
    let a = Expansion::new(&d, &data, 2).unwrap();
    let b = Expansion::new(&d, &data, 2).unwrap();
    let v2 = &a.terms[1].velocity;
    assert!(error_norm(v2, Reference::Zero).unwrap().h1 > 0.0);
    for (s, t) in a.terms.iter().zip(&b.terms) {
        assert_eq!(s.velocity.coeffs(), t.velocity.coeffs());
        assert_eq!(s.pressure.coeffs(), t.pressure.coeffs());
    }
}

#[test]
fn fitted_constant_is_controlled_by_the_dual_norm() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/benchmark.toml");
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.mesh.nx = 16;
    cfg.mesh.ny = 16;
    let r = run_asymptotics(&cfg, 1).unwrap();
    let fit = r.velocity_fit.as_ref().unwrap();
    assert!((fit.slope + 2.0).abs() <= 0.15, "slope {}", fit.slope);
    let c = 10f64.powf(fit.intercept);
    assert!(
        c <= 10.0 * r.dual_norm,
        "fitted constant {c:e}, dual norm {:e}",
        r.dual_norm
    );
}

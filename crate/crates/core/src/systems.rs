//! The discrete Stokes, pressure-Poisson and ε-Stokes problems.
//!
//! Unknowns of the monolithic systems are ordered velocity first (vector
//! P2), then pressure (P1). Velocity always carries Dirichlet data `u_b` on
//! the whole boundary; the pressure regime decides where `p_b` is imposed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{
    apply_dirichlet, assemble_load, assemble_matrix, integral_row, interpolate, interpolate_scalar, AssembledSystem,
    Form, LoadKind, SystemSolution,
};
use crate::dofs::{build_dofmap, DofMap, Field, SpaceKind};
use crate::elements::edge_rule;
use crate::error::{Error, Result};
use crate::functions::{BoundaryFlux, ScalarFunction, VectorFunction};
use crate::mesh::{BoundaryPartition, Mesh, Rect, Side, SideSet};
use crate::sparse::{SparseMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Stokes,
    Pp,
    Es,
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stokes" => Ok(ProblemKind::Stokes),
            "pp" => Ok(ProblemKind::Pp),
            "es" => Ok(ProblemKind::Es),
            _ => Err(Error::Config(format!(
                "unknown problem `{s}` (expected stokes, pp or es)"
            ))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Stokes => "stokes",
            ProblemKind::Pp => "pp",
            ProblemKind::Es => "es",
        })
    }
}

/// Pressure boundary regime, selecting the pressure space `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureBc {
    /// Flux data on the whole boundary; pressure determined up to a constant.
    Neumann,
    /// `p = p_b` on the Dirichlet sides, flux data on the rest.
    Mixed(BoundaryPartition),
    /// `p = p_b` on the whole boundary.
    Dirichlet,
}

impl PressureBc {
    pub fn partition(&self) -> BoundaryPartition {
        match self {
            PressureBc::Neumann => BoundaryPartition::pure_neumann(),
            PressureBc::Mixed(p) => *p,
            PressureBc::Dirichlet => BoundaryPartition::pure_dirichlet(),
        }
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self, PressureBc::Neumann)
    }

    pub fn name(&self) -> &'static str {
        match self {
            PressureBc::Neumann => "neumann",
            PressureBc::Mixed(_) => "mixed",
            PressureBc::Dirichlet => "dirichlet",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemData {
    /// Body force; `None` means zero.
    pub f: Option<VectorFunction>,
    /// Divergence of the body force; required when `f` is given and the
    /// problem involves the pressure Poisson equation.
    pub div_f: Option<ScalarFunction>,
    pub u_b: VectorFunction,
    /// Pressure flux on the Neumann part; `None` means zero.
    pub g_b: Option<BoundaryFlux>,
    /// Pressure on the Dirichlet part; required unless the regime is Neumann.
    pub p_b: Option<ScalarFunction>,
    pub pressure_bc: PressureBc,
}

/// Relative tolerance for the boundary-flux and Neumann compatibility checks.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;
const DATA_PANELS: usize = 32;

/// Composite Gauss integral over the boundary of `rect` of `f(x, y, normal)`,
/// returning `(∫ f, ∫ |f|)`.
fn boundary_integral(rect: Rect, f: impl Fn(f64, f64, [f64; 2]) -> Result<f64>) -> Result<(f64, f64)> {
    let rule = edge_rule(6)?;
    let (mut s, mut a) = (0.0, 0.0);
    for side in Side::ALL {
        let (p0, p1) = match side {
            Side::Bottom => ([rect.x0, rect.y0], [rect.x1, rect.y0]),
            Side::Right => ([rect.x1, rect.y0], [rect.x1, rect.y1]),
            Side::Top => ([rect.x1, rect.y1], [rect.x0, rect.y1]),
            Side::Left => ([rect.x0, rect.y1], [rect.x0, rect.y0]),
        };
        let len = (p1[0] - p0[0]).hypot(p1[1] - p0[1]) / DATA_PANELS as f64;
        for k in 0..DATA_PANELS {
            for (t, w) in rule.iter() {
                let u = (k as f64 + t) / DATA_PANELS as f64;
                let v = f(p0[0] + u * (p1[0] - p0[0]), p0[1] + u * (p1[1] - p0[1]), side.normal())?;
                s += w * len * v;
                a += w * len * v.abs();
            }
        }
    }
    Ok((s, a))
}

/// Composite tensor Gauss integral over `rect`, returning `(∫ f, ∫ |f|)`.
fn volume_integral(rect: Rect, f: &ScalarFunction) -> Result<(f64, f64)> {
    let rule = edge_rule(6)?;
    let (hx, hy) = (rect.width() / DATA_PANELS as f64, rect.height() / DATA_PANELS as f64);
    let (mut s, mut a) = (0.0, 0.0);
    for j in 0..DATA_PANELS {
        for i in 0..DATA_PANELS {
            for (tx, wx) in rule.iter() {
                for (ty, wy) in rule.iter() {
                    let x = rect.x0 + (i as f64 + tx) * hx;
                    let y = rect.y0 + (j as f64 + ty) * hy;
                    let v = f.eval(x, y)?;
                    s += wx * wy * hx * hy * v;
                    a += wx * wy * hx * hy * v.abs();
                }
            }
        }
    }
    Ok((s, a))
}

impl ProblemData {
    /// Data with only velocity boundary values; everything else zero, Neumann regime.
    pub fn new(u_b: VectorFunction) -> Self {
        ProblemData {
            f: None,
            div_f: None,
            u_b,
            g_b: None,
            p_b: None,
            pressure_bc: PressureBc::Neumann,
        }
    }

    pub fn force(&self) -> VectorFunction {
        self.f.clone().unwrap_or_else(VectorFunction::zero)
    }

    pub fn flux(&self) -> BoundaryFlux {
        self.g_b.clone().unwrap_or_else(BoundaryFlux::zero)
    }

    fn div_force(&self) -> Result<ScalarFunction> {
        match (&self.f, &self.div_f) {
            (_, Some(d)) => Ok(d.clone()),
            (None, None) => Ok(ScalarFunction::zero()),
            (Some(_), None) => Err(Error::InvalidData(
                "the body force is given but its divergence is not; div F must be supplied".into(),
            )),
        }
    }

    /// `∫_Γ u_b · ν` and `∫_Γ |u_b · ν|`.
    pub fn boundary_flux(&self, rect: Rect) -> Result<(f64, f64)> {
        boundary_integral(rect, |x, y, n| {
            let u = self.u_b.eval(x, y)?;
            Ok(u[0] * n[0] + u[1] * n[1])
        })
    }

    /// `∫_Γ g_b − ∫_Ω div F` and the scale it is measured against.
    pub fn neumann_defect(&self, rect: Rect) -> Result<(f64, f64)> {
        let g = self.flux();
        let (gs, ga) = boundary_integral(rect, |x, y, n| g.eval(x, y, n))?;
        let (ds, da) = volume_integral(rect, &self.div_force()?)?;
        Ok((gs - ds, ga + da))
    }

    /// Checks the solvability conditions that `kind` relies on.
    pub fn validate(&self, kind: ProblemKind, rect: Rect) -> Result<()> {
        let (flux, scale) = self.boundary_flux(rect)?;
        if flux.abs() > COMPATIBILITY_TOLERANCE * scale.max(f64::MIN_POSITIVE) && flux.abs() > 0.0 {
            return Err(Error::InvalidData(format!(
                "boundary data violates ∫ u_b·ν = 0: got {flux:e} (scale {scale:e})"
            )));
        }
        if kind == ProblemKind::Stokes {
            return Ok(());
        }
        self.div_force()?;
        match self.pressure_bc {
            PressureBc::Neumann => {
                let (defect, scale) = self.neumann_defect(rect)?;
                if defect.abs() > COMPATIBILITY_TOLERANCE * scale && defect != 0.0 {
                    return Err(Error::InvalidData(format!(
                        "Neumann data violates ∫ g_b = ∫ div F: defect {defect:e} (scale {scale:e})"
                    )));
                }
            }
            PressureBc::Mixed(part) => {
                if part.dirichlet_sides().is_empty() {
                    return Err(Error::InvalidData(
                        "mixed pressure regime needs at least one Dirichlet side".into(),
                    ));
                }
                if self.p_b.is_none() {
                    return Err(Error::InvalidData("mixed pressure regime needs p_b".into()));
                }
            }
            PressureBc::Dirichlet => {
                if self.p_b.is_none() {
                    return Err(Error::InvalidData("Dirichlet pressure regime needs p_b".into()));
                }
            }
        }
        Ok(())
    }
}

/// Spaces and matrix blocks for one mesh and pressure regime, assembled once.
#[derive(Clone, Debug)]
pub struct Discretization {
    mesh: Arc<Mesh>,
    regime: PressureBc,
    velocity: Arc<DofMap>,
    pressure: Arc<DofMap>,
    /// `∫ ∇u : ∇φ`
    a: SparseMatrix,
    /// `∫ ∇p · φ`
    c: SparseMatrix,
    /// `∫ (div u) ψ`
    b: SparseMatrix,
    /// `∫ ∇p · ∇ψ`
    l: SparseMatrix,
    /// `∫ ψ_i`
    pressure_integrals: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>, regime: PressureBc) -> Result<Self> {
        let velocity = Arc::new(build_dofmap(
            mesh.clone(),
            SpaceKind::P2Vec,
            BoundaryPartition::pure_dirichlet(),
        ));
        let pressure = Arc::new(build_dofmap(mesh.clone(), SpaceKind::P1, regime.partition()));
        let a = assemble_matrix(&velocity, &velocity, Form::LaplacianVector)?;
        let c = assemble_matrix(&velocity, &pressure, Form::GradPDotV)?;
        let b = assemble_matrix(&pressure, &velocity, Form::DivUTimesQ)?;
        let l = assemble_matrix(&pressure, &pressure, Form::LaplacianScalar)?;
        let pressure_integrals = integral_row(&pressure)?;
        Ok(Discretization {
            mesh,
            regime,
            velocity,
            pressure,
            a,
            c,
            b,
            l,
            pressure_integrals,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn regime(&self) -> PressureBc {
        self.regime
    }

    pub fn velocity_space(&self) -> &Arc<DofMap> {
        &self.velocity
    }

    pub fn pressure_space(&self) -> &Arc<DofMap> {
        &self.pressure
    }

    pub fn laplacian_vector(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn grad_p_dot_v(&self) -> &SparseMatrix {
        &self.c
    }

    pub fn div_u_times_q(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn laplacian_scalar(&self) -> &SparseMatrix {
        &self.l
    }

    pub fn pressure_integrals(&self) -> &[f64] {
        &self.pressure_integrals
    }

    fn nu(&self) -> usize {
        self.velocity.num_dofs()
    }

    fn np(&self) -> usize {
        self.pressure.num_dofs()
    }

    /// Dirichlet flags of the monolithic unknown vector for the regime.
    pub fn constrained(&self, pressure_dirichlet: bool) -> Vec<bool> {
        let mut m = self.velocity.dirichlet_mask().to_vec();
        if pressure_dirichlet {
            m.extend_from_slice(self.pressure.dirichlet_mask());
        } else {
            m.extend(std::iter::repeat_n(false, self.np()));
        }
        m
    }

    /// Monolithic ε-Stokes operator `[[A, C], [B, εL]]` before boundary conditions.
    pub fn es_operator(&self, eps: f64) -> SparseMatrix {
        let l = self.l.scaled(eps);
        block2(
            self.nu(),
            self.np(),
            [[Some(&self.a), Some(&self.c)], [Some(&self.b), Some(&l)]],
        )
    }

    /// `[[A, −Bᵀ], [B, 0]]`; the pressure block is `⟨∇p, φ⟩ = −∫ p div φ`.
    pub fn stokes_operator(&self) -> SparseMatrix {
        let bt = self.b.transpose().scaled(-1.0);
        block2(
            self.nu(),
            self.np(),
            [[Some(&self.a), Some(&bt)], [Some(&self.b), None]],
        )
    }

    /// `∫ F · φ`
    pub fn body_load(&self, data: &ProblemData) -> Result<Vec<f64>> {
        match &data.f {
            Some(f) => assemble_load(&self.velocity, LoadKind::BodyForce(f)),
            None => Ok(vec![0.0; self.nu()]),
        }
    }

    /// `⟨G, ψ⟩ = ∫_{Γ_N} g_b ψ − ∫ (div F) ψ` for the regime's Neumann part.
    pub fn pressure_functional(&self, data: &ProblemData) -> Result<Vec<f64>> {
        let sides = self.regime.partition().neumann_sides();
        let mut g = if sides.is_empty() || data.g_b.is_none() {
            vec![0.0; self.np()]
        } else {
            let flux = data.flux();
            assemble_load(&self.pressure, LoadKind::NeumannBoundary { flux: &flux, sides })?
        };
        if data.f.is_some() || data.div_f.is_some() {
            let d = assemble_load(&self.pressure, LoadKind::DivFVolume(&data.div_force()?))?;
            for (gi, di) in g.iter_mut().zip(d) {
                *gi -= di;
            }
        }
        Ok(g)
    }

    fn velocity_lifting(&self, data: &ProblemData) -> Result<Field> {
        interpolate(self.velocity.clone(), &data.u_b)
    }

    fn pressure_lifting(&self, data: &ProblemData) -> Result<Field> {
        match (&self.regime, &data.p_b) {
            (PressureBc::Neumann, _) => Ok(Field::zeros(self.pressure.clone())),
            (_, Some(pb)) => interpolate_scalar(self.pressure.clone(), pb),
            (_, None) => Err(Error::InvalidData(format!(
                "{} pressure regime needs p_b",
                self.regime.name()
            ))),
        }
    }

    fn check_regime(&self, data: &ProblemData) -> Result<()> {
        if data.pressure_bc != self.regime {
            return Err(Error::InvalidData(format!(
                "data uses the {} pressure regime but the discretization was built for {}",
                data.pressure_bc.name(),
                self.regime.name()
            )));
        }
        Ok(())
    }

    fn mean_row_monolithic(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nu()];
        m.extend_from_slice(&self.pressure_integrals);
        m
    }

    fn split(&self, sol: SystemSolution) -> Result<Solution> {
        let mut full = sol.full;
        let p = full.split_off(self.nu());
        Ok(Solution {
            velocity: Field::new(self.velocity.clone(), full)?,
            pressure: Field::new(self.pressure.clone(), p)?,
            residual_norm: sol.residual,
            correction: sol.correction,
            multiplier: sol.multiplier,
        })
    }

    /// The boundary-reduced ε-Stokes system (with the mean constraint in
    /// the Neumann regime).
    pub fn es_system(&self, data: &ProblemData, eps: f64) -> Result<AssembledSystem> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidData(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        let k = self.es_operator(eps);
        let mut rhs = self.body_load(data)?;
        rhs.extend(self.pressure_functional(data)?.into_iter().map(|g| eps * g));
        let mut lift = self.velocity_lifting(data)?.into_coeffs();
        lift.extend(self.pressure_lifting(data)?.into_coeffs());
        let constrained = self.constrained(true);
        let mean = self.regime.is_neumann().then(|| self.mean_row_monolithic());
        Ok(apply_dirichlet(&k, &rhs, &constrained, &lift, mean.as_deref()))
    }
}

/// Builds a 2×2 block matrix with block sizes `n0` and `n1`.
fn block2(n0: usize, n1: usize, blocks: [[Option<&SparseMatrix>; 2]; 2]) -> SparseMatrix {
    let nnz: usize = blocks.iter().flatten().flatten().map(|m| m.nnz()).sum();
    let mut t = TripletBuilder::with_capacity(n0 + n1, n0 + n1, nnz);
    let off = [0, n0];
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            let Some(m) = blk else { continue };
            for i in 0..m.nrows() {
                for (j, v) in m.row(i) {
                    t.push(off[bi] + i, off[bj] + j, v);
                }
            }
        }
    }
    t.build()
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub velocity: Field,
    pub pressure: Field,
    /// Largest relative residual over the linear solves performed.
    pub residual_norm: f64,
    /// Relative size of the last iterative-refinement correction, an
    /// estimate of the solver's forward error.
    pub correction: f64,
    /// Value of the mean-constraint multiplier, when one was used.
    pub multiplier: Option<f64>,
}

/// Taylor–Hood discretization of the Stokes problem with mean-zero pressure.
pub fn solve_stokes(disc: &Discretization, data: &ProblemData) -> Result<Solution> {
    data.validate(ProblemKind::Stokes, disc.mesh.rect())?;
    let k = disc.stokes_operator();
    let mut rhs = disc.body_load(data)?;
    rhs.extend(std::iter::repeat_n(0.0, disc.np()));
    let mut lift = disc.velocity_lifting(data)?.into_coeffs();
    lift.extend(std::iter::repeat_n(0.0, disc.np()));
    let sys = apply_dirichlet(
        &k,
        &rhs,
        &disc.constrained(false),
        &lift,
        Some(&disc.mean_row_monolithic()),
    );
    disc.split(sys.solve()?)
}

/// Pressure Poisson solve followed by the vector Laplace solve for velocity.
pub fn solve_pp(disc: &Discretization, data: &ProblemData) -> Result<Solution> {
    disc.check_regime(data)?;
    data.validate(ProblemKind::Pp, disc.mesh.rect())?;
    let g = disc.pressure_functional(data)?;
    let p_lift = disc.pressure_lifting(data)?;
    let mean = disc.regime.is_neumann().then_some(disc.pressure_integrals.as_slice());
    let psys = apply_dirichlet(&disc.l, &g, disc.pressure.dirichlet_mask(), p_lift.coeffs(), mean);
    let psol = psys.solve()?;
    let pressure = Field::new(disc.pressure.clone(), psol.full)?;

    let mut f = disc.body_load(data)?;
    disc.c.matvec_add(-1.0, pressure.coeffs(), &mut f);
    let u_lift = disc.velocity_lifting(data)?;
    let usys = apply_dirichlet(&disc.a, &f, disc.velocity.dirichlet_mask(), u_lift.coeffs(), None);
    let usol = usys.solve()?;
    Ok(Solution {
        velocity: Field::new(disc.velocity.clone(), usol.full)?,
        pressure,
        residual_norm: psol.residual.max(usol.residual),
        correction: psol.correction.max(usol.correction),
        multiplier: psol.multiplier,
    })
}

/// Monolithic ε-Stokes solve.
pub fn solve_es(disc: &Discretization, data: &ProblemData, eps: f64) -> Result<Solution> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidData(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    disc.check_regime(data)?;
    data.validate(ProblemKind::Es, disc.mesh.rect())?;
    let sys = disc.es_system(data, eps)?;
    disc.split(sys.solve()?).map_err(Error::at_eps(eps))
}

/// Dispatches on the problem kind; `eps` is used by the ε-Stokes problem only.
pub fn solve(disc: &Discretization, data: &ProblemData, kind: ProblemKind, eps: Option<f64>) -> Result<Solution> {
    match kind {
        ProblemKind::Stokes => solve_stokes(disc, data),
        ProblemKind::Pp => solve_pp(disc, data),
        ProblemKind::Es => {
            let eps = eps.ok_or_else(|| Error::InvalidData("the ε-Stokes problem needs eps".into()))?;
            solve_es(disc, data, eps).map_err(|e| match e {
                Error::AtEps { .. } => e,
                e => Error::at_eps(eps)(e),
            })
        }
    }
}

/// Sides helper for building mixed regimes.
pub fn mixed(dirichlet: &[Side]) -> Result<PressureBc> {
    let d: SideSet = dirichlet.iter().copied().collect();
    Ok(PressureBc::Mixed(BoundaryPartition::new(d, d.complement())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured;

    fn disc(n: usize, regime: PressureBc) -> Discretization {
        Discretization::new(Arc::new(build_structured(n, n, Rect::unit()).unwrap()), regime).unwrap()
    }

    fn benchmark_data() -> ProblemData {
        let mut d = ProblemData::new(VectorFunction::parse("x*(x-1)", "y*(y-1)").unwrap());
        d.g_b = Some(BoundaryFlux::NormalComponent(VectorFunction::parse("2", "2").unwrap()));
        d.p_b = Some(ScalarFunction::parse("2*x+2*y-2").unwrap());
        d
    }

    fn max_diff(f: &Field, g: impl Fn(usize) -> f64) -> f64 {
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - g(i)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn pp_reproduces_exact_solution_in_every_regime() {
        for regime in [
            PressureBc::Neumann,
            mixed(&[Side::Left]).unwrap(),
            PressureBc::Dirichlet,
        ] {
            let d = disc(6, regime);
            let mut data = benchmark_data();
            data.pressure_bc = regime;
            let s = solve_pp(&d, &data).unwrap();
            let pn = d.pressure_space().nodes();
            assert!(
                max_diff(&s.pressure, |i| 2.0 * pn[i][0] + 2.0 * pn[i][1] - 2.0) < 1e-10,
                "{regime:?}"
            );
            let vn = d.velocity_space().nodes();
            assert!(
                max_diff(&s.velocity, |i| {
                    let p = vn[i / 2];
                    p[i % 2] * (p[i % 2] - 1.0)
                }) < 1e-10
            );
            assert!(s.residual_norm <= 1e-10);
        }
    }

    #[test]
    fn stokes_reproduces_polynomial_solutions() {
        let d = disc(4, PressureBc::Neumann);
        let lin = ProblemData::new(VectorFunction::parse("y", "x").unwrap());
        let s = solve_stokes(&d, &lin).unwrap();
        let vn = d.velocity_space().nodes();
        assert!(max_diff(&s.velocity, |i| vn[i / 2][1 - i % 2]) < 1e-11);
        assert!(s.pressure.coeffs().iter().all(|p| p.abs() < 1e-11));

        let mut quad = ProblemData::new(VectorFunction::parse("x^2", "-2*x*y").unwrap());
        quad.f = Some(VectorFunction::parse("-2", "0").unwrap());
        let s = solve_stokes(&d, &quad).unwrap();
        assert!(
            max_diff(&s.velocity, |i| {
                let p = vn[i / 2];
                if i % 2 == 0 {
                    p[0] * p[0]
                } else {
                    -2.0 * p[0] * p[1]
                }
            }) < 1e-10
        );
        assert!(s.pressure.coeffs().iter().all(|p| p.abs() < 1e-10));
        assert!(s.pressure.mean_value().unwrap().abs() < 1e-11);
        // discrete incompressibility
        let div = d.div_u_times_q().matvec(s.velocity.coeffs());
        assert!(div.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn es_on_divergence_free_data_matches_pp() {
        let d = disc(4, PressureBc::Neumann);
        let data = ProblemData::new(VectorFunction::parse("y", "x").unwrap());
        let pp = solve_pp(&d, &data).unwrap();
        for eps in [1e-4, 1.0, 1e4] {
            let es = solve_es(&d, &data, eps).unwrap();
            let diff = es.velocity.sub(&pp.velocity).unwrap();
            assert!(diff.coeffs().iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn invalid_data_is_rejected_before_solving() {
        let d = disc(2, PressureBc::Neumann);
        let data = benchmark_data();
        assert!(matches!(solve_es(&d, &data, 0.0), Err(Error::InvalidData(_))));
        assert!(matches!(solve_es(&d, &data, -1.0), Err(Error::InvalidData(_))));
        let leaky = ProblemData::new(VectorFunction::parse("x", "0").unwrap());
        assert!(matches!(solve_stokes(&d, &leaky), Err(Error::InvalidData(_))));
        let mut bad_flux = benchmark_data();
        bad_flux.g_b = Some(BoundaryFlux::Scalar(ScalarFunction::constant(1.0)));
        assert!(matches!(solve_pp(&d, &bad_flux), Err(Error::InvalidData(_))));
        let mut no_div = benchmark_data();
        no_div.f = Some(VectorFunction::parse("x", "0").unwrap());
        assert!(matches!(solve_pp(&d, &no_div), Err(Error::InvalidData(_))));
        let dm = disc(2, PressureBc::Dirichlet);
        let mut no_pb = benchmark_data();
        no_pb.pressure_bc = PressureBc::Dirichlet;
        no_pb.p_b = None;
        assert!(matches!(solve_pp(&dm, &no_pb), Err(Error::InvalidData(_))));
    }

    #[test]
    fn es_neumann_pressure_has_zero_mean() {
        let d = disc(6, PressureBc::Neumann);
        let s = solve_es(&d, &benchmark_data(), 1.0).unwrap();
        assert!(s.pressure.mean_value().unwrap().abs() <= 1e-11);
        assert!(s.residual_norm <= 1e-10);
    }
}

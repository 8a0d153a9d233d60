//! Bilinear forms, load functionals and Dirichlet elimination.

use rayon::prelude::*;

use crate::dofs::{DofMap, Field, SpaceKind};
use crate::elements::{edge_rule, triangle_rule, AffineMap, Family, Tabulation, LOCAL_EDGES};
use crate::error::{Error, Result};
use crate::functions::{BoundaryFlux, ScalarFunction, VectorFunction};
use crate::mesh::{Mesh, Point, SideSet};
use crate::sparse::{LuOptions, SolveError, SparseLu, SparseMatrix, TripletBuilder, RESIDUAL_TOLERANCE};

/// Triangle quadrature degree for matrices.
pub const MATRIX_DEGREE: usize = 4;
/// Triangle quadrature degree for volume loads with general data.
pub const LOAD_DEGREE: usize = 6;
/// Edge quadrature degree for boundary loads.
pub const EDGE_DEGREE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// `∫ ∇u : ∇φ`, vector P2 × vector P2.
    LaplacianVector,
    /// `∫ ∇p · ∇ψ`, scalar × scalar of one family.
    LaplacianScalar,
    /// `∫ ∇p · φ`: rows vector P2 (test φ), columns P1 (trial p).
    GradPDotV,
    /// `∫ (div u) ψ`: rows P1 (test ψ), columns vector P2 (trial u).
    DivUTimesQ,
    /// `∫ u v`, scalar × scalar of one family.
    Mass,
}

fn check_spaces(form: Form, row: &DofMap, col: &DofMap) -> Result<()> {
    use SpaceKind::*;
    let ok = match form {
        Form::LaplacianVector => row.kind() == P2Vec && col.kind() == P2Vec,
        Form::LaplacianScalar | Form::Mass => row.kind().is_scalar() && row.kind() == col.kind(),
        Form::GradPDotV => row.kind() == P2Vec && col.kind() == P1,
        Form::DivUTimesQ => row.kind() == P1 && col.kind() == P2Vec,
    };
    if !ok {
        return Err(Error::SpaceMismatch(format!(
            "{form:?} is not defined for rows {:?} and columns {:?}",
            row.kind(),
            col.kind()
        )));
    }
    if !std::sync::Arc::ptr_eq(row.mesh(), col.mesh()) {
        return Err(Error::SpaceMismatch(
            "row and column spaces live on different meshes".into(),
        ));
    }
    Ok(())
}

/// Physical gradients of every basis function at every quadrature point.
fn physical_gradients(tab: &Tabulation, map: &AffineMap) -> Vec<Vec<[f64; 2]>> {
    tab.gradients
        .iter()
        .map(|gs| gs.iter().map(|&g| map.push_gradient(g)).collect())
        .collect()
}

fn local_matrix(form: Form, map: &AffineMap, rt: &Tabulation, ct: &Tabulation, rc: usize, cc: usize) -> Vec<f64> {
    let (nr, nc) = (rt.values[0].len() * rc, ct.values[0].len() * cc);
    let mut k = vec![0.0; nr * nc];
    let det = map.determinant.abs();
    let rg = physical_gradients(rt, map);
    let cg = physical_gradients(ct, map);
    for (q, &w) in rt.rule.weights.iter().enumerate() {
        let w = w * det;
        let (rv, cv, rg, cg) = (&rt.values[q], &ct.values[q], &rg[q], &cg[q]);
        match form {
            Form::LaplacianScalar => {
                for a in 0..rv.len() {
                    for b in 0..cv.len() {
                        k[a * nc + b] += w * (rg[a][0] * cg[b][0] + rg[a][1] * cg[b][1]);
                    }
                }
            }
            Form::Mass => {
                for a in 0..rv.len() {
                    for b in 0..cv.len() {
                        k[a * nc + b] += w * rv[a] * cv[b];
                    }
                }
            }
            Form::LaplacianVector => {
                for a in 0..rv.len() {
                    for b in 0..cv.len() {
                        let s = w * (rg[a][0] * cg[b][0] + rg[a][1] * cg[b][1]);
                        for c in 0..2 {
                            k[(2 * a + c) * nc + 2 * b + c] += s;
                        }
                    }
                }
            }
            Form::GradPDotV => {
                for a in 0..rv.len() {
                    for b in 0..cv.len() {
                        for c in 0..2 {
                            k[(2 * a + c) * nc + b] += w * rv[a] * cg[b][c];
                        }
                    }
                }
            }
            Form::DivUTimesQ => {
                for a in 0..rv.len() {
                    for b in 0..cv.len() {
                        for c in 0..2 {
                            k[a * nc + 2 * b + c] += w * rv[a] * cg[b][c];
                        }
                    }
                }
            }
        }
    }
    k
}

/// Assembles `form` with rows from `row` and columns from `col`. Cell
/// contributions are computed in parallel and merged in cell order, so the
/// result does not depend on the thread count.
pub fn assemble_matrix(row: &DofMap, col: &DofMap, form: Form) -> Result<SparseMatrix> {
    check_spaces(form, row, col)?;
    let mesh = row.mesh();
    let rule = triangle_rule(MATRIX_DEGREE)?;
    let rt = Tabulation::new(row.kind().family(), &rule);
    let ct = Tabulation::new(col.kind().family(), &rule);
    let (rc, cc) = (row.components(), col.components());
    let locals: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let map = AffineMap::from_vertices(mesh.cell_vertices(c));
            local_matrix(form, &map, &rt, &ct, rc, cc)
        })
        .collect();
    let (nr, nc) = (row.local_dofs(), col.local_dofs());
    let mut t = TripletBuilder::with_capacity(row.num_dofs(), col.num_dofs(), locals.len() * nr * nc);
    for (c, k) in locals.iter().enumerate() {
        let (rd, cd) = (row.cell_dofs(c), col.cell_dofs(c));
        for a in 0..nr {
            for b in 0..nc {
                let v = k[a * nc + b];
                if v != 0.0 {
                    t.push(rd[a], cd[b], v);
                }
            }
        }
    }
    let mut m = t.build();
    m.symmetric = matches!(form, Form::LaplacianScalar | Form::LaplacianVector | Form::Mass);
    Ok(m)
}

#[derive(Clone, Copy, Debug)]
pub enum LoadKind<'a> {
    /// `∫ F · φ` on the vector space.
    BodyForce(&'a VectorFunction),
    /// `∫ (div F) ψ` on a scalar space.
    DivFVolume(&'a ScalarFunction),
    /// `∫_{sides} g ψ` on a scalar space.
    NeumannBoundary { flux: &'a BoundaryFlux, sides: SideSet },
}

pub fn assemble_load(space: &DofMap, kind: LoadKind<'_>) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let mut out = vec![0.0; space.num_dofs()];
    match kind {
        LoadKind::BodyForce(f) => {
            if space.kind() != SpaceKind::P2Vec {
                return Err(Error::SpaceMismatch("body force needs the vector space".into()));
            }
            volume_load(mesh, space, |p| f.eval_at(p).map(|v| v.to_vec()), &mut out)?;
        }
        LoadKind::DivFVolume(g) => {
            if !space.kind().is_scalar() {
                return Err(Error::SpaceMismatch("volume source needs a scalar space".into()));
            }
            volume_load(mesh, space, |p| g.eval_at(p).map(|v| vec![v]), &mut out)?;
        }
        LoadKind::NeumannBoundary { flux, sides } => {
            if !space.kind().is_scalar() {
                return Err(Error::SpaceMismatch("boundary flux needs a scalar space".into()));
            }
            boundary_load(mesh, space, flux, sides, &mut out)?;
        }
    }
    Ok(out)
}

fn volume_load(
    mesh: &Mesh,
    space: &DofMap,
    f: impl Fn(Point) -> Result<Vec<f64>> + Sync,
    out: &mut [f64],
) -> Result<()> {
    let rule = triangle_rule(LOAD_DEGREE)?;
    let tab = Tabulation::new(space.kind().family(), &rule);
    let nc = space.components();
    let locals: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let map = AffineMap::from_vertices(mesh.cell_vertices(c));
            let det = map.determinant.abs();
            let mut local = vec![0.0; space.local_dofs()];
            for (q, (xi, w)) in rule.iter().enumerate() {
                let val = f(map.apply(xi))?;
                for (a, phi) in tab.values[q].iter().enumerate() {
                    for comp in 0..nc {
                        local[nc * a + comp] += w * det * phi * val[comp];
                    }
                }
            }
            Ok(local)
        })
        .collect::<Result<_>>()?;
    for (c, local) in locals.iter().enumerate() {
        for (&d, v) in space.cell_dofs(c).iter().zip(local) {
            out[d] += v;
        }
    }
    Ok(())
}

/// Basis values on local edge `k` of a cell at barycentric parameter `s`
/// measured from local vertex `k`; functions vanishing on the edge are exactly 0.
fn edge_trace_basis(family: Family, k: usize, s: f64) -> Vec<f64> {
    let mut l = [0.0; 3];
    l[k] = 1.0 - s;
    l[(k + 1) % 3] = s;
    let mut v: Vec<f64> = l.to_vec();
    if family == Family::P2 {
        for x in &mut v {
            *x *= 2.0 * *x - 1.0;
        }
        v.extend(LOCAL_EDGES.map(|[i, j]| 4.0 * l[i] * l[j]));
    }
    v
}

fn boundary_load(mesh: &Mesh, space: &DofMap, g: &BoundaryFlux, sides: SideSet, out: &mut [f64]) -> Result<()> {
    let rule = edge_rule(EDGE_DEGREE)?;
    let family = space.kind().family();
    for be in mesh.boundary_edges() {
        if !be.side.is_some_and(|s| sides.contains(s)) {
            continue;
        }
        let cell = mesh.edges()[be.edge].cells[0];
        let k = mesh.cell_edges()[cell]
            .iter()
            .position(|&e| e == be.edge)
            .expect("edge belongs to its cell");
        let tri = mesh.triangles()[cell];
        let (a, b) = (mesh.vertices()[tri[k]], mesh.vertices()[tri[(k + 1) % 3]]);
        let len = mesh.edge_length(be.edge);
        let dofs = space.cell_dofs(cell);
        for (t, w) in rule.iter() {
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let gv = g.eval(p[0], p[1], be.normal)?;
            for (&d, phi) in dofs.iter().zip(edge_trace_basis(family, k, t)) {
                out[d] += w * len * gv * phi;
            }
        }
    }
    Ok(())
}

/// A linear system on the free dofs after Dirichlet elimination, optionally
/// bordered by one mean-value constraint row and column.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// `free_dofs[k]` is the full-system index of reduced unknown `k`.
    pub free_dofs: Vec<usize>,
    /// Full-length vector with the imposed values at constrained dofs and
    /// zero elsewhere.
    pub lifting: Vec<f64>,
    pub constrained: Vec<bool>,
    pub has_multiplier: bool,
}

/// Result of solving an [`AssembledSystem`].
#[derive(Clone, Debug)]
pub struct SystemSolution {
    /// Full-length solution including imposed values.
    pub full: Vec<f64>,
    pub multiplier: Option<f64>,
    /// Relative residual of the reduced system.
    pub residual: f64,
    /// Relative size of the last refinement correction.
    pub correction: f64,
}

/// Eliminates the `constrained` dofs of `matrix x = rhs`, moving the
/// imposed `values` to the right-hand side. With `mean_row = Some(m)` the
/// system is bordered so that `m · x = 0` holds for the full solution.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &[f64],
    constrained: &[bool],
    values: &[f64],
    mean_row: Option<&[f64]>,
) -> AssembledSystem {
    let n = matrix.nrows();
    assert_eq!(matrix.ncols(), n);
    assert_eq!(rhs.len(), n);
    assert_eq!(constrained.len(), n);
    assert_eq!(values.len(), n);
    const NONE: usize = usize::MAX;
    let mut reduced = vec![NONE; n];
    let mut free_dofs = Vec::new();
    for (i, &c) in constrained.iter().enumerate() {
        if !c {
            reduced[i] = free_dofs.len();
            free_dofs.push(i);
        }
    }
    let lifting: Vec<f64> = (0..n).map(|i| if constrained[i] { values[i] } else { 0.0 }).collect();
    let nf = free_dofs.len();
    let size = nf + usize::from(mean_row.is_some());
    let mut t = TripletBuilder::with_capacity(size, size, matrix.nnz() + 2 * n);
    let mut b = vec![0.0; size];
    for (k, &i) in free_dofs.iter().enumerate() {
        let mut bi = rhs[i];
        for (j, v) in matrix.row(i) {
            if constrained[j] {
                bi -= v * lifting[j];
            } else {
                t.push(k, reduced[j], v);
            }
        }
        b[k] = bi;
    }
    if let Some(m) = mean_row {
        assert_eq!(m.len(), n);
        let mut target = 0.0;
        for i in 0..n {
            if m[i] == 0.0 {
                continue;
            }
            if constrained[i] {
                target -= m[i] * lifting[i];
            } else {
                t.push(nf, reduced[i], m[i]);
                t.push(reduced[i], nf, m[i]);
            }
        }
        b[nf] = target;
    }
    let mut mat = t.build();
    mat.symmetric = matrix.symmetric;
    AssembledSystem {
        matrix: mat,
        rhs: b,
        free_dofs,
        lifting,
        constrained: constrained.to_vec(),
        has_multiplier: mean_row.is_some(),
    }
}

/// [`apply_dirichlet`] for a single space, constraining that space's
/// Dirichlet dofs to the coefficients of `values`.
pub fn apply_dirichlet_field(
    matrix: &SparseMatrix,
    rhs: &[f64],
    values: &Field,
    mean_row: Option<&[f64]>,
) -> AssembledSystem {
    apply_dirichlet(matrix, rhs, values.dofmap().dirichlet_mask(), values.coeffs(), mean_row)
}

impl AssembledSystem {
    pub fn num_unknowns(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full-space vector from a reduced solution, plus the multiplier.
    pub fn reconstruct(&self, x: &[f64]) -> (Vec<f64>, Option<f64>) {
        let mut full = self.lifting.clone();
        for (k, &i) in self.free_dofs.iter().enumerate() {
            full[i] = x[k];
        }
        let mult = self.has_multiplier.then(|| x[self.free_dofs.len()]);
        (full, mult)
    }

    /// Direct sparse solve with iterative refinement. Fails if the relative
    /// residual stays above the solver tolerance.
    pub fn solve(&self) -> Result<SystemSolution> {
        if self.num_unknowns() == 0 {
            return Ok(SystemSolution {
                full: self.lifting.clone(),
                multiplier: None,
                residual: 0.0,
                correction: 0.0,
            });
        }
        let opts = LuOptions::default();
        let lu = SparseLu::factor_with(&self.matrix, &opts)?;
        let out = lu.solve_refined(&self.matrix, &self.rhs, opts.refinement_steps)?;
        if out.residual > RESIDUAL_TOLERANCE {
            return Err(SolveError::Inaccurate {
                residual: out.residual,
                tolerance: RESIDUAL_TOLERANCE,
            }
            .into());
        }
        let (full, multiplier) = self.reconstruct(&out.x);
        Ok(SystemSolution {
            full,
            multiplier,
            residual: out.residual,
            correction: out.correction,
        })
    }
}

/// `∫ ψ_i` for every basis function of a scalar space.
pub fn integral_row(space: &DofMap) -> Result<Vec<f64>> {
    assemble_load(space, LoadKind::DivFVolume(&ScalarFunction::constant(1.0)))
}

/// Vector P2 interpolation helper shared by the solvers.
pub fn interpolate(space: std::sync::Arc<DofMap>, f: &VectorFunction) -> Result<Field> {
    let [fx, fy] = f.components();
    Field::interpolate_vector(space, |x, y| fx.raw(x, y), |x, y| fy.raw(x, y))
}

pub fn interpolate_scalar(space: std::sync::Arc<DofMap>, f: &ScalarFunction) -> Result<Field> {
    Field::interpolate_scalar(space, |x, y| f.raw(x, y))
}

#![allow(dead_code)]

use std::sync::Arc;

use estokes::assembly::Form;
use estokes::dofs::{DofMap, SpaceKind};
use estokes::functions::{BoundaryFlux, ScalarFunction, VectorFunction};
use estokes::mesh::{build_structured, Mesh, Rect};
use estokes::sparse::SparseMatrix;
use estokes::systems::{Discretization, PressureBc, ProblemData};

pub fn unit_mesh(n: usize) -> Arc<Mesh> {
    Arc::new(build_structured(n, n, Rect::unit()).unwrap())
}

pub fn disc(n: usize, regime: PressureBc) -> Discretization {
    Discretization::new(unit_mesh(n), regime).unwrap()
}

/// u_b = (x(x-1), y(y-1)), g_b = (2,2)·ν, F = 0, p_b = 2x+2y-2.
pub fn benchmark_data(regime: PressureBc) -> ProblemData {
    let mut d = ProblemData::new(VectorFunction::parse("x*(x-1)", "y*(y-1)").unwrap());
    d.g_b = Some(BoundaryFlux::NormalComponent(VectorFunction::parse("2", "2").unwrap()));
    d.p_b = Some(ScalarFunction::parse("2*x+2*y-2").unwrap());
    d.pressure_bc = regime;
    d
}

pub fn divergence_free_data() -> ProblemData {
    let mut d = ProblemData::new(VectorFunction::parse("y", "x").unwrap());
    d.g_b = Some(BoundaryFlux::zero());
    d
}

/// Slope of the least-squares line through (log10 x, log10 y).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

// Degree-4 six-point rule on the triangle, barycentric points, weights sum to 1.
const A1: f64 = 0.445948490915965;
const B1: f64 = 0.108103018168070;
const W1: f64 = 0.223381589678011;
const A2: f64 = 0.091576213509771;
const B2: f64 = 0.816847572980459;
const W2: f64 = 0.109951743655322;

fn rule() -> Vec<([f64; 3], f64)> {
    vec![
        ([B1, A1, A1], W1),
        ([A1, B1, A1], W1),
        ([A1, A1, B1], W1),
        ([B2, A2, A2], W2),
        ([A2, B2, A2], W2),
        ([A2, A2, B2], W2),
    ]
}

/// Scalar basis values and physical gradients at barycentric point `l`.
fn basis(quadratic: bool, l: [f64; 3], gl: [[f64; 2]; 3]) -> Vec<(f64, [f64; 2])> {
    let mut out = Vec::new();
    if !quadratic {
        for i in 0..3 {
            out.push((l[i], gl[i]));
        }
        return out;
    }
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out.push((l[i] * (2.0 * l[i] - 1.0), [s * gl[i][0], s * gl[i][1]]));
    }
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        out.push((
            4.0 * l[a] * l[b],
            [
                4.0 * (l[a] * gl[b][0] + l[b] * gl[a][0]),
                4.0 * (l[a] * gl[b][1] + l[b] * gl[a][1]),
            ],
        ));
    }
    out
}

/// Interleaved vector basis `(component, value, gradient)`, local index 2a+c.
fn vector_basis(scalar: &[(f64, [f64; 2])]) -> Vec<(usize, f64, [f64; 2])> {
    let mut out = Vec::new();
    for &(v, g) in scalar {
        for c in 0..2 {
            out.push((c, v, g));
        }
    }
    out
}

/// Brute-force dense assembly: loops over cells and quadrature points and
/// adds every basis pair, with no sparse structure.
pub fn dense_assemble(row: &DofMap, col: &DofMap, form: Form) -> Vec<Vec<f64>> {
    let mesh = row.mesh();
    let mut m = vec![vec![0.0; col.num_dofs()]; row.num_dofs()];
    let quad_row = row.kind() != SpaceKind::P1;
    let quad_col = col.kind() != SpaceKind::P1;
    for cell in 0..mesh.num_cells() {
        let p = mesh.cell_vertices(cell);
        let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let gl: [[f64; 2]; 3] = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            [(p[j][1] - p[k][1]) / two_a, (p[k][0] - p[j][0]) / two_a]
        });
        let area = two_a.abs() / 2.0;
        let rd = row.cell_dofs(cell);
        let cd = col.cell_dofs(cell);
        for (l, w) in rule() {
            let w = w * area;
            let rb = basis(quad_row, l, gl);
            let cb = basis(quad_col, l, gl);
            match form {
                Form::LaplacianScalar | Form::Mass => {
                    for (a, &(ra, ga)) in rb.iter().enumerate() {
                        for (b, &(rbv, gb)) in cb.iter().enumerate() {
                            let v = if form == Form::Mass {
                                ra * rbv
                            } else {
                                ga[0] * gb[0] + ga[1] * gb[1]
                            };
                            m[rd[a]][cd[b]] += w * v;
                        }
                    }
                }
                Form::LaplacianVector => {
                    for (a, &(ca, _, ga)) in vector_basis(&rb).iter().enumerate() {
                        for (b, &(cb_, _, gb)) in vector_basis(&cb).iter().enumerate() {
                            if ca == cb_ {
                                m[rd[a]][cd[b]] += w * (ga[0] * gb[0] + ga[1] * gb[1]);
                            }
                        }
                    }
                }
                Form::GradPDotV => {
                    for (a, &(ca, va, _)) in vector_basis(&rb).iter().enumerate() {
                        for (b, &(_, gb)) in cb.iter().enumerate() {
                            m[rd[a]][cd[b]] += w * va * gb[ca];
                        }
                    }
                }
                Form::DivUTimesQ => {
                    for (a, &(va, _)) in rb.iter().enumerate() {
                        for (b, &(cb_, _, gb)) in vector_basis(&cb).iter().enumerate() {
                            m[rd[a]][cd[b]] += w * va * gb[cb_];
                        }
                    }
                }
            }
        }
    }
    m
}

pub fn max_entry_difference(sparse: &SparseMatrix, dense: &[Vec<f64>]) -> f64 {
    assert_eq!(sparse.nrows(), dense.len());
    let mut worst = 0.0f64;
    for (i, row) in dense.iter().enumerate() {
        assert_eq!(row.len(), sparse.ncols());
        for (j, &v) in row.iter().enumerate() {
            worst = worst.max((sparse.get(i, j) - v).abs());
        }
    }
    worst
}

//! Lagrange P1/P2 bases on the reference triangle (0,0), (1,0), (0,1),
//! Gaussian quadrature on triangles and edges, and affine cell maps.
//!
//! Local P2 numbering: vertices 0, 1, 2, then the midpoints of edges
//! (0,1), (1,2), (2,0).

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    P1,
    P2,
}

impl Family {
    pub fn num_basis(self) -> usize {
        match self {
            Family::P1 => 3,
            Family::P2 => 6,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Family::P1 => 1,
            Family::P2 => 2,
        }
    }
}

/// Local edges as pairs of local vertices, in P2 midpoint order.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Clone, Debug, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    /// Gradients with respect to reference coordinates.
    pub gradients: Vec<[f64; 2]>,
}

const REF_TOL: f64 = 1e-12;

pub fn eval_basis(family: Family, point: Point) -> Result<BasisEval> {
    let [xi, eta] = point;
    if !(xi >= -REF_TOL && eta >= -REF_TOL && xi + eta <= 1.0 + REF_TOL) {
        return Err(Error::OutsideReference(xi, eta));
    }
    let l = [1.0 - xi - eta, xi, eta];
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    Ok(match family {
        Family::P1 => BasisEval {
            values: l.to_vec(),
            gradients: dl.to_vec(),
        },
        Family::P2 => {
            let mut values = Vec::with_capacity(6);
            let mut gradients = Vec::with_capacity(6);
            for i in 0..3 {
                values.push(l[i] * (2.0 * l[i] - 1.0));
                let s = 4.0 * l[i] - 1.0;
                gradients.push([s * dl[i][0], s * dl[i][1]]);
            }
            for [i, j] in LOCAL_EDGES {
                values.push(4.0 * l[i] * l[j]);
                gradients.push([
                    4.0 * (dl[i][0] * l[j] + l[i] * dl[j][0]),
                    4.0 * (dl[i][1] * l[j] + l[i] * dl[j][1]),
                ]);
            }
            BasisEval { values, gradients }
        }
    })
}

/// Reference coordinates of the Lagrange nodes of a family.
pub fn reference_nodes(family: Family) -> Vec<Point> {
    let mut nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    if family == Family::P2 {
        nodes.extend([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]);
    }
    nodes
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Polynomials of total degree up to this are integrated exactly.
    pub degree: usize,
}

pub type TriangleRule = QuadratureRule<Point>;
/// Points are parameters in [0, 1].
pub type EdgeRule = QuadratureRule<f64>;

impl<P: Copy> QuadratureRule<P> {
    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<Point>, wts: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    pts.extend([[a, a], [b, a], [a, b]]);
    wts.extend([w; 3]);
}

fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<Point>, wts: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    pts.extend([[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]]);
    wts.extend([w; 6]);
}

/// Symmetric Gaussian rules with positive weights on the reference triangle.
/// Weights sum to the reference area 1/2.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    let mut p = Vec::new();
    let mut w = Vec::new();
    let exact = match degree {
        1 => {
            p.push([1.0 / 3.0, 1.0 / 3.0]);
            w.push(0.5);
            1
        }
        2 => {
            orbit3(1.0 / 6.0, 1.0 / 6.0, &mut p, &mut w);
            2
        }
        3 | 4 => {
            orbit3(
                0.445_948_490_915_964_886_318_329_3,
                0.111_690_794_839_005_732_847_503_5,
                &mut p,
                &mut w,
            );
            orbit3(
                0.091_576_213_509_770_743_459_571_46,
                0.054_975_871_827_660_933_819_163_16,
                &mut p,
                &mut w,
            );
            4
        }
        5 => {
            let s15 = 15f64.sqrt();
            p.push([1.0 / 3.0, 1.0 / 3.0]);
            w.push(9.0 / 80.0);
            orbit3((6.0 - s15) / 21.0, (155.0 - s15) / 2400.0, &mut p, &mut w);
            orbit3((6.0 + s15) / 21.0, (155.0 + s15) / 2400.0, &mut p, &mut w);
            5
        }
        6 => {
            orbit3(
                0.063_089_014_491_502_228_340_331_6,
                0.025_422_453_185_103_408_460_468_4,
                &mut p,
                &mut w,
            );
            orbit3(
                0.249_286_745_170_910_421_291_638_6,
                0.058_393_137_863_189_683_012_644_81,
                &mut p,
                &mut w,
            );
            orbit6(
                0.053_145_049_844_816_947_353_249_67,
                0.310_352_451_033_784_405_416_607_7,
                0.041_425_537_809_186_787_596_776_73,
                &mut p,
                &mut w,
            );
            6
        }
        d => return Err(Error::UnsupportedDegree(d)),
    };
    Ok(QuadratureRule {
        points: p,
        weights: w,
        degree: exact,
    })
}

/// Gauss–Legendre rules on [0, 1] with the fewest points reaching `degree`.
pub fn edge_rule(degree: usize) -> Result<EdgeRule> {
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match degree {
        1 => (vec![0.0], vec![2.0]),
        2 | 3 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        4 | 5 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        6 => {
            let r = 2.0 * (6.0f64 / 5.0).sqrt();
            let a = ((3.0 - r) / 7.0).sqrt();
            let b = ((3.0 + r) / 7.0).sqrt();
            let s30 = 30f64.sqrt();
            let (wa, wb) = ((18.0 + s30) / 36.0, (18.0 - s30) / 36.0);
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        d => return Err(Error::UnsupportedDegree(d)),
    };
    let exact = 2 * nodes.len() - 1;
    Ok(QuadratureRule {
        points: nodes.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
        degree: exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub jacobian: [[f64; 2]; 2],
    pub determinant: f64,
    pub inverse_transpose: [[f64; 2]; 2],
    pub translation: Point,
}

impl AffineMap {
    pub fn from_vertices(v: [Point; 3]) -> AffineMap {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        AffineMap {
            jacobian: j,
            determinant: det,
            inverse_transpose: inv_t,
            translation: v[0],
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let j = &self.jacobian;
        [
            self.translation[0] + j[0][0] * p[0] + j[0][1] * p[1],
            self.translation[1] + j[1][0] * p[0] + j[1][1] * p[1],
        ]
    }

    /// Maps a reference gradient to physical coordinates.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inverse_transpose;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }
}

pub fn geometry_map(mesh: &Mesh, cell: usize) -> Result<AffineMap> {
    if cell >= mesh.num_cells() {
        return Err(Error::IndexOutOfRange {
            what: "cells",
            index: cell,
            len: mesh.num_cells(),
        });
    }
    Ok(AffineMap::from_vertices(mesh.cell_vertices(cell)))
}

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub family: Family,
    pub rule: TriangleRule,
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `gradients[q][i]`, reference coordinates.
    pub gradients: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    pub fn new(family: Family, rule: &TriangleRule) -> Tabulation {
        let mut values = Vec::with_capacity(rule.points.len());
        let mut gradients = Vec::with_capacity(rule.points.len());
        for &p in &rule.points {
            let b = eval_basis(family, p).expect("quadrature points lie in the reference triangle");
            values.push(b.values);
            gradients.push(b.gradients);
        }
        Tabulation {
            family,
            rule: rule.clone(),
            values,
            gradients,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, Rect};
    use proptest::prelude::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn p1_centroid() {
        let b = eval_basis(Family::P1, [1.0 / 3.0, 1.0 / 3.0]).unwrap();
        for v in b.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_lagrange_property() {
        for (k, node) in reference_nodes(Family::P2).into_iter().enumerate() {
            let b = eval_basis(Family::P2, node).unwrap();
            for (i, v) in b.values.iter().enumerate() {
                let expected = if i == k { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-15, "node {k} basis {i}: {v}");
            }
        }
        let mid = eval_basis(Family::P2, [0.5, 0.0]).unwrap();
        assert_eq!(&mid.values[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(mid.values[3], 1.0);
    }

    #[test]
    fn rejects_points_outside() {
        assert!(eval_basis(Family::P1, [0.8, 0.3]).is_err());
        assert!(eval_basis(Family::P2, [-0.1, 0.3]).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let r = triangle_rule(2).unwrap();
        let v: f64 = r.iter().map(|(p, w)| w * p[0] * p[0]).sum();
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
        for d in 1..=6 {
            let r = triangle_rule(d).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let e = edge_rule(d).unwrap();
            assert!((e.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let e = edge_rule(3).unwrap();
        let v: f64 = e.iter().map(|(t, w)| w * t.powi(3)).sum();
        assert!((v - 0.25).abs() < 1e-15);
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(7).is_err());
        assert!(edge_rule(9).is_err());
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        for d in 1..=6 {
            let r = triangle_rule(d).unwrap();
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let q: f64 = r
                        .iter()
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-14, "degree {d}, x^{a} y^{b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn edge_rules_integrate_monomials() {
        for d in 1..=6 {
            let r = edge_rule(d).unwrap();
            for a in 0..=d as i32 {
                let q: f64 = r.iter().map(|(t, w)| w * t.powi(a)).sum();
                assert!((q - 1.0 / (a as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn geometry_examples() {
        let id = AffineMap::from_vertices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(id.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(id.determinant, 1.0);
        let big = AffineMap::from_vertices([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(big.determinant, 4.0);

        let m = build_structured(1, 1, Rect::unit()).unwrap();
        for c in 0..2 {
            let g = geometry_map(&m, c).unwrap();
            assert!((g.determinant - 1.0).abs() < 1e-15);
            assert!((g.determinant - 2.0 * m.signed_area(c)).abs() < 1e-15);
            let verts = m.cell_vertices(c);
            for (r, v) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().zip(verts) {
                assert_eq!(g.apply(*r), v);
            }
        }
        assert!(geometry_map(&m, 2).is_err());
    }

    #[test]
    fn basis_reproduces_polynomials_on_cells() {
        let m = build_structured(3, 2, Rect::new(-1.0, 0.5, 2.0, 1.5).unwrap()).unwrap();
        let lin = |p: Point| 3.0 * p[0] - 2.0 * p[1];
        let quad = |p: Point| p[0] * p[0] - 2.0 * p[0] * p[1] + 0.5 * p[1] * p[1];
        let quad_grad = |p: Point| [2.0 * p[0] - 2.0 * p[1], -2.0 * p[0] + p[1]];
        for c in 0..m.num_cells() {
            let g = geometry_map(&m, c).unwrap();
            for xi in [[0.2, 0.3], [0.0, 0.0], [0.6, 0.1]] {
                let b1 = eval_basis(Family::P1, xi).unwrap();
                let nodes1 = reference_nodes(Family::P1);
                let mut grad = [0.0; 2];
                for (i, n) in nodes1.iter().enumerate() {
                    let gi = g.push_gradient(b1.gradients[i]);
                    let c = lin(g.apply(*n));
                    grad[0] += c * gi[0];
                    grad[1] += c * gi[1];
                }
                assert!((grad[0] - 3.0).abs() < 1e-12 && (grad[1] + 2.0).abs() < 1e-12);

                let b2 = eval_basis(Family::P2, xi).unwrap();
                let (mut val, mut grad) = (0.0, [0.0; 2]);
                for (i, n) in reference_nodes(Family::P2).iter().enumerate() {
                    let c = quad(g.apply(*n));
                    let gi = g.push_gradient(b2.gradients[i]);
                    val += c * b2.values[i];
                    grad[0] += c * gi[0];
                    grad[1] += c * gi[1];
                }
                let x = g.apply(xi);
                let exact = quad_grad(x);
                assert!((val - quad(x)).abs() < 1e-12);
                assert!((grad[0] - exact[0]).abs() < 1e-12 && (grad[1] - exact[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affine_inverse_transpose() {
        let g = AffineMap::from_vertices([[0.1, 0.2], [1.3, 0.4], [0.5, 1.9]]);
        let j = g.jacobian;
        let it = g.inverse_transpose;
        for r in 0..2 {
            for c in 0..2 {
                // J * (J^{-T})^T = J * J^{-1}
                let v = j[r][0] * it[c][0] + j[r][1] * it[c][1];
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (xi, eta) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            for fam in [Family::P1, Family::P2] {
                let e = eval_basis(fam, [xi, eta]).unwrap();
                prop_assert_eq!(e.values.len(), fam.num_basis());
                let s: f64 = e.values.iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-13);
                let gx: f64 = e.gradients.iter().map(|g| g[0]).sum();
                let gy: f64 = e.gradients.iter().map(|g| g[1]).sum();
                prop_assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
            }
        }
    }
}

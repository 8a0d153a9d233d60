//! Error norms of finite-element fields and the discrete dual norm on the
//! pressure space.

use std::sync::Arc;

use rayon::prelude::*;

use crate::assembly::{apply_dirichlet, assemble_matrix, integral_row, Form};
use crate::dofs::{DofMap, Field, SpaceKind};
use crate::elements::{triangle_rule, AffineMap, Tabulation};
use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::mesh::{Mesh, Point};

/// Triangle quadrature degree for all error integrals.
pub const NORM_DEGREE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
    /// L² norm of the difference after removing its mean (per component).
    pub l2_mean_zero: f64,
}

#[derive(Clone, Debug)]
pub struct AnalyticComponent {
    pub value: ScalarFunction,
    pub gradient: Option<[ScalarFunction; 2]>,
}

/// Closed-form reference with one entry per field component.
#[derive(Clone, Debug)]
pub struct Analytic {
    pub components: Vec<AnalyticComponent>,
}

impl Analytic {
    pub fn scalar(value: ScalarFunction, gradient: Option<[ScalarFunction; 2]>) -> Self {
        Analytic {
            components: vec![AnalyticComponent { value, gradient }],
        }
    }

    pub fn vector(components: [AnalyticComponent; 2]) -> Self {
        Analytic {
            components: components.into(),
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.components.iter().all(|c| c.gradient.is_some())
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    Zero,
    Analytic(&'a Analytic),
    /// Another field, possibly on a different mesh covering the same domain.
    Field(&'a Field),
}

/// Values and physical gradients of a field at the quadrature points of an
/// integration mesh.
struct Sampler<'a> {
    field: &'a Field,
    own_mesh: bool,
    tab: Tabulation,
}

impl<'a> Sampler<'a> {
    fn new(field: &'a Field, mesh: &Arc<Mesh>, tab_rule: &crate::elements::TriangleRule) -> Self {
        Sampler {
            field,
            own_mesh: Arc::ptr_eq(field.mesh(), mesh),
            tab: Tabulation::new(field.kind().family(), tab_rule),
        }
    }

    fn sample(&self, cell: usize, q: usize, map: &AffineMap, x: Point) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        if !self.own_mesh {
            return self.field.eval_at(x);
        }
        let nc = self.field.dofmap().components();
        let dofs = self.field.dofmap().cell_dofs(cell);
        let coeffs = self.field.coeffs();
        let mut val = vec![0.0; nc];
        let mut grad = vec![[0.0; 2]; nc];
        for (a, (&phi, &g)) in self.tab.values[q].iter().zip(&self.tab.gradients[q]).enumerate() {
            let g = map.push_gradient(g);
            for c in 0..nc {
                let u = coeffs[dofs[nc * a + c]];
                val[c] += u * phi;
                grad[c][0] += u * g[0];
                grad[c][1] += u * g[1];
            }
        }
        Ok((val, grad))
    }
}

struct CellSums {
    /// Difference values at each quadrature point, `[q][component]`.
    values: Vec<Vec<f64>>,
    weights: Vec<f64>,
    sq: f64,
    grad_sq: f64,
}

fn integrate_difference(field: &Field, reference: Reference<'_>, gradients: bool) -> Result<ErrorReport> {
    let nc = field.dofmap().components();
    if let Reference::Analytic(a) = reference {
        if a.components.len() != nc {
            return Err(Error::SpaceMismatch(format!(
                "reference has {} components, field has {nc}",
                a.components.len()
            )));
        }
        if gradients && !a.has_gradient() {
            return Err(Error::InvalidData(
                "the H¹ seminorm needs the gradient of the analytic reference".into(),
            ));
        }
    }
    if let Reference::Field(g) = reference {
        if g.dofmap().components() != nc {
            return Err(Error::SpaceMismatch(
                "fields have different numbers of components".into(),
            ));
        }
    }
    // integrate over the finer of the two meshes
    let mesh = match reference {
        Reference::Field(g) if g.mesh().num_cells() > field.mesh().num_cells() => g.mesh().clone(),
        _ => field.mesh().clone(),
    };
    let rule = triangle_rule(NORM_DEGREE)?;
    let own = Sampler::new(field, &mesh, &rule);
    let other = match reference {
        Reference::Field(g) => Some(Sampler::new(g, &mesh, &rule)),
        _ => None,
    };

    let cells: Vec<CellSums> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|cell| -> Result<CellSums> {
            let map = AffineMap::from_vertices(mesh.cell_vertices(cell));
            let det = map.determinant.abs();
            let mut out = CellSums {
                values: Vec::with_capacity(rule.points.len()),
                weights: Vec::with_capacity(rule.points.len()),
                sq: 0.0,
                grad_sq: 0.0,
            };
            for (q, (xi, w)) in rule.iter().enumerate() {
                let x = map.apply(xi);
                let (mut v, mut g) = own.sample(cell, q, &map, x)?;
                match reference {
                    Reference::Zero => {}
                    Reference::Field(_) => {
                        let (rv, rg) = other.as_ref().unwrap().sample(cell, q, &map, x)?;
                        for c in 0..nc {
                            v[c] -= rv[c];
                            g[c][0] -= rg[c][0];
                            g[c][1] -= rg[c][1];
                        }
                    }
                    Reference::Analytic(a) => {
                        for (c, comp) in a.components.iter().enumerate() {
                            v[c] -= comp.value.eval_at(x)?;
                            if gradients {
                                let [gx, gy] = comp.gradient.as_ref().unwrap();
                                g[c][0] -= gx.eval_at(x)?;
                                g[c][1] -= gy.eval_at(x)?;
                            }
                        }
                    }
                }
                let wd = w * det;
                out.sq += wd * v.iter().map(|e| e * e).sum::<f64>();
                if gradients {
                    out.grad_sq += wd * g.iter().map(|d| d[0] * d[0] + d[1] * d[1]).sum::<f64>();
                }
                out.values.push(v);
                out.weights.push(wd);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let (mut sq, mut grad_sq, mut area) = (0.0, 0.0, 0.0);
    let mut integral = vec![0.0; nc];
    for c in &cells {
        sq += c.sq;
        grad_sq += c.grad_sq;
        for (v, w) in c.values.iter().zip(&c.weights) {
            area += w;
            for k in 0..nc {
                integral[k] += w * v[k];
            }
        }
    }
    let mean: Vec<f64> = integral.iter().map(|s| s / area).collect();
    let mut centered = 0.0;
    for c in &cells {
        for (v, w) in c.values.iter().zip(&c.weights) {
            centered += w * v.iter().zip(&mean).map(|(e, m)| (e - m) * (e - m)).sum::<f64>();
        }
    }
    let (l2, h1_semi) = (sq.sqrt(), grad_sq.sqrt());
    Ok(ErrorReport {
        l2,
        h1_semi: if gradients { h1_semi } else { f64::NAN },
        h1: if gradients { (sq + grad_sq).sqrt() } else { f64::NAN },
        l2_mean_zero: centered.sqrt().min(l2),
    })
}

/// L², H¹-seminorm, H¹ and mean-zero L² norms of `field − reference`.
/// Analytic references must provide gradients.
pub fn error_norm(field: &Field, reference: Reference<'_>) -> Result<ErrorReport> {
    integrate_difference(field, reference, true)
}

/// Only the L² and mean-zero L² parts; the gradient entries are NaN.
pub fn l2_error(field: &Field, reference: Reference<'_>) -> Result<ErrorReport> {
    integrate_difference(field, reference, false)
}

/// Relative tolerance on `⟨f, 1⟩` for functionals on the Neumann pressure space.
pub const ANNIHILATION_TOLERANCE: f64 = 1e-10;

/// Discrete dual norm of a functional on the P1 pressure space `space`
/// (its Dirichlet sides select `Q`): `‖∇w‖` for the Riesz representative
/// `w ∈ Q_h` with `∫ ∇w·∇ψ = ⟨f, ψ⟩`. Entries at Dirichlet dofs are ignored.
pub fn dual_norm_q(functional: &[f64], space: &DofMap) -> Result<f64> {
    if space.kind() != SpaceKind::P1 {
        return Err(Error::SpaceMismatch(
            "the dual norm is defined on the P1 pressure space".into(),
        ));
    }
    if functional.len() != space.num_dofs() {
        return Err(Error::SpaceMismatch(format!(
            "functional has {} entries, space has {} dofs",
            functional.len(),
            space.num_dofs()
        )));
    }
    let l = assemble_matrix(space, space, Form::LaplacianScalar)?;
    let mask = space.dirichlet_mask();
    let neumann = space.num_dirichlet() == 0;
    let mean = if neumann {
        let total: f64 = functional.iter().sum();
        let scale: f64 = functional.iter().map(|f| f.abs()).sum();
        if total.abs() > ANNIHILATION_TOLERANCE * scale {
            return Err(Error::InvalidData(format!(
                "functional does not annihilate constants: ⟨f, 1⟩ = {total:e} (scale {scale:e})"
            )));
        }
        Some(integral_row(space)?)
    } else {
        None
    };
    let zeros = vec![0.0; space.num_dofs()];
    let sys = apply_dirichlet(&l, functional, mask, &zeros, mean.as_deref());
    let w = sys.solve()?.full;
    let fw: f64 = functional
        .iter()
        .zip(&w)
        .zip(mask)
        .filter(|(_, &d)| !d)
        .map(|((f, w), _)| f * w)
        .sum();
    Ok(fw.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofs::build_dofmap;
    use crate::mesh::{build_structured, BoundaryPartition, Rect, Side};
    use proptest::prelude::*;

    fn p1(n: usize, part: BoundaryPartition) -> Arc<DofMap> {
        Arc::new(build_dofmap(
            Arc::new(build_structured(n, n, Rect::unit()).unwrap()),
            SpaceKind::P1,
            part,
        ))
    }

    #[test]
    fn norms_of_x() {
        let s = p1(4, BoundaryPartition::pure_neumann());
        let x = Field::interpolate_scalar(s, |x, _| Ok(x)).unwrap();
        let r = error_norm(&x, Reference::Zero).unwrap();
        assert!((r.l2 - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((r.h1_semi - 1.0).abs() < 1e-14);
        assert!((r.h1 * r.h1 - r.l2 * r.l2 - r.h1_semi * r.h1_semi).abs() < 1e-12 * r.h1 * r.h1);
        assert!((r.l2_mean_zero - (1.0f64 / 12.0).sqrt()).abs() < 1e-14);
        let exact = Analytic::scalar(
            ScalarFunction::parse("x").unwrap(),
            Some([ScalarFunction::constant(1.0), ScalarFunction::zero()]),
        );
        let r = error_norm(&x, Reference::Analytic(&exact)).unwrap();
        assert!(r.l2 < 1e-14 && r.h1 < 1e-14);
        let no_grad = Analytic::scalar(ScalarFunction::parse("x").unwrap(), None);
        assert!(error_norm(&x, Reference::Analytic(&no_grad)).is_err());
        assert!(l2_error(&x, Reference::Analytic(&no_grad)).unwrap().l2 < 1e-14);
    }

    #[test]
    fn field_reference_on_a_finer_mesh() {
        let coarse = Field::interpolate_scalar(p1(4, BoundaryPartition::pure_neumann()), |x, y| Ok(x * y)).unwrap();
        let fine = Field::interpolate_scalar(p1(8, BoundaryPartition::pure_neumann()), |x, y| Ok(x * y)).unwrap();
        let r = error_norm(&coarse, Reference::Field(&fine)).unwrap();
        let s = error_norm(&fine, Reference::Field(&coarse)).unwrap();
        assert!(r.l2 > 0.0 && (r.l2 - s.l2).abs() < 1e-14 && (r.h1_semi - s.h1_semi).abs() < 1e-13);
        let same = Field::interpolate_scalar(p1(8, BoundaryPartition::pure_neumann()), |x, y| Ok(x * y)).unwrap();
        assert!(error_norm(&fine, Reference::Field(&same)).unwrap().h1 < 1e-14);
    }

    #[test]
    fn dual_norm_inverts_the_stiffness_matrix() {
        for part in [
            BoundaryPartition::pure_neumann(),
            BoundaryPartition::with_dirichlet([Side::Left].into_iter().collect()),
        ] {
            let s = p1(6, part);
            let w0 = Field::interpolate_scalar(s.clone(), |x, y| {
                Ok(if part.dirichlet_sides().is_empty() {
                    (3.0 * x).sin() + y * y - 0.4
                } else {
                    x * (1.0 + y)
                })
            })
            .unwrap();
            let w0 = if part.dirichlet_sides().is_empty() {
                w0.subtract_mean().unwrap()
            } else {
                w0
            };
            let l = assemble_matrix(&s, &s, Form::LaplacianScalar).unwrap();
            let f = l.matvec(w0.coeffs());
            let expect = error_norm(&w0, Reference::Zero).unwrap().h1_semi;
            assert!((dual_norm_q(&f, &s).unwrap() - expect).abs() < 1e-10);
            assert_eq!(dual_norm_q(&vec![0.0; s.num_dofs()], &s).unwrap(), 0.0);
        }
        let s = p1(3, BoundaryPartition::pure_neumann());
        let mut f = vec![0.0; s.num_dofs()];
        f[0] = 1.0;
        assert!(matches!(dual_norm_q(&f, &s), Err(Error::InvalidData(_))));
    }

    proptest! {
        #[test]
        fn norm_axioms(a in proptest::collection::vec(-3.0f64..3.0, 25), b in proptest::collection::vec(-3.0f64..3.0, 25), alpha in -4.0f64..4.0) {
            let s = p1(4, BoundaryPartition::pure_neumann());
            let f = Field::new(s.clone(), a).unwrap();
            let g = Field::new(s, b).unwrap();
            let nf = error_norm(&f, Reference::Zero).unwrap();
            let ng = error_norm(&g, Reference::Zero).unwrap();
            let nsum = error_norm(&f.axpy(1.0, &g).unwrap(), Reference::Zero).unwrap();
            let nscaled = error_norm(&f.scaled(alpha), Reference::Zero).unwrap();
            for (x, y, z, s) in [
                (nf.l2, ng.l2, nsum.l2, nscaled.l2),
                (nf.h1_semi, ng.h1_semi, nsum.h1_semi, nscaled.h1_semi),
                (nf.h1, ng.h1, nsum.h1, nscaled.h1),
                (nf.l2_mean_zero, ng.l2_mean_zero, nsum.l2_mean_zero, nscaled.l2_mean_zero),
            ] {
                prop_assert!(z <= x + y + 1e-12);
                prop_assert!((s - alpha.abs() * x).abs() <= 1e-12 * (1.0 + x));
            }
            prop_assert!(nf.l2_mean_zero <= nf.l2);
            let centered = error_norm(&f.subtract_mean().unwrap(), Reference::Zero).unwrap();
            prop_assert!((centered.l2 - nf.l2_mean_zero).abs() <= 1e-12);
            prop_assert!((nf.h1 * nf.h1 - nf.l2 * nf.l2 - nf.h1_semi * nf.h1_semi).abs() <= 1e-12 * nf.h1 * nf.h1);
        }
    }
}

//! Expansion of the ε-Stokes solution in powers of `1/ε` around the
//! pressure-Poisson solution, and remainder measurements.
//!
//! With `v⁽⁰⁾ = u_PP` each term solves, on the discretization's spaces,
//!
//! ```text
//! ∫ ∇q⁽ⁱ⁾·∇ψ = −∫ (div v⁽ⁱ⁻¹⁾) ψ      q⁽ⁱ⁾ in the regime's pressure space
//! ∫ ∇v⁽ⁱ⁾:∇φ = −∫ ∇q⁽ⁱ⁾·φ            v⁽ⁱ⁾ = 0 on the boundary
//! ```

use rayon::prelude::*;

use crate::assembly::apply_dirichlet;
use crate::dofs::Field;
use crate::error::{Error, Result};
use crate::norms::{error_norm, Reference};
use crate::systems::{solve_es, solve_pp, Discretization, ProblemData, Solution};

/// Highest expansion order offered.
pub const MAX_ORDER: usize = 3;
/// Relative defect of `⟨−div v, 1⟩` above which the Neumann recursion aborts,
/// measured against `Σ |B_ij v_j|`.
pub const ANNIHILATION_DEFECT: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    pub order: usize,
    pub velocity: Field,
    pub pressure: Field,
    /// Largest relative residual of the two solves.
    pub residual: f64,
}

/// Pressure-Poisson solution and the expansion terms built on it. The
/// terms do not depend on ε and are computed once.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub pp: Solution,
    pub terms: Vec<ExpansionTerm>,
}

/// Computes `v⁽ⁱ⁾, q⁽ⁱ⁾` for `i = 1..=k` starting from `v⁽⁰⁾ = u_pp`.
pub fn expansion_terms(disc: &Discretization, u_pp: &Field, k: usize) -> Result<Vec<ExpansionTerm>> {
    if k > MAX_ORDER {
        return Err(Error::InvalidData(format!(
            "expansion order {k} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let vel = disc.velocity_space();
    let pres = disc.pressure_space();
    let neumann = disc.regime().is_neumann();
    let zeros_p = vec![0.0; pres.num_dofs()];
    let zeros_u = vec![0.0; vel.num_dofs()];
    let mut prev = u_pp.clone();
    let mut terms = Vec::with_capacity(k);
    for order in 1..=k {
        let mut rhs = disc.div_u_times_q().matvec(prev.coeffs());
        for r in &mut rhs {
            *r = -*r;
        }
        let mean = if neumann {
            let total: f64 = rhs.iter().sum();
            // size of the individual contributions, so cancellation to
            // roundoff in an already vanishing source is not flagged
            let b = disc.div_u_times_q();
            let scale: f64 = (0..b.nrows())
                .flat_map(|i| b.row(i))
                .map(|(j, v)| (v * prev.coeffs()[j]).abs())
                .sum();
            if total.abs() > ANNIHILATION_DEFECT * scale {
                return Err(Error::InvalidData(format!(
                    "order {order}: source does not annihilate constants (defect {total:e}, scale {scale:e})"
                )));
            }
            Some(disc.pressure_integrals())
        } else {
            None
        };
        let psys = apply_dirichlet(disc.laplacian_scalar(), &rhs, pres.dirichlet_mask(), &zeros_p, mean);
        let psol = psys.solve()?;
        let q = Field::new(pres.clone(), psol.full)?;

        let mut f = disc.grad_p_dot_v().matvec(q.coeffs());
        for v in &mut f {
            *v = -*v;
        }
        let usys = apply_dirichlet(disc.laplacian_vector(), &f, vel.dirichlet_mask(), &zeros_u, None);
        let usol = usys.solve()?;
        let v = Field::new(vel.clone(), usol.full)?;
        terms.push(ExpansionTerm {
            order,
            velocity: v.clone(),
            pressure: q,
            residual: psol.residual.max(usol.residual),
        });
        prev = v;
    }
    Ok(terms)
}

impl Expansion {
    pub fn new(disc: &Discretization, data: &ProblemData, k: usize) -> Result<Expansion> {
        let pp = solve_pp(disc, data)?;
        let terms = expansion_terms(disc, &pp.velocity, k)?;
        Ok(Expansion { pp, terms })
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// `Σ_{i=0..k} ε⁻ⁱ v⁽ⁱ⁾` and the matching pressure sum.
    pub fn partial_sum(&self, eps: f64, k: usize) -> Result<(Field, Field)> {
        if k > self.terms.len() {
            return Err(Error::InvalidData(format!(
                "only {} terms were computed, asked for {k}",
                self.terms.len()
            )));
        }
        let mut u = self.pp.velocity.clone();
        let mut p = self.pp.pressure.clone();
        let mut scale = 1.0;
        for t in &self.terms[..k] {
            scale /= eps;
            u = u.axpy(scale, &t.velocity)?;
            p = p.axpy(scale, &t.pressure)?;
        }
        Ok((u, p))
    }

    /// `ε^k (u_ε − Σ_{i≤k} ε⁻ⁱ v⁽ⁱ⁾)` through the recursion
    /// `v_ε⁽¹⁾ = ε (u_ε − u_PP)`, `v_ε⁽ⁱ⁺¹⁾ = ε (v_ε⁽ⁱ⁾ − v⁽ⁱ⁾)`.
    pub fn telescoped(&self, u_eps: &Field, eps: f64, k: usize) -> Result<Field> {
        if k == 0 {
            return u_eps.sub(&self.pp.velocity);
        }
        let mut v = u_eps.sub(&self.pp.velocity)?.scaled(eps);
        for t in &self.terms[..k - 1] {
            v = v.sub(&t.velocity)?.scaled(eps);
        }
        v.sub(&self.terms[k - 1].velocity)
    }

    /// The same quantity formed directly from the partial sum.
    pub fn scaled_remainder(&self, u_eps: &Field, eps: f64, k: usize) -> Result<Field> {
        let (u, _) = self.partial_sum(eps, k)?;
        Ok(u_eps.sub(&u)?.scaled(eps.powi(k as i32)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderRow {
    pub eps: f64,
    pub rem_u_h1: f64,
    pub rem_p_h1: f64,
    pub k: usize,
    /// Relative residual of the ε-Stokes solve.
    pub residual: f64,
    /// Last refinement correction of that solve, relative to the solution.
    pub correction: f64,
    /// H¹ norms of the ε-Stokes velocity and pressure.
    pub u_h1: f64,
    pub p_h1: f64,
}

/// H¹ remainders `‖u_ε − Σ_{i≤k} ε⁻ⁱ v⁽ⁱ⁾‖` and the pressure analogue, one
/// fresh ε-Stokes solve per ε. Rows are returned in the order of `eps_grid`.
pub fn remainder_curve(
    disc: &Discretization,
    data: &ProblemData,
    expansion: &Expansion,
    k: usize,
    eps_grid: &[f64],
) -> Result<Vec<RemainderRow>> {
    if eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidData("eps values must be positive and finite".into()));
    }
    if eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidData("eps grid must be strictly increasing".into()));
    }
    eps_grid
        .par_iter()
        .map(|&eps| -> Result<RemainderRow> {
            let es = solve_es(disc, data, eps)?;
            let (u, p) = expansion.partial_sum(eps, k).map_err(Error::at_eps(eps))?;
            let ru = error_norm(&es.velocity, Reference::Field(&u)).map_err(Error::at_eps(eps))?;
            let rp = error_norm(&es.pressure, Reference::Field(&p)).map_err(Error::at_eps(eps))?;
            let un = error_norm(&es.velocity, Reference::Zero)?;
            let pn = error_norm(&es.pressure, Reference::Zero)?;
            Ok(RemainderRow {
                eps,
                rem_u_h1: ru.h1,
                rem_p_h1: rp.h1,
                k,
                residual: es.residual_norm,
                correction: es.correction,
                u_h1: un.h1,
                p_h1: pn.h1,
            })
        })
        .collect()
}

//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting.
//!
//! Columns are processed in a nested-dissection order; at each step the
//! column is computed by a sparse triangular solve against the current `L`,
//! and the pivot is the largest-magnitude candidate row unless the diagonal
//! candidate is within `pivot_tolerance` of it.

use super::{nested_dissection, norm2, SolveError, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LuOptions {
    /// The diagonal entry is kept as pivot when `|diag| >= pivot_tolerance * max`.
    /// Small values keep the fill-reducing order intact on saddle-point
    /// systems whose constraint block is small or zero.
    /// `1.0` is strict partial pivoting.
    pub pivot_tolerance: f64,
    /// A pivot below `singular_tolerance * max|A(:, j)|` is treated as zero.
    pub singular_tolerance: f64,
    pub refinement_steps: usize,
}

impl Default for LuOptions {
    fn default() -> Self {
        LuOptions {
            pivot_tolerance: 1e-3,
            singular_tolerance: 1e-12,
            refinement_steps: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    /// Unit lower factor, columns in elimination order, diagonal stored first.
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// Upper factor, diagonal stored last in each column.
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    /// `pinv[row] = step` at which the row was chosen as pivot.
    pinv: Vec<usize>,
    /// `q[step] = column` eliminated at that step.
    q: Vec<usize>,
}

/// Outcome of a refined solve.
#[derive(Clone, Debug)]
pub struct RefinedSolve {
    pub x: Vec<f64>,
    /// `||b - A x|| / ||b||` of the returned solution.
    pub residual: f64,
    /// Norm of the last refinement correction relative to `||x||`, an
    /// estimate of the forward error of the unrefined solution.
    pub correction: f64,
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<SparseLu, SolveError> {
        SparseLu::factor_with(a, &LuOptions::default())
    }

    pub fn factor_with(a: &SparseMatrix, opts: &LuOptions) -> Result<SparseLu, SolveError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolveError::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        // column access: rows of A^T
        let at = a.transpose();
        let q = nested_dissection(a);

        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let mut l_idx: Vec<usize> = Vec::with_capacity(4 * a.nnz());
        let mut l_val: Vec<f64> = Vec::with_capacity(4 * a.nnz());
        let mut u_idx = Vec::with_capacity(4 * a.nnz());
        let mut u_val = Vec::with_capacity(4 * a.nnz());
        l_ptr.push(0);
        u_ptr.push(0);

        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut marked = vec![false; n];

        for (k, &col) in q.iter().enumerate() {
            // --- reach: nonzero pattern of L \ A(:, col), topologically ordered in xi[top..]
            let mut top = n;
            for (r, _) in at.row(col) {
                if marked[r] {
                    continue;
                }
                let mut head = 0usize;
                stack[0] = r;
                loop {
                    let j = stack[head];
                    let jnew = pinv[j];
                    if !marked[j] {
                        marked[j] = true;
                        pstack[head] = if jnew == NONE { 0 } else { l_ptr[jnew] };
                    }
                    let end = if jnew == NONE { 0 } else { l_ptr[jnew + 1] };
                    let mut done = true;
                    let mut p = pstack[head];
                    while p < end {
                        let i = l_idx[p];
                        if !marked[i] {
                            pstack[head] = p;
                            head += 1;
                            stack[head] = i;
                            done = false;
                            break;
                        }
                        p += 1;
                    }
                    if done {
                        top -= 1;
                        xi[top] = j;
                        if head == 0 {
                            break;
                        }
                        head -= 1;
                    }
                }
            }
            for &i in &xi[top..n] {
                marked[i] = false;
            }

            // --- numeric solve
            for &i in &xi[top..n] {
                x[i] = 0.0;
            }
            let mut col_max = 0.0f64;
            for (r, v) in at.row(col) {
                x[r] = v;
                col_max = col_max.max(v.abs());
            }
            for &j in &xi[top..n] {
                let jnew = pinv[j];
                if jnew == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                for p in l_ptr[jnew] + 1..l_ptr[jnew + 1] {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            // --- pivot selection
            let mut ipiv = NONE;
            let mut amax = -1.0f64;
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || amax <= opts.singular_tolerance * col_max || amax == 0.0 {
                return Err(SolveError::SingularPivot {
                    row: if ipiv == NONE { col } else { ipiv },
                    column: col,
                    step: k,
                });
            }
            if pinv[col] == NONE && x[col].abs() >= amax * opts.pivot_tolerance {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            u_ptr.push(u_idx.len());
            pinv[ipiv] = k;

            l_idx.push(ipiv);
            l_val.push(1.0);
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
            l_ptr.push(l_idx.len());
        }
        for r in &mut l_idx {
            *r = pinv[*r];
        }
        Ok(SparseLu {
            n,
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
            pinv,
            q,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` and `U`.
    pub fn factor_nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    /// Steps whose pivot row differs from the eliminated column.
    pub fn off_diagonal_pivots(&self) -> usize {
        self.q.iter().enumerate().filter(|&(k, &c)| self.pinv[c] != k).count()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        if b.len() != self.n {
            return Err(SolveError::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_ptr[j]..last {
                    y[self.u_idx[p]] -= self.u_val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        Ok(x)
    }

    /// Solves and applies up to `steps` rounds of iterative refinement,
    /// stopping once the relative residual no longer improves.
    pub fn solve_refined(&self, a: &SparseMatrix, b: &[f64], steps: usize) -> Result<RefinedSolve, SolveError> {
        let mut x = self.solve(b)?;
        let nb = norm2(b);
        let scale = if nb > 0.0 { nb } else { 1.0 };
        let residual_of = |x: &[f64]| -> Vec<f64> {
            let ax = a.matvec(x);
            b.iter().zip(ax).map(|(b, ax)| b - ax).collect()
        };
        let mut r = residual_of(&x);
        let mut res = norm2(&r) / scale;
        let mut correction = 0.0;
        for _ in 0..steps {
            if res == 0.0 {
                break;
            }
            let d = self.solve(&r)?;
            let cand: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + d).collect();
            let r_new = residual_of(&cand);
            let res_new = norm2(&r_new) / scale;
            let nx = norm2(&cand);
            correction = if nx > 0.0 { norm2(&d) / nx } else { norm2(&d) };
            if res_new >= res {
                break;
            }
            x = cand;
            r = r_new;
            res = res_new;
        }
        Ok(RefinedSolve {
            x,
            residual: res,
            correction,
        })
    }
}

/// Required relative residual for every direct solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Factors `a`, solves `a x = b` with iterative refinement and checks the
/// relative residual against [`RESIDUAL_TOLERANCE`].
pub fn solve_sparse(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let lu = SparseLu::factor(a)?;
    let out = lu.solve_refined(a, b, LuOptions::default().refinement_steps)?;
    if out.residual > RESIDUAL_TOLERANCE {
        return Err(SolveError::Inaccurate {
            residual: out.residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(out.x)
}

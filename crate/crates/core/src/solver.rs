//! Davidson eigensolver for large symmetric operators given matrix-free.
//!
//! Block variant with diagonal preconditioning, deterministic for fixed
//! guesses. Small problems are solved densely by materializing the operator
//! column by column.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("davidson did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NonConvergence { max_iter: usize, residual: f64 },
    #[error("requested {k} eigenpairs from a space of dimension {dim}")]
    TooManyRoots { k: usize, dim: usize },
}

/// A symmetric linear operator given by its action.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DavidsonOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
}

impl Default for DavidsonOpts {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 2000,
            max_subspace: 0, // 0: derived from k
        }
    }
}

fn sorted_eigh(mat: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| se.eigenvectors.column(i).clone_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

fn dense_lowest(op: &impl SymOp, k: usize) -> EigResult {
    let n = op.dim();
    let mut full = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        op.apply(&unit, &mut col);
        unit[j] = 0.0;
        for i in 0..n {
            full[(i, j)] = col[i];
        }
    }
    // Symmetrize away round-off so eigenvectors stay orthogonal.
    let full = (&full + full.transpose()) * 0.5;
    let (vals, vecs) = sorted_eigh(&full);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut y = vec![0.0; n];
    for i in 0..k {
        let v: Vec<f64> = vecs.column(i).iter().copied().collect();
        op.apply(&v, &mut y);
        let r = y
            .iter()
            .zip(&v)
            .map(|(hy, vy)| (hy - vals[i] * vy).powi(2))
            .sum::<f64>()
            .sqrt();
        values.push(vals[i]);
        vectors.push(v);
        residuals.push(r);
    }
    EigResult {
        values,
        vectors,
        residuals,
        iterations: 1,
    }
}

/// Computes the `k` lowest eigenpairs of a symmetric operator.
///
/// `guesses` supplies at least one start vector; missing columns are padded
/// with unit vectors on the smallest diagonal entries. Deterministic for a
/// fixed input.
pub fn lowest_eigenpairs(
    op: &impl SymOp,
    k: usize,
    guesses: &[Vec<f64>],
    opts: DavidsonOpts,
) -> Result<EigResult, SolverError> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(SolverError::TooManyRoots { k, dim: n });
    }
    if n <= (3 * k + 20).min(64) {
        return Ok(dense_lowest(op, k));
    }

    let diag = op.diagonal();
    let max_subspace = if opts.max_subspace == 0 {
        (10 * k + 30).min(n)
    } else {
        opts.max_subspace.min(n)
    };

    // Assemble the initial orthonormal basis.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let push_orth = |basis: &mut Vec<DVector<f64>>, mut v: DVector<f64>| -> bool {
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / nrm);
            true
        } else {
            false
        }
    };
    for g in guesses {
        assert_eq!(g.len(), n);
        push_orth(&mut basis, DVector::from_column_slice(g));
    }
    if basis.len() < k {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
        for &i in &order {
            if basis.len() >= k {
                break;
            }
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            push_orth(&mut basis, e);
        }
    }

    let mut h_basis: Vec<DVector<f64>> = Vec::new();
    let mut last_residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        // Extend the cached H·v products.
        while h_basis.len() < basis.len() {
            let v = &basis[h_basis.len()];
            let mut y = vec![0.0; n];
            op.apply(v.as_slice(), &mut y);
            h_basis.push(DVector::from_vec(y));
        }
        let m = basis.len();
        let mut proj = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                proj[(i, j)] = basis[i].dot(&h_basis[j]);
            }
        }
        let proj = (&proj + proj.transpose()) * 0.5;
        let (vals, vecs) = sorted_eigh(&proj);

        // Ritz vectors and residuals for the k lowest roots.
        let mut ritz: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut resid: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut res_norms = Vec::with_capacity(k);
        for r in 0..k {
            let mut x = DVector::zeros(n);
            let mut hx = DVector::zeros(n);
            for j in 0..m {
                let c = vecs[(j, r)];
                x.axpy(c, &basis[j], 1.0);
                hx.axpy(c, &h_basis[j], 1.0);
            }
            let mut res = hx;
            res.axpy(-vals[r], &x, 1.0);
            res_norms.push(res.norm());
            ritz.push(x);
            resid.push(res);
        }
        last_residual = res_norms.iter().cloned().fold(0.0, f64::max);
        if last_residual <= opts.tol {
            return Ok(EigResult {
                values: vals[..k].to_vec(),
                vectors: ritz.iter().map(|v| v.as_slice().to_vec()).collect(),
                residuals: res_norms,
                iterations: iter,
            });
        }

        if m + k > max_subspace {
            // Thick restart: keep extra Ritz vectors beyond the targeted
            // roots so convergence does not stall at the restart boundary.
            let keep = (2 * k + 4).min(m);
            let mut new_basis: Vec<DVector<f64>> = Vec::new();
            for r in 0..keep {
                let x = if r < k {
                    ritz[r].clone()
                } else {
                    let mut x = DVector::zeros(n);
                    for j in 0..m {
                        x.axpy(vecs[(j, r)], &basis[j], 1.0);
                    }
                    x
                };
                push_orth(&mut new_basis, x);
            }
            basis = new_basis;
            h_basis = Vec::new();
        }
        let mut expanded = false;
        for r in 0..k {
            if res_norms[r] <= opts.tol {
                continue;
            }
            let mut t = resid[r].clone();
            for (ti, &d) in t.iter_mut().zip(diag.iter()) {
                let denom = d - vals[r];
                let denom = if denom.abs() < 1e-8 {
                    1e-8_f64.copysign(denom)
                } else {
                    denom
                };
                *ti /= denom;
            }
            expanded |= push_orth(&mut basis, t);
        }
        if !expanded {
            // Preconditioned residuals are linearly dependent on the basis;
            // inject the steepest unit vector not yet represented.
            let mut best = (0usize, -1.0f64);
            for r in 0..k {
                for (i, &x) in resid[r].iter().enumerate() {
                    if x.abs() > best.1 {
                        best = (i, x.abs());
                    }
                }
            }
            let mut e = DVector::zeros(n);
            e[best.0] = 1.0;
            if !push_orth(&mut basis, e) {
                break;
            }
        }
    }
    Err(SolverError::NonConvergence {
        max_iter: opts.max_iter,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct DenseOp(DMatrix<f64>);

    impl SymOp for DenseOp {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let v = DVector::from_column_slice(x);
            let out = &self.0 * v;
            y.copy_from_slice(out.as_slice());
        }
        fn diagonal(&self) -> Vec<f64> {
            (0..self.0.nrows()).map(|i| self.0[(i, i)]).collect()
        }
    }

    fn laplacian(n: usize) -> DenseOp {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 2.0;
            if i + 1 < n {
                m[(i, i + 1)] = -1.0;
                m[(i + 1, i)] = -1.0;
            }
        }
        DenseOp(m)
    }

    #[test]
    fn finds_lowest_of_tridiagonal() {
        let n = 200;
        let op = laplacian(n);
        let res = lowest_eigenpairs(&op, 2, &[], DavidsonOpts::default()).unwrap();
        let exact = |j: usize| 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / (n as f64 + 1.0)).cos();
        assert!((res.values[0] - exact(1)).abs() < 1e-10);
        assert!((res.values[1] - exact(2)).abs() < 1e-10);
        assert!(res.residuals.iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn dense_fallback_small() {
        let op = laplacian(6);
        let res = lowest_eigenpairs(&op, 3, &[], DavidsonOpts::default()).unwrap();
        assert!(res.values.windows(2).all(|w| w[0] <= w[1] + 1e-14));
    }
}

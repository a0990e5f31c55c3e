//! Lanczos eigensolver for the low end of a real symmetric operator.
//!
//! The operator is only touched through a matrix-vector closure. Every new
//! Krylov vector is reorthogonalised twice against the whole basis, so the
//! Ritz pairs stay clean even after the lowest eigenvalues have converged.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions<T> {
    pub n_eigen: usize,
    /// Krylov dimension cap (clamped to the operator dimension).
    pub max_iter: usize,
    /// Residual tolerance `‖A x − θ x‖ ≤ tol · max(1, |θ|)`.
    pub tol: T,
    /// Convergence is checked every `check_every` iterations.
    pub check_every: usize,
}

impl<T: Real> LanczosOptions<T> {
    pub fn new(n_eigen: usize) -> Self {
        Self {
            n_eigen,
            max_iter: 1500,
            tol: T::lit(1e-10),
            check_every: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Unit eigenvectors, one per value.
    pub vectors: Vec<Vec<T>>,
    /// True residual norms `‖A x − θ x‖`.
    pub residuals: Vec<T>,
    pub iterations: usize,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Deterministic, non-degenerate start vector.
fn start_vector<T: Real>(dim: usize) -> Vec<T> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut v: Vec<T> = (0..dim)
        .map(|i| T::lit(((i as f64 + 1.0) * GOLDEN).fract() - 0.5 + 1e-3))
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x = *x / n);
    v
}

/// Lowest `opts.n_eigen` eigenpairs of the operator `apply` (`y = A x`).
///
/// `project`, when given, is applied to the start vector and to each
/// product; it must be an orthogonal projector commuting with `A`, which
/// confines the iteration to an invariant subspace.
pub fn lowest_eigenpairs<T, A, P>(
    dim: usize,
    apply: A,
    project: Option<P>,
    opts: &LanczosOptions<T>,
) -> Result<EigenPairs<T>>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
    P: Fn(&mut [T]),
{
    let k = opts.n_eigen;
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter {
            name: "n_eigen",
            reason: format!("must be in 1..={dim}"),
        });
    }
    let max_iter = opts.max_iter.min(dim).max(k);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_iter + 1);
    let mut alpha: Vec<T> = Vec::with_capacity(max_iter);
    let mut beta: Vec<T> = Vec::with_capacity(max_iter);

    let mut q = start_vector::<T>(dim);
    if let Some(p) = &project {
        p(&mut q);
        let n = norm(&q);
        q.iter_mut().for_each(|x| *x = *x / n);
    }
    basis.push(q);
    let mut w = vec![T::zero(); dim];
    let mut worst = T::infinity();

    for j in 0..max_iter {
        apply(&basis[j], &mut w);
        if let Some(p) = &project {
            p(&mut w);
        }
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for qi in &basis {
                let c = dot(qi, &w);
                axpy(-c, qi, &mut w);
            }
        }
        let b = norm(&w);
        let m = j + 1;
        let invariant = b <= T::lit(1e-13) * a.abs().max(T::one());
        let last = m == max_iter;

        if m >= k && (m % opts.check_every == 0 || invariant || last) {
            let (theta, tail) = tridiagonal_last_components(&alpha, &beta)?;
            worst = (0..k)
                .map(|i| (b * tail[i]).abs() / theta[i].abs().max(T::one()))
                .fold(T::zero(), T::max);
            if worst <= opts.tol || invariant {
                let (theta, s) = tridiagonal_eigen(&alpha, &beta)?;
                return Ok(assemble(&basis[..m], &theta, &s, k, &apply, &project, m));
            }
            if last {
                break;
            }
        }
        if invariant {
            break;
        }
        beta.push(b);
        let next: Vec<T> = w.iter().map(|&x| x / b).collect();
        basis.push(next);
    }
    Err(Error::EigenNonConvergence {
        iterations: alpha.len(),
        residual: worst.to_f64_lossy(),
    })
}

fn assemble<T, A, P>(
    basis: &[Vec<T>],
    theta: &[T],
    s: &[Vec<T>],
    k: usize,
    apply: &A,
    project: &Option<P>,
    m: usize,
) -> EigenPairs<T>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
    P: Fn(&mut [T]),
{
    let dim = basis[0].len();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut scratch = vec![T::zero(); dim];
    for i in 0..k {
        let mut x = vec![T::zero(); dim];
        for (qj, &c) in basis.iter().zip(&s[i]) {
            axpy(c, qj, &mut x);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|v| *v = *v / n);
        apply(&x, &mut scratch);
        if let Some(p) = project {
            p(&mut scratch);
        }
        axpy(-theta[i], &x, &mut scratch);
        residuals.push(norm(&scratch));
        values.push(theta[i]);
        vectors.push(x);
    }
    EigenPairs {
        values,
        vectors,
        residuals,
        iterations: m,
    }
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (`off.len() ≥ diag.len() - 1`).
///
/// Returns ascending eigenvalues and, for each, its eigenvector as a row.
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = diag.len();
    let mut rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut r = vec![T::zero(); n];
            r[i] = T::one();
            r
        })
        .collect();
    let (values, order) = implicit_ql(diag, off, &mut rows)?;
    let vectors = order.iter().map(|&j| rows.iter().map(|row| row[j]).collect()).collect();
    Ok((values, vectors))
}

/// Ascending eigenvalues plus the last component of each eigenvector, which
/// is all the Lanczos residual estimate needs. `O(n²)` instead of `O(n³)`.
fn tridiagonal_last_components<T: Real>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = diag.len();
    let mut last = vec![T::zero(); n];
    last[n - 1] = T::one();
    let mut rows = vec![last];
    let (values, order) = implicit_ql(diag, off, &mut rows)?;
    let comps = order.iter().map(|&j| rows[0][j]).collect();
    Ok((values, comps))
}

/// Implicit QL with Wilkinson shifts. The plane rotations are applied to
/// every vector in `rows`, so passing rows of the identity yields the
/// matching rows of the eigenvector matrix. Returns ascending eigenvalues and
/// the permutation from sorted position to column index.
fn implicit_ql<T: Real>(diag: &[T], off: &[T], rows: &mut [Vec<T>]) -> Result<(Vec<T>, Vec<usize>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNonConvergence {
                    iterations: iter,
                    residual: e[l].abs().to_f64_lossy(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let t = row[i + 1];
                    row[i + 1] = s * row[i] + c * t;
                    row[i] = c * row[i] - s * t;
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&j| d[j]).collect();
    Ok((values, order))
}

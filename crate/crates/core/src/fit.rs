//! Small linear least-squares fits.

use crate::error::{Error, Result};
use crate::real::Real;

/// Coefficients of `y ≈ Σ_j c_j φ_j(x)` and the RMS residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    pub coefficients: Vec<T>,
    pub rms_residual: T,
}

impl<T: Real> LinearFit<T> {
    pub fn residuals<B>(&self, basis: B, xs: &[T], ys: &[T]) -> Vec<T>
    where
        B: Fn(T) -> Vec<T>,
    {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let model = basis(x)
                    .iter()
                    .zip(&self.coefficients)
                    .fold(T::zero(), |acc, (&b, &c)| acc + b * c);
                y - model
            })
            .collect()
    }
}

/// Least squares over an arbitrary basis via the normal equations. Only meant
/// for a handful of well-scaled basis functions.
pub fn least_squares<T, B>(basis: B, xs: &[T], ys: &[T]) -> Result<LinearFit<T>>
where
    T: Real,
    B: Fn(T) -> Vec<T>,
{
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Domain(format!(
            "fit needs matching non-empty samples, got {} x and {} y",
            xs.len(),
            ys.len()
        )));
    }
    let k = basis(xs[0]).len();
    if xs.len() < k {
        return Err(Error::Domain(format!(
            "{} samples cannot fix {k} coefficients",
            xs.len()
        )));
    }
    let mut a = vec![vec![T::zero(); k + 1]; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let phi = basis(x);
        for i in 0..k {
            for j in 0..k {
                a[i][j] = a[i][j] + phi[i] * phi[j];
            }
            a[i][k] = a[i][k] + phi[i] * y;
        }
    }
    let coefficients = solve_augmented(a)?;
    let mut fit = LinearFit {
        coefficients,
        rms_residual: T::zero(),
    };
    let res = fit.residuals(&basis, xs, ys);
    let ss = res.iter().fold(T::zero(), |acc, &r| acc + r * r);
    fit.rms_residual = (ss / T::from_count(res.len())).sqrt();
    Ok(fit)
}

/// `y ≈ c₀ + c₂ x²`.
pub fn even_quadratic<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    least_squares(|x| vec![T::one(), x * x], xs, ys)
}

/// `y ≈ c₀ + c₁ x + c₂ x²`.
pub fn quadratic<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    least_squares(|x| vec![T::one(), x, x * x], xs, ys)
}

/// Gaussian elimination with partial pivoting on a `k × (k+1)` system.
fn solve_augmented<T: Real>(mut a: Vec<Vec<T>>) -> Result<Vec<T>> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if !(a[pivot][col].abs() > T::zero()) {
            return Err(Error::Domain("singular least-squares system".into()));
        }
        a.swap(col, pivot);
        for row in col + 1..k {
            let factor = a[row][col] / a[col][col];
            for c in col..=k {
                let v = a[col][c];
                a[row][c] = a[row][c] - factor * v;
            }
        }
    }
    let mut x = vec![T::zero(); k];
    for row in (0..k).rev() {
        let mut s = a[row][k];
        for c in row + 1..k {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.04 - 0.3 * x + 0.02 * x * x).collect();
        let fit = quadratic(&xs, &ys).unwrap();
        let want = [0.04, -0.3, 0.02];
        for (c, w) in fit.coefficients.iter().zip(want) {
            assert!((c - w).abs() < 1e-12);
        }
        assert!(fit.rms_residual < 1e-13);
    }

    #[test]
    fn even_fit_ignores_odd_basis() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x * x).collect();
        let fit = even_quadratic(&xs, &ys).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_is_rejected() {
        assert!(quadratic(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}

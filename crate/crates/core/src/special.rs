//! Bessel functions of the first kind of integer order.

use crate::real::Real;

/// `J_n(x)` for integer order `n ≥ 0` and any real `x`.
///
/// Miller's backward recurrence started well above `max(n, |x|)` and
/// normalised with `J_0 + 2 Σ_k J_{2k} = 1`. Accurate to a few ulps of
/// `max |J_k(x)|` for all arguments, at `O(|x| + n)` cost.
pub fn bessel_j<T: Real>(n: u32, x: T) -> T {
    if x < T::zero() {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    let order = n as usize;
    let reach = order.max(x.ceil().to_usize().unwrap_or(usize::MAX / 4));
    let start = {
        let extra = 20 + (40.0 * reach as f64).sqrt() as usize;
        let m = reach + extra;
        m + (m % 2)
    };
    let big = T::max_value().sqrt();
    let two_over_x = T::lit(2.0) / x;

    let mut above = T::zero(); // J_{k+1}
    let mut current = T::min_positive_value().sqrt(); // J_k, arbitrary seed
    let mut result = T::zero();
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        let below = T::from_count(k) * two_over_x * current - above;
        above = current;
        current = below; // now J_{k-1}
        if k - 1 == order {
            result = current;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm = norm + T::lit(2.0) * current;
        }
        if current.abs() > big {
            current = current / big;
            above = above / big;
            result = result / big;
            norm = norm / big;
        }
    }
    norm = norm + current;
    result / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};
    use std::f64::consts::PI;

    // J_n(x) = (1/π) ∫_0^π cos(nθ − x sin θ) dθ
    fn integral_rep(n: u32, x: f64) -> f64 {
        let panels = 4 + (x.abs() as usize) / 2 + n as usize;
        let q = integrate(
            |t: f64| (n as f64 * t - x * t.sin()).cos(),
            0.0,
            PI,
            panels,
            &Tolerance::new(1e-15, 1e-13),
        )
        .unwrap();
        q.value / PI
    }

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables.
        let cases = [
            (0, 1.0_f64, 0.765_197_686_557_966_6_f64),
            (1, 1.0, 0.440_050_585_744_933_5),
            (2, 1.0, 0.114_903_484_931_900_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (5, 10.0, -0.234_061_528_186_793_5),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-14, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[0.01, 0.5, 3.0, 17.3, 60.0, 200.0, 1000.0] {
            for n in 0..=8 {
                let a = bessel_j(n, x);
                let b = integral_rep(n, x);
                assert!((a - b).abs() < 1e-12, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn parity_and_origin() {
        assert_eq!(bessel_j(0, 0.0_f64), 1.0);
        assert_eq!(bessel_j(3, 0.0_f64), 0.0);
        assert!((bessel_j(3, -2.5_f64) + bessel_j(3, 2.5)).abs() < 1e-16);
        assert!((bessel_j(2, -2.5_f64) - bessel_j(2, 2.5)).abs() < 1e-16);
    }

    #[test]
    fn high_order_small_argument() {
        // J_n(x) ≈ (x/2)^n / n! for x ≪ 1
        let x = 1e-3_f64;
        let want = (x / 2.0).powi(6) / 720.0;
        assert!((bessel_j(6, x) / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_precision() {
        assert!((bessel_j(0, 1.0_f32) - 0.765_197_7).abs() < 1e-6);
    }
}

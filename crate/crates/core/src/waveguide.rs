//! Giant atom coupled at sites `0` and `n` of a cosine-band coupled-resonator
//! waveguide, in the transformed (counter-rotating-corrected) frame.
//!
//! All frequencies share one unit; the examples use units of the bare
//! splitting `Ω`. The counter-rotating terms survive only as the vacuum Lamb
//! shift `δ`, which dresses the splitting to `Ω₁ = Ω + δ`.

use crate::circuit::{atom_coupling_g, waveguide_constants, CircuitParams, QubitSpectrum};
use crate::error::{Error, Result};
use crate::fit::{even_quadratic, LinearFit};
use crate::quad::{integrate, Tolerance};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideModel<T> {
    /// Resonator frequency (band centre).
    pub omega_c: T,
    /// Nearest-neighbour hopping.
    pub xi: T,
    /// Atom–waveguide coupling.
    pub g: T,
    /// Separation of the two coupling points in lattice sites.
    pub n: u32,
    /// Bare atomic splitting `Ω`.
    pub omega_a: T,
    /// Drop the Lamb shift (`Ω₁ = Ω`).
    pub rwa: bool,
    /// Vacuum Lamb shift `δ`, computed at construction regardless of `rwa`.
    pub delta: T,
    /// Frequency the atom actually sees: `Ω + δ`, or `Ω` under the RWA.
    pub omega_1: T,
}

impl<T: Real> WaveguideModel<T> {
    pub fn new(omega_c: T, xi: T, g: T, n: u32, omega_a: T, rwa: bool) -> Result<Self> {
        if !(xi > T::zero() && xi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "xi",
                reason: format!("{xi} must be positive"),
            });
        }
        if !(g >= T::zero() && g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: format!("{g} must be non-negative"),
            });
        }
        if !(omega_a.is_finite() && omega_c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega_a",
                reason: "frequencies must be finite".into(),
            });
        }
        if !(omega_c + omega_a > T::lit(2.0) * xi) {
            return Err(Error::ModelOutOfRange(format!(
                "omega_c + omega_a = {} must exceed 2 xi = {}",
                omega_c + omega_a,
                T::lit(2.0) * xi
            )));
        }
        let mut model = Self {
            omega_c,
            xi,
            g,
            n,
            omega_a,
            rwa,
            delta: T::zero(),
            omega_1: omega_a,
        };
        model.delta = lamb_shift(&model)?;
        model.omega_1 = if rwa { omega_a } else { omega_a + model.delta };
        if !rwa && !model.dressed_in_band() {
            log::warn!(
                "dressed frequency {} lies outside the band [{}, {}]",
                model.omega_1,
                omega_c - T::lit(2.0) * xi,
                omega_c + T::lit(2.0) * xi
            );
        }
        Ok(model)
    }

    /// Model derived from circuit parameters and the loop spectrum (frequencies in `E_J`).
    pub fn from_circuit(params: &CircuitParams<T>, spectrum: &QubitSpectrum<T>, n: u32, rwa: bool) -> Result<Self> {
        let (omega_c, xi) = waveguide_constants(params);
        Self::new(omega_c, xi, atom_coupling_g(params, spectrum), n, spectrum.omega, rwa)
    }

    pub fn with_rwa(&self, rwa: bool) -> Self {
        Self {
            rwa,
            omega_1: if rwa { self.omega_a } else { self.omega_a + self.delta },
            ..*self
        }
    }

    /// Multiplies every frequency (and hence every rate) by `s`.
    pub fn rescaled(&self, s: T) -> Self {
        Self {
            omega_c: self.omega_c * s,
            xi: self.xi * s,
            g: self.g * s,
            omega_a: self.omega_a * s,
            delta: self.delta * s,
            omega_1: self.omega_1 * s,
            ..*self
        }
    }

    pub fn band(&self) -> (T, T) {
        let w = T::lit(2.0) * self.xi;
        (self.omega_c - w, self.omega_c + w)
    }

    pub fn dressed_in_band(&self) -> bool {
        (self.omega_1 - self.omega_c).abs() < T::lit(2.0) * self.xi
    }
}

/// `ω_k = ω_c − 2ξ cos k`.
pub fn dispersion<T: Real>(model: &WaveguideModel<T>, k: T) -> T {
    model.omega_c - T::lit(2.0) * model.xi * k.cos()
}

/// Continuum weight `(g²/π)(1 + cos kn)` replacing `|g_k|²` in `(N_c/2π)∫dk`.
pub fn coupling_density<T: Real>(model: &WaveguideModel<T>, k: T) -> T {
    model.g * model.g / T::PI() * (T::one() + (k * T::from_count(model.n as usize)).cos())
}

/// `cos(n k)` from `cos k` by the Chebyshev recurrence, so interference
/// zeros at rational points such as `cos k = 0` come out exact.
pub(crate) fn chebyshev_t<T: Real>(n: u32, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = T::lit(2.0) * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `G(ω) = Σ_k |g_k|² δ(ω − ω_k)`; zero outside the band.
///
/// Within `1e−9 ξ` of a band edge the inverse-square-root singularity is
/// reported as [`Error::BandEdge`] instead of a huge number.
pub fn spectral_density<T: Real>(model: &WaveguideModel<T>, omega: T) -> Result<T> {
    let (lo, hi) = model.band();
    let guard = T::lit(1e-9) * model.xi;
    if (omega - lo).abs() <= guard || (omega - hi).abs() <= guard {
        return Err(Error::BandEdge {
            omega: omega.to_f64_lossy(),
        });
    }
    if omega <= lo || omega >= hi {
        return Ok(T::zero());
    }
    let c = (model.omega_c - omega) / (T::lit(2.0) * model.xi);
    let s = (T::one() - c * c).sqrt();
    let g2 = model.g * model.g;
    Ok(g2 / T::PI() * (T::one() + chebyshev_t(model.n, c)) / (model.xi * s))
}

/// `∫_a^b G(ω) dω`, with `u²` substitutions that remove the band-edge singularities.
pub fn spectral_weight<T: Real>(model: &WaveguideModel<T>, a: T, b: T) -> Result<T> {
    let (lo, hi) = model.band();
    let tol = Tolerance::default();
    let panels = 4 + 2 * model.n as usize;
    let a = a.max(lo);
    let b = b.min(hi);
    if !(b > a) {
        return Ok(T::zero());
    }
    let mid = model.omega_c;
    let mut total = T::zero();
    // Lower half: ω = lo + u²
    let (a1, b1) = (a, b.min(mid));
    if b1 > a1 {
        let q = integrate(
            |u: T| {
                let w = lo + u * u;
                T::lit(2.0) * u * density_inside(model, w)
            },
            (a1 - lo).max(T::zero()).sqrt(),
            (b1 - lo).sqrt(),
            panels,
            &tol,
        )?;
        total = total + q.value;
    }
    // Upper half: ω = hi − u²
    let (a2, b2) = (a.max(mid), b);
    if b2 > a2 {
        let q = integrate(
            |u: T| {
                let w = hi - u * u;
                T::lit(2.0) * u * density_inside(model, w)
            },
            (hi - b2).max(T::zero()).sqrt(),
            (hi - a2).sqrt(),
            panels,
            &tol,
        )?;
        total = total + q.value;
    }
    Ok(total)
}

// G(ω) without the edge guard. Quadrature nodes never land on the edge
// exactly, and the u-substitution cancels the singular factor.
fn density_inside<T: Real>(model: &WaveguideModel<T>, omega: T) -> T {
    let c = (model.omega_c - omega) / (T::lit(2.0) * model.xi);
    let s2 = T::one() - c * c;
    if !(s2 > T::zero()) {
        return T::zero();
    }
    let g2 = model.g * model.g;
    g2 / T::PI() * (T::one() + chebyshev_t(model.n, c)) / (model.xi * s2.sqrt())
}

fn check_lamb_domain<T: Real>(model: &WaveguideModel<T>) -> Result<T> {
    let a = model.omega_c + model.omega_a;
    if !(a > T::lit(2.0) * model.xi) {
        return Err(Error::ModelOutOfRange(format!(
            "omega_c + omega_a = {a} must exceed 2 xi"
        )));
    }
    Ok(a)
}

/// Vacuum Lamb shift `δ = (g²/π) ∫_{−π}^{π} (1 + cos kn)/(ω_c + Ω − 2ξ cos k) dk`.
pub fn lamb_shift<T: Real>(model: &WaveguideModel<T>) -> Result<T> {
    let a = check_lamb_domain(model)?;
    if model.g == T::zero() {
        return Ok(T::zero());
    }
    let n = T::from_count(model.n as usize);
    let two_xi = T::lit(2.0) * model.xi;
    // The integrand is even in k.
    let q = integrate(
        |k: T| (T::one() + (n * k).cos()) / (a - two_xi * k.cos()),
        T::zero(),
        T::PI(),
        4 + 2 * model.n as usize,
        &Tolerance::default(),
    )?;
    Ok(T::lit(2.0) * model.g * model.g / T::PI() * q.value)
}

/// Residue evaluation of [`lamb_shift`]:
/// `δ = 2g²(1 + βⁿ)/√(a² − 4ξ²)`, `a = ω_c + Ω`, `β = (a − √(a² − 4ξ²))/2ξ`.
pub fn lamb_shift_closed<T: Real>(model: &WaveguideModel<T>) -> Result<T> {
    let a = check_lamb_domain(model)?;
    let two_xi = T::lit(2.0) * model.xi;
    let root = ((a - two_xi) * (a + two_xi)).sqrt();
    // β = 2ξ/(a + root), algebraically equal but free of cancellation.
    let beta = two_xi / (a + root);
    let g2 = model.g * model.g;
    Ok(T::lit(2.0) * g2 * (T::one() + beta.powi(model.n as i32)) / root)
}

/// `Ω₁`, the frequency entering the decay rates.
pub fn dressed_frequency<T: Real>(model: &WaveguideModel<T>) -> T {
    model.omega_1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambShiftRow<T> {
    pub xi: T,
    pub delta_quadrature: T,
    pub delta_closed: T,
    /// `δ − (c₀ + c₂ ξ²)` against the fit of the whole table.
    pub fit_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambShiftTable<T> {
    pub rows: Vec<LambShiftRow<T>>,
    /// Fit `δ ≈ c₀ + c₂ ξ²`; `coefficients = [c₀, c₂]`.
    pub fit: LinearFit<T>,
}

/// `δ(ξ)` at fixed `ω_c`, `g`, `n`, `Ω`, with the even quadratic fit.
pub fn lamb_shift_table<T: Real>(omega_c: T, g: T, n: u32, omega_a: T, xi_values: &[T]) -> Result<LambShiftTable<T>> {
    let mut rows = Vec::with_capacity(xi_values.len());
    for &xi in xi_values {
        let m = WaveguideModel::new(omega_c, xi, g, n, omega_a, false)?;
        rows.push(LambShiftRow {
            xi,
            delta_quadrature: m.delta,
            delta_closed: lamb_shift_closed(&m)?,
            fit_residual: T::zero(),
        });
    }
    let xs: Vec<T> = rows.iter().map(|r| r.xi).collect();
    let ys: Vec<T> = rows.iter().map(|r| r.delta_quadrature).collect();
    let fit = even_quadratic(&xs, &ys)?;
    for row in &mut rows {
        row.fit_residual = row.delta_quadrature - fit.coefficients[0] - fit.coefficients[1] * row.xi * row.xi;
    }
    Ok(LambShiftTable { rows, fit })
}

/// `k₀ ∈ (0, π)` with `ω_{k₀} = ω`, or `None` outside the band.
pub fn resonant_wavenumber<T: Real>(model: &WaveguideModel<T>, omega: T) -> Option<T> {
    let c = (model.omega_c - omega) / (T::lit(2.0) * model.xi);
    (c.abs() < T::one()).then(|| c.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn model(g: f64, n: u32, xi: f64) -> WaveguideModel<f64> {
        WaveguideModel::new(1.0, xi, g, n, 1.0, false).unwrap()
    }

    #[test]
    fn dispersion_band_points() {
        let m = model(0.1, 0, 0.1);
        assert!((dispersion(&m, 0.0) - 0.8).abs() < 1e-15);
        assert!((dispersion(&m, PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((dispersion(&m, PI) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn coupling_density_interference() {
        let m0 = model(0.2, 0, 0.1);
        for k in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            assert!((coupling_density(&m0, k) - 2.0 * 0.04 / PI).abs() < 1e-15);
        }
        let m2 = model(0.2, 2, 0.1);
        assert!(coupling_density(&m2, PI / 2.0).abs() < 1e-16);
    }

    #[test]
    fn coupling_density_integrates_to_total_weight() {
        for n in 0..6 {
            let m = model(0.3, n, 0.1);
            let q = integrate(|k: f64| coupling_density(&m, k), -PI, PI, 8, &Tolerance::default()).unwrap();
            let want = if n == 0 { 4.0 * 0.09 } else { 2.0 * 0.09 };
            assert!((q.value - want).abs() < 1e-12, "n={n}: {}", q.value);
        }
    }

    #[test]
    fn spectral_density_band_centre() {
        let m2 = model(0.2, 2, 0.1);
        assert_eq!(spectral_density(&m2, 1.0).unwrap(), 0.0);
        let m0 = model(0.2, 0, 0.1);
        let want = 2.0 * 0.04 / (PI * 0.1);
        assert!((spectral_density(&m0, 1.0).unwrap() - want).abs() < 1e-14);
        assert_eq!(spectral_density(&m0, 1.5).unwrap(), 0.0);
        assert_eq!(spectral_density(&m0, 0.5).unwrap(), 0.0);
        assert!(matches!(spectral_density(&m0, 0.8), Err(Error::BandEdge { .. })));
        assert!(matches!(
            spectral_density(&m0, 1.2 + 1e-12),
            Err(Error::BandEdge { .. })
        ));
    }

    // Mode sum over a finite ring, each δ-function smeared into a Lorentzian.
    fn smeared_mode_sum(m: &WaveguideModel<f64>, omega: f64, n_c: usize, width: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..n_c {
            let k = -PI + 2.0 * PI * j as f64 / n_c as f64;
            let gk2 = m.g * m.g * 2.0 * (1.0 + (k * m.n as f64).cos()) / n_c as f64;
            let d = omega - dispersion(m, k);
            acc += gk2 * width / PI / (d * d + width * width);
        }
        acc
    }

    #[test]
    fn spectral_density_matches_smeared_mode_sum() {
        let n_c = 100_000;
        let width = 2e-4;
        for (n, omega) in [(0, 1.0), (1, 0.93), (3, 1.07), (2, 1.0)] {
            let m = model(0.2, n, 0.1);
            let g = spectral_density(&m, omega).unwrap();
            let s = smeared_mode_sum(&m, omega, n_c, width);
            let scale = 2.0 * 0.04 / (PI * 0.1);
            assert!((g - s).abs() < 2e-3 * scale, "n={n} ω={omega}: {g} vs {s}");
        }
    }

    #[test]
    fn spectral_weight_equals_k_integral() {
        for n in 0..5 {
            let m = model(0.2, n, 0.1);
            let w = spectral_weight(&m, 0.0, 2.0).unwrap();
            let want = if n == 0 { 4.0 * 0.04 } else { 2.0 * 0.04 };
            assert!((w / want - 1.0).abs() < 1e-6, "n={n}: {w}");
        }
    }

    #[test]
    fn lamb_shift_basics() {
        assert_eq!(lamb_shift(&model(0.0, 3, 0.1)).unwrap(), 0.0);
        let d = lamb_shift_closed(&model(0.2, 0, 0.1)).unwrap();
        let want = 4.0 * 0.04 / (4.0_f64 - 0.04).sqrt();
        assert!((d - want).abs() < 1e-15);
        // ξ → 0 with n ≥ 1: g²/Ω.
        let tiny = lamb_shift_closed(&model(0.2, 4, 1e-6)).unwrap();
        assert!((tiny - 0.04).abs() < 1e-9);
        assert!(matches!(
            WaveguideModel::new(0.1, 0.2, 0.1, 1, 0.1, false),
            Err(Error::ModelOutOfRange(_))
        ));
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for xi in [0.05, 0.1, 0.3] {
            for n in 0..=8 {
                let m = model(0.2, n, xi);
                let q = lamb_shift(&m).unwrap();
                let c = lamb_shift_closed(&m).unwrap();
                assert!((q / c - 1.0).abs() < 1e-8, "n={n} xi={xi}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn lamb_shift_decreases_with_separation() {
        let deltas: Vec<f64> = (0..12)
            .map(|n| lamb_shift_closed(&model(0.2, n, 0.3)).unwrap())
            .collect();
        for w in deltas.windows(2) {
            assert!(w[1] < w[0]);
        }
        let far = 2.0 * 0.04 / (4.0_f64 - 0.36).sqrt();
        assert!(deltas[11] > far);
        let d8 = lamb_shift(&model(0.2, 8, 0.1)).unwrap();
        let d16 = lamb_shift(&model(0.2, 16, 0.1)).unwrap();
        assert!((d8 - d16).abs() < 1e-6);
    }

    #[test]
    fn dressed_frequency_and_rwa() {
        let m = model(0.2, 4, 0.1);
        assert!((m.delta - 0.04).abs() < 0.002, "delta = {}", m.delta);
        assert!((dressed_frequency(&m) - 1.0 - m.delta).abs() < 1e-16);
        assert!(m.dressed_in_band());
        assert_eq!(dressed_frequency(&m.with_rwa(true)), 1.0);
    }

    #[test]
    fn chebyshev_matches_cosine() {
        for n in 0..10 {
            for k in [0.1, 0.7, 1.3, 2.9] {
                assert!((chebyshev_t(n, f64::cos(k)) - (n as f64 * k).cos()).abs() < 1e-13);
            }
        }
        assert_eq!(chebyshev_t(2, 0.0_f64), -1.0);
        assert_eq!(chebyshev_t(6, 0.0_f64), -1.0);
    }

    #[test]
    fn single_precision_model() {
        let m = WaveguideModel::<f32>::new(1.0, 0.1, 0.2, 4, 1.0, false).unwrap();
        let c = lamb_shift_closed(&m).unwrap();
        assert!((m.delta / c - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn spectral_density_non_negative(
            g in 0.0..0.5f64, n in 0u32..10, xi in 0.01..0.4f64, w in 0.0..2.0f64
        ) {
            let m = model(g, n, xi);
            if let Ok(v) = spectral_density(&m, w) {
                prop_assert!(v >= 0.0);
            }
        }

        #[test]
        fn lamb_shift_is_even_in_k(g in 0.01..0.5f64, n in 0u32..10, xi in 0.01..0.4f64, k in 0.0..3.1f64) {
            let m = model(g, n, xi);
            let a = m.omega_c + m.omega_a;
            let f = |k: f64| coupling_density(&m, k) / (a - 2.0 * xi * k.cos());
            prop_assert!((f(k) - f(-k)).abs() <= 1e-15 * f(k).abs().max(1e-300));
        }
    }
}

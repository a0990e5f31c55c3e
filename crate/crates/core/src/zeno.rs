//! Decay of the giant atom under repeated projective measurement.
//!
//! Measuring every `τ` turns the spectral density into a sinc² filter around
//! the atomic frequency, giving a rate `R(τ)` that tends to the golden-rule
//! `R₀` for `τ → ∞`. `Q = R/R₀ < 1` is Zeno slowing, `Q > 1` anti-Zeno
//! acceleration; the latter is only observable if it sets in before the
//! atom has decayed anyway, i.e. `R₀ τ* < 1`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_breakpoints, Tolerance};
use crate::real::{sinc, Real};
use crate::waveguide::{chebyshev_t, resonant_wavenumber, WaveguideModel};

/// `R₀` below `NO_DECAY_THRESHOLD · Ω` counts as no decay at all.
pub const NO_DECAY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    ZenoOnly,
    AntiZeno,
    NoBaselineDecay,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ZenoOnly => "ZENO_ONLY",
            Self::AntiZeno => "ANTI_ZENO",
            Self::NoBaselineDecay => "NO_BASELINE_DECAY",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `τ*` search window, in units of `1/Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T> {
    pub tau_min: T,
    pub tau_max: T,
    pub points: usize,
    /// Relative bisection tolerance on `τ*`.
    pub rel_tol: T,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self {
            tau_min: T::lit(1e-3),
            tau_max: T::lit(1e3),
            points: 200,
            rel_tol: T::lit(1e-10),
        }
    }
}

/// `F(ω) = (τ/2π) sinc²((ω − Ω₁)τ/2)`.
pub fn filter_weight<T: Real>(omega: T, omega_1: T, tau: T) -> T {
    let s = sinc((omega - omega_1) * tau * T::lit(0.5));
    tau / (T::lit(2.0) * T::PI()) * s * s
}

/// `∫ F dω` over the real line: quadrature across `lobes` sinc² lobes on
/// each side of `Ω₁` plus the asymptotic tail beyond them.
pub fn filter_normalization<T: Real>(omega_1: T, tau: T, lobes: usize) -> Result<T> {
    check_tau(tau)?;
    let a = tau * T::lit(0.5);
    let cut = T::from_count(lobes.max(1)) * T::PI() / a;
    let q = integrate(
        |w: T| filter_weight(w, omega_1, tau),
        omega_1 - cut,
        omega_1 + cut,
        2 * lobes.max(1),
        &Tolerance::new(T::lit(1e-15), T::lit(1e-12)),
    )?;
    // Past the cut, sin²(ax) averages to 1/2 and the 1/x² envelope integrates in closed form.
    let tail_side = tau / (T::lit(2.0) * T::PI() * a * a)
        * (T::one() / (T::lit(2.0) * cut) - T::one() / (T::lit(4.0) * a * a * cut * cut * cut));
    Ok(q.value + T::lit(2.0) * tail_side)
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "measurement interval tau = {tau} must be positive"
        )))
    }
}

/// `R(τ) = (g²τ/π) ∫_{−π}^{π} (1 + cos kn) sinc²((ω_c − Ω₁ − 2ξ cos k)τ/2) dk`,
/// with `Ω₁ → Ω` when the model uses the RWA.
pub fn decay_rate<T: Real>(model: &WaveguideModel<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    if model.g == T::zero() {
        return Ok(T::zero());
    }
    let detune = model.omega_c - model.omega_1;
    let two_xi = T::lit(2.0) * model.xi;
    let half_tau = tau * T::lit(0.5);
    let n = model.n;
    let integrand = |k: T| {
        let c = k.cos();
        let s = sinc((detune - two_xi * c) * half_tau);
        (T::one() + chebyshev_t(n, c)) * s * s
    };
    // Enough panels that each holds at most a fraction of a sinc² or cos(nk) oscillation.
    let scale = T::one().max(model.xi * tau).max(T::from_count(n as usize));
    let panels = (T::lit(8.0) * scale).ceil().to_usize().unwrap_or(8).clamp(8, 1 << 20);
    let mut points: Vec<T> = (0..=panels)
        .map(|i| T::PI() * T::from_count(i) / T::from_count(panels))
        .collect();
    if let Some(k0) = resonant_wavenumber(model, model.omega_1) {
        points.push(k0);
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
    }
    let q = integrate_breakpoints(integrand, &points, &Tolerance::new(T::lit(1e-15), T::lit(1e-10)))?;
    // Evenness in k doubles the half-range integral.
    let rate = T::lit(2.0) * model.g * model.g * tau / T::PI() * q.value;
    Ok(rate.max(T::zero()))
}

/// Golden-rule rate `R₀ = 2π G(Ω₁) = 2g²(1 + cos nk₀)/(ξ sin k₀)`,
/// `cos k₀ = (ω_c − Ω₁)/2ξ`; zero when `Ω₁` is outside the band.
pub fn baseline_rate<T: Real>(model: &WaveguideModel<T>) -> Result<T> {
    let (lo, hi) = model.band();
    let w = model.omega_1;
    let guard = T::lit(1e-9) * model.xi;
    if (w - lo).abs() <= guard || (w - hi).abs() <= guard {
        return Err(Error::BandEdge {
            omega: w.to_f64_lossy(),
        });
    }
    if w <= lo || w >= hi {
        return Ok(T::zero());
    }
    let c = (model.omega_c - w) / (T::lit(2.0) * model.xi);
    let s = (T::one() - c * c).sqrt();
    let g2 = model.g * model.g;
    Ok(T::lit(2.0) * g2 * (T::one() + chebyshev_t(model.n, c)) / (model.xi * s))
}

pub fn survival<T: Real>(model: &WaveguideModel<T>, tau: T, m: u32) -> Result<T> {
    if m == 0 {
        check_tau(tau)?;
        return Ok(T::one());
    }
    let r = decay_rate(model, tau)?;
    Ok((-r * tau * T::from_count(m as usize)).exp())
}

fn no_decay_threshold<T: Real>(model: &WaveguideModel<T>) -> T {
    T::lit(NO_DECAY_THRESHOLD) * model.omega_a.abs()
}

/// `count` points from `a` to `b` inclusive, equally spaced in `ln τ`.
pub fn geometric_grid<T: Real>(a: T, b: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            let step = (lb - la) / T::from_count(count - 1);
            (0..count)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == count - 1 {
                        b
                    } else {
                        (la + step * T::from_count(i)).exp()
                    }
                })
                .collect()
        }
    }
}

/// Rates at every `τ`, evaluated in parallel, returned in grid order.
pub fn decay_rates<T: Real>(model: &WaveguideModel<T>, taus: &[T]) -> Result<Vec<T>> {
    taus.par_iter().map(|&t| decay_rate(model, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoReport<T> {
    pub r0: T,
    pub tau_star: Option<T>,
    pub classification: Classification,
}

impl<T: Real> ZenoReport<T> {
    pub fn r0_tau_star(&self) -> Option<T> {
        self.tau_star.map(|t| t * self.r0)
    }
}

/// First `τ` past the minimum of `Q` at which `Q` climbs back to 1.
///
/// `Ok(None)` when `Q` never crosses upward inside the window; an error
/// when `R₀` is below the no-decay threshold and `Q` is undefined.
pub fn find_tau_star<T: Real>(model: &WaveguideModel<T>, scan: &ScanOptions<T>) -> Result<Option<T>> {
    let r0 = baseline_rate(model)?;
    if !(r0 >= no_decay_threshold(model)) {
        return Err(Error::Domain(format!(
            "baseline rate {r0} below the no-decay threshold; Q is undefined"
        )));
    }
    let unit = model.omega_a.abs();
    let taus = geometric_grid(scan.tau_min / unit, scan.tau_max / unit, scan.points);
    let q: Vec<T> = decay_rates(model, &taus)?.into_iter().map(|r| r / r0).collect();
    let argmin = q
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let Some(i) = (argmin + 1..q.len()).find(|&i| q[i - 1] < T::one() && q[i] >= T::one()) else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (taus[i - 1], taus[i]);
    let f = |t: T| decay_rate(model, t).map(|r| r / r0 - T::one());
    if f(hi)? == T::zero() {
        return Ok(Some(hi));
    }
    while (hi - lo) > scan.rel_tol * hi {
        // Bisect in ln τ: the bracket spans a fixed ratio.
        let mid = (lo * hi).sqrt();
        if f(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo)?, f(hi)?);
    // Linear interpolation inside the final bracket.
    let root = if fhi != flo {
        lo - flo * (hi - lo) / (fhi - flo)
    } else {
        hi
    };
    Ok(Some(root.max(lo).min(hi)))
}

pub fn classify_with<T: Real>(model: &WaveguideModel<T>, scan: &ScanOptions<T>) -> Result<ZenoReport<T>> {
    let r0 = baseline_rate(model)?;
    if !(r0 >= no_decay_threshold(model)) {
        return Ok(ZenoReport {
            r0,
            tau_star: None,
            classification: Classification::NoBaselineDecay,
        });
    }
    let tau_star = find_tau_star(model, scan)?;
    let classification = match tau_star {
        Some(t) if r0 * t < T::one() => Classification::AntiZeno,
        _ => Classification::ZenoOnly,
    };
    Ok(ZenoReport {
        r0,
        tau_star,
        classification,
    })
}

pub fn classify<T: Real>(model: &WaveguideModel<T>) -> Result<ZenoReport<T>> {
    classify_with(model, &ScanOptions::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve<T> {
    pub tau_grid: Vec<T>,
    pub rates: Vec<T>,
    /// `R/R₀`; absent when there is no baseline decay.
    pub q: Option<Vec<T>>,
    pub r0: T,
    pub tau_star: Option<T>,
    pub classification: Classification,
}

pub fn decay_curve<T: Real>(model: &WaveguideModel<T>, tau_grid: &[T], scan: &ScanOptions<T>) -> Result<DecayCurve<T>> {
    if let Some(bad) = tau_grid.iter().find(|t| !(**t > T::zero() && t.is_finite())) {
        return Err(Error::Domain(format!("tau grid value {bad} must be positive")));
    }
    if tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("tau grid must be strictly increasing".into()));
    }
    let rates = decay_rates(model, tau_grid)?;
    let report = classify_with(model, scan)?;
    let q = (report.classification != Classification::NoBaselineDecay)
        .then(|| rates.iter().map(|&r| r / report.r0).collect());
    Ok(DecayCurve {
        tau_grid: tau_grid.to_vec(),
        rates,
        q,
        r0: report.r0,
        tau_star: report.tau_star,
        classification: report.classification,
    })
}

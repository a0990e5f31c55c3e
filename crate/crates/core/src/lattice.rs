//! Exact single-excitation dynamics of the giant atom on a finite open chain.
//!
//! The state is `α|e,vac⟩ + Σ_j β_j |g,1_j⟩`. The chain is long enough that
//! nothing reflected at its ends can return to the atom before `t_max`, so
//! inside that horizon the evolution is that of the infinite waveguide.
//! Counter-rotating physics enters only through the dressed frequency `Ω₁`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::real::Real;
use crate::special::bessel_j;
use crate::waveguide::WaveguideModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig<T> {
    /// Chain length `N_c`.
    pub n_sites: usize,
    /// Integrator step; `None` picks `0.02/(ω_c + 2ξ)`.
    pub dt: Option<T>,
    pub t_max: T,
    /// Keep every `record_every`-th step in the trajectory.
    pub record_every: usize,
}

impl<T: Real> OracleConfig<T> {
    pub fn new(n_sites: usize, t_max: T) -> Self {
        Self {
            n_sites,
            dt: None,
            t_max,
            record_every: 1,
        }
    }

    /// Shortest even chain whose causal horizon exceeds `t_max` with margin.
    pub fn for_horizon(model: &WaveguideModel<T>, t_max: T) -> Self {
        let reach = (T::lit(2.0) * model.xi * t_max * T::lit(1.25))
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let half = reach + model.n as usize + 32;
        Self::new(2 * half, t_max)
    }

    /// Coupling sites `(N_c/2, N_c/2 + n)`.
    pub fn atom_sites(&self, n: u32) -> (usize, usize) {
        let s0 = self.n_sites / 2;
        (s0, s0 + n as usize)
    }

    /// Time for the fastest wave (group velocity `2ξ`) to reach the nearer end and come back.
    pub fn horizon(&self, model: &WaveguideModel<T>) -> T {
        let room = self.n_sites as f64 / 2.0 - model.n as f64;
        T::lit(room) / (T::lit(2.0) * model.xi)
    }

    pub fn step(&self, model: &WaveguideModel<T>) -> T {
        self.dt
            .unwrap_or_else(|| T::lit(0.02) / (model.omega_c.abs() + T::lit(2.0) * model.xi))
    }

    pub fn validate(&self, model: &WaveguideModel<T>) -> Result<()> {
        let (_, s1) = self.atom_sites(model.n);
        if s1 >= self.n_sites {
            return Err(Error::InvalidParameter {
                name: "n_sites",
                reason: format!("{} sites cannot hold separation {}", self.n_sites, model.n),
            });
        }
        if !(self.t_max >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                reason: format!("{} must be non-negative", self.t_max),
            });
        }
        let horizon = self.horizon(model);
        if !(self.t_max < horizon) {
            return Err(Error::Causality {
                t_max: self.t_max.to_f64_lossy(),
                horizon: horizon.to_f64_lossy(),
            });
        }
        if !(self.step(model) > T::zero()) || self.record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "step and recording stride must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T> {
    pub alpha: Complex<T>,
    pub beta: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> LatticeState<T> {
    /// Atom excited, field in vacuum.
    pub fn excited(n_sites: usize) -> Self {
        Self {
            alpha: Complex::new(T::one(), T::zero()),
            beta: vec![Complex::new(T::zero(), T::zero()); n_sites],
            t: T::zero(),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.beta
            .iter()
            .fold(self.alpha.norm_sqr(), |acc, b| acc + b.norm_sqr())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub alpha: Vec<Complex<T>>,
    pub final_state: LatticeState<T>,
    /// Largest `| ‖ψ‖² − 1 |` seen.
    pub norm_drift: T,
}

impl<T: Real> Trajectory<T> {
    pub fn survival(&self) -> Vec<T> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }
}

struct Chain<T> {
    omega_1: T,
    omega_c: T,
    xi: T,
    g: T,
    s0: usize,
    s1: usize,
}

impl<T: Real> Chain<T> {
    /// `−i (H − ω_c) ψ`. Integrating in the frame rotating at `ω_c` keeps
    /// the RK4 phase error set by the band width rather than `ω_c`.
    fn derivative(&self, alpha: Complex<T>, beta: &[Complex<T>], d_alpha: &mut Complex<T>, d_beta: &mut [Complex<T>]) {
        let n = beta.len();
        let minus_i = Complex::new(T::zero(), -T::one());
        let h_alpha = alpha * (self.omega_1 - self.omega_c) + (beta[self.s0] + beta[self.s1]) * self.g;
        *d_alpha = h_alpha * minus_i;
        for j in 0..n {
            let mut neigh = Complex::new(T::zero(), T::zero());
            if j > 0 {
                neigh = neigh + beta[j - 1];
            }
            if j + 1 < n {
                neigh = neigh + beta[j + 1];
            }
            let h = -neigh * self.xi;
            d_beta[j] = h * minus_i;
        }
        let kick = alpha * self.g * minus_i;
        d_beta[self.s0] = d_beta[self.s0] + kick;
        d_beta[self.s1] = d_beta[self.s1] + kick;
    }
}

fn lab_phase<T: Real>(omega_c: T, t: T) -> Complex<T> {
    Complex::new(T::zero(), -omega_c * t).exp()
}

/// Classical RK4 from the excited atom up to `config.t_max`.
///
/// The step is shrunk slightly so that an integer number of steps lands
/// exactly on `t_max`.
pub fn evolve<T: Real>(model: &WaveguideModel<T>, config: &OracleConfig<T>) -> Result<Trajectory<T>> {
    config.validate(model)?;
    let (s0, s1) = config.atom_sites(model.n);
    let chain = Chain {
        omega_1: model.omega_1,
        omega_c: model.omega_c,
        xi: model.xi,
        g: model.g,
        s0,
        s1,
    };
    let n = config.n_sites;
    let steps = (config.t_max / config.step(model)).ceil().to_usize().unwrap_or(0);
    let dt = if steps == 0 {
        T::zero()
    } else {
        config.t_max / T::from_count(steps)
    };

    let mut state = LatticeState::excited(n);
    let zero = Complex::new(T::zero(), T::zero());
    let mut k = [zero; 4];
    let mut kb: Vec<Vec<Complex<T>>> = (0..4).map(|_| vec![zero; n]).collect();
    let mut tmp = vec![zero; n];
    let mut times = vec![T::zero()];
    let mut alphas = vec![state.alpha];
    let mut drift = T::zero();
    let half = T::lit(0.5);
    let sixth = dt / T::lit(6.0);

    for step in 1..=steps {
        chain.derivative(state.alpha, &state.beta, &mut k[0], &mut kb[0]);
        for stage in 1..4 {
            let c = if stage == 3 { dt } else { dt * half };
            let a = state.alpha + k[stage - 1] * c;
            for j in 0..n {
                tmp[j] = state.beta[j] + kb[stage - 1][j] * c;
            }
            chain.derivative(a, &tmp, &mut k[stage], &mut kb[stage]);
        }
        state.alpha = state.alpha + (k[0] + (k[1] + k[2]) * T::lit(2.0) + k[3]) * sixth;
        for j in 0..n {
            state.beta[j] = state.beta[j] + (kb[0][j] + (kb[1][j] + kb[2][j]) * T::lit(2.0) + kb[3][j]) * sixth;
        }
        state.t = dt * T::from_count(step);
        if step % config.record_every == 0 || step == steps {
            times.push(state.t);
            alphas.push(state.alpha * lab_phase(model.omega_c, state.t));
            drift = drift.max((state.norm_sqr() - T::one()).abs());
        }
    }
    drift = drift.max((state.norm_sqr() - T::one()).abs());
    let phase = lab_phase(model.omega_c, state.t);
    state.alpha = state.alpha * phase;
    for b in &mut state.beta {
        *b = *b * phase;
    }
    if drift > T::lit(1e-7) {
        return Err(Error::StepSize {
            drift: drift.to_f64_lossy(),
        });
    }
    Ok(Trajectory {
        times,
        alpha: alphas,
        final_state: state,
        norm_drift: drift,
    })
}

/// Probability of finding the atom excited after `m` cycles of
/// {evolve for `τ`, project onto `|e, vac⟩`}, each cycle restarting from
/// the projected state.
pub fn measured_survival<T: Real>(model: &WaveguideModel<T>, config: &OracleConfig<T>, tau: T, m: u32) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::Domain(format!(
            "measurement interval tau = {tau} must be positive"
        )));
    }
    let segment = OracleConfig {
        t_max: tau,
        record_every: usize::MAX,
        ..*config
    };
    let mut p = T::one();
    for _ in 0..m {
        let traj = evolve(model, &segment)?;
        p = p * traj.final_state.alpha.norm_sqr();
    }
    Ok(p)
}

fn i_pow<T: Real>(n: u32) -> Complex<T> {
    match n % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// `Φ(t) = Σ_k |g_k|² e^{−iω_k t} = 2g² e^{−iω_c t}(J₀(2ξt) + iⁿ Jₙ(2ξt))`,
/// from `∫_{−π}^{π} e^{ix cos k} cos(nk) dk = 2π iⁿ Jₙ(x)`.
pub fn memory_kernel<T: Real>(model: &WaveguideModel<T>, t: T) -> Complex<T> {
    let x = T::lit(2.0) * model.xi * t;
    let bracket = Complex::new(bessel_j(0, x), T::zero()) + i_pow::<T>(model.n) * bessel_j(model.n, x);
    let phase = Complex::new(T::zero(), -model.omega_c * t).exp();
    phase * bracket * (T::lit(2.0) * model.g * model.g)
}

/// `Φ(t)` by direct quadrature of `(g²/π) ∫ (1 + cos kn) e^{−iω_k t} dk`.
pub fn memory_kernel_quadrature<T: Real>(model: &WaveguideModel<T>, t: T) -> Result<Complex<T>> {
    let x = T::lit(2.0) * model.xi * t;
    let n = T::from_count(model.n as usize);
    let scale = T::one().max(x).max(n);
    let panels = (T::lit(4.0) * scale).ceil().to_usize().unwrap_or(4);
    let q = integrate(
        |k: T| Complex::new(T::zero(), x * k.cos()).exp() * (T::one() + (n * k).cos()),
        T::zero(),
        T::PI(),
        panels,
        &Tolerance::new(T::lit(1e-15), T::lit(1e-13)),
    )?;
    let phase = Complex::new(T::zero(), -model.omega_c * t).exp();
    Ok(phase * q.value * (T::lit(2.0) * model.g * model.g / T::PI()))
}

/// First-order amplitude in the frame rotating at `Ω₁`:
/// `α̃(τ) = 1 − ∫₀^τ dt ∫₀^t e^{iΩ₁s} Φ(s) ds = 1 − ∫₀^τ (τ − s) e^{iΩ₁s} Φ(s) ds`.
pub fn short_time_amplitude<T: Real>(model: &WaveguideModel<T>, tau: T) -> Result<Complex<T>> {
    let one = Complex::new(T::one(), T::zero());
    if !(tau > T::zero()) {
        return if tau == T::zero() {
            Ok(one)
        } else {
            Err(Error::Domain(format!("tau = {tau} must be non-negative")))
        };
    }
    let beat = (model.omega_1 - model.omega_c).abs() + T::lit(2.0) * model.xi;
    let panels = (T::lit(4.0) * T::one().max(beat * tau)).ceil().to_usize().unwrap_or(4);
    let q = integrate(
        |s: T| Complex::new(T::zero(), model.omega_1 * s).exp() * memory_kernel(model, s) * (tau - s),
        T::zero(),
        tau,
        panels,
        &Tolerance::new(T::lit(1e-16), T::lit(1e-12)),
    )?;
    Ok(one - q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeno::{baseline_rate, decay_rate};

    fn model(g: f64, n: u32, rwa: bool) -> WaveguideModel<f64> {
        WaveguideModel::new(1.0, 0.1, g, n, 1.0, rwa).unwrap()
    }

    #[test]
    fn decoupled_atom_only_rotates() {
        let m = model(0.0, 1, false);
        let traj = evolve(&m, &OracleConfig::new(64, 20.0)).unwrap();
        for (t, a) in traj.times.iter().zip(&traj.alpha) {
            let want = Complex::new(0.0, -m.omega_1 * t).exp();
            assert!((a - want).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn causality_is_enforced() {
        let m = model(0.05, 4, false);
        let cfg = OracleConfig::new(64, 200.0);
        assert!(matches!(evolve(&m, &cfg), Err(Error::Causality { .. })));
        let auto = OracleConfig::for_horizon(&m, 200.0);
        assert!(auto.validate(&m).is_ok());
    }

    #[test]
    fn norm_is_conserved() {
        let m = model(0.2, 3, false);
        let traj = evolve(&m, &OracleConfig::for_horizon(&m, 60.0)).unwrap();
        assert!(traj.norm_drift < 1e-9, "drift {}", traj.norm_drift);
    }

    #[test]
    fn halving_the_step_changes_little() {
        let m = model(0.1, 1, false);
        let cfg = OracleConfig::for_horizon(&m, 30.0);
        let coarse = evolve(&m, &cfg).unwrap();
        let dt = cfg.step(&m) / 2.0;
        let fine = evolve(&m, &OracleConfig { dt: Some(dt), ..cfg }).unwrap();
        let a = coarse.final_state.alpha;
        let b = fine.final_state.alpha;
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn chain_length_does_not_matter_inside_horizon() {
        let m = model(0.1, 2, false);
        let small = evolve(&m, &OracleConfig::new(256, 40.0)).unwrap().survival();
        let large = evolve(&m, &OracleConfig::new(512, 40.0)).unwrap().survival();
        for (a, b) in small.iter().zip(&large) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rwa_enters_only_through_dressed_frequency() {
        let beyond = model(0.2, 2, false);
        let shifted_rwa = WaveguideModel::new(1.0, 0.1, 0.2, 2, beyond.omega_1, true).unwrap();
        let cfg = OracleConfig::new(128, 10.0);
        let a = evolve(&beyond, &cfg).unwrap();
        let b = evolve(&shifted_rwa, &cfg).unwrap();
        assert_eq!(a.alpha, b.alpha);
    }

    // Slope of −ln|α|² against t over a window, by least squares.
    fn decay_slope(traj: &Trajectory<f64>, t0: f64, t1: f64) -> f64 {
        let pts: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(traj.survival())
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(t, p)| (*t, -p.ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
            (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
        });
        num / den
    }

    #[test]
    fn weak_coupling_recovers_golden_rule() {
        let m = model(0.0125, 1, false);
        let r0 = baseline_rate(&m).unwrap();
        let cfg = OracleConfig {
            record_every: 20,
            ..OracleConfig::for_horizon(&m, 400.0)
        };
        let traj = evolve(&m, &cfg).unwrap();
        let slope = decay_slope(&traj, 100.0, 400.0);
        assert!((slope / r0 - 1.0).abs() < 0.03, "slope {slope} vs R0 {r0}");
    }

    #[test]
    fn rwa_dark_state_survives_at_weak_coupling() {
        let m = model(0.005, 2, true);
        let traj = evolve(&m, &OracleConfig::for_horizon(&m, 100.0)).unwrap();
        let min = traj.survival().iter().cloned().fold(1.0, f64::min);
        assert!(min > 0.99, "min survival {min}");
    }

    #[test]
    fn dark_state_keeps_bound_fraction() {
        // At the dark point the self-energy slope is g²/ξ², so the bound
        // state carries weight Z = 1/(1 + g²/ξ²) and |α|² → Z².
        let m = model(0.01, 2, true);
        let traj = evolve(
            &m,
            &OracleConfig {
                record_every: 50,
                ..OracleConfig::for_horizon(&m, 200.0)
            },
        )
        .unwrap();
        let z = 1.0 / (1.0 + (m.g / m.xi).powi(2));
        let late = *traj.survival().last().unwrap();
        assert!((late - z * z).abs() < 2e-3, "{late} vs {}", z * z);
    }

    #[test]
    fn kernel_at_origin() {
        let z = memory_kernel(&model(0.2, 0, false), 0.0);
        assert!((z - Complex::new(4.0 * 0.04, 0.0)).norm() < 1e-16);
        let z = memory_kernel(&model(0.2, 3, false), 0.0);
        assert!((z - Complex::new(2.0 * 0.04, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn kernel_methods_agree() {
        for n in 0..=6 {
            let m = model(0.2, n, false);
            for i in 0..=50 {
                let t = 100.0 / m.xi * i as f64 / 50.0 + 0.37;
                let a = memory_kernel(&m, t);
                let b = memory_kernel_quadrature(&m, t).unwrap();
                assert!((a - b).norm() <= 1e-8 * b.norm(), "n={n} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kernel_envelope_decays_as_inverse_sqrt() {
        for n in [0, 1, 4] {
            let m = model(0.2, n, false);
            // RMS of |Φ| over windows many oscillations wide, then a log-log slope.
            let centres: Vec<f64> = (0..10).map(|i| (50.0 * 10f64.powf(i as f64 / 9.0)) / m.xi).collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = centres
                .iter()
                .map(|&c| {
                    let w = 40.0;
                    let samples = 400;
                    let ms: f64 = (0..samples)
                        .map(|j| memory_kernel(&m, c - w / 2.0 + w * j as f64 / samples as f64).norm_sqr())
                        .sum::<f64>()
                        / samples as f64;
                    (c.ln(), 0.5 * ms.ln())
                })
                .unzip();
            let fit = crate::fit::least_squares(|x| vec![1.0, x], &xs, &ys).unwrap();
            let slope = fit.coefficients[1];
            assert!((slope + 0.5).abs() < 0.05, "n={n}: slope {slope}");
        }
    }

    #[test]
    fn short_time_amplitude_limits() {
        let m = model(0.05, 1, false);
        assert_eq!(short_time_amplitude(&m, 0.0).unwrap(), Complex::new(1.0, 0.0));
        let cfg = OracleConfig {
            record_every: 1,
            ..OracleConfig::for_horizon(&m, 2.0)
        };
        let traj = evolve(&m, &cfg).unwrap();
        for (t, a) in traj.times.iter().zip(&traj.alpha).skip(1) {
            let approx = short_time_amplitude(&m, *t).unwrap().norm_sqr();
            let exact = a.norm_sqr();
            assert!(
                (approx - exact).abs() <= 3.0 * (m.g * t).powi(4),
                "t={t}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn short_time_amplitude_reproduces_filtered_rate() {
        let m = model(0.05, 1, false);
        for tau in [0.5, 1.0, 2.0, 3.5, 5.0] {
            let a = short_time_amplitude(&m, tau).unwrap();
            let rate = -a.norm_sqr().ln() / tau;
            let r = decay_rate(&m, tau).unwrap();
            assert!((rate / r - 1.0).abs() < 0.05, "tau={tau}: {rate} vs {r}");
        }
    }

    #[test]
    fn measured_survival_product_structure() {
        let m = model(0.1, 1, false);
        let cfg = OracleConfig::new(128, 0.0);
        let one = measured_survival(&m, &cfg, 1.5, 1).unwrap();
        let direct = evolve(&m, &OracleConfig { t_max: 1.5, ..cfg }).unwrap();
        assert!((one - direct.final_state.alpha.norm_sqr()).abs() < 1e-15);
        let seven = measured_survival(&m, &cfg, 1.5, 7).unwrap();
        assert!((seven / one.powi(7) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn anti_zeno_witness() {
        let m = model(0.2, 2, false);
        let cfg = OracleConfig::new(128, 0.0);
        let p = measured_survival(&m, &cfg, 1.0, 20).unwrap();
        let rate = -p.ln() / 20.0;
        assert!(rate > baseline_rate(&m).unwrap(), "measured rate {rate}");
    }
}

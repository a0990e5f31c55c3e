//! Three-junction flux-qubit loop attached to a discretised transmission line.
//!
//! Energies are measured in units of `E_J` with `ħ = 1`. With the reduced
//! flux quantum `Φ₀/2π` also set to one (the default `flux_unit`), the
//! junction capacitance `c_j` is the dimensionless charging ratio
//! `E_J C_J (Φ₀/2π)² / ħ²`.
//!
//! The loop potential is `−E_J [α cos(2πf − φ₊) + 2 cos(φ₊/2) cos(φ₋/2)]`,
//! the Legendre transform of the junction Lagrangian. It is 4π-periodic in
//! both `φ₊ = φ₁ + φ₃` and `φ₋ = φ₁ − φ₃`; since `φ₁` and `φ₃` are compact
//! 2π-periodic phases, physical wavefunctions are additionally invariant
//! under the joint shift `(φ₊, φ₋) → (φ₊ + 2π, φ₋ + 2π)`. The solver works
//! on the 4π torus and projects onto that invariant sector.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::real::Real;

/// Charging ratio `E_J C_J (Φ₀/2π)²/ħ²` at which the lowest splitting is
/// `0.0288 E_J` for `α = 0.8`, `f = 1/2` on the default 64×64 spectral grid
/// (see [`calibrate_charging_ratio`]).
pub const DEFAULT_CHARGING_RATIO: f64 = 2.913_068_901_698_918;

/// Target splitting used for the calibration of [`DEFAULT_CHARGING_RATIO`].
pub const TARGET_SPLITTING: f64 = 0.0288;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams<T> {
    /// Josephson energy of the outer junctions; the energy unit.
    pub e_j: T,
    /// Junction capacitance.
    pub c_j: T,
    /// Middle-junction scale factor, `1/2 < α < 1`.
    pub alpha: T,
    /// Reduced external flux `Φ_e/Φ₀`.
    pub f: T,
    /// Line capacitance per unit length.
    pub c_t: T,
    /// Line inductance per unit length.
    pub l_t: T,
    /// Lattice cell length.
    pub dx: T,
    /// Reduced flux quantum `Φ₀/2π`.
    pub flux_unit: T,
}

impl CircuitParams<f64> {
    /// Calibrated default: `α = 0.8`, `f = 1/2`, line parameters chosen so
    /// that `|J₀ₙ| ~ 1e−12 E_J`, `|J| ~ 1e−6 E_J` and `g/ω_c > 0.1`.
    pub fn calibrated() -> Self {
        Self {
            e_j: 1.0,
            c_j: DEFAULT_CHARGING_RATIO,
            alpha: 0.8,
            f: 0.5,
            c_t: 1.0e6,
            l_t: 3.0e-3,
            dx: 1.0,
            flux_unit: 1.0,
        }
    }
}

impl<T: Real> CircuitParams<T> {
    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.alpha > half && self.alpha < T::one()) {
            return Err(invalid("alpha", format!("{} not in (1/2, 1)", self.alpha)));
        }
        if !(self.f >= T::zero() && self.f <= T::one()) {
            return Err(invalid("f", format!("{} not in [0, 1]", self.f)));
        }
        for (name, v) in [
            ("e_j", self.e_j),
            ("c_j", self.c_j),
            ("c_t", self.c_t),
            ("l_t", self.l_t),
            ("dx", self.dx),
            ("flux_unit", self.flux_unit),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// `𝒞_J = C_J (Φ₀/2π)²`.
    pub fn cal_c_j(&self) -> T {
        self.c_j * self.flux_unit * self.flux_unit
    }

    /// `𝒞_T = C_T (Φ₀/2π)²`.
    pub fn cal_c_t(&self) -> T {
        self.c_t * self.flux_unit * self.flux_unit
    }

    pub fn with_flux(mut self, f: T) -> Self {
        self.f = f;
        self
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

pub type Mat3<T> = [[T; 3]; 3];

/// Capacitance ("mass") matrix in the `(φ_N, φ_0, φ_{J+})` basis and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassMatrix<T> {
    pub matrix: Mat3<T>,
    pub inverse: Mat3<T>,
}

pub fn mass_matrix<T: Real>(params: &CircuitParams<T>) -> Result<MassMatrix<T>> {
    params.validate()?;
    let cj = params.cal_c_j();
    let ct = params.cal_c_t();
    let a = params.alpha;
    let line = a * cj + params.dx * ct;
    let matrix = [
        [line, -a * cj, -a * cj],
        [-a * cj, line, a * cj],
        [-a * cj, a * cj, (a + T::lit(0.5)) * cj],
    ];
    let inverse = invert3(&matrix)?;
    Ok(MassMatrix { matrix, inverse })
}

/// Adjugate inverse of a 3×3 matrix.
pub fn invert3<T: Real>(m: &Mat3<T>) -> Result<Mat3<T>> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let c00 = cof(1, 2, 1, 2);
    let c01 = -cof(1, 2, 0, 2);
    let c02 = cof(1, 2, 0, 1);
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let scale = m.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let floor = T::lit(1e-300).max(T::min_positive_value()) * scale * scale * scale;
    if !(det.abs() > floor) || !det.is_finite() {
        return Err(Error::DegenerateCircuit {
            det: det.to_f64_lossy(),
        });
    }
    let c10 = -cof(0, 2, 1, 2);
    let c11 = cof(0, 2, 0, 2);
    let c12 = -cof(0, 2, 0, 1);
    let c20 = cof(0, 1, 1, 2);
    let c21 = -cof(0, 1, 0, 2);
    let c22 = cof(0, 1, 0, 1);
    // inverse = adj / det, adj = cofactorᵀ
    Ok([
        [c00 / det, c10 / det, c20 / det],
        [c01 / det, c11 / det, c21 / det],
        [c02 / det, c12 / det, c22 / det],
    ])
}

/// Effective loop mass and loop/line couplings derived from the inverse mass matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants<T> {
    /// Effective mass `M₊` of the `φ_{J+}` mode.
    pub m_plus: T,
    /// Node–loop momentum coupling `J`.
    pub j: T,
    /// Node–node momentum coupling `J₀ₙ`.
    pub j_0n: T,
    pub mass_matrix: Mat3<T>,
    pub inverse: Mat3<T>,
}

impl<T: Real> CouplingConstants<T> {
    /// Evaluates `M₊`, `J`, `J₀ₙ` from a given inverse mass matrix `N`.
    pub fn from_inverse(params: &CircuitParams<T>, mass_matrix: Mat3<T>, n: Mat3<T>) -> Self {
        let cj = params.cal_c_j();
        let a = params.alpha;
        let line = a * cj + params.dx * params.cal_c_t();
        let ap = a + T::lit(0.5);
        let two = T::lit(2.0);
        let (n11, n12, n13, n33) = (n[0][0], n[0][1], n[0][2], n[2][2]);

        let m_inv = T::lit(0.5) * cj * ap * n33 * n33 + line * n13 * n13 + a * cj * (n13 * n13 - two * n13 * n33);
        let j_0n = -cj * ap * n13 * n13
            + two * line * n11 * n12
            + a * cj * (two * n11 * n13 - two * n12 * n13 - n11 * n11 - n12 * n12);
        let j =
            -ap * cj * n13 * n33 + line * (n12 - n11) * n13 + a * cj * ((n12 - n11) * (n13 - n33) + two * n13 * n13);
        Self {
            m_plus: T::one() / m_inv,
            j,
            j_0n,
            mass_matrix,
            inverse: n,
        }
    }

    /// `|J|/E_J`.
    pub fn j_ratio(&self, params: &CircuitParams<T>) -> T {
        self.j.abs() / params.e_j
    }

    /// `|J₀ₙ|/E_J`.
    pub fn j_0n_ratio(&self, params: &CircuitParams<T>) -> T {
        self.j_0n.abs() / params.e_j
    }
}

pub fn effective_couplings<T: Real>(params: &CircuitParams<T>) -> Result<CouplingConstants<T>> {
    let mm = mass_matrix(params)?;
    Ok(CouplingConstants::from_inverse(params, mm.matrix, mm.inverse))
}

/// Resonator frequency `ω_c` and hopping `ξ` of the discretised line.
pub fn waveguide_constants<T: Real>(params: &CircuitParams<T>) -> (T, T) {
    let lc = params.dx * params.dx * params.l_t * params.c_t;
    let omega_c = (T::lit(2.0) / lc).sqrt();
    let xi = (T::one() / (T::lit(8.0) * lc)).sqrt();
    (omega_c, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KineticScheme {
    /// Fourier (spectral) second derivative.
    #[default]
    Spectral,
    /// Three-point central difference.
    CentralDifference,
}

/// Periodic grid on the 4π × 4π phase torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub n_plus: usize,
    pub n_minus: usize,
    #[serde(default)]
    pub scheme: KineticScheme,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            n_plus: 64,
            n_minus: 64,
            scheme: KineticScheme::Spectral,
        }
    }
}

impl PhaseGrid {
    pub fn square(n: usize) -> Self {
        Self {
            n_plus: n,
            n_minus: n,
            scheme: KineticScheme::Spectral,
        }
    }

    pub fn with_scheme(mut self, scheme: KineticScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Half-width of each axis: the grid spans `[−extent, extent)`.
    pub fn extent(&self) -> f64 {
        2.0 * PI
    }

    pub fn refined(&self) -> Self {
        Self {
            n_plus: 2 * self.n_plus,
            n_minus: 2 * self.n_minus,
            scheme: self.scheme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_plus", self.n_plus), ("n_minus", self.n_minus)] {
            if n < 16 || n % 2 != 0 {
                return Err(invalid(name, format!("{n} must be even and at least 16")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_plus * self.n_minus
    }

    pub fn nodes<T: Real>(n: usize) -> Vec<T> {
        let h = 4.0 * PI / n as f64;
        (0..n).map(|j| T::lit(-2.0 * PI + h * j as f64)).collect()
    }
}

/// Nonzero entries `(offset, coefficient)` of the circulant `−∂²` on a ring
/// of `n` points spanning 4π.
fn circulant_laplacian<T: Real>(n: usize, scheme: KineticScheme) -> Vec<(usize, T)> {
    match scheme {
        KineticScheme::Spectral => {
            // c[d] = (1/n) Σ_m q_m² cos(2π m d / n), q_m = m/2, m ∈ [−n/2, n/2).
            let half = (n / 2) as i64;
            (0..n)
                .map(|d| {
                    let s: f64 = (-half..half)
                        .map(|m| {
                            let q = m as f64 / 2.0;
                            q * q * (2.0 * PI * (m * d as i64) as f64 / n as f64).cos()
                        })
                        .sum();
                    (d, T::lit(s / n as f64))
                })
                .collect()
        }
        KineticScheme::CentralDifference => {
            let h = 4.0 * PI / n as f64;
            let inv = 1.0 / (h * h);
            vec![(0, T::lit(2.0 * inv)), (1, T::lit(-inv)), (n - 1, T::lit(-inv))]
        }
    }
}

/// Discretised loop Hamiltonian, applied matrix-free.
pub struct LoopHamiltonian<T> {
    grid: PhaseGrid,
    kin_plus: Vec<(usize, T)>,
    kin_minus: Vec<(usize, T)>,
    potential: Vec<T>,
    phi_plus: Vec<T>,
}

impl<T: Real> LoopHamiltonian<T> {
    pub fn new(params: &CircuitParams<T>, grid: PhaseGrid) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        let couplings = effective_couplings(params)?;
        let inv_m_plus = T::one() / couplings.m_plus;
        let inv_c_j = T::one() / params.cal_c_j();
        let kin_plus = circulant_laplacian::<T>(grid.n_plus, grid.scheme)
            .into_iter()
            .map(|(d, c)| (d, c * inv_m_plus))
            .collect();
        let kin_minus = circulant_laplacian::<T>(grid.n_minus, grid.scheme)
            .into_iter()
            .map(|(d, c)| (d, c * inv_c_j))
            .collect();
        let phi_plus = PhaseGrid::nodes::<T>(grid.n_plus);
        let phi_minus = PhaseGrid::nodes::<T>(grid.n_minus);
        let two_pi_f = T::lit(2.0 * PI) * params.f;
        let half = T::lit(0.5);
        let mut potential = Vec::with_capacity(grid.dim());
        for &p in &phi_plus {
            for &m in &phi_minus {
                let v = -params.alpha * (two_pi_f - p).cos() - T::lit(2.0) * (p * half).cos() * (m * half).cos();
                potential.push(params.e_j * v);
            }
        }
        Ok(Self {
            grid,
            kin_plus,
            kin_minus,
            potential,
            phi_plus,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    /// `y = H x` on the row-major `(φ₊, φ₋)` grid.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let (np, nm) = (self.grid.n_plus, self.grid.n_minus);
        for (yi, (&xi, &v)) in y.iter_mut().zip(x.iter().zip(&self.potential)) {
            *yi = v * xi;
        }
        for j in 0..np {
            let out = j * nm;
            for &(d, c) in &self.kin_plus {
                let src = ((j + np - d) % np) * nm;
                for l in 0..nm {
                    y[out + l] = y[out + l] + c * x[src + l];
                }
            }
            let row = &x[out..out + nm];
            for l in 0..nm {
                let mut acc = T::zero();
                for &(d, c) in &self.kin_minus {
                    acc = acc + c * row[(l + nm - d) % nm];
                }
                y[out + l] = y[out + l] + acc;
            }
        }
    }

    /// Orthogonal projector onto states invariant under the joint 2π shift.
    pub fn project_physical(&self, x: &mut [T]) {
        let (np, nm) = (self.grid.n_plus, self.grid.n_minus);
        let half = T::lit(0.5);
        for j in 0..np / 2 {
            for l in 0..nm {
                let a = j * nm + l;
                let b = (j + np / 2) * nm + (l + nm / 2) % nm;
                let avg = (x[a] + x[b]) * half;
                x[a] = avg;
                x[b] = avg;
            }
        }
    }

    /// `sin φ₊` on the grid, row-major.
    pub fn sin_phi_plus(&self) -> Vec<T> {
        let nm = self.grid.n_minus;
        self.phi_plus
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.sin(), nm))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpectrum<T> {
    pub f: T,
    /// Lowest eigenvalues in units of `E_J`, ascending.
    pub levels: Vec<T>,
    /// Normalised grid eigenvectors matching `levels`.
    pub states: Vec<Vec<T>>,
    /// Two-level splitting `E₁ − E₀` in units of `E_J`.
    pub omega: T,
    /// `⟨ψ₁| sin φ₊ |ψ₀⟩`. The overall sign is a gauge choice; only the
    /// modulus is physical.
    pub m_sin: T,
    /// Largest eigen-residual, units of `E_J`.
    pub residual: T,
}

impl<T: Real> QubitSpectrum<T> {
    pub fn m_sin_abs(&self) -> T {
        self.m_sin.abs()
    }
}

pub fn qubit_spectrum<T: Real>(
    params: &CircuitParams<T>,
    grid: PhaseGrid,
    n_levels: usize,
) -> Result<QubitSpectrum<T>> {
    if n_levels < 2 {
        return Err(invalid("n_levels", format!("{n_levels} < 2")));
    }
    let h = LoopHamiltonian::new(params, grid)?;
    let mut opts = LanczosOptions::<T>::new(n_levels);
    // Residual target 1e−10 E_J, relative to |θ| ~ 1.
    opts.tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
    let pairs = lowest_eigenpairs(
        h.dim(),
        |x, y| h.apply(x, y),
        Some(|x: &mut [T]| h.project_physical(x)),
        &opts,
    )?;
    let sin = h.sin_phi_plus();
    let m_sin = pairs.vectors[1]
        .iter()
        .zip(&sin)
        .zip(&pairs.vectors[0])
        .fold(T::zero(), |acc, ((&a, &s), &b)| acc + a * s * b);
    let levels: Vec<T> = pairs.values.iter().map(|&v| v / params.e_j).collect();
    let residual = pairs.residuals.iter().fold(T::zero(), |a, &r| a.max(r)) / params.e_j;
    Ok(QubitSpectrum {
        f: params.f,
        omega: levels[1] - levels[0],
        levels,
        states: pairs.vectors,
        m_sin,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxRow<T> {
    pub f: T,
    pub levels: Vec<T>,
}

/// One spectrum per flux value, evaluated in parallel and returned in input order.
pub fn spectrum_vs_flux<T: Real>(
    params: &CircuitParams<T>,
    grid: PhaseGrid,
    f_values: &[T],
    n_levels: usize,
) -> Result<Vec<FluxRow<T>>> {
    f_values
        .par_iter()
        .map(|&f| qubit_spectrum(&params.with_flux(f), grid, n_levels).map(|s| FluxRow { f, levels: s.levels }))
        .collect()
}

/// Atom–waveguide coupling `g = (α E_J/(Φ₀/2π)²)·(L_T/8C_T)^{1/4}·|⟨e|sin φ₊|g⟩|`.
pub fn atom_coupling_g<T: Real>(params: &CircuitParams<T>, spectrum: &QubitSpectrum<T>) -> T {
    let flux2 = params.flux_unit * params.flux_unit;
    params.alpha * params.e_j / flux2
        * (params.l_t / (T::lit(8.0) * params.c_t)).powf(T::lit(0.25))
        * spectrum.m_sin_abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRow<T> {
    pub c_t: T,
    pub g: T,
    pub g_over_omega_c: T,
}

/// `g(C_T)` sweep. The loop spectrum is recomputed at each point because
/// `M₊` depends (weakly) on the line capacitance.
pub fn coupling_vs_line_capacitance<T: Real>(
    params: &CircuitParams<T>,
    grid: PhaseGrid,
    c_t_values: &[T],
) -> Result<Vec<CouplingRow<T>>> {
    c_t_values
        .par_iter()
        .map(|&c_t| {
            let p = CircuitParams { c_t, ..*params };
            let spec = qubit_spectrum(&p, grid, 2)?;
            let g = atom_coupling_g(&p, &spec);
            let (omega_c, _) = waveguide_constants(&p);
            Ok(CouplingRow {
                c_t,
                g,
                g_over_omega_c: g / omega_c,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConvergence<T> {
    pub coarse: Vec<T>,
    pub fine: Vec<T>,
    /// Largest `|E_i(2n) − E_i(n)|`.
    pub max_shift: T,
}

impl<T: Real> GridConvergence<T> {
    pub fn needs_refinement(&self) -> bool {
        self.max_shift > T::lit(1e-4)
    }
}

/// Compares the spectrum on `grid` against the doubled grid and warns when
/// the shift exceeds `1e−4 E_J`.
pub fn grid_convergence<T: Real>(
    params: &CircuitParams<T>,
    grid: PhaseGrid,
    n_levels: usize,
) -> Result<GridConvergence<T>> {
    let coarse = qubit_spectrum(params, grid, n_levels)?.levels;
    let fine = qubit_spectrum(params, grid.refined(), n_levels)?.levels;
    let max_shift = coarse
        .iter()
        .zip(&fine)
        .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
    let report = GridConvergence {
        coarse,
        fine,
        max_shift,
    };
    if report.needs_refinement() {
        log::warn!(
            "phase grid {}x{} too coarse: levels shift by {} E_J on refinement",
            grid.n_plus,
            grid.n_minus,
            max_shift
        );
    }
    Ok(report)
}

/// Finds the charging ratio `c_j` (with `flux_unit` held fixed) at which
/// `E₁ − E₀` equals `target` (units `E_J`), by regula falsi on
/// `ln(E₁ − E₀)` inside `bracket`. The splitting falls roughly
/// exponentially in `√c_j`, which keeps the log nearly linear.
pub fn calibrate_charging_ratio(
    params: &CircuitParams<f64>,
    grid: PhaseGrid,
    target: f64,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<f64> {
    let h = |c_j: f64| -> Result<f64> {
        let p = CircuitParams { c_j, ..*params };
        Ok((qubit_spectrum(&p, grid, 2)?.omega / target).ln())
    };
    let (mut a, mut b) = bracket;
    let (mut fa, mut fb) = (h(a)?, h(b)?);
    if fa * fb > 0.0 {
        return Err(invalid(
            "bracket",
            format!("splitting does not cross {target} between c_j = {a} and {b}"),
        ));
    }
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = h(c)?;
        if fc == 0.0 || (b - a).abs() < rel_tol * c.abs() {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            // Illinois step: halve the retained end to avoid one-sided stalls.
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if fb.abs() < 1e-13 {
            return Ok(b);
        }
    }
    Ok(b)
}

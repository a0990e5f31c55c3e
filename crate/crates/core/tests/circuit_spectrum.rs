use giant_atom::circuit::{
    grid_convergence, qubit_spectrum, spectrum_vs_flux, KineticScheme, LoopHamiltonian, PhaseGrid, TARGET_SPLITTING,
};
use giant_atom::CircuitParams;
use nalgebra::{DMatrix, SymmetricEigen};

// Dense sector Hamiltonian: pair each grid point with its (+2π, +2π) image and
// project, then diagonalise with a library eigensolver.
fn dense_sector_levels(params: &CircuitParams, grid: PhaseGrid, k: usize) -> Vec<f64> {
    let h = LoopHamiltonian::new(params, grid).unwrap();
    let dim = h.dim();
    let mut full = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        h.apply(&e, &mut col);
        for i in 0..dim {
            full[(i, j)] = col[i];
        }
    }
    let (np, nm) = (grid.n_plus, grid.n_minus);
    let mut basis = DMatrix::<f64>::zeros(dim, dim / 2);
    let mut c = 0;
    for a in 0..np / 2 {
        for l in 0..nm {
            let i = a * nm + l;
            let j = (a + np / 2) * nm + (l + nm / 2) % nm;
            basis[(i, c)] = std::f64::consts::FRAC_1_SQRT_2;
            basis[(j, c)] = std::f64::consts::FRAC_1_SQRT_2;
            c += 1;
        }
    }
    let sector = basis.transpose() * &full * &basis;
    let mut values: Vec<f64> = SymmetricEigen::new(sector).eigenvalues.iter().cloned().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.truncate(k);
    values
}

#[test]
fn lanczos_matches_dense_oracle() {
    let params = CircuitParams::calibrated();
    for scheme in [KineticScheme::Spectral, KineticScheme::CentralDifference] {
        let grid = PhaseGrid::square(16).with_scheme(scheme);
        let dense = dense_sector_levels(&params, grid, 5);
        let spec = qubit_spectrum(&params, grid, 5).unwrap();
        for (a, b) in spec.levels.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{scheme:?}: {a} vs {b}");
        }
    }
}

#[test]
fn hamiltonian_is_symmetric() {
    let params = CircuitParams::calibrated();
    let grid = PhaseGrid::square(16);
    let h = LoopHamiltonian::new(&params, grid).unwrap();
    let dim = h.dim();
    let x: Vec<f64> = (0..dim).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
    let y: Vec<f64> = (0..dim).map(|i| ((i * 5 + 1) % 13) as f64 - 6.0).collect();
    let (mut hx, mut hy) = (vec![0.0; dim], vec![0.0; dim]);
    h.apply(&x, &mut hx);
    h.apply(&y, &mut hy);
    let a: f64 = y.iter().zip(&hx).map(|(p, q)| p * q).sum();
    let b: f64 = x.iter().zip(&hy).map(|(p, q)| p * q).sum();
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
}

#[test]
fn states_are_orthonormal_and_ordered() {
    let spec = qubit_spectrum(&CircuitParams::calibrated(), PhaseGrid::square(32), 5).unwrap();
    for w in spec.levels.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for i in 0..5 {
        for j in 0..5 {
            let d: f64 = spec.states[i].iter().zip(&spec.states[j]).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-10, "<{i}|{j}> = {d}");
        }
    }
    assert!(spec.m_sin_abs() <= 1.0);
    assert!(spec.residual < 1e-9);
}

#[test]
fn default_grid_reproduces_calibrated_splitting() {
    let spec = qubit_spectrum(&CircuitParams::calibrated(), PhaseGrid::default(), 5).unwrap();
    assert!((spec.omega - TARGET_SPLITTING).abs() < 1e-8, "omega = {}", spec.omega);
    let gap_up = spec.levels[2] - spec.levels[1];
    assert!(gap_up > spec.omega);
}

#[test]
fn spectrum_is_flux_symmetric() {
    let params = CircuitParams::calibrated();
    let grid = PhaseGrid::square(32);
    let fs = [0.3, 0.45, 0.49];
    let mirrored: Vec<f64> = fs.iter().map(|f| 1.0 - f).collect();
    let a = spectrum_vs_flux(&params, grid, &fs, 5).unwrap();
    let b = spectrum_vs_flux(&params, grid, &mirrored, 5).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.levels.iter().zip(&rb.levels) {
            assert!((x - y).abs() < 1e-9, "f={}: {x} vs {y}", ra.f);
        }
    }
}

#[test]
fn flux_sweep_shape_and_minimum_gap() {
    let params = CircuitParams::calibrated();
    let grid = PhaseGrid::square(32);
    let fs: Vec<f64> = (0..21).map(|i| 0.45 + 0.005 * i as f64).collect();
    let rows = spectrum_vs_flux(&params, grid, &fs, 5).unwrap();
    assert_eq!(rows.len(), fs.len());
    for (row, f) in rows.iter().zip(&fs) {
        assert_eq!(row.f, *f);
        assert_eq!(row.levels.len(), 5);
        assert!(row.levels.iter().all(|v| v.is_finite()));
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.levels[1] - r.levels[0]).collect();
    let imin = (0..gaps.len())
        .min_by(|&i, &j| gaps[i].partial_cmp(&gaps[j]).unwrap())
        .unwrap();
    assert_eq!(imin, 10, "gap minimum at f = {}", fs[imin]);
}

#[test]
fn grid_doubling_converges() {
    let params = CircuitParams::calibrated();
    let report = grid_convergence(&params, PhaseGrid::square(32), 2).unwrap();
    assert!(report.max_shift < 1e-6, "shift {}", report.max_shift);
    assert!(!report.needs_refinement());
    // Central differences converge algebraically, and monotonically.
    let fd = PhaseGrid::square(16).with_scheme(KineticScheme::CentralDifference);
    let r1 = grid_convergence(&params, fd, 2).unwrap();
    let r2 = grid_convergence(&params, fd.refined(), 2).unwrap();
    assert!(r2.max_shift < r1.max_shift);
    assert!(r1.needs_refinement());
}

#[test]
fn rejects_bad_requests() {
    let params = CircuitParams::calibrated();
    assert!(qubit_spectrum(&params, PhaseGrid::square(32), 1).is_err());
    assert!(qubit_spectrum(&params, PhaseGrid::square(14), 2).is_err());
}

#[test]
fn single_precision_spectrum() {
    let p = CircuitParams::calibrated();
    let p32 = giant_atom::circuit::CircuitParams::<f32> {
        e_j: 1.0,
        c_j: p.c_j as f32,
        alpha: 0.8,
        f: 0.5,
        c_t: p.c_t as f32,
        l_t: p.l_t as f32,
        dx: 1.0,
        flux_unit: 1.0,
    };
    let s = qubit_spectrum(&p32, PhaseGrid::square(16), 2).unwrap();
    let d = qubit_spectrum(&p, PhaseGrid::square(16), 2).unwrap();
    assert!((s.omega as f64 - d.omega).abs() < 1e-4);
}

#[test]
fn coupling_follows_fourth_root_and_reaches_ultrastrong() {
    use giant_atom::circuit::coupling_vs_line_capacitance;
    let params = CircuitParams::calibrated();
    let c_ts = [1e4, 1e5, 1e6, 1e7];
    let rows = coupling_vs_line_capacitance(&params, PhaseGrid::square(32), &c_ts).unwrap();
    let scaled: Vec<f64> = rows.iter().map(|r| r.g * r.c_t.powf(0.25)).collect();
    for s in &scaled {
        assert!((s / scaled[0] - 1.0).abs() < 1e-4, "{scaled:?}");
    }
    let default = rows.iter().find(|r| r.c_t == 1e6).unwrap();
    assert!(default.g_over_omega_c >= 0.1, "g/omega_c = {}", default.g_over_omega_c);
    // g/ω_c grows with the line capacitance.
    assert!(rows.windows(2).all(|w| w[1].g_over_omega_c > w[0].g_over_omega_c));
}

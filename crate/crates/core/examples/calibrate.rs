//! Recomputes the default charging ratio on a chosen grid.
//!
//! cargo run --release --example calibrate -- [n]

use giant_atom::circuit::{calibrate_charging_ratio, qubit_spectrum, PhaseGrid, TARGET_SPLITTING};
use giant_atom::CircuitParams;

fn main() -> giant_atom::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let grid = PhaseGrid::square(n);
    let params = CircuitParams::calibrated();
    let start = std::time::Instant::now();
    let c_j = calibrate_charging_ratio(&params, grid, TARGET_SPLITTING, (2.0, 4.0), 1e-12)?;
    let spec = qubit_spectrum(&CircuitParams { c_j, ..params }, grid, 5)?;
    println!("grid {n}x{n}: c_j = {c_j:.16e}");
    println!("levels = {:?}", spec.levels);
    println!(
        "omega = {:.10e}, m_sin = {:.10}, residual = {:.2e}",
        spec.omega, spec.m_sin, spec.residual
    );
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}

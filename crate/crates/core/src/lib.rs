//! Superconducting giant atom coupled at two points to a coupled-resonator
//! waveguide: loop quantisation, Lamb shift, Zeno/anti-Zeno decay under
//! repeated measurement, and an exact lattice reference.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`);
//! the aliases below fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod circuit;
pub mod error;
pub mod fit;
pub mod lanczos;
pub mod lattice;
pub mod quad;
pub mod real;
pub mod special;
pub mod waveguide;
pub mod zeno;

pub use error::{Error, Result};
pub use real::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type CircuitParams = circuit::CircuitParams<f64>;
pub type CouplingConstants = circuit::CouplingConstants<f64>;
pub type QubitSpectrum = circuit::QubitSpectrum<f64>;
pub type WaveguideModel = waveguide::WaveguideModel<f64>;
pub type DecayCurve = zeno::DecayCurve<f64>;
pub type LatticeState = lattice::LatticeState<f64>;
pub type OracleConfig = lattice::OracleConfig<f64>;

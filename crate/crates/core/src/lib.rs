//! Spectral quantities of degenerating hyperbolic surfaces.
//!
//! The crate evaluates Selberg zeta products over enumerated length spectra,
//! hyperbolic and cusp Eisenstein series as coset sums, and the eigenvalues of
//! the funnel scattering operator, on an explicit family of three-funnel pairs
//! of pants whose first boundary geodesic is pinched. The [`lab`] module runs
//! sweeps over the pinching length and fits power laws to the results.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eisenstein;
pub mod error;
pub mod lab;
pub mod moebius;
pub mod scattering;
pub mod specfun;
pub mod wordlang;
pub mod zeta;

pub use error::{Error, Result, Warning};
pub use specfun::ComplexValue;

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Version of the JSON-lines record layout.
pub const SCHEMA_VERSION: u32 = 1;

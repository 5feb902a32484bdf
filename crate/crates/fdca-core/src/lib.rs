//! Gridless joint DoA-range estimation on the 2D space-frequency difference
//! coarray of a frequency diverse coprime array (FDCA).
//!
//! The crate covers the full chain: FDCA geometry and snapshot simulation
//! ([`array_model`]), derivation of the space-frequency difference coarray
//! with its holes ([`coarray`]), coarray interpolation by decoupled
//! atomic-norm minimization ([`danm`]) and cyclic rank minimization
//! ([`crm`]) on top of a closed-form ADMM engine ([`admm`]), 2D spatial
//! smoothing plus 2D MUSIC ([`spectral`]), the coarray Cramér-Rao bound
//! ([`crb`]), and a Monte-Carlo benchmark harness with a CLI-facing config
//! ([`harness`]).

pub mod admm;
pub mod array_model;
pub mod coarray;
pub mod crb;
pub mod crm;
pub mod danm;
pub mod error;
pub mod harness;
pub mod sdp_core;
pub mod spectral;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex vector.
pub type CVec = DVector<C64>;

/// Default speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

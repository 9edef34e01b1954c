//! Computing with holomorphic curves `D -> P^n` given by polynomial reduced
//! representations.
//!
//! The crate covers complex polynomial arithmetic and root finding, fixed and
//! moving hyperplanes, general-position measures, the Wronskian-based derived
//! map, hyperplane sharing checks, and an empirical normality detector with a
//! Zalcman-style rescaling explorer. The `harness` module ties these together
//! behind a JSON scene format and the `projcurve` CLI.

pub mod derived;
pub mod error;
pub mod harness;
pub mod normality;
pub mod polynomial;
pub mod position;
pub mod projective;
pub mod sharing;
pub mod tolerance;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use polynomial::ComplexPoly;
pub use position::Region;
pub use projective::{MovingHyperplane, ProjCurve, ProjPoint};
pub use tolerance::Tolerances;

/// Shorthand for building a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

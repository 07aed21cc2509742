//! Semi-inner-product sampling on band-limited spaces `B_p`.
//!
//! - [`seqspace`]: `ℓ_p` on a finite window, duality map and s.i.p.
//! - [`funcspace`]: `L_p(I)` on quadrature grids, spectra, band-limited functions.
//! - [`kernels`]: the kernels `G` and `G_samp`.
//! - [`sampling`]: sampling systems, reconstruction, tail and decay bounds.
//! - [`verifier`]: finite-section checks and frame/Riesz estimates.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod funcspace;
pub mod kernels;
pub mod quadrature;
pub mod sampling;
pub mod seqspace;
pub mod verifier;

pub use error::{Error, Result};
pub use funcspace::{BandlimitedFn, Grid, GridFn, Spectrum};
pub use kernels::{kernel_g, sinc, Kernel, KernelBackend};
pub use num_complex::Complex64;
pub use sampling::SamplingSystem;
pub use seqspace::{CoeffSeq, Exponent};

/// Fixed text form used by every CSV writer: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

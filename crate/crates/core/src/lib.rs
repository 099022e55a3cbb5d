//! Exact determinants of discrete Laplacians on product lattices,
//! zeta-regularized determinants of the continuum boxes and tori they
//! approximate, and the asymptotic coefficients relating the two.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeffs;
pub mod continuum;
pub mod error;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod spectra;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    struct Overview;
    #[doc = include_str!("../../../book/src/spectra.md")]
    struct Spectra;
    #[doc = include_str!("../../../book/src/continuum.md")]
    struct Continuum;
    #[doc = include_str!("../../../book/src/coefficients.md")]
    struct Coefficients;
    #[doc = include_str!("../../../book/src/verification.md")]
    struct Verification;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}

//! Exact product identities on small two-dimensional lattices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{logdet_exact, LatticeSpec};

/// Log-determinants of the doubled-torus to Dirichlet-square ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio2d {
    /// `log det(Δ_{DT(2n₁,2n₂)} + m²) − 4 log det(Δ_{L(n₁,n₂)} + m²)`.
    pub log_lhs: f64,
    /// Product with prefactor `(8+m²)(4+m²)²`.
    pub log_rhs_printed: f64,
    /// Product with prefactor `m²(8+m²)(4+m²)²`, including the zero-momentum mode.
    pub log_rhs_corrected: f64,
}

fn strip(n: usize, shift: f64) -> f64 {
    (1..n)
        .map(|k| 2.0 * (shift - 2.0 * (k as f64 * PI / n as f64).cos()).ln())
        .sum()
}

pub fn ratio_2d(n1: usize, n2: usize, m2: f64) -> Result<Ratio2d> {
    if !(m2 > 0.0) {
        return Err(Error::ZeroMass);
    }
    let torus = LatticeSpec::periodic(&[2 * n1, 2 * n2])?.with_mass_squared(m2)?;
    let square = LatticeSpec::dirichlet(&[n1, n2])?.with_mass_squared(m2)?;
    let log_lhs = logdet_exact(&torus, false)? - 4.0 * logdet_exact(&square, false)?;
    let mut log_rhs_printed = (8.0 + m2).ln() + 2.0 * (4.0 + m2).ln();
    for n in [n1, n2] {
        log_rhs_printed += strip(n, 6.0 + m2) + strip(n, 2.0 + m2);
    }
    Ok(Ratio2d {
        log_lhs,
        log_rhs_printed,
        log_rhs_corrected: log_rhs_printed + m2.ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevProducts {
    /// `Π_{k=0}^{n−1} (2x − 2cos(2πk/n))`.
    pub full_cycle: f64,
    /// `(x+s)^n + (x−s)^n − 2` with `s = √(x²−1)`.
    pub closed_form: f64,
    /// `Π_{k=1}^{n−1} (2x − 2cos(kπ/n))`.
    pub half_index: f64,
    /// `((x+s)^n − (x−s)^n)/(2s)`, equal to `n` at `x = 1`.
    pub half_index_closed_form: f64,
}

pub fn chebyshev_product(n: usize, x: f64) -> Result<ChebyshevProducts> {
    if n == 0 || !(x >= 1.0) {
        return Err(Error::InvalidInput("need n ≥ 1 and x ≥ 1".into()));
    }
    let nf = n as f64;
    let full_cycle = (0..n)
        .map(|k| 2.0 * x - 2.0 * (2.0 * PI * k as f64 / nf).cos())
        .product();
    let half_index = (1..n)
        .map(|k| 2.0 * x - 2.0 * (PI * k as f64 / nf).cos())
        .product();
    let s = (x * x - 1.0).sqrt();
    let (p, q) = ((x + s).powi(n as i32), (x - s).powi(n as i32));
    Ok(ChebyshevProducts {
        full_cycle,
        closed_form: p + q - 2.0,
        half_index,
        half_index_closed_form: if s == 0.0 { nf } else { (p - q) / (2.0 * s) },
    })
}

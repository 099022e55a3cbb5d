//! Least-squares extraction of the constant term from a polyhomogeneous
//! sequence `Σ a_{α,k} n^α log^k n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted condition number of the column-scaled design matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// The basis function `n^α log^k n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTerm {
    pub alpha: f64,
    pub k: u32,
}

impl BasisTerm {
    pub fn new(alpha: f64, k: u32) -> Self {
        Self { alpha, k }
    }

    pub fn eval(&self, n: f64) -> f64 {
        n.powf(self.alpha) * n.ln().powi(self.k as i32)
    }

    pub fn is_constant(&self) -> bool {
        self.alpha == 0.0 && self.k == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub basis: Vec<BasisTerm>,
    pub coefficients: Vec<f64>,
    /// Coefficient of the constant basis term, the regularized limit.
    pub a00: f64,
    /// Condition number of the column-scaled design matrix.
    pub fit_condition: f64,
    pub fit_residual_norm: f64,
}

impl FitModel {
    pub fn eval(&self, n: f64) -> f64 {
        self.basis
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| c * b.eval(n))
            .sum()
    }
}

/// `{n^d, …, n} ∪ {n^k log n : k = 0..d} ∪ {1}`.
pub fn default_basis(d: usize) -> Vec<BasisTerm> {
    let mut basis: Vec<BasisTerm> = (1..=d).rev().map(|a| BasisTerm::new(a as f64, 0)).collect();
    basis.extend((0..=d).rev().map(|a| BasisTerm::new(a as f64, 1)));
    basis.push(BasisTerm::new(0.0, 0));
    basis
}

/// Appends `n^{−1}, …, n^{−count}`.
pub fn with_negative_powers(mut basis: Vec<BasisTerm>, count: usize) -> Vec<BasisTerm> {
    basis.extend((1..=count).map(|j| BasisTerm::new(-(j as f64), 0)));
    basis
}

/// `round(lo·r^k)` for `k = 0, 1, …` up to `hi`, without duplicates.
pub fn geometric_grid(lo: usize, hi: usize, ratio: f64) -> Vec<usize> {
    assert!(lo >= 1 && ratio > 1.0);
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let n = (lo as f64 * ratio.powi(k)).round() as usize;
        if n > hi {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        k += 1;
    }
    out
}

/// Unweighted least-squares fit of `samples` by the given basis. Columns are
/// scaled to unit norm before the SVD solve, so the reported condition reflects the basis
/// geometry rather than the magnitude of `n^α`.
pub fn reg_limit_fit(samples: &[(usize, f64)], basis: &[BasisTerm]) -> Result<FitModel> {
    let cols = basis.len();
    let constant = basis
        .iter()
        .position(BasisTerm::is_constant)
        .ok_or_else(|| Error::InvalidInput("basis must contain the constant term".into()))?;
    for (i, b) in basis.iter().enumerate() {
        if !b.alpha.is_finite() || basis[..i].contains(b) {
            return Err(Error::InvalidInput(
                "basis terms must be finite and distinct".into(),
            ));
        }
    }
    if samples.len() < 2 * cols {
        return Err(Error::InsufficientSamples {
            samples: samples.len(),
            basis: cols,
        });
    }
    if samples.iter().any(|&(n, v)| n < 2 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "samples need n ≥ 2 and finite values".into(),
        ));
    }
    let mut a = DMatrix::from_fn(samples.len(), cols, |r, c| {
        basis[c].eval(samples[r].0 as f64)
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let mut scale = vec![1.0; cols];
    for (c, s) in scale.iter_mut().enumerate() {
        let m = a.column(c).norm();
        if m > 0.0 {
            *s = m;
            a.column_mut(c).scale_mut(1.0 / m);
        }
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let fit_residual_norm = (&a * &x - &b).norm();
    let coefficients: Vec<f64> = x.iter().zip(&scale).map(|(v, s)| v / s).collect();
    Ok(FitModel {
        basis: basis.to_vec(),
        a00: coefficients[constant],
        coefficients,
        fit_condition: condition,
        fit_residual_norm,
    })
}

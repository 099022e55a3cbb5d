//! Hadamard finite parts of the large-`z` integrals behind the regularized
//! limit of the cube determinants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_tail, QuadratureConfig};
use crate::special::{binomial, harmonic};
use crate::spectra::BoundaryCondition;

/// `−2 ⨍₀^∞ z^{2d−1}/(z²+λ)^d dz`.
///
/// With `w = z²` the integrand becomes `w^{d−1}/(w+λ)^d`. Expanding
/// `w^{d−1} = ((w+λ) − λ)^{d−1}` gives one logarithmic term, whose finite
/// part is `−log λ`, and rational terms that converge. The result is
/// `log λ + H_{d−1}`, which reduces to `log λ` only for `d = 1`.
pub fn reg_integral_partie_finie(d: usize, lambda: f64) -> f64 {
    assert!(d >= 1 && lambda > 0.0);
    lambda.ln() + harmonic(d - 1)
}

/// The same finite part by quadrature: `∫₀¹ f dw + ∫₁^∞ (f − 1/w) dw`, where
/// the subtracted `1/w` carries no finite part on `[1, ∞)`.
pub fn reg_integral_partie_finie_numeric(
    d: usize,
    lambda: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if d == 0 || !(lambda > 0.0) {
        return Err(Error::InvalidInput("need d ≥ 1 and λ > 0".into()));
    }
    let dd = d as f64;
    let head = integrate(
        |w: f64| w.powi(d as i32 - 1) / (w + lambda).powi(d as i32),
        0.0,
        1.0,
        quad,
    )?;
    // w^{d−1}/(w+λ)^d − 1/w = expm1(−d·ln(1+λ/w))/w
    let tail = integrate_tail(
        |w: f64| {
            if w.is_infinite() {
                0.0
            } else {
                (-dd * (lambda / w).ln_1p()).exp_m1() / w
            }
        },
        1.0,
        quad,
    )?;
    Ok(-(head + tail).value)
}

/// Leading heat-coefficient profile `h_{−2d}(z, n)`.
///
/// Free: `2^{−d} Σ_{k=0}^{d} C(d,k)(z²+4kn²)^{−d}`.
/// Dirichlet: `2^{−d} Σ_{j=0}^{d} (−1)^j C(d,j)(z²+4jn²)^{−d}`.
pub fn h_minus_2d(d: usize, z: f64, n: usize, bc: BoundaryCondition) -> Result<f64> {
    let sign = match bc {
        BoundaryCondition::Free => 1.0,
        BoundaryCondition::Dirichlet => -1.0,
        BoundaryCondition::Periodic => {
            return Err(Error::InvalidInput(
                "h_{-2d} is defined for free and Dirichlet cubes".into(),
            ))
        }
    };
    let n2 = (n * n) as f64;
    let mut sum = 0.0;
    for j in 0..=d {
        let shift = z * z + 4.0 * j as f64 * n2;
        if shift <= 0.0 {
            return Err(Error::InvalidInput(
                "z² plus the smallest shift must be positive".into(),
            ));
        }
        sum += sign_pow(sign, j) * binomial(d, j) as f64 * shift.powi(-(d as i32));
    }
    Ok(sum * 0.5f64.powi(d as i32))
}

fn sign_pow(s: f64, j: usize) -> f64 {
    if s < 0.0 && j % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `−2⨍ z^{2d−1} h_{−2d}(z,1) dz` for the Dirichlet profile, term by term
/// over `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HConstant {
    pub d: usize,
    /// Each term's finite part taken as `log(4j)`.
    pub as_stated: f64,
    /// Each term's finite part taken as `log(4j) + H_{d−1}`.
    pub exact: f64,
}

pub fn h_minus_2d_constant(d: usize) -> HConstant {
    let scale = 0.5f64.powi(d as i32);
    let mut as_stated = 0.0;
    let mut exact = 0.0;
    for j in 1..=d {
        let c = sign_pow(-1.0, j) * binomial(d, j) as f64 * scale;
        let lambda = 4.0 * j as f64;
        as_stated += c * lambda.ln();
        exact += c * reg_integral_partie_finie(d, lambda);
    }
    HConstant {
        d,
        as_stated,
        exact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{corner_constant, free_corner_constant};
    use approx::assert_relative_eq;

    #[test]
    fn one_dimensional_values_are_log_lambda() {
        assert_eq!(reg_integral_partie_finie(1, 1.0), 0.0);
        assert_relative_eq!(
            reg_integral_partie_finie(1, 4.0),
            4f64.ln(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let q = QuadratureConfig::default();
        for d in 1..=4 {
            for &l in &[1.0, 4.0, 9.0, 0.3] {
                let n = reg_integral_partie_finie_numeric(d, l, &q).unwrap();
                assert!(
                    (n - reg_integral_partie_finie(d, l)).abs() < 1e-10,
                    "d={d} λ={l}"
                );
            }
        }
    }

    #[test]
    fn higher_dimensions_pick_up_harmonic_shift() {
        // z³/(z²+4)²: log 4 + 1
        assert_relative_eq!(
            reg_integral_partie_finie(2, 4.0),
            4f64.ln() + 1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn profile_values() {
        let h = h_minus_2d(1, 1.0, 1, BoundaryCondition::Free).unwrap();
        assert_relative_eq!(h, 0.5 * (1.0 + 0.2), max_relative = 1e-15);
        let h = h_minus_2d(1, 1.0, 1, BoundaryCondition::Dirichlet).unwrap();
        assert_relative_eq!(h, 0.5 * (1.0 - 0.2), max_relative = 1e-15);
        assert!(h_minus_2d(2, 0.0, 1, BoundaryCondition::Free).is_err());
        assert!(h_minus_2d(2, 1.0, 1, BoundaryCondition::Periodic).is_err());
    }

    #[test]
    fn term_wise_constants() {
        assert_relative_eq!(
            h_minus_2d_constant(1).as_stated,
            -(2f64.ln()),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            h_minus_2d_constant(2).as_stated,
            (8f64.ln() - 2.0 * 4f64.ln()) / 4.0,
            max_relative = 1e-15
        );
        for d in 1..=6 {
            let c = h_minus_2d_constant(d);
            assert_relative_eq!(c.as_stated, free_corner_constant(d), max_relative = 1e-14);
            // Σ_{j≥1} (−1)^j C(d,j) = −1
            assert!(
                (c.exact - c.as_stated + 0.5f64.powi(d as i32) * harmonic(d - 1)).abs() < 1e-14
            );
        }
        assert_relative_eq!(
            h_minus_2d_constant(1).as_stated,
            corner_constant(1),
            max_relative = 1e-15
        );
    }
}

//! Heat traces of continuum boxes and tori, and their zeta-regularized
//! determinants through the Mellin split at `t = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_tail, Estimate, QuadratureConfig};
use crate::report::Term;
use crate::special::{factorial, gamma_neg_half, harmonic, EULER_GAMMA};
use crate::spectra::volume_vector_box;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub sides: Vec<f64>,
    #[serde(default)]
    pub mass: f64,
}

impl BoxSpec {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        Self::with_mass(sides, 0.0)
    }

    pub fn with_mass(sides: Vec<f64>, mass: f64) -> Result<Self> {
        let b = Self { sides, mass };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sides.is_empty() {
            return Err(Error::InvalidInput(
                "box dimension must be at least 1".into(),
            ));
        }
        if !self.sides.iter().all(|&a| a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput("box sides must be positive".into()));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput("mass must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaRegime {
    DirectSum,
    PoissonDual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub t: f64,
    pub value: f64,
    pub regime: ThetaRegime,
}

// Σ_{q≥1} e^{−c q²}
fn gaussian_tail(c: f64) -> f64 {
    let mut sum = 0.0;
    let mut extra = 0;
    let mut q = 1.0f64;
    loop {
        let term = (-c * q * q).exp();
        sum += term;
        if term == 0.0 {
            return sum;
        }
        if extra > 0 {
            extra += 1;
            if extra > 2 {
                return sum;
            }
        } else if term < 1e-30 * sum {
            extra = 1;
        }
        q += 1.0;
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveT(t))
    }
}

/// `Σ_{q∈ℤ} e^{−(2πq/a)² t}` by direct summation.
pub fn theta_1d_direct(a: f64, t: f64) -> f64 {
    1.0 + 2.0 * gaussian_tail((2.0 * PI / a).powi(2) * t)
}

/// The same sum through Poisson duality, `(a/√(4πt)) Σ_k e^{−a²k²/(4t)}`.
pub fn theta_1d_dual(a: f64, t: f64) -> f64 {
    a / (4.0 * PI * t).sqrt() * (1.0 + 2.0 * gaussian_tail(a * a / (4.0 * t)))
}

fn direct_regime(a: f64, t: f64) -> bool {
    (2.0 * PI / a).powi(2) * t >= 1.0
}

/// One-dimensional torus theta of circumference `a`.
pub fn theta_1d(a: f64, t: f64) -> Result<ThetaValue> {
    check_t(t)?;
    let (value, regime) = if direct_regime(a, t) {
        (theta_1d_direct(a, t), ThetaRegime::DirectSum)
    } else {
        (theta_1d_dual(a, t), ThetaRegime::PoissonDual)
    };
    Ok(ThetaValue { t, value, regime })
}

// θ₁(a,t) = P(1 + ε) with P = a/√(4πt); ε is computed without cancellation
// in the dual regime.
fn torus_axis_split(a: f64, t: f64) -> (f64, f64) {
    let p = a / (4.0 * PI * t).sqrt();
    let eps = if direct_regime(a, t) {
        theta_1d_direct(a, t) / p - 1.0
    } else {
        2.0 * gaussian_tail(a * a / (4.0 * t))
    };
    (p, eps)
}

/// `Tr e^{−tΔ}` on the flat torus, times `e^{−m²t}`.
pub fn theta_torus(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let mut value = (-b.mass * b.mass * t).exp();
    for &a in &b.sides {
        value *= theta_1d(a, t)?.value;
    }
    Ok(value)
}

// Per-axis Dirichlet trace h = Σ_{q≥1} e^{−(πq/a)²t} = ½(θ₁(2a,t) − 1), split
// as h = P' + E with P' = a/√(4πt) − ½ and E exponentially small for small t.
fn dirichlet_axis(a: f64, t: f64) -> (f64, f64, f64) {
    let p = a / (4.0 * PI * t).sqrt() - 0.5;
    if direct_regime(2.0 * a, t) {
        let h = gaussian_tail((PI / a).powi(2) * t);
        (h, p, h - p)
    } else {
        let e = 2.0 * a / (4.0 * PI * t).sqrt() * gaussian_tail(a * a / t);
        (p + e, p, e)
    }
}

fn require_massless(b: &BoxSpec) -> Result<()> {
    if b.mass != 0.0 {
        return Err(Error::MassNotSupported(b.mass));
    }
    Ok(())
}

/// Dirichlet heat trace of the box.
///
/// Inclusion–exclusion over the doubled tori factorizes axis by axis,
/// `2^{−d} Σ_S (−1)^{d−|S|} Π_{i∈S} θ(2aᵢ) = Π_i ½(θ(2aᵢ) − 1)`, and each factor
/// is the torus sum with its zero mode removed.
pub fn theta_hypercube(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    require_massless(b)?;
    Ok(b.sides.iter().map(|&a| dirichlet_axis(a, t).0).product())
}

/// The inclusion–exclusion sum written out over all subsets of axes.
/// Loses relative accuracy once the trace is much smaller than its terms.
pub fn theta_hypercube_expanded(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    require_massless(b)?;
    let d = b.dim();
    let doubled: Vec<f64> = b
        .sides
        .iter()
        .map(|&a| Ok(theta_1d(2.0 * a, t)?.value))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for mask in 0u32..(1 << d) {
        let size = mask.count_ones() as usize;
        let sign = if (d - size).is_multiple_of(2) { 1.0 } else { -1.0 };
        let prod: f64 = (0..d)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| doubled[i])
            .product();
        sum += sign * prod;
    }
    Ok(sum * 0.5f64.powi(d as i32))
}

/// Small-time counterterm `f(t) = Σ_{i=0}^{d} (−1)^{d−i} V_i (4πt)^{−i/2}`.
pub fn counterterm_f(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let v = volume_vector_box(&b.sides);
    let d = b.dim();
    let x = (4.0 * PI * t).powf(-0.5);
    Ok((0..=d)
        .map(|i| {
            let sign = if (d - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * v.get(i) * x.powi(i as i32)
        })
        .sum())
}

/// `θ_K(t) − f(t)` as `Σ_{S≠∅} Π_{i∈S} Eᵢ Π_{i∉S} P'ᵢ`, free of the
/// cancellation in the plain difference.
pub fn theta_hypercube_minus_counterterm(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    require_massless(b)?;
    let d = b.dim();
    let parts: Vec<(f64, f64)> = b
        .sides
        .iter()
        .map(|&a| {
            let (_, p, e) = dirichlet_axis(a, t);
            (p, e)
        })
        .collect();
    let mut sum = 0.0;
    for mask in 1u32..(1 << d) {
        let mut prod = 1.0;
        for (i, &(p, e)) in parts.iter().enumerate() {
            prod *= if mask & (1 << i) != 0 { e } else { p };
        }
        sum += prod;
    }
    Ok(sum)
}

/// `ζ'(0)` together with its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaPrime {
    pub zeta_prime: f64,
    pub quadrature_error: f64,
    /// Named parts summing to `zeta_prime`, in summation order.
    pub terms: Vec<Term>,
}

impl ZetaPrime {
    /// `log det_ζ = −ζ'(0)`.
    pub fn log_det(&self) -> f64 {
        -self.zeta_prime
    }

    fn from_terms(terms: Vec<Term>, quadrature_error: f64) -> Self {
        let zeta_prime = terms.iter().map(|t| t.value).sum();
        Self {
            zeta_prime,
            quadrature_error,
            terms,
        }
    }
}

fn over_t<F: Fn(f64) -> Result<f64>>(f: F) -> impl Fn(f64) -> f64 {
    move |t| f(t).map(|v| v / t).unwrap_or(f64::NAN)
}

/// `ζ'(0)` of the Dirichlet Laplacian on the box:
/// `∫₀¹(θ−f)dt/t + ∫₁^∞ θ dt/t + (−1)^d 2^{−d} γ − Σ_{i=1}^{d} (−1)^{d−i} (2/i) V_i (4π)^{−i/2}`.
pub fn zeta_prime_zero_box(b: &BoxSpec, quad: &QuadratureConfig) -> Result<ZetaPrime> {
    b.validate()?;
    require_massless(b)?;
    let d = b.dim();
    let small: Estimate = integrate(
        over_t(|t| theta_hypercube_minus_counterterm(b, t)),
        0.0,
        1.0,
        quad,
    )?;
    let large: Estimate = integrate_tail(over_t(|t| theta_hypercube(b, t)), 1.0, quad)?;
    let sign_d = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    // −(−1)^d 2^{−d} Γ'(1) with Γ'(1) = −γ
    let euler = sign_d * 0.5f64.powi(d as i32) * EULER_GAMMA;
    let v = volume_vector_box(&b.sides);
    let counter: f64 = -(1..=d)
        .map(|i| {
            let sign = if (d - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * 2.0 / i as f64 * v.get(i) * (4.0 * PI).powf(-(i as f64) / 2.0)
        })
        .sum::<f64>();
    Ok(ZetaPrime::from_terms(
        vec![
            Term::new("integral_small_t", small.value),
            Term::new("integral_large_t", large.value),
            Term::new("euler_gamma_term", euler),
            Term::new("counterterm_integral", counter),
        ],
        small.error + large.error,
    ))
}

/// Closed form of `d/ds [Γ(s)^{−1} ∫₀^∞ V e^{−m²t} (4πt)^{−d/2} t^{s−1} dt]` at `s = 0`.
pub fn gamma_term_massive(d: usize, m: f64, volume: f64) -> f64 {
    assert!(d >= 1 && m > 0.0 && volume > 0.0);
    let m2 = m * m;
    if d % 2 == 1 {
        volume * gamma_neg_half(d) * (m2 / (4.0 * PI)).powf(d as f64 / 2.0)
    } else {
        let k = d / 2;
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (harmonic(k) - m2.ln()) / factorial(k) * volume * m.powi(d as i32)
            / (4.0 * PI).powi(k as i32)
    }
}

/// `θ_T(t) − V e^{−m²t} (4πt)^{−d/2}` for the massive torus.
pub fn theta_torus_minus_counterterm(b: &BoxSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let mut p = 1.0;
    let mut log1p_sum = 0.0;
    for &a in &b.sides {
        let (pa, eps) = torus_axis_split(a, t);
        p *= pa;
        log1p_sum += eps.ln_1p();
    }
    Ok((-b.mass * b.mass * t).exp() * p * log1p_sum.exp_m1())
}

/// `ζ'(0)` of `Δ + m²` on the flat torus with sides `b.sides`.
pub fn zeta_prime_zero_massive_torus(b: &BoxSpec, quad: &QuadratureConfig) -> Result<ZetaPrime> {
    b.validate()?;
    if b.mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let d = b.dim();
    let m2 = b.mass * b.mass;
    let volume = b.volume();
    let small = integrate(
        over_t(|t| theta_torus_minus_counterterm(b, t)),
        0.0,
        1.0,
        quad,
    )?;
    let large = integrate_tail(over_t(|t| theta_torus(b, t)), 1.0, quad)?;
    let counter_tail = integrate_tail(
        |t: f64| volume * (-m2 * t).exp() * (4.0 * PI * t).powf(-(d as f64) / 2.0) / t,
        1.0,
        quad,
    )?;
    let gamma = gamma_term_massive(d, b.mass, volume);
    Ok(ZetaPrime::from_terms(
        vec![
            Term::new("integral_small_t", small.value),
            Term::new("integral_large_t", large.value),
            Term::new("gamma_term", gamma),
            Term::new("counterterm_tail", -counter_tail.value),
        ],
        small.error + large.error + counter_tail.error,
    ))
}

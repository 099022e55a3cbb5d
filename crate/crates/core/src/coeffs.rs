//! Coefficients of the large-lattice expansion: the bulk and boundary
//! integrals `L^d_i`, the corner constant, and the massive coefficient with
//! its small-mass Taylor structure.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_semi_infinite, Estimate, QuadratureConfig};
use crate::report::sig17;
use crate::special::{binomial, factorial, ln_bessel_i0_scaled};

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

// The integrand of
//   −∫₀^∞ [(−1−e^{−4t})^{d−i} e^{−μt} (e^{−2t}I₀(2t))^i − (−2)^{d−i} e^{−t}] dt/t
// written as −(−2)^{d−i} (e^{A} − e^{−t})/t with
//   A = −μt + (d−i) ln((1+e^{−4t})/2) + i ln(e^{−2t}I₀(2t)),
// so that the difference is formed without cancellation when t is small.
fn kernel(d: usize, i: usize, mu: f64) -> impl Fn(f64) -> f64 {
    let scale = -sign(d - i) * 2f64.powi((d - i) as i32);
    move |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let a = -mu * t
            + (d - i) as f64 * (0.5 * (-4.0 * t).exp_m1()).ln_1p()
            + i as f64 * ln_bessel_i0_scaled(2.0 * t);
        let x = if a + t < 1.0 {
            (-t).exp() * (a + t).exp_m1()
        } else {
            a.exp() - (-t).exp()
        };
        scale * x / t
    }
}

fn check_index(d: usize, i: usize) -> Result<()> {
    if d == 0 || i == 0 || i > d {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ i ≤ d, got d={d}, i={i}"
        )));
    }
    Ok(())
}

/// `L^d_i(0)`, the coefficient of `V^{d,N}_i` in the log-determinant expansion.
pub fn l_coeff(d: usize, i: usize, quad: &QuadratureConfig) -> Result<Estimate> {
    l_coeff_at(d, i, 0.0, quad)
}

/// `L^d_i(s)`, with the spectral shift `e^{−s²t}` in the integrand.
pub fn l_coeff_at(d: usize, i: usize, s: f64, quad: &QuadratureConfig) -> Result<Estimate> {
    check_index(d, i)?;
    integrate_semi_infinite(kernel(d, i, s * s), quad)
}

/// `(−1)^d 2^{−d} Σ_{i=1}^{d} log(4i) C(d,i)`.
pub fn corner_constant(d: usize) -> f64 {
    sign(d)
        * 0.5f64.powi(d as i32)
        * (1..=d)
            .map(|i| (4.0 * i as f64).ln() * binomial(d, i) as f64)
            .sum::<f64>()
}

/// `2^{−d} Σ_{j=1}^{d} log(4j) (−1)^j C(d,j)`, the constant attached to the
/// free cube.
pub fn free_corner_constant(d: usize) -> f64 {
    0.5f64.powi(d as i32)
        * (1..=d)
            .map(|j| (4.0 * j as f64).ln() * sign(j) * binomial(d, j) as f64)
            .sum::<f64>()
}

/// Massive coefficient `L_m̃(0) = −∫₀^∞ (e^{−m̃²t}(e^{−2t}I₀(2t))^d − e^{−t}) dt/t`.
pub fn l_massive(d: usize, m_tilde: f64, quad: &QuadratureConfig) -> Result<Estimate> {
    if d == 0 || !(m_tilde >= 0.0) {
        return Err(Error::InvalidInput("need d ≥ 1 and m̃ ≥ 0".into()));
    }
    integrate_semi_infinite(kernel(d, d, m_tilde * m_tilde), quad)
}

/// Closed form of the one-dimensional massive coefficient,
/// `arccosh(1 + m̃²/2)`.
pub fn l_massive_1d_closed_form(m_tilde: f64) -> f64 {
    let x = 1.0 + 0.5 * m_tilde * m_tilde;
    (x + (x * x - 1.0).sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaylorTerm {
    pub order: usize,
    /// Coefficient of `m̃^order`.
    pub coefficient: f64,
    pub error: f64,
}

/// `L_m̃(0) ≈ L₀(0) + Σ_k c_k m̃^k` up to a chosen order below `d`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MassiveTaylor {
    pub d: usize,
    pub l0: Estimate,
    pub terms: Vec<TaylorTerm>,
}

impl MassiveTaylor {
    pub fn evaluate(&self, m_tilde: f64) -> f64 {
        self.l0.value
            + self
                .terms
                .iter()
                .map(|t| t.coefficient * m_tilde.powi(t.order as i32))
                .sum::<f64>()
    }
}

/// Taylor terms of `L_m̃(0)` at `m̃ = 0` through `order ≤ d − 1`.
///
/// Expanding `e^{−m̃²t}` term by term, the coefficient of `m̃^{2j}` is
/// `−((−1)^j/j!) ∫₀^∞ t^{j−1} (e^{−2t}I₀(2t))^d dt`, which converges while
/// `2j < d`. Odd orders are exactly zero.
pub fn l_massive_taylor(d: usize, order: usize, quad: &QuadratureConfig) -> Result<MassiveTaylor> {
    if d < 2 || order == 0 {
        return Err(Error::InvalidInput(
            "Taylor expansion needs d ≥ 2 and order ≥ 1".into(),
        ));
    }
    if order >= d {
        return Err(Error::OrderTooHigh { order, d });
    }
    let l0 = l_massive(d, 0.0, quad)?;
    let mut terms = Vec::with_capacity(order);
    for k in 1..=order {
        if k % 2 == 1 {
            terms.push(TaylorTerm {
                order: k,
                coefficient: 0.0,
                error: 0.0,
            });
            continue;
        }
        let j = k / 2;
        let moment = integrate_semi_infinite(
            |t: f64| {
                if t == 0.0 {
                    return if j == 1 { 1.0 } else { 0.0 };
                }
                (d as f64 * ln_bessel_i0_scaled(2.0 * t) + (j as f64 - 1.0) * t.ln()).exp()
            },
            quad,
        )?;
        let c = -sign(j) / factorial(j);
        terms.push(TaylorTerm {
            order: k,
            coefficient: c * moment.value,
            error: c.abs() * moment.error,
        });
    }
    Ok(MassiveTaylor { d, l0, terms })
}

/// Cached `L^d_i(0)` for `i = 1..d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub d: usize,
    pub entries: BTreeMap<usize, Estimate>,
}

impl CoeffTable {
    pub fn compute(d: usize, quad: &QuadratureConfig) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for i in 1..=d {
            entries.insert(i, l_coeff(d, i, quad)?);
        }
        Ok(Self { d, entries })
    }

    pub fn value(&self, i: usize) -> f64 {
        self.entries[&i].value
    }

    /// `{"d": d, "entries": {"i": {"value": v, "err": e}}}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = format!("{{\"d\": {}, \"entries\": {{", self.d);
        for (k, (i, e)) in self.entries.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            let _ = write!(
                out,
                "\"{i}\": {{\"value\": {:.16e}, \"err\": {:.16e}}}",
                e.value, e.error
            );
        }
        out.push_str("}}");
        out
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("coefficient table: {m}"));
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| bad(&e.to_string()))?;
        let d = v["d"].as_u64().ok_or_else(|| bad("missing d"))? as usize;
        let mut entries = BTreeMap::new();
        for (k, e) in v["entries"]
            .as_object()
            .ok_or_else(|| bad("missing entries"))?
        {
            let i: usize = k.parse().map_err(|_| bad("entry key"))?;
            let value = e["value"].as_f64().ok_or_else(|| bad("entry value"))?;
            let error = e["err"].as_f64().ok_or_else(|| bad("entry err"))?;
            entries.insert(i, Estimate { value, error });
        }
        Ok(Self { d, entries })
    }

    /// Leading 16 hex digits of the SHA-256 of [`Self::to_json`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("{:>4} {:>24} {:>24}\n", "i", "L_i", "error");
        for (i, e) in &self.entries {
            let _ = writeln!(
                out,
                "{:>4} {:>24} {:>24}",
                i,
                sig17(e.value),
                sig17(e.error)
            );
        }
        out
    }
}

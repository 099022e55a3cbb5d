//! Special functions and constants used by the coefficient integrals.

use std::f64::consts::PI;

/// Euler–Mascheroni constant; `Γ'(1) = -EULER_GAMMA`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument `e^{-x} I₀(x)` uses the power series, above it the
/// asymptotic expansion. The series has only positive terms, so it stays
/// accurate well past the point where the divergent asymptotic series
/// reaches 1e-15.
pub const BESSEL_SWITCH: f64 = 25.0;

/// `e^{-x} I₀(x)` for `x ≥ 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= BESSEL_SWITCH {
        i0_scaled_series(x)
    } else {
        i0_scaled_asymptotic(x)
    }
}

/// `Σ (x/2)^{2k}/(k!)²` times `e^{-x}`.
pub fn i0_scaled_series(x: f64) -> f64 {
    (-x).exp() * (1.0 + i0_series_tail(x))
}

// Σ_{k≥1} (x/2)^{2k}/(k!)², i.e. I₀(x) − 1 without cancellation.
fn i0_series_tail(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Hankel asymptotic series `(2πx)^{-1/2} Σ ((2k−1)!!)²/(k! 8^k x^k)`,
/// truncated at its smallest term.
pub fn i0_scaled_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0f64;
    loop {
        let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * x);
        if next >= term || next <= 1e-17 * sum {
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `ln(e^{-x} I₀(x))`, accurate also for small `x` where the value is `≈ −x`.
pub fn ln_bessel_i0_scaled(x: f64) -> f64 {
    if x < 2.0 {
        -x + i0_series_tail(x).ln_1p()
    } else {
        bessel_i0_scaled(x).ln()
    }
}

/// Catalan's constant from the rapidly converging central-binomial series
/// `G = (π/8) ln(2+√3) + (3/8) Σ_{k≥0} 1/((2k+1)² C(2k,k))`.
pub fn catalan() -> f64 {
    let mut sum = 0.0;
    // inv_binom = 1/C(2k,k)
    let mut inv_binom = 1.0;
    let mut k = 0.0;
    loop {
        let term = inv_binom / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
        sum += term;
        if term < 1e-18 {
            break;
        }
        k += 1.0;
        inv_binom *= k / (2.0 * (2.0 * k - 1.0));
    }
    PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 0.375 * sum
}

/// `Γ(−d/2)` for odd `d`, by downward recursion from `Γ(1/2) = √π`.
pub fn gamma_neg_half(d: usize) -> f64 {
    assert!(d % 2 == 1, "d must be odd");
    let mut g = PI.sqrt();
    let mut x = 0.5;
    let target = -(d as f64) / 2.0;
    while x > target {
        g /= x - 1.0;
        x -= 1.0;
    }
    g
}

/// Harmonic number `H_k`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Binomial coefficient as an exact integer.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    c
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

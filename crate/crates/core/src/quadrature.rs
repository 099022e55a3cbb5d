//! Globally adaptive Gauss–Kronrod (10/21) quadrature, plus the mapping used
//! for integrals over `[0, ∞)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for every semi-infinite integral in the crate.
///
/// `∫₀^∞` is split at `split_point`; the tail `[s, ∞)` is mapped onto
/// `(0, 1]` by `t = s/x²`, which turns algebraic tails `t^{-1-p}` into
/// bounded polynomials in `x`, so no truncation is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub split_point: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            split_point: 1.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.split_point > 0.0) {
            return Err(Error::InvalidInput(
                "quadrature tolerances and split point must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same budget with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            ..*self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is reproducible
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    let diff = ((kronrod - gauss) * h).abs();
    let roundoff = 50.0 * f64::EPSILON * abs_sum * h.abs();
    let error = if value.is_finite() && diff.is_finite() {
        diff.max(roundoff)
    } else {
        f64::INFINITY
    };
    Panel { a, b, value, error }
}

fn sum_panels(heap: &BinaryHeap<Panel>) -> Estimate {
    // sum in interval order so the result does not depend on heap layout
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = 0.0;
    let mut error = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
    }
    Estimate { value, error }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    heap.push(gk21(&f, a, b));
    let mut subdivisions = 0;
    loop {
        let total = sum_panels(&heap);
        if total.error <= cfg.target(total.value) {
            return Ok(total);
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: total.error,
                tolerance: cfg.target(total.value),
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure {
                estimate: total.error,
                tolerance: cfg.target(total.value),
                subdivisions,
            });
        }
        heap.push(gk21(&f, worst.a, mid));
        heap.push(gk21(&f, mid, worst.b));
        subdivisions += 1;
    }
}

/// `∫_s^∞ f(t) dt` through `t = s/x²`, `dt = 2s/x³ dx`.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, s: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(
        |x| {
            let t = s / (x * x);
            f(t) * 2.0 * s / (x * x * x)
        },
        0.0,
        1.0,
        cfg,
    )
}

/// `∫₀^∞ f(t) dt`, split at `cfg.split_point`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let head = integrate(&f, 0.0, cfg.split_point, cfg)?;
    let tail = integrate_tail(&f, cfg.split_point, cfg)?;
    Ok(head + tail)
}

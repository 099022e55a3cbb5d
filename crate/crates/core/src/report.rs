//! Expansion reports: per-size records of an exact log-determinant, the
//! predicted terms, and the residual, with JSON, CSV and table output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::continuum::BoxSpec;

/// A named additive contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

impl Term {
    pub fn new(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
        }
    }
}

/// Formats `x` with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:?}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub u: f64,
    pub sizes: Vec<usize>,
    pub exact_logdet: f64,
    /// Predicted terms in summation order.
    pub terms: Vec<Term>,
    pub predicted: f64,
    pub residual: f64,
}

impl ExpansionRecord {
    pub fn new(u: f64, sizes: Vec<usize>, exact_logdet: f64, terms: Vec<Term>) -> Self {
        let (predicted, residual) = Self::bookkeeping(exact_logdet, &terms);
        Self {
            u,
            sizes,
            exact_logdet,
            terms,
            predicted,
            residual,
        }
    }

    fn bookkeeping(exact: f64, terms: &[Term]) -> (f64, f64) {
        let mut predicted = 0.0;
        for t in terms {
            predicted += t.value;
        }
        (predicted, exact - predicted)
    }

    /// True when `predicted` and `residual` are exactly what the stored
    /// terms produce.
    pub fn bookkeeping_holds(&self) -> bool {
        let (p, r) = Self::bookkeeping(self.exact_logdet, &self.terms);
        p.to_bits() == self.predicted.to_bits() && r.to_bits() == self.residual.to_bits()
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// Convergence summary over consecutive grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    /// `|res(u_{k+1}) − res(u_k)|`.
    pub cauchy_differences: Vec<f64>,
    /// Residual at the finest grid point.
    pub last_residual: f64,
    /// Richardson estimate of the limiting residual assuming an `O(1/u)` tail.
    pub extrapolated_limit: f64,
}

impl Convergence {
    pub fn from_records(records: &[ExpansionRecord]) -> Self {
        let res: Vec<f64> = records.iter().map(|r| r.residual).collect();
        let cauchy_differences = res.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let last_residual = res.last().copied().unwrap_or(f64::NAN);
        let extrapolated_limit = match records {
            [.., a, b] if b.u > a.u => {
                let r = b.u / a.u;
                (r * b.residual - a.residual) / (r - 1.0)
            }
            _ => last_residual,
        };
        Self {
            cauchy_differences,
            last_residual,
            extrapolated_limit,
        }
    }

    /// Differences shrink at every step, treating steps already below
    /// `floor` as converged.
    pub fn strictly_decreasing(&self, floor: f64) -> bool {
        self.cauchy_differences
            .windows(2)
            .all(|w| w[1] < w[0] || w[1] <= floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub kind: String,
    pub geometry: BoxSpec,
    pub mass: f64,
    pub size_rule: String,
    pub coefficient_fingerprint: String,
    pub records: Vec<ExpansionRecord>,
    pub convergence: Convergence,
    /// Named reference constants the limit is compared with.
    pub comparisons: Vec<Term>,
}

impl ExpansionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Residual series, header `u,logdet,predicted,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,logdet,predicted,residual\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig17(r.u),
                sig17(r.exact_logdet),
                sig17(r.predicted),
                sig17(r.residual)
            );
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} sides={:?} mass={}",
            self.kind,
            self.geometry.sides,
            sig17(self.mass)
        );
        let _ = writeln!(out, "# coefficients {}", self.coefficient_fingerprint);
        let _ = writeln!(
            out,
            "{:>20} {:>16} {:>24} {:>24} {:>24}",
            "u", "sizes", "logdet", "predicted", "residual"
        );
        for r in &self.records {
            let sizes = r
                .sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("x");
            let _ = writeln!(
                out,
                "{:>20} {:>16} {:>24} {:>24} {:>24}",
                sig17(r.u),
                sizes,
                sig17(r.exact_logdet),
                sig17(r.predicted),
                sig17(r.residual)
            );
        }
        for (k, d) in self.convergence.cauchy_differences.iter().enumerate() {
            let _ = writeln!(out, "# cauchy[{k}] {}", sig17(*d));
        }
        let _ = writeln!(
            out,
            "# last_residual {}",
            sig17(self.convergence.last_residual)
        );
        let _ = writeln!(
            out,
            "# extrapolated_limit {}",
            sig17(self.convergence.extrapolated_limit)
        );
        for c in &self.comparisons {
            let _ = writeln!(out, "# {} {}", c.name, sig17(c.value));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(3f64.ln()), "1.0986122886681098");
        assert_eq!(sig17(2f64.ln()), "0.69314718055994529");
        assert_eq!(sig17(-1234.5), "-1234.5000000000000");
        assert_eq!(sig17(1e-9), "1.0000000000000001e-9");
        for &x in &[0.1, -7.25e-7, 12345678.9, 6.02e23] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_bookkeeping() {
        let r = ExpansionRecord::new(
            2.0,
            vec![2],
            1.0,
            vec![Term::new("a", 0.1), Term::new("b", 0.2)],
        );
        assert!(r.bookkeeping_holds());
        assert_eq!(r.residual, 1.0 - (0.1 + 0.2));
        let mut tampered = r.clone();
        tampered.residual += 1e-16;
        assert!(!tampered.bookkeeping_holds());
    }

    #[test]
    fn convergence_summary() {
        let recs: Vec<_> = [
            (8.0, 1.0 + 1.0 / 8.0),
            (16.0, 1.0 + 1.0 / 16.0),
            (32.0, 1.0 + 1.0 / 32.0),
        ]
        .iter()
        .map(|&(u, res)| ExpansionRecord::new(u, vec![], res, vec![]))
        .collect();
        let c = Convergence::from_records(&recs);
        assert!(c.strictly_decreasing(0.0));
        assert!((c.extrapolated_limit - 1.0).abs() < 1e-15);
    }
}

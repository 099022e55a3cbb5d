//! Checks tying the discrete and continuum computations together: the heat
//! trace relations, the `H_N(0)` split, residual reports for the large-lattice
//! expansions, regularized limits, and exact determinant identities.

mod fit;
mod identities;
mod partie_finie;

pub use fit::{
    default_basis, geometric_grid, reg_limit_fit, with_negative_powers, BasisTerm, FitModel,
};
pub use identities::{chebyshev_product, ratio_2d, ChebyshevProducts, Ratio2d};
pub use partie_finie::{
    h_minus_2d, h_minus_2d_constant, reg_integral_partie_finie, reg_integral_partie_finie_numeric,
    HConstant,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{corner_constant, free_corner_constant, l_massive, CoeffTable};
use crate::continuum::{zeta_prime_zero_box, zeta_prime_zero_massive_torus, BoxSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_semi_infinite, Estimate, QuadratureConfig};
use crate::report::{Convergence, ExpansionRecord, ExpansionReport, Term};
use crate::special::ln_bessel_i0_scaled;
use crate::spectra::{
    logdet_exact, product_spectrum, volume_vector_discrete, BoundaryCondition, LatticeSpec,
};

/// Largest `Π nᵢ` accepted by [`discrete_theta_relation_check`].
pub const THETA_CHECK_LIMIT: u128 = 1_000_000;

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Σ e^{−λt}` over a lattice spectrum.
pub fn lattice_theta(spec: &LatticeSpec, t: f64) -> f64 {
    product_spectrum(spec).sum_map(|l| (-l * t).exp())
}

/// Both sides of the Dirichlet/doubled-torus trace relation
/// `Θ_L(t) = 2^{−d} Σ_{S} (−1−e^{−4t})^{d−|S|} Θ_{DT_S(2n_S)}(t)`,
/// where the empty torus contributes 1.
pub fn discrete_theta_relation_check(sizes: &[usize], t: f64) -> Result<(f64, f64)> {
    let spec = LatticeSpec::dirichlet(sizes)?;
    let count: u128 = sizes.iter().map(|&n| n as u128).product();
    if count > THETA_CHECK_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: THETA_CHECK_LIMIT,
        });
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveT(t));
    }
    let d = sizes.len();
    let lhs = lattice_theta(&spec, t);
    let c = -1.0 - (-4.0 * t).exp();
    let mut rhs = 0.0;
    for mask in 0u32..(1 << d) {
        let doubled: Vec<usize> = (0..d)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| 2 * sizes[i])
            .collect();
        let torus = if doubled.is_empty() {
            1.0
        } else {
            lattice_theta(&LatticeSpec::periodic(&doubled)?, t)
        };
        rhs += c.powi((d - doubled.len()) as i32) * torus;
    }
    Ok((lhs, rhs * 0.5f64.powi(d as i32)))
}

/// `g(t) = Σ_{p=1}^{d} V_p (−1−e^{−4t})^{d−p} (e^{−2t}I₀(2t))^p`.
pub fn g_function(sizes: &[usize], t: f64) -> f64 {
    let d = sizes.len();
    let v = volume_vector_discrete(sizes);
    let c = -1.0 - (-4.0 * t).exp();
    let lb = ln_bessel_i0_scaled(2.0 * t);
    (1..=d)
        .map(|p| v.get(p) * c.powi((d - p) as i32) * (p as f64 * lb).exp())
        .sum()
}

/// `H_N(0)` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSplit {
    /// `log det − Σ V_i L_i(0)`.
    pub algebraic: f64,
    /// `−∫₀^∞ (Θ − g − (−1)^d e^{−t}) dt/t`.
    pub integral: Estimate,
}

pub fn h_at_zero(
    spec: &LatticeSpec,
    table: &CoeffTable,
    quad: &QuadratureConfig,
) -> Result<HSplit> {
    if spec.bc != BoundaryCondition::Dirichlet || spec.mass_squared != 0.0 || spec.rescale.is_some()
    {
        return Err(Error::InvalidInput(
            "H_N(0) is defined for the massless unscaled Dirichlet lattice".into(),
        ));
    }
    let d = spec.dim();
    if table.d != d {
        return Err(Error::InvalidInput(
            "coefficient table dimension mismatch".into(),
        ));
    }
    let v = volume_vector_discrete(&spec.sizes);
    let bulk: f64 = (1..=d).map(|i| v.get(i) * table.value(i)).sum();
    let algebraic = logdet_exact(spec, false)? - bulk;
    let spectrum = product_spectrum(spec);
    let sd = sign(d);
    let integral = integrate_semi_infinite(
        |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let theta = spectrum.sum_map(|l| (-l * t).exp());
            -(theta - g_function(&spec.sizes, t) - sd * (-t).exp()) / t
        },
        quad,
    )?;
    Ok(HSplit {
        algebraic,
        integral,
    })
}

/// How lattice sizes follow the scale `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeRule {
    /// `nᵢ = round(aᵢ u)`, ties to even.
    RoundHalfEven,
}

impl SizeRule {
    pub fn sizes(&self, sides: &[f64], u: f64) -> Result<Vec<usize>> {
        sides
            .iter()
            .map(|&a| {
                let n = (a * u).round_ties_even();
                if n >= 1.0 {
                    Ok(n as usize)
                } else {
                    Err(Error::InvalidInput(format!(
                        "side {a} at u = {u} rounds to an empty axis"
                    )))
                }
            })
            .collect()
    }

    pub fn name(&self) -> &'static str {
        "round-half-even"
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
        return Err(Error::InvalidInput("grid values must be positive".into()));
    }
    Ok(())
}

/// Residuals of `log det Δ_{L(N(u))}` against
/// `Σ V_i L_i(0) − (−1)^d 2^{−d} log u² + log det_ζ + corner(d)`.
pub fn box_expansion_report(
    b: &BoxSpec,
    u_grid: &[f64],
    rule: SizeRule,
    quad: &QuadratureConfig,
) -> Result<ExpansionReport> {
    b.validate()?;
    if b.mass != 0.0 {
        return Err(Error::MassNotSupported(b.mass));
    }
    check_grid(u_grid)?;
    let d = b.dim();
    let table = CoeffTable::compute(d, quad)?;
    let log_det_zeta = zeta_prime_zero_box(b, quad)?.log_det();
    let corner = corner_constant(d);
    let records = u_grid
        .par_iter()
        .map(|&u| {
            let sizes = rule.sizes(&b.sides, u)?;
            let v = volume_vector_discrete(&sizes);
            let mut bulk = 0.0;
            for i in 1..=d {
                bulk += v.get(i) * table.value(i);
            }
            let exact = logdet_exact(&LatticeSpec::dirichlet(&sizes)?, false)?;
            let terms = vec![
                Term::new("bulk_boundary", bulk),
                Term::new("log_u", -sign(d) * 0.5f64.powi(d as i32) * (u * u).ln()),
                Term::new("log_det_zeta", log_det_zeta),
                Term::new("corner_constant", corner),
            ];
            Ok(ExpansionRecord::new(u, sizes, exact, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    let convergence = Convergence::from_records(&records);
    let free = free_corner_constant(d);
    let comparisons = vec![
        Term::new("corner_constant", corner),
        Term::new("free_cube_constant", free),
        Term::new(
            "limit_with_free_cube_constant",
            convergence.extrapolated_limit + corner - free,
        ),
        Term::new("log_det_zeta", log_det_zeta),
    ];
    Ok(ExpansionReport {
        kind: "dirichlet-box".into(),
        geometry: b.clone(),
        mass: 0.0,
        size_rule: rule.name().into(),
        coefficient_fingerprint: table.fingerprint(),
        records,
        convergence,
        comparisons,
    })
}

/// Residuals of `log det(Δ_{DT(N(u))} + (m/u)²)` against
/// `V_d L_{m/u}(0) + log det_ζ(Δ_T + m²) + G`, with `G` the closed-form
/// Mellin term of the massive counterterm.
pub fn massive_torus_expansion_report(
    b: &BoxSpec,
    u_grid: &[f64],
    rule: SizeRule,
    quad: &QuadratureConfig,
) -> Result<ExpansionReport> {
    b.validate()?;
    if b.mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    check_grid(u_grid)?;
    let d = b.dim();
    let zeta = zeta_prime_zero_massive_torus(b, quad)?;
    let log_det_zeta = zeta.log_det();
    let gamma = zeta
        .terms
        .iter()
        .find(|t| t.name == "gamma_term")
        .map(|t| t.value)
        .expect("massive decomposition has a gamma term");
    let records = u_grid
        .par_iter()
        .map(|&u| {
            let sizes = rule.sizes(&b.sides, u)?;
            let m_tilde = b.mass / u;
            let spec = LatticeSpec::periodic(&sizes)?.with_mass_squared(m_tilde * m_tilde)?;
            let exact = logdet_exact(&spec, false)?;
            let volume: f64 = sizes.iter().map(|&n| n as f64).product();
            let l = l_massive(d, m_tilde, quad)?;
            let terms = vec![
                Term::new("volume_term", volume * l.value),
                Term::new("log_det_zeta", log_det_zeta),
                Term::new("gamma_term", gamma),
            ];
            Ok(ExpansionRecord::new(u, sizes, exact, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    let convergence = Convergence::from_records(&records);
    let comparisons = vec![
        Term::new("log_det_zeta", log_det_zeta),
        Term::new("gamma_term", gamma),
        Term::new("h_limit", log_det_zeta + gamma),
    ];
    Ok(ExpansionReport {
        kind: "massive-torus".into(),
        geometry: b.clone(),
        mass: b.mass,
        size_rule: rule.name().into(),
        coefficient_fingerprint: String::from("l-massive"),
        records,
        convergence,
        comparisons,
    })
}

/// `H_{N(u)}(0) = log det − V_d L_{m/u}(0)` for each record of a massive report.
pub fn massive_h_values(report: &ExpansionReport) -> Vec<f64> {
    report
        .records
        .iter()
        .map(|r| r.exact_logdet - r.term("volume_term").unwrap_or(f64::NAN))
        .collect()
}

/// Regularized limit of `log det(n²Δ^D)` on the unit `d`-cube and the
/// determinant it predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegLimit {
    pub d: usize,
    pub samples: Vec<(usize, f64)>,
    pub fit: FitModel,
    /// `LIM − corner(d)`.
    pub log_det_predicted: f64,
    /// `LIM − free_cube_constant(d)`, the alternative constant.
    pub log_det_free_constant: f64,
    /// `−ζ'(0)` from the Mellin representation.
    pub log_det_zeta: f64,
}

impl RegLimit {
    pub fn discrepancy(&self) -> f64 {
        self.log_det_predicted - self.log_det_zeta
    }
}

/// Samples `log det(n²Δ^D)` on the cube grid and fits the regularized limit.
pub fn reg_limit_chain(
    d: usize,
    n_grid: &[usize],
    basis: &[BasisTerm],
    quad: &QuadratureConfig,
) -> Result<RegLimit> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let samples = n_grid
        .par_iter()
        .map(|&n| {
            let spec = LatticeSpec::dirichlet(&vec![n; d])?.with_rescale(n as f64)?;
            Ok((n, logdet_exact(&spec, false)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = reg_limit_fit(&samples, basis)?;
    let lim = fit.a00;
    let log_det_zeta = zeta_prime_zero_box(&BoxSpec::new(vec![1.0; d])?, quad)?.log_det();
    Ok(RegLimit {
        d,
        samples,
        log_det_predicted: lim - corner_constant(d),
        log_det_free_constant: lim - free_corner_constant(d),
        log_det_zeta,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn theta_relation_examples() {
        let (lhs, rhs) = discrete_theta_relation_check(&[3], 0.2).unwrap();
        assert_relative_eq!(lhs, (-0.2f64).exp() + (-0.6f64).exp(), max_relative = 1e-14);
        let torus6 = lattice_theta(&LatticeSpec::periodic(&[6]).unwrap(), 0.2);
        assert_relative_eq!(
            rhs,
            0.5 * (torus6 - 1.0 - (-0.8f64).exp()),
            max_relative = 1e-14
        );
        let (lhs, rhs) = discrete_theta_relation_check(&[4, 5], 0.2).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        let (lhs, rhs) = discrete_theta_relation_check(&[1], 1.0).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(rhs.abs() < 1e-15);
    }

    #[test]
    fn theta_relation_limit() {
        assert!(matches!(
            discrete_theta_relation_check(&[1001, 1000], 1.0),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn small_t_law_slope() {
        // (Θ − g − (−1)^d e^{−t})/t stays bounded as t → 0
        for sizes in [vec![5usize], vec![4, 6]] {
            let d = sizes.len();
            let spec = LatticeSpec::dirichlet(&sizes).unwrap();
            let ratio = |t: f64| {
                (lattice_theta(&spec, t) - g_function(&sizes, t) - sign(d) * (-t).exp()) / t
            };
            let r: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&t| ratio(t)).collect();
            assert!((r[3] - r[2]).abs() < 0.1 * (r[2].abs() + 1.0), "{r:?}");
            assert!(r.iter().all(|x| x.abs() < 1e3));
        }
    }

    #[test]
    fn h_split_examples() {
        let q = QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            ..q()
        };
        let t1 = CoeffTable::compute(1, &q).unwrap();
        let h = h_at_zero(&LatticeSpec::dirichlet(&[5]).unwrap(), &t1, &q).unwrap();
        assert!((h.algebraic - 5f64.ln()).abs() < 1e-9);
        assert!((h.algebraic - h.integral.value).abs() < 1e-6);
        let t2 = CoeffTable::compute(2, &q).unwrap();
        for sizes in [[4, 4], [2, 2]] {
            let h = h_at_zero(&LatticeSpec::dirichlet(&sizes).unwrap(), &t2, &q).unwrap();
            assert!(
                (h.algebraic - h.integral.value).abs() < 1e-6,
                "{sizes:?} {h:?}"
            );
        }
    }

    #[test]
    fn size_rule_rounds_ties_to_even() {
        let r = SizeRule::RoundHalfEven;
        assert_eq!(r.sizes(&[1.0, 2.5, 1.5], 1.0).unwrap(), vec![1, 2, 2]);
        assert!(r.sizes(&[0.1], 1.0).is_err());
    }

    #[test]
    fn interval_chain_has_zero_residual() {
        let grid: Vec<f64> = (4..=64).map(|n| n as f64).collect();
        let rep = box_expansion_report(
            &BoxSpec::new(vec![1.0]).unwrap(),
            &grid,
            SizeRule::RoundHalfEven,
            &q(),
        )
        .unwrap();
        for r in &rep.records {
            assert!(r.residual.abs() < 1e-9, "{r:?}");
            assert!(r.bookkeeping_holds());
        }
    }

    #[test]
    fn report_json_roundtrip_is_exact() {
        let rep = box_expansion_report(
            &BoxSpec::new(vec![1.0, 1.0]).unwrap(),
            &[8.0, 16.0],
            SizeRule::RoundHalfEven,
            &q(),
        )
        .unwrap();
        let back = ExpansionReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.render_table(), rep.render_table());
        assert!(back.records.iter().all(|r| r.bookkeeping_holds()));
    }

    #[test]
    fn massive_circle_chain() {
        let b = BoxSpec::with_mass(vec![1.0], 1.0).unwrap();
        let rep = massive_torus_expansion_report(
            &b,
            &[64.0, 128.0, 256.0],
            SizeRule::RoundHalfEven,
            &q(),
        )
        .unwrap();
        let h_limit = rep
            .comparisons
            .iter()
            .find(|t| t.name == "h_limit")
            .unwrap()
            .value;
        assert_relative_eq!(
            h_limit,
            (4.0 * 0.5f64.sinh().powi(2)).ln() - 1.0,
            max_relative = 1e-9
        );
        for r in &rep.records {
            assert!(r.residual.abs() < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn interval_regularized_limit() {
        let grid = geometric_grid(8, 1024, 2.0);
        let r = reg_limit_chain(1, &grid, &default_basis(1), &q()).unwrap();
        assert!(r.fit.a00.abs() < 1e-6, "{:?}", r.fit);
        assert!((r.log_det_predicted - 2f64.ln()).abs() < 1e-6);
    }
}

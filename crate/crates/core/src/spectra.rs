//! Exact spectra of discrete Laplacians on product lattices and their
//! log-determinants.
//!
//! A product spectrum is never materialized. It is enumerated with an
//! odometer over per-axis value lists and reduced with the fixed pairwise tree
//! from [`crate::summation`], in blocks of [`BLOCK`] flattened indices. Blocks
//! may run on any number of threads; the reduction order is fixed by the
//! block layout alone, so results are bit-identical for every thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::binomial;
use crate::summation::{pairwise_sum, Pairwise};

/// Flattened indices per reduction block.
pub const BLOCK: u64 = 1 << 14;

/// Largest spectrum [`Spectrum::to_vec`] will materialize.
pub const MATERIALIZE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Hypercube, values vanish on the boundary.
    Dirichlet,
    /// Hypercube, Neumann-type ends; contains the zero mode.
    Free,
    /// Discrete torus.
    Periodic,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Self::Dirichlet),
            "free" => Ok(Self::Free),
            "periodic" => Ok(Self::Periodic),
            other => Err(Error::InvalidInput(format!(
                "unknown boundary condition {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sizes: Vec<usize>,
    pub bc: BoundaryCondition,
    /// The `m̃²` shift added to every eigenvalue.
    pub mass_squared: f64,
    /// When set, every eigenvalue is multiplied by `u²`.
    pub rescale: Option<f64>,
}

impl LatticeSpec {
    pub fn new(sizes: Vec<usize>, bc: BoundaryCondition) -> Result<Self> {
        let spec = Self {
            sizes,
            bc,
            mass_squared: 0.0,
            rescale: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dirichlet(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.to_vec(), BoundaryCondition::Dirichlet)
    }

    pub fn periodic(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.to_vec(), BoundaryCondition::Periodic)
    }

    pub fn free(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.to_vec(), BoundaryCondition::Free)
    }

    pub fn with_mass_squared(mut self, m2: f64) -> Result<Self> {
        self.mass_squared = m2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rescale(mut self, u: f64) -> Result<Self> {
        self.rescale = Some(u);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidInput(
                "lattice dimension must be at least 1".into(),
            ));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidInput("lattice sizes must be positive".into()));
        }
        if !(self.mass_squared >= 0.0 && self.mass_squared.is_finite()) {
            return Err(Error::InvalidInput(
                "mass_squared must be finite and nonnegative".into(),
            ));
        }
        if let Some(u) = self.rescale {
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::InvalidInput("rescale must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_count(&self) -> u128 {
        self.sizes
            .iter()
            .map(|&n| match self.bc {
                BoundaryCondition::Dirichlet => (n - 1) as u128,
                _ => n as u128,
            })
            .product()
    }
}

/// `2 − 2cos θ` evaluated as `4 sin²(θ/2)`.
#[inline]
fn two_minus_two_cos(half_theta: f64) -> f64 {
    let s = half_theta.sin();
    4.0 * s * s
}

// Path value for index q of n, built so that value(n−q) = 4 − value(q).
fn path_value(q: usize, n: usize) -> f64 {
    if 2 * q == n {
        2.0
    } else if 2 * q < n {
        two_minus_two_cos(PI * q as f64 / (2.0 * n as f64))
    } else {
        4.0 - two_minus_two_cos(PI * (n - q) as f64 / (2.0 * n as f64))
    }
}

fn cycle_value(q: usize, n: usize) -> f64 {
    let q = q.min(n - q);
    two_minus_two_cos(PI * q as f64 / n as f64)
}

/// One-dimensional spectrum listed with multiplicity, in increasing index `q`.
pub fn axis_eigenvalues(n: usize, bc: BoundaryCondition) -> Vec<f64> {
    assert!(n >= 1, "axis size must be positive");
    match bc {
        BoundaryCondition::Dirichlet => (1..n).map(|q| path_value(q, n)).collect(),
        BoundaryCondition::Free => (0..n).map(|q| path_value(q, n)).collect(),
        BoundaryCondition::Periodic => (0..n).map(|q| cycle_value(q, n)).collect(),
    }
}

// Axis spectrum with equal values merged: the cycle pairs q and n−q.
fn compressed_axis(n: usize, bc: BoundaryCondition) -> Vec<(f64, u64)> {
    match bc {
        BoundaryCondition::Periodic => (0..=n / 2)
            .map(|q| {
                let mult = if q == 0 || 2 * q == n { 1 } else { 2 };
                (cycle_value(q, n), mult)
            })
            .collect(),
        _ => axis_eigenvalues(n, bc)
            .into_iter()
            .map(|v| (v, 1))
            .collect(),
    }
}

/// Streamable product spectrum `λ = (Σᵢ λᵢ + m̃²)·u²`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    axes: Vec<Vec<(f64, u64)>>,
    shift: f64,
    scale: f64,
    total_count: u128,
    zero_modes: u64,
}

/// Spectrum of the lattice described by `spec`.
pub fn product_spectrum(spec: &LatticeSpec) -> Spectrum {
    let axes: Vec<_> = spec
        .sizes
        .iter()
        .map(|&n| compressed_axis(n, spec.bc))
        .collect();
    let zero_modes = if spec.mass_squared == 0.0 && spec.bc != BoundaryCondition::Dirichlet {
        1
    } else {
        0
    };
    Spectrum {
        axes,
        shift: spec.mass_squared,
        scale: spec.rescale.map_or(1.0, |u| u * u),
        total_count: spec.total_count(),
        zero_modes,
    }
}

impl Spectrum {
    /// Eigenvalue count with multiplicity.
    pub fn total_count(&self) -> u128 {
        self.total_count
    }

    /// Multiplicity of the eigenvalue 0.
    pub fn zero_modes(&self) -> u64 {
        self.zero_modes
    }

    /// Number of (value, multiplicity) pairs the enumeration yields.
    pub fn entries(&self) -> u64 {
        self.axes.iter().map(|a| a.len() as u64).product()
    }

    fn block_sum<F: Fn(f64) -> f64>(&self, start: u64, end: u64, f: &F) -> f64 {
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        let mut rem = start;
        for k in (0..d).rev() {
            let len = self.axes[k].len() as u64;
            idx[k] = (rem % len) as usize;
            rem /= len;
        }
        // prefix[k] = Σ_{j<k} value_j, mult[k] = Π_{j<k} mult_j
        let mut prefix = vec![0.0; d];
        let mut mult = vec![1u64; d];
        for k in 1..d {
            let (v, m) = self.axes[k - 1][idx[k - 1]];
            prefix[k] = prefix[k - 1] + v;
            mult[k] = mult[k - 1] * m;
        }
        let last = &self.axes[d - 1];
        let mut acc = Pairwise::new();
        let mut pos = start;
        while pos < end {
            let run = ((last.len() - idx[d - 1]) as u64).min(end - pos) as usize;
            let (p, pm) = (prefix[d - 1], mult[d - 1]);
            for &(v, m) in &last[idx[d - 1]..idx[d - 1] + run] {
                let lambda = (p + v + self.shift) * self.scale;
                acc.push((pm * m) as f64 * f(lambda));
            }
            pos += run as u64;
            idx[d - 1] += run;
            if idx[d - 1] < last.len() {
                continue;
            }
            // odometer carry
            idx[d - 1] = 0;
            let mut k = d - 1;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
            for j in (k + 1)..d {
                let (v, m) = self.axes[j - 1][idx[j - 1]];
                prefix[j] = prefix[j - 1] + v;
                mult[j] = mult[j - 1] * m;
            }
        }
        acc.total()
    }

    /// `Σ mult·f(λ)` over the spectrum, reduced deterministically.
    pub fn sum_map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let entries = self.entries();
        if entries == 0 {
            return 0.0;
        }
        let blocks = entries.div_ceil(BLOCK);
        let partial: Vec<f64> = (0..blocks)
            .into_par_iter()
            .map(|b| self.block_sum(b * BLOCK, ((b + 1) * BLOCK).min(entries), &f))
            .collect();
        pairwise_sum(&partial)
    }

    /// Materialized (value, multiplicity) pairs in enumeration order.
    pub fn to_vec(&self) -> Result<Vec<(f64, u64)>> {
        let entries = self.entries();
        if entries > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge {
                count: entries as u128,
                limit: MATERIALIZE_LIMIT as u128,
            });
        }
        let mut out = Vec::with_capacity(entries as usize);
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        for _ in 0..entries {
            let mut sum = 0.0;
            let mut mult = 1;
            for (k, &i) in idx.iter().enumerate() {
                let (v, m) = self.axes[k][i];
                sum += v;
                mult *= m;
            }
            out.push(((sum + self.shift) * self.scale, mult));
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < self.axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Sorted eigenvalues listed with multiplicity (small spectra only).
    pub fn sorted_values(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for (v, m) in self.to_vec()? {
            out.extend(std::iter::repeat_n(v, m as usize));
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

/// `Σ log λ` over the spectrum, optionally skipping the zero mode.
///
/// A Dirichlet lattice with some `nᵢ = 1` has an empty spectrum and returns 0.
pub fn logdet_exact(spec: &LatticeSpec, exclude_zero_modes: bool) -> Result<f64> {
    spec.validate()?;
    let spectrum = product_spectrum(spec);
    let zeros = spectrum.zero_modes() as u128;
    if zeros > 0 && !exclude_zero_modes {
        return Err(Error::ZeroEigenvalue);
    }
    if spectrum.total_count() == 0 {
        return Ok(0.0);
    }
    if spectrum.total_count() == zeros {
        return Err(Error::EmptySpectrum);
    }
    Ok(spectrum.sum_map(|l| if l == 0.0 { 0.0 } else { l.ln() }))
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
        .install(f)
}

/// Elementary symmetric polynomials `e₀..e_d` of the sizes, exactly.
pub fn elementary_symmetric(sizes: &[u64]) -> Vec<u128> {
    let mut e = vec![0u128; sizes.len() + 1];
    e[0] = 1;
    for (j, &n) in sizes.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            e[k] += e[k - 1] * n as u128;
        }
    }
    e
}

/// `V_k = 2^{-(d-k)} e_k`, the half-weighted sum of `k`-face volumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeVector(pub Vec<f64>);

impl VolumeVector {
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// Volume vector of a discrete lattice with the given sizes.
pub fn volume_vector_discrete(sizes: &[usize]) -> VolumeVector {
    let sides: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    volume_vector_box(&sides)
}

/// Volume vector of a continuum box with the given sides.
pub fn volume_vector_box(sides: &[f64]) -> VolumeVector {
    let d = sides.len();
    let mut e = vec![0.0; d + 1];
    e[0] = 1.0;
    for (j, &a) in sides.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            e[k] += e[k - 1] * a;
        }
    }
    VolumeVector(
        e.into_iter()
            .enumerate()
            .map(|(k, ek)| ek * 0.5f64.powi((d - k) as i32))
            .collect(),
    )
}

/// Both sides of `log det Δ^D(n^d) = Σ_{i=0}^{d} (−1)^{d−i} C(d,i) log det Δ^F(n^i)`.
///
/// The free spectra carry a zero mode, handled two ways: dropped
/// (`rhs_excluded`; the `i = 0` term is then an empty product), or shifted by
/// `epsilon` (`rhs_massive`, which needs the `i = 0` point term `log ε`).
/// `rhs_massive_from_one` omits that term and drifts by `−(−1)^d log ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletFreeRelation {
    pub lhs: f64,
    pub rhs_excluded: f64,
    pub rhs_massive: f64,
    pub rhs_massive_from_one: f64,
    pub epsilon: f64,
}

pub fn dirichlet_free_logdet_relation(
    n: usize,
    d: usize,
    epsilon: f64,
) -> Result<DirichletFreeRelation> {
    if n < 2 || d == 0 {
        return Err(Error::InvalidInput("relation needs n ≥ 2 and d ≥ 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let lhs = logdet_exact(&LatticeSpec::dirichlet(&vec![n; d])?, false)?;
    let mut rhs_excluded = 0.0;
    let mut rhs_massive_from_one = 0.0;
    for i in 1..=d {
        let sign = if (d - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = sign * binomial(d, i) as f64;
        let free = LatticeSpec::free(&vec![n; i])?;
        rhs_excluded += c * logdet_exact(&free, true)?;
        rhs_massive_from_one += c * logdet_exact(&free.with_mass_squared(epsilon)?, false)?;
    }
    let point_sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs_massive = rhs_massive_from_one + point_sign * epsilon.ln();
    Ok(DirichletFreeRelation {
        lhs,
        rhs_excluded,
        rhs_massive,
        rhs_massive_from_one,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn axis_examples() {
        assert_eq!(axis_eigenvalues(2, BoundaryCondition::Dirichlet), vec![2.0]);
        assert!(close(
            &axis_eigenvalues(3, BoundaryCondition::Dirichlet),
            &[1.0, 3.0],
            1e-15
        ));
        assert!(close(
            &axis_eigenvalues(3, BoundaryCondition::Periodic),
            &[0.0, 3.0, 3.0],
            1e-15
        ));
        assert!(axis_eigenvalues(1, BoundaryCondition::Dirichlet).is_empty());
        assert_eq!(axis_eigenvalues(1, BoundaryCondition::Free), vec![0.0]);
    }

    #[test]
    fn axis_matches_tridiagonal_characteristic_polynomial() {
        // det(tridiag(2−λ, −1)) of size n−1 vanishes at every Dirichlet eigenvalue
        for n in 2..30 {
            for l in axis_eigenvalues(n, BoundaryCondition::Dirichlet) {
                let (mut p0, mut p1) = (1.0, 2.0 - l);
                for _ in 1..n - 1 {
                    (p0, p1) = (p1, (2.0 - l) * p1 - p0);
                }
                assert!(p1.abs() < 1e-11 * n as f64, "n={n} λ={l} p={p1}");
            }
        }
    }

    #[test]
    fn product_examples() {
        let s = product_spectrum(&LatticeSpec::dirichlet(&[2, 2]).unwrap());
        assert_eq!(s.to_vec().unwrap(), vec![(4.0, 1)]);
        let s = product_spectrum(&LatticeSpec::dirichlet(&[3, 3]).unwrap());
        assert!(close(
            &s.sorted_values().unwrap(),
            &[2.0, 4.0, 4.0, 6.0],
            1e-15
        ));
        let s = product_spectrum(
            &LatticeSpec::periodic(&[2])
                .unwrap()
                .with_mass_squared(1.0)
                .unwrap(),
        );
        assert!(close(&s.sorted_values().unwrap(), &[1.0, 5.0], 1e-15));
    }

    #[test]
    fn rescale_multiplies_by_u_squared() {
        let s = product_spectrum(
            &LatticeSpec::dirichlet(&[3])
                .unwrap()
                .with_rescale(3.0)
                .unwrap(),
        );
        assert!(close(&s.sorted_values().unwrap(), &[9.0, 27.0], 1e-13));
    }

    #[test]
    fn logdet_examples() {
        let ld = logdet_exact(&LatticeSpec::dirichlet(&[3]).unwrap(), false).unwrap();
        assert_relative_eq!(ld, 3f64.ln(), max_relative = 1e-15);
        let ld = logdet_exact(&LatticeSpec::periodic(&[3]).unwrap(), true).unwrap();
        assert_relative_eq!(ld, 9f64.ln(), max_relative = 1e-15);
        let spec = LatticeSpec::periodic(&[2])
            .unwrap()
            .with_mass_squared(1.0)
            .unwrap();
        assert_relative_eq!(
            logdet_exact(&spec, false).unwrap(),
            5f64.ln(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn logdet_error_paths() {
        let torus = LatticeSpec::periodic(&[2, 2]).unwrap();
        assert_eq!(logdet_exact(&torus, false), Err(Error::ZeroEigenvalue));
        let point = LatticeSpec::periodic(&[1]).unwrap();
        assert_eq!(logdet_exact(&point, true), Err(Error::EmptySpectrum));
        let empty = LatticeSpec::dirichlet(&[1, 5]).unwrap();
        assert_eq!(logdet_exact(&empty, false), Ok(0.0));
    }

    #[test]
    fn path_and_cycle_determinants() {
        for n in (2..=4096).step_by(37).chain([4096]) {
            let path = logdet_exact(&LatticeSpec::dirichlet(&[n]).unwrap(), false).unwrap();
            assert_relative_eq!(path.exp(), n as f64, max_relative = 1e-12);
            let cycle = logdet_exact(&LatticeSpec::periodic(&[n]).unwrap(), true).unwrap();
            assert_relative_eq!(cycle.exp(), (n * n) as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn blocks_span_axis_boundaries() {
        // enough entries for several blocks with ragged axis lengths
        let spec = LatticeSpec::periodic(&[91, 87, 45])
            .unwrap()
            .with_mass_squared(0.3)
            .unwrap();
        let s = product_spectrum(&spec);
        assert!(s.entries() > 2 * BLOCK);
        let direct: f64 = s
            .to_vec()
            .unwrap()
            .iter()
            .map(|&(l, m)| m as f64 * l.ln())
            .sum();
        let streamed = logdet_exact(&spec, false).unwrap();
        assert_relative_eq!(streamed, direct, max_relative = 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let spec = LatticeSpec::dirichlet(&[60, 70, 80]).unwrap();
        let one = with_threads(1, || logdet_exact(&spec, false).unwrap());
        let three = with_threads(3, || logdet_exact(&spec, false).unwrap());
        assert_eq!(one.to_bits(), three.to_bits());
    }

    #[test]
    fn volume_vector_examples() {
        let v = volume_vector_discrete(&[3, 7]);
        assert_eq!(v.0, vec![0.25, 5.0, 21.0]);
        assert_eq!(volume_vector_discrete(&[5]).0, vec![0.5, 5.0]);
        assert_eq!(
            volume_vector_box(&[1.0, 1.0, 1.0]).0,
            vec![0.125, 0.75, 1.5, 1.0]
        );
    }

    #[test]
    fn relation_conventions() {
        for (n, d) in [(4, 1), (3, 2), (2, 2), (5, 3), (3, 4)] {
            let r = dirichlet_free_logdet_relation(n, d, 1e-10).unwrap();
            assert_relative_eq!(r.lhs, r.rhs_excluded, max_relative = 1e-12, epsilon = 1e-12);
            assert!((r.lhs - r.rhs_massive).abs() < 1e-7, "{r:?}");
            let drift = -(if d % 2 == 0 { 1.0 } else { -1.0 }) * r.epsilon.ln();
            assert!(
                (r.rhs_massive_from_one - r.lhs - drift).abs() < 1e-7,
                "{r:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn multiplicities_sum_to_count(
            sizes in prop::collection::vec(1usize..=12, 1..=4),
            bc in prop::sample::select(vec![
                BoundaryCondition::Dirichlet,
                BoundaryCondition::Free,
                BoundaryCondition::Periodic,
            ]),
        ) {
            let spec = LatticeSpec::new(sizes.clone(), bc).unwrap();
            let s = product_spectrum(&spec);
            let total: u128 = s.to_vec().unwrap().iter().map(|&(_, m)| m as u128).sum();
            prop_assert_eq!(total, spec.total_count());
            let expected: u128 = sizes.iter().map(|&n| match bc {
                BoundaryCondition::Dirichlet => (n - 1) as u128,
                _ => n as u128,
            }).product();
            prop_assert_eq!(total, expected);
            prop_assert!(s.to_vec().unwrap().iter().all(|&(l, _)| l >= 0.0));
        }

        #[test]
        fn dirichlet_axis_pairs_exactly(n in 1usize..500) {
            let v = axis_eigenvalues(n, BoundaryCondition::Dirichlet);
            for (a, b) in v.iter().zip(v.iter().rev()) {
                if *a < 2.0 {
                    prop_assert_eq!(*b, 4.0 - *a);
                }
            }
        }

        #[test]
        fn face_volume_identity(sizes in prop::collection::vec(1u64..=20, 1..=5)) {
            // Π(nᵢ−1) = Σ_{i=0}^{d} (−1)^{d−i} e_i, in integers
            let d = sizes.len();
            let e = elementary_symmetric(&sizes);
            let lhs: i128 = sizes.iter().map(|&n| n as i128 - 1).product();
            let rhs: i128 = (0..=d)
                .map(|i| if (d - i) % 2 == 0 { e[i] as i128 } else { -(e[i] as i128) })
                .sum();
            prop_assert_eq!(lhs, rhs);
            let v = volume_vector_discrete(&sizes.iter().map(|&n| n as usize).collect::<Vec<_>>());
            prop_assert_eq!(v.get(d), sizes.iter().product::<u64>() as f64);
            prop_assert_eq!(v.get(0), 0.5f64.powi(d as i32));
            prop_assert!(v.0.iter().all(|&x| x > 0.0));
        }
    }
}

//! Pairwise summation with a fixed reduction tree.
//!
//! Values are summed in leaves of [`LEAF`] consecutive terms; completed leaves
//! are merged like a binary counter, so the tree shape depends only on the
//! number of terms and never on timing or thread count.

/// Terms summed sequentially before entering the tree.
pub const LEAF: usize = 32;

/// Streaming pairwise accumulator.
#[derive(Debug, Clone, Default)]
pub struct Pairwise {
    leaf: f64,
    leaf_len: usize,
    // levels[k] holds the sum of 2^k completed leaves, if present
    levels: Vec<Option<f64>>,
}

impl Pairwise {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.leaf += x;
        self.leaf_len += 1;
        if self.leaf_len == LEAF {
            let carry = std::mem::take(&mut self.leaf);
            self.leaf_len = 0;
            self.carry(carry);
        }
    }

    fn carry(&mut self, mut value: f64) {
        for slot in self.levels.iter_mut() {
            match slot.take() {
                Some(v) => value += v,
                None => {
                    *slot = Some(value);
                    return;
                }
            }
        }
        self.levels.push(Some(value));
    }

    /// Sum of everything pushed so far. Partial levels are combined from the
    /// smallest upward.
    pub fn total(&self) -> f64 {
        let mut acc = if self.leaf_len > 0 { self.leaf } else { 0.0 };
        for v in self.levels.iter().flatten() {
            acc += v;
        }
        acc
    }
}

/// Pairwise sum of a slice by recursive halving.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_integer_sums() {
        let mut acc = Pairwise::new();
        for k in 1..=100_000u64 {
            acc.push(k as f64);
        }
        assert_eq!(acc.total(), 5_000_050_000.0);
        let xs: Vec<f64> = (1..=100_000u64).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5_000_050_000.0);
    }

    #[test]
    fn error_stays_small_for_repeated_tenths() {
        let n = 1_000_000;
        let mut acc = Pairwise::new();
        for _ in 0..n {
            acc.push(0.1);
        }
        let exact = 0.1 * n as f64;
        assert!((acc.total() - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(Pairwise::new().total(), 0.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}

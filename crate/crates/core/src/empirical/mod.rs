//! Rank-based and kernel-based dependence estimators.
//!
//! Pseudo-observations use the `rank / n` convention with average ranks for
//! ties, so every coordinate lies in `(0, 1]`.

mod cos;
mod kernel;

pub use cos::{cos_index, cos_partition, frechet_lambda, CosEstimate, Domain, DomainPartition};
pub use kernel::{
    bandwidths, copula_bandwidth, kernel_copula_density, kernel_marginal_cdf, marginal_bandwidth, Bandwidths,
    KernelMarginals,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Normalised ranks of two equally long samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations<F> {
    pub(crate) u: Vec<F>,
    pub(crate) v: Vec<F>,
}

impl<F: Real> PseudoObservations<F> {
    /// Rank-transforms `x` and `y`.
    pub fn from_samples(x: &[F], y: &[F]) -> Result<Self> {
        check_pair(x, y, 2)?;
        let n = F::of_usize(x.len());
        let two_n = n + n;
        let u = doubled_ranks(x).into_iter().map(|r| F::of_usize(r) / two_n).collect();
        let v = doubled_ranks(y).into_iter().map(|r| F::of_usize(r) / two_n).collect();
        Ok(Self { u, v })
    }

    /// Wraps coordinates that are already on the unit square.
    pub fn from_unit_pairs(u: Vec<F>, v: Vec<F>) -> Result<Self> {
        check_pair(&u, &v, 1)?;
        let inside = |x: &F| *x >= F::zero() && *x <= F::one();
        if !u.iter().chain(&v).all(inside) {
            return Err(Error::InvalidConfig("pseudo-observations must lie in [0, 1]".into()));
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &[F] {
        &self.u
    }

    pub fn v(&self) -> &[F] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// `pseudo_observations(x, y)`: normalised average ranks of both samples.
pub fn pseudo_observations<F: Real>(x: &[F], y: &[F]) -> Result<PseudoObservations<F>> {
    PseudoObservations::from_samples(x, y)
}

/// Average ranks (1-based) of `x`.
pub fn ranks<F: Real>(x: &[F]) -> Vec<F> {
    let half = F::of(0.5);
    doubled_ranks(x).into_iter().map(|r| F::of_usize(r) * half).collect()
}

/// Twice the average rank, which is always an integer.
pub(crate) fn doubled_ranks<F: Real>(x: &[F]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean of ranks i+1 ..= j+1
        let doubled = (i + 1) + (j + 1);
        for &k in &order[i..=j] {
            out[k] = doubled;
        }
        i = j + 1;
    }
    out
}

/// Empirical copula `C_n(u, v) = (1/n) #{j : u_j <= u, v_j <= v}`.
pub fn empirical_copula<F: Real>(pobs: &PseudoObservations<F>, u: F, v: F) -> F {
    let count = pobs.u.iter().zip(&pobs.v).filter(|(&a, &b)| a <= u && b <= v).count();
    F::of_usize(count) / F::of_usize(pobs.len())
}

/// `C_n` tabulated at every sample point, ordered by `u` (ties by `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCopulaGrid<F> {
    pub u: Vec<F>,
    pub v: Vec<F>,
    /// `n * C_n(u_j, v_j)`, kept as integers so monotonicity tests are exact.
    pub counts: Vec<usize>,
    pub n: usize,
}

impl<F: Real> EmpiricalCopulaGrid<F> {
    /// Tabulates `C_n` at the samples in `O(n log n)`.
    pub fn from_samples(x: &[F], y: &[F]) -> Result<Self> {
        check_pair(x, y, 2)?;
        let n = x.len();
        let ru = doubled_ranks(x);
        let rv = doubled_ranks(y);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| (ru[k], rv[k]));

        let mut tree = Fenwick::new(2 * n);
        let mut counts = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && ru[order[j + 1]] == ru[order[i]] {
                j += 1;
            }
            for &k in &order[i..=j] {
                tree.add(rv[k]);
            }
            for &k in &order[i..=j] {
                counts.push(tree.prefix(rv[k]));
            }
            i = j + 1;
        }
        let two_n = F::of_usize(2 * n);
        Ok(Self {
            u: order.iter().map(|&k| F::of_usize(ru[k]) / two_n).collect(),
            v: order.iter().map(|&k| F::of_usize(rv[k]) / two_n).collect(),
            counts,
            n,
        })
    }

    pub fn value(&self, j: usize) -> F {
        F::of_usize(self.counts[j]) / F::of_usize(self.n)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn check_pair<F>(x: &[F], y: &[F], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::TooFewSamples {
            needed: min,
            got: x.len(),
        });
    }
    Ok(())
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        Self {
            tree: vec![0; size + 1],
        }
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> usize {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_over_n_convention() {
        let p = pseudo_observations(&[3.0, 1.0, 2.0], &[30.0, 10.0, 20.0]).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(p.u(), &[1.0, third, 2.0 * third]);
        assert_eq!(p.u(), p.v());
    }

    #[test]
    fn increasing_input_gives_uniform_grid() {
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 1.5 - 3.0).collect();
        let p = pseudo_observations(&x, &x).unwrap();
        for (j, &u) in p.u().iter().enumerate() {
            assert_eq!(u, (j + 1) as f64 / 8.0);
        }
    }

    #[test]
    fn ties_get_average_ranks() {
        let p = pseudo_observations(&[1.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.u(), &[0.5, 0.5, 1.0]);
        assert_eq!(ranks(&[5.0, 1.0, 5.0, 5.0]), vec![3.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn rejects_short_or_mismatched_input() {
        assert!(matches!(
            pseudo_observations(&[1.0], &[2.0]),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            pseudo_observations(&[1.0, 2.0], &[2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn empirical_copula_corners() {
        let x = [0.3, -1.0, 2.2, 0.9, 1.4];
        let y = [1.0, 0.2, -0.4, 3.1, 0.0];
        let p = pseudo_observations(&x, &y).unwrap();
        assert_eq!(empirical_copula(&p, 1.0, 1.0), 1.0);
        assert_eq!(empirical_copula(&p, 0.0, 0.0), 0.0);
    }

    #[test]
    fn comonotone_copula_is_the_upper_bound() {
        let x: Vec<f64> = (0..101).map(|i| (i as f64 * 0.37).sin() + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let p = pseudo_observations(&x, &y).unwrap();
        assert!((empirical_copula(&p, 0.5, 0.5) - 0.5).abs() <= 1.0 / 101.0);
    }

    fn brute_grid(x: &[f64], y: &[f64]) -> Vec<(f64, f64, usize)> {
        let p = pseudo_observations(x, y).unwrap();
        let mut pts: Vec<(f64, f64, usize)> = (0..x.len())
            .map(|j| {
                let c = (0..x.len()).filter(|&k| p.u[k] <= p.u[j] && p.v[k] <= p.v[j]).count();
                (p.u[j], p.v[j], c)
            })
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }

    proptest! {
        #[test]
        fn fenwick_grid_matches_brute_force(
            pairs in prop::collection::vec((0i32..12, 0i32..12), 2..60)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let grid = EmpiricalCopulaGrid::from_samples(&x, &y).unwrap();
            let want = brute_grid(&x, &y);
            for (j, (u, v, c)) in want.into_iter().enumerate() {
                prop_assert_eq!(grid.u[j], u);
                prop_assert_eq!(grid.v[j], v);
                prop_assert_eq!(grid.counts[j], c);
            }
        }

        #[test]
        fn empirical_copula_within_frechet_bounds(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..80)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let p = pseudo_observations(&x, &y).unwrap();
            let slack = 1.0 / x.len() as f64 + 1e-12;
            for j in 0..x.len() {
                let (u, v) = (p.u[j], p.v[j]);
                let c = empirical_copula(&p, u, v);
                prop_assert!(c <= u.min(v) + slack);
                prop_assert!(c >= (u + v - 1.0).max(0.0) - slack);
            }
        }
    }
}

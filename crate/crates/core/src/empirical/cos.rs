//! The copula statistic (CoS): a `[0, 1]` dependence index that is 0 under
//! independence and 1 under functional dependence.
//!
//! The empirical copula is walked along the `u`-ordered sample points and
//! split into maximal monotone runs (domains). Each domain contributes the
//! mean Fréchet-relative distance of its extreme points, or 1 when one of its
//! extremes is a local optimum of a functional relationship.

use super::EmpiricalCopulaGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest sample accepted by [`cos_index`].
pub const MIN_COS_SAMPLES: usize = 10;

/// Relative position of `c` between the independence copula `uv` and the
/// Fréchet bound on the same side.
///
/// Returns 0 when the relevant bound coincides with `uv` (on the edges of the
/// unit square).
pub fn frechet_lambda<F: Real>(c: F, u: F, v: F) -> F {
    lambda(c, u, v).unwrap_or_else(F::zero)
}

fn lambda<F: Real>(c: F, u: F, v: F) -> Option<F> {
    let uv = u * v;
    let bound = if c >= uv {
        u.min(v)
    } else {
        (u + v - F::one()).max(F::zero())
    };
    let denom = bound - uv;
    if denom == F::zero() {
        None
    } else {
        Some((c - uv) / denom)
    }
}

/// A maximal monotone run of the `u`-ordered empirical copula sequence.
/// Consecutive domains share their boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<F> {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub min_index: Option<usize>,
    pub max_index: Option<usize>,
    pub lambda_min: Option<F>,
    pub lambda_max: Option<F>,
    pub local_optimum: bool,
    pub gamma: F,
}

impl<F> Domain<F> {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainPartition<F> {
    pub domains: Vec<Domain<F>>,
    pub n: usize,
}

/// CoS value together with the partition it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CosEstimate<F> {
    pub value: F,
    pub partition: DomainPartition<F>,
    pub grid: EmpiricalCopulaGrid<F>,
}

/// CoS of two equally long samples (`n >= 10`).
pub fn cos_index<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    cos_partition(x, y).map(|e| e.value)
}

/// [`cos_index`] with the intermediate domain partition exposed.
pub fn cos_partition<F: Real>(x: &[F], y: &[F]) -> Result<CosEstimate<F>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_COS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_COS_SAMPLES,
            got: x.len(),
        });
    }
    let grid = EmpiricalCopulaGrid::from_samples(x, y)?;
    let n = grid.len();
    let runs = monotone_runs(&grid.counts);
    let m = runs.len();
    let full = 2 * n;
    let ru: Vec<usize> = grid.u.iter().map(|&u| to_doubled(u, n)).collect();
    let rv: Vec<usize> = grid.v.iter().map(|&v| to_doubled(v, n)).collect();

    let one_tol = F::of(1e-9).max(F::epsilon() * F::of(8.0));
    let mut domains = Vec::with_capacity(m);
    let mut weighted = F::zero();
    for (i, &(start, end)) in runs.iter().enumerate() {
        // Points on the u = 1 or v = 1 edges carry no Fréchet information.
        let interior = (start..=end).filter(|&j| ru[j] < full && rv[j] < full);
        let mut min_index: Option<usize> = None;
        let mut max_index: Option<usize> = None;
        for j in interior {
            if min_index.is_none_or(|k| grid.counts[j] < grid.counts[k]) {
                min_index = Some(j);
            }
            if max_index.is_none_or(|k| grid.counts[j] > grid.counts[k]) {
                max_index = Some(j);
            }
        }
        let lam = |j: usize| lambda(grid.value(j), grid.u[j], grid.v[j]).map(|l| l.max(F::zero()).min(F::one()));
        let lambda_min = min_index.and_then(lam);
        let lambda_max = max_index.and_then(lam);

        let is_one = |l: Option<F>| l.is_some_and(|l| F::one() - l <= one_tol);
        let both_one = is_one(lambda_min) && is_one(lambda_max);
        let neighbourhood = if i + 1 < m {
            runs[i + 1].1 - start + 1
        } else if i > 0 {
            end - runs[i - 1].0 + 1
        } else {
            end - start + 1
        };
        let local_optimum = !both_one
            && neighbourhood > 4
            && [min_index, max_index]
                .into_iter()
                .flatten()
                .any(|j| is_flat_triple(&grid.counts, j));

        let gamma = if both_one || local_optimum {
            F::one()
        } else {
            match (lambda_min, lambda_max) {
                (Some(a), Some(b)) => (a + b) * F::of(0.5),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => F::zero(),
            }
        };
        weighted = weighted + F::of_usize(end - start + 1) * gamma;
        domains.push(Domain {
            start,
            end,
            min_index,
            max_index,
            lambda_min,
            lambda_max,
            local_optimum,
            gamma,
        });
    }
    let value = weighted / F::of_usize(n + m - 1);
    Ok(CosEstimate {
        value,
        partition: DomainPartition { domains, n },
        grid,
    })
}

fn to_doubled<F: Real>(x: F, n: usize) -> usize {
    (x * F::of_usize(2 * n)).round().to_usize().unwrap_or(0)
}

/// Both steps around `j` change `C_n` by at most `1/n`.
fn is_flat_triple(counts: &[usize], j: usize) -> bool {
    j > 0 && j + 1 < counts.len() && counts[j].abs_diff(counts[j - 1]) <= 1 && counts[j + 1].abs_diff(counts[j]) <= 1
}

/// Splits the sequence into maximal non-decreasing / non-increasing runs
/// that share their turning points.
fn monotone_runs(c: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    let mut direction = std::cmp::Ordering::Equal;
    for j in 1..c.len() {
        let step = c[j].cmp(&c[j - 1]);
        if step == std::cmp::Ordering::Equal {
            continue;
        }
        if direction == std::cmp::Ordering::Equal {
            direction = step;
        } else if step != direction {
            runs.push((start, j - 1));
            start = j - 1;
            direction = step;
        }
    }
    runs.push((start, c.len() - 1));
    runs
}

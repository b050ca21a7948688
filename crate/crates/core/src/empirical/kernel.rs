//! Gaussian-kernel estimates of marginal CDFs and of the copula density,
//! with rule-of-thumb bandwidths.

use crate::error::{Error, Result};
use crate::scalar::{std_dev, Real};
use crate::signal::SignalMatrix;
use crate::special::normal_cdf;

const FRAC_1_2PI: f64 = 0.159_154_943_091_895_35;

/// Per-channel smoothing windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandwidths<F> {
    /// Marginal-CDF windows `h_i = (4/3)^{1/5} T^{-1/5} σ_i`.
    pub marginal: Vec<F>,
    /// Copula-density windows `H_i = (4/(p+2))^{1/(p+4)} T^{-1/(p+4)} Σ_i`.
    pub copula: Vec<F>,
}

/// Marginal CDF window for a channel with standard deviation `sigma`.
pub fn marginal_bandwidth<F: Real>(t: usize, sigma: F) -> F {
    F::of((4.0f64 / 3.0).powf(0.2)) * F::of_usize(t).powf(F::of(-0.2)) * sigma
}

/// Copula density window in `p` dimensions for pseudo-observations with
/// standard deviation `sigma`.
pub fn copula_bandwidth<F: Real>(p: usize, t: usize, sigma: F) -> F {
    let e = 1.0 / (p as f64 + 4.0);
    F::of((4.0 / (p as f64 + 2.0)).powf(e)) * F::of_usize(t).powf(F::of(-e)) * sigma
}

/// Kernel-smoothed marginal CDF `(1/T) Σ Φ((z - Y(n)) / h)`.
pub fn kernel_marginal_cdf<F: Real>(sample: &[F], z: F, h: F) -> F {
    let total: F = sample.iter().map(|&y| normal_cdf((z - y) / h)).sum();
    total / F::of_usize(sample.len())
}

/// Product-Gaussian-kernel copula density at `point` from the
/// pseudo-observation rows `pobs` (one row per coordinate).
pub fn kernel_copula_density<F: Real>(pobs: &[Vec<F>], point: &[F], h: &[F]) -> F {
    let t = pobs[0].len();
    let p = pobs.len();
    let norm: F = h.iter().copied().fold(F::one(), |a, b| a * b);
    let c = F::of((2.0 * std::f64::consts::PI).powf(-(p as f64) / 2.0));
    let mut acc = F::zero();
    for n in 0..t {
        let q = pobs.iter().zip(point).zip(h).fold(F::zero(), |q, ((row, &x), &hi)| {
            let d = (row[n] - x) / hi;
            q + d * d
        });
        acc = acc + (-F::of(0.5) * q).exp();
    }
    acc * c / (F::of_usize(t) * norm)
}

/// Kernel marginal CDFs evaluated at the samples, with both bandwidth sets.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMarginals<F> {
    pub bandwidths: Bandwidths<F>,
    /// `F̂_i(Y_i(n))`, one row per channel.
    pub pobs: Vec<Vec<F>>,
}

impl<F: Real> KernelMarginals<F> {
    pub fn fit(rows: &[Vec<F>]) -> Result<Self> {
        let p = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if t < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: t });
        }
        let mut marginal = Vec::with_capacity(p);
        let mut copula = Vec::with_capacity(p);
        let mut pobs = Vec::with_capacity(p);
        for (channel, row) in rows.iter().enumerate() {
            let sigma = std_dev(row);
            if !(sigma > F::zero()) {
                return Err(Error::DegenerateSignal { channel });
            }
            let h = marginal_bandwidth(t, sigma);
            let f = smoothed_ranks(row, h);
            let s = std_dev(&f);
            if !(s > F::zero()) {
                return Err(Error::DegenerateSignal { channel });
            }
            marginal.push(h);
            copula.push(copula_bandwidth(p, t, s));
            pobs.push(f);
        }
        Ok(Self {
            bandwidths: Bandwidths { marginal, copula },
            pobs,
        })
    }

    /// Rank pseudo-observations `rank / T` in place of the kernel CDF; the
    /// copula windows are derived from them the same way.
    pub fn fit_ranks(rows: &[Vec<F>]) -> Result<Self> {
        let p = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if t < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: t });
        }
        let mut marginal = Vec::with_capacity(p);
        let mut copula = Vec::with_capacity(p);
        let mut pobs = Vec::with_capacity(p);
        let tf = F::of_usize(t);
        for (channel, row) in rows.iter().enumerate() {
            let sigma = std_dev(row);
            if !(sigma > F::zero()) {
                return Err(Error::DegenerateSignal { channel });
            }
            let f: Vec<F> = super::ranks(row).into_iter().map(|r| r / tf).collect();
            marginal.push(marginal_bandwidth(t, sigma));
            copula.push(copula_bandwidth(p, t, std_dev(&f)));
            pobs.push(f);
        }
        Ok(Self {
            bandwidths: Bandwidths { marginal, copula },
            pobs,
        })
    }

    /// Bivariate kernel copula density at each sample's own pseudo-observation.
    pub fn density_at_samples(&self) -> Vec<F> {
        let (a, b) = (&self.pobs[0], &self.pobs[1]);
        let (ha, hb) = (self.bandwidths.copula[0], self.bandwidths.copula[1]);
        let t = a.len();
        let (ia, ib) = (ha.recip(), hb.recip());
        let half = F::of(0.5);
        let mut acc = vec![F::one(); t];
        for n in 0..t {
            for m in (n + 1)..t {
                let da = (a[n] - a[m]) * ia;
                let db = (b[n] - b[m]) * ib;
                let k = (-half * (da * da + db * db)).exp();
                acc[n] = acc[n] + k;
                acc[m] = acc[m] + k;
            }
        }
        let scale = F::of(FRAC_1_2PI) / (F::of_usize(t) * ha * hb);
        acc.into_iter().map(|s| s * scale).collect()
    }
}

/// `F̂(Y(n))` for every sample of one channel.
fn smoothed_ranks<F: Real>(row: &[F], h: F) -> Vec<F> {
    let t = row.len();
    let inv = h.recip();
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    // Φ saturates to 0/1 in f64 beyond ±9 windows.
    let reach = h * F::of(9.0);
    row.iter()
        .map(|&z| {
            let lo = sorted.partition_point(|&y| y < z - reach);
            let hi = sorted.partition_point(|&y| y <= z + reach);
            let mut s = F::of_usize(lo);
            for &y in &sorted[lo..hi] {
                s = s + normal_cdf((z - y) * inv);
            }
            s / F::of_usize(t)
        })
        .collect()
}

/// Bandwidths of a signal matrix.
pub fn bandwidths<F: Real>(y: &SignalMatrix<F>) -> Result<Bandwidths<F>> {
    KernelMarginals::fit(y.rows()).map(|k| k.bandwidths)
}

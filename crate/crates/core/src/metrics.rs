//! Separation quality: channel matching, SNR and interference-to-signal ratio.

use crate::error::{Error, Result};
use crate::scalar::{mean, Real};
use crate::signal::{Matrix, SignalMatrix};

/// Reported in place of `+inf` for exact recovery.
pub const SNR_CAP_DB: f64 = 300.0;

/// Pairing of estimated channels with true sources.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAssignment<F> {
    /// `permutation[i]` is the estimate matched to source `i`.
    pub permutation: Vec<usize>,
    /// Least-squares gain mapping the matched estimate onto source `i`.
    pub gains: Vec<F>,
}

/// All permutations of `0..p` in lexicographic order.
fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..p.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..p).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

fn correlation<F: Real>(a: &[F], b: &[F]) -> F {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = F::zero();
    let mut saa = F::zero();
    let mut sbb = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn check_shapes<F: Real>(y: &SignalMatrix<F>, s: &SignalMatrix<F>) -> Result<()> {
    if y.channels() != s.channels() {
        return Err(Error::LengthMismatch {
            left: y.channels(),
            right: s.channels(),
        });
    }
    if y.samples() != s.samples() {
        return Err(Error::LengthMismatch {
            left: y.samples(),
            right: s.samples(),
        });
    }
    Ok(())
}

/// Finds the permutation maximising `Σ |corr(y_π(i), s_i)|`; the first
/// permutation in lexicographic order wins ties.
pub fn match_sources<F: Real>(y: &SignalMatrix<F>, s: &SignalMatrix<F>) -> Result<ChannelAssignment<F>> {
    check_shapes(y, s)?;
    let p = y.channels();
    for (channel, r) in y.rows().iter().enumerate() {
        if crate::scalar::std_dev(r) == F::zero() {
            return Err(Error::DegenerateSignal { channel });
        }
    }
    for (channel, r) in s.rows().iter().enumerate() {
        if crate::scalar::std_dev(r) == F::zero() {
            return Err(Error::DegenerateSignal { channel });
        }
    }
    let corr: Vec<Vec<F>> = (0..p)
        .map(|i| (0..p).map(|k| correlation(y.row(k), s.row(i)).abs()).collect())
        .collect();
    let mut best: Option<(F, Vec<usize>)> = None;
    for perm in permutations(p) {
        let score: F = (0..p).map(|i| corr[i][perm[i]]).sum();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, perm));
        }
    }
    let permutation = best.map(|b| b.1).unwrap_or_default();
    let gains = permutation
        .iter()
        .enumerate()
        .map(|(i, &k)| dot(s.row(i), y.row(k)) / dot(y.row(k), y.row(k)))
        .collect();
    Ok(ChannelAssignment { permutation, gains })
}

/// `10 log10(‖s_i‖² / ‖s_i − g_i y_π(i)‖²)` per source, capped at
/// [`SNR_CAP_DB`].
pub fn snr_db<F: Real>(y: &SignalMatrix<F>, s: &SignalMatrix<F>, assignment: &ChannelAssignment<F>) -> Vec<F> {
    assignment
        .permutation
        .iter()
        .zip(&assignment.gains)
        .enumerate()
        .map(|(i, (&k, &g))| {
            let si = s.row(i);
            let signal = dot(si, si);
            let noise: F = si
                .iter()
                .zip(y.row(k))
                .map(|(&a, &b)| {
                    let e = a - g * b;
                    e * e
                })
                .sum();
            let db = F::of(10.0) * (signal / noise).log10();
            if db.is_nan() || db > F::of(SNR_CAP_DB) {
                F::of(SNR_CAP_DB)
            } else {
                db
            }
        })
        .collect()
}

/// Matches and scores in one call.
pub fn matched_snr_db<F: Real>(y: &SignalMatrix<F>, s: &SignalMatrix<F>) -> Result<(ChannelAssignment<F>, Vec<F>)> {
    let a = match_sources(y, s)?;
    let snr = snr_db(y, s, &a);
    Ok((a, snr))
}

/// Interference-to-signal ratio of a gain matrix `G = W A`.
///
/// Rows are permuted so that the diagonal dominates and each row is divided
/// by its diagonal entry; the result is the mean squared off-diagonal gain.
/// Returns `+inf` when no row ordering gives a nonzero diagonal.
pub fn isr<F: Real>(g: &Matrix<F>) -> F {
    let p = g.dim();
    let mut best = F::infinity();
    for perm in permutations(p) {
        let mut off = F::zero();
        let mut valid = true;
        for (i, &r) in perm.iter().enumerate() {
            let d = g.get(r, i);
            if d == F::zero() {
                valid = false;
                break;
            }
            for j in (0..p).filter(|&j| j != i) {
                let x = g.get(r, j) / d;
                off = off + x * x;
            }
        }
        if valid {
            let v = off / F::of_usize(p);
            if v < best {
                best = v;
            }
        }
    }
    best
}

//! Blind separation of two dependent sources by descent on a kernel estimate
//! of the Kullback-Leibler divergence between the copula of `Y = W X` and a
//! parametric source copula.
//!
//! [`ccca_separate`] re-estimates the copula parameter from CoS through the
//! trained regression; [`cca_separate`] uses a pseudo-likelihood fit instead.

use crate::copula::{CopulaFamily, CopulaModel};
use crate::empirical::{cos_index, ranks, KernelMarginals, PseudoObservations};
use crate::error::{Error, Result};
use crate::metrics::matched_snr_db;
use crate::regression::{estimate_alpha, RegressionCoefficients};
use crate::scalar::Real;
use crate::signal::{Matrix, SignalMatrix, SignalRole};
use crate::special::normal_pdf;

/// How the source copula density enters the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contrast {
    /// Model density passed through the same Gaussian kernel as the data
    /// (cell probabilities on a `grid × grid` partition of the unit square),
    /// so that smoothing bias cancels in the log ratio.
    Smoothed { grid: usize },
    /// Raw model log-density at the clamped pseudo-observations.
    Plugin,
    /// Divergence between the kernel-smoothed data density and the equally
    /// smoothed model density, integrated on a `grid × grid` lattice.
    Integrated { grid: usize },
}

impl Default for Contrast {
    fn default() -> Self {
        Contrast::Smoothed { grid: 100 }
    }
}

/// Pseudo-observations fed to the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Margins {
    /// Gaussian-kernel marginal CDFs (smooth in `W`).
    #[default]
    Kernel,
    /// Normalised ranks (invariant under any increasing channel transform,
    /// piecewise constant in `W`).
    Rank,
}

/// Source copula density prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PreparedContrast<F> {
    model: CopulaModel<F>,
    cells: Option<CellGrid<F>>,
    integrated: bool,
}

#[derive(Debug, Clone)]
struct CellGrid<F> {
    g: usize,
    /// Row-major `P(cell_ij)`.
    prob: Vec<F>,
}

impl<F: Real> PreparedContrast<F> {
    pub fn new(model: CopulaModel<F>, contrast: Contrast) -> Result<Self> {
        let cells = match contrast {
            Contrast::Plugin => None,
            Contrast::Smoothed { grid } | Contrast::Integrated { grid } => {
                if grid < 2 {
                    return Err(Error::InvalidConfig(format!("contrast grid must be >= 2, got {grid}")));
                }
                Some(CellGrid::new(&model, grid))
            }
        };
        Ok(Self {
            model,
            cells,
            integrated: matches!(contrast, Contrast::Integrated { .. }),
        })
    }

    pub fn model(&self) -> &CopulaModel<F> {
        &self.model
    }
}

impl<F: Real> CellGrid<F> {
    fn new(model: &CopulaModel<F>, g: usize) -> Self {
        let gf = F::of_usize(g);
        let edge: Vec<F> = (0..=g).map(|i| F::of_usize(i) / gf).collect();
        let c: Vec<F> = edge
            .iter()
            .flat_map(|&a| edge.iter().map(move |&b| (a, b)))
            .map(|(a, b)| model.cdf(a, b))
            .collect();
        let at = |i: usize, j: usize| c[i * (g + 1) + j];
        let mut prob = Vec::with_capacity(g * g);
        for i in 0..g {
            for j in 0..g {
                let p = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
                prob.push(p.max(F::zero()));
            }
        }
        Self { g, prob }
    }

    /// Kernel-smoothed model density at `(a, b)` with windows `(ha, hb)`.
    fn density(&self, a: F, b: F, ha: F, hb: F, ka: &mut Vec<F>, kb: &mut Vec<F>) -> F {
        let g = self.g;
        let gf = F::of_usize(g);
        let half = F::of(0.5);
        let span = |x: F, h: F| {
            let reach = h * F::of(8.0);
            let lo = ((x - reach) * gf - half).floor().max(F::zero()).to_usize().unwrap_or(0);
            let hi = ((x + reach) * gf + half)
                .ceil()
                .max(F::zero())
                .to_usize()
                .unwrap_or(0)
                .min(g);
            (lo.min(g), hi)
        };
        let (ia, ja) = span(a, ha);
        let (ib, jb) = span(b, hb);
        let kernel = |x: F, h: F, lo: usize, hi: usize, out: &mut Vec<F>| {
            out.clear();
            out.extend((lo..hi).map(|i| normal_pdf((x - (F::of_usize(i) + half) / gf) / h) / h));
        };
        kernel(a, ha, ia, ja, ka);
        kernel(b, hb, ib, jb, kb);
        let mut acc = F::zero();
        for (r, &wa) in (ia..ja).zip(ka.iter()) {
            let row = &self.prob[r * g + ib..r * g + jb];
            let inner: F = row.iter().zip(kb.iter()).map(|(&p, &w)| p * w).sum();
            acc = acc + wa * inner;
        }
        acc
    }
}

fn require_bivariate(p: usize) -> Result<()> {
    if p == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { p })
    }
}

/// `(1/T) Σ log(ĉ_Y(F̂(y_t)) / c_S(F̂(y_t); α))`.
pub fn kl_divergence_estimate<F: Real>(
    y: &SignalMatrix<F>,
    model: &CopulaModel<F>,
    contrast: Contrast,
    margins: Margins,
) -> Result<F> {
    let prepared = PreparedContrast::new(*model, contrast)?;
    kl_with(y.rows(), &prepared, margins)
}

/// [`kl_divergence_estimate`] against an already prepared contrast.
pub fn kl_with<F: Real>(rows: &[Vec<F>], contrast: &PreparedContrast<F>, margins: Margins) -> Result<F> {
    require_bivariate(rows.len())?;
    let km = match margins {
        Margins::Kernel => KernelMarginals::fit(rows)?,
        Margins::Rank => KernelMarginals::fit_ranks(rows)?,
    };
    let (a, b) = (&km.pobs[0], &km.pobs[1]);
    if let (true, Some(cells)) = (contrast.integrated, &contrast.cells) {
        return Ok(integrated_kl(a, b, &km.bandwidths.copula, cells));
    }
    let data = km.density_at_samples();
    let t = a.len();
    let tiny = F::min_positive_value();
    let total: F = match &contrast.cells {
        Some(cells) => {
            let (ha, hb) = (km.bandwidths.copula[0], km.bandwidths.copula[1]);
            let (mut ka, mut kb) = (Vec::new(), Vec::new());
            (0..t)
                .map(|n| {
                    let m = cells.density(a[n], b[n], ha, hb, &mut ka, &mut kb);
                    data[n].max(tiny).ln() - m.max(tiny).ln()
                })
                .sum()
        }
        None => (0..t)
            .map(|n| data[n].max(tiny).ln() - contrast.model.log_density(a[n], b[n]))
            .sum(),
    };
    Ok(total / F::of_usize(t))
}

/// Gaussian kernel weights `φ((z_i − x_n)/h)/h` for every node and point.
fn kernel_matrix<F: Real>(nodes: &[F], points: &[F], h: F) -> Vec<F> {
    let mut out = Vec::with_capacity(nodes.len() * points.len());
    for &z in nodes {
        out.extend(points.iter().map(|&x| normal_pdf((z - x) / h) / h));
    }
    out
}

/// Discrete KL between the smoothed data and smoothed model densities on a
/// lattice covering the unit square plus three windows on each side.
fn integrated_kl<F: Real>(a: &[F], b: &[F], h: &[F], cells: &CellGrid<F>) -> F {
    let g = cells.g;
    let gf = F::of_usize(g);
    let half = F::of(0.5);
    let reach = F::of(3.0);
    let lattice = |h: F| -> Vec<F> {
        let lo = -reach * h;
        let step = (F::one() + reach * h * F::of(2.0)) / gf;
        (0..g).map(|i| lo + (F::of_usize(i) + half) * step).collect()
    };
    let (za, zb) = (lattice(h[0]), lattice(h[1]));
    let mids: Vec<F> = (0..g).map(|i| (F::of_usize(i) + half) / gf).collect();
    let t = a.len();
    let (ka, kb) = (kernel_matrix(&za, a, h[0]), kernel_matrix(&zb, b, h[1]));
    let (qa, qb) = (kernel_matrix(&za, &mids, h[0]), kernel_matrix(&zb, &mids, h[1]));
    // model: Qa P Qbᵀ
    let mut tmp = vec![F::zero(); g * g];
    for i in 0..g {
        for c in 0..g {
            let w = qa[i * g + c];
            if w == F::zero() {
                continue;
            }
            let prow = &cells.prob[c * g..(c + 1) * g];
            let trow = &mut tmp[i * g..(i + 1) * g];
            trow.iter_mut().zip(prow).for_each(|(o, &p)| *o = *o + w * p);
        }
    }
    let mut model = vec![F::zero(); g * g];
    let mut data = vec![F::zero(); g * g];
    for i in 0..g {
        for j in 0..g {
            let qrow = &qb[j * g..(j + 1) * g];
            model[i * g + j] = tmp[i * g..(i + 1) * g].iter().zip(qrow).map(|(&x, &y)| x * y).sum();
            let (ra, rb) = (&ka[i * t..(i + 1) * t], &kb[j * t..(j + 1) * t]);
            data[i * g + j] = ra.iter().zip(rb).map(|(&x, &y)| x * y).sum();
        }
    }
    let (sd, sm): (F, F) = (data.iter().copied().sum(), model.iter().copied().sum());
    let tiny = F::min_positive_value();
    data.iter()
        .zip(&model)
        .filter(|(&d, _)| d > F::zero())
        .map(|(&d, &m)| {
            let (p, q) = (d / sd, m / sm);
            p * (p.ln() - q.max(tiny).ln())
        })
        .sum()
}

/// Divergence of `W X`.
fn kl_of_w<F: Real>(w: &Matrix<F>, x: &SignalMatrix<F>, contrast: &PreparedContrast<F>) -> Result<F> {
    let y = w.apply(x, SignalRole::Estimates);
    kl_with(y.rows(), contrast, Margins::Kernel)
}

fn nonsingular<F: Real>(w: &Matrix<F>) -> bool {
    w.is_finite() && w.det().abs().f64() > 1e-12
}

/// Central finite-difference gradient of the divergence in `W`.
///
/// `fd_step` is scaled by `max(1, ‖W‖_∞)`. A perturbation that makes `W`
/// singular is retried once with a step ten times smaller.
pub fn kl_gradient<F: Real>(
    w: &Matrix<F>,
    x: &SignalMatrix<F>,
    contrast: &PreparedContrast<F>,
    fd_step: F,
) -> Result<Matrix<F>> {
    require_bivariate(x.channels())?;
    if !nonsingular(w) {
        return Err(Error::SingularMatrix { det: w.det().f64() });
    }
    let p = w.dim();
    let inf_norm = (0..p)
        .map(|i| w.row(i).iter().fold(F::zero(), |s, x| s + x.abs()))
        .fold(F::zero(), F::max);
    let base = fd_step * inf_norm.max(F::one());
    let mut grad = Matrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            let mut delta = base;
            let mut value = None;
            for _ in 0..2 {
                let mut plus = w.clone();
                let mut minus = w.clone();
                plus.set(i, j, w.get(i, j) + delta);
                minus.set(i, j, w.get(i, j) - delta);
                if nonsingular(&plus) && nonsingular(&minus) {
                    let d = kl_of_w(&plus, x, contrast)? - kl_of_w(&minus, x, contrast)?;
                    value = Some(d / (delta + delta));
                    break;
                }
                delta = delta / F::of(10.0);
            }
            match value {
                Some(v) => grad.set(i, j, v),
                None => return Err(Error::SingularMatrix { det: w.det().f64() }),
            }
        }
    }
    Ok(grad)
}

/// When the copula parameter is re-estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaUpdate {
    /// From the current estimates `Y^(k)` at every iteration.
    #[default]
    PerIteration,
    /// Once, from the observations `X`.
    OnceFromObservations,
}

/// Gradient step policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `W ← W − μ ∇KL`, always accepted.
    Fixed,
    /// Step of Frobenius length `μ` along `−∇KL`; accepted only if the
    /// divergence decreases, after which `μ` grows by 20% (up to its initial
    /// value times 10); a rejected step halves `μ`.
    #[default]
    Adaptive,
}

/// Where `α̂` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSource<F> {
    /// CoS through a trained quadratic regression.
    Regression(RegressionCoefficients<F>),
    /// Golden-section maximisation of the pseudo-log-likelihood.
    PseudoLikelihood,
    /// Held fixed.
    Fixed(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationConfig<F> {
    pub mu: F,
    pub epsilon: F,
    pub max_iter: usize,
    pub fd_step: F,
    pub family: CopulaFamily,
    pub alpha_update: AlphaUpdate,
    pub step_rule: StepRule,
    pub contrast: Contrast,
}

impl<F: Real> SeparationConfig<F> {
    pub fn new(family: CopulaFamily) -> Self {
        Self {
            mu: F::of(0.1),
            epsilon: F::of(1e-3),
            max_iter: 200,
            fd_step: F::of(1e-4),
            family,
            alpha_update: AlphaUpdate::default(),
            step_rule: StepRule::default(),
            contrast: Contrast::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: F| {
            if v > F::zero() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("mu", self.mu)?;
        positive("epsilon", self.epsilon)?;
        positive("fd_step", self.fd_step)?;
        if !self.mu.is_finite() || !self.fd_step.is_finite() {
            return Err(Error::InvalidConfig("mu and fd_step must be finite".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.family == CopulaFamily::Independence {
            return Err(Error::InvalidConfig(
                "separation needs a parametric source copula".into(),
            ));
        }
        Ok(())
    }
}

/// One iteration of the descent.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<F> {
    pub iteration: usize,
    /// Divergence at the iterate kept after this iteration.
    pub kl: F,
    /// CoS of the estimates at the start of the iteration.
    pub cos: F,
    pub alpha: F,
    /// `‖W^(k+1) − W^(k)‖_F` of the proposed step.
    pub step_norm: F,
    pub mu: F,
    pub accepted: bool,
    /// Matched-channel SNR in dB of the kept iterate, when the truth is known.
    pub snr_db: Option<Vec<F>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparationTrace<F> {
    pub records: Vec<IterationRecord<F>>,
}

impl<F> SeparationTrace<F> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceStatus {
    Converged,
    /// `max_iter` reached; the lowest-divergence iterate is returned.
    Unconverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult<F> {
    pub w: Matrix<F>,
    pub y: SignalMatrix<F>,
    pub trace: SeparationTrace<F>,
    pub status: ConvergenceStatus,
    pub alpha: F,
    pub kl: F,
}

impl<F> SeparationResult<F> {
    pub fn iterations(&self) -> usize {
        self.trace.records.len()
    }

    pub fn converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }
}

/// CoS-regression copula component analysis.
pub fn ccca_separate<F: Real>(
    x: &SignalMatrix<F>,
    config: &SeparationConfig<F>,
    coeffs: &RegressionCoefficients<F>,
    truth: Option<&SignalMatrix<F>>,
) -> Result<SeparationResult<F>> {
    if coeffs.family != config.family {
        return Err(Error::InvalidConfig(format!(
            "coefficients are for {} but the config asks for {}",
            coeffs.family, config.family
        )));
    }
    separate(x, config, &AlphaSource::Regression(coeffs.clone()), truth)
}

/// Baseline with a pseudo-likelihood fit of `α`.
pub fn cca_separate<F: Real>(
    x: &SignalMatrix<F>,
    config: &SeparationConfig<F>,
    truth: Option<&SignalMatrix<F>>,
) -> Result<SeparationResult<F>> {
    separate(x, config, &AlphaSource::PseudoLikelihood, truth)
}

/// Descent from `W = I` with the given source of `α̂`.
pub fn separate<F: Real>(
    x: &SignalMatrix<F>,
    config: &SeparationConfig<F>,
    alpha_source: &AlphaSource<F>,
    truth: Option<&SignalMatrix<F>>,
) -> Result<SeparationResult<F>> {
    config.validate()?;
    require_bivariate(x.channels())?;
    if let Some(s) = truth {
        if s.channels() != x.channels() || s.samples() != x.samples() {
            return Err(Error::LengthMismatch {
                left: x.samples(),
                right: s.samples(),
            });
        }
    }
    let family = config.family;
    let estimate = |y: &SignalMatrix<F>| -> Result<(F, F)> {
        let cos = cos_index(y.row(0), y.row(1))?;
        let alpha = match alpha_source {
            AlphaSource::Regression(c) => estimate_alpha(c, y.row(0), y.row(1))?.1,
            AlphaSource::PseudoLikelihood => pseudo_likelihood_alpha(family, y.row(0), y.row(1))?,
            AlphaSource::Fixed(a) => *a,
        };
        Ok((cos, alpha))
    };
    let snr = |w: &Matrix<F>| -> Result<Option<Vec<F>>> {
        truth
            .map(|s| matched_snr_db(&w.apply(x, SignalRole::Estimates), s).map(|r| r.1))
            .transpose()
    };

    let p = x.channels();
    let mut w = Matrix::identity(p);
    let mut mu = config.mu;
    let mu_max = config.mu * F::of(10.0);
    let fixed_alpha = match config.alpha_update {
        AlphaUpdate::OnceFromObservations => Some(estimate(x)?),
        AlphaUpdate::PerIteration => None,
    };
    let mut trace = SeparationTrace::default();
    let mut best: Option<(F, Matrix<F>, F)> = None;
    let mut status = ConvergenceStatus::Unconverged;
    let mut last_alpha = F::zero();
    let mut last_kl = F::zero();

    for iteration in 0..config.max_iter {
        let y = w.apply(x, SignalRole::Estimates);
        let (cos, alpha) = match fixed_alpha {
            Some(v) => v,
            None => estimate(&y)?,
        };
        let model = CopulaModel::new(family, alpha)?;
        let contrast = PreparedContrast::new(model, config.contrast)?;
        let kl_here = kl_with(y.rows(), &contrast, Margins::Kernel)?;
        let grad = kl_gradient(&w, x, &contrast, config.fd_step)?;

        let (proposal, step) = match config.step_rule {
            StepRule::Fixed => (w.scaled_add(&grad, -mu).row_normalized(), grad.frobenius() * mu),
            StepRule::Adaptive => {
                let gn = grad.frobenius();
                if gn > F::zero() && gn.is_finite() {
                    (w.scaled_add(&grad, -mu / gn).row_normalized(), mu)
                } else {
                    (w.clone(), F::zero())
                }
            }
        };
        let usable = nonsingular(&proposal);
        let kl_new = if usable {
            kl_of_w(&proposal, x, &contrast)?
        } else {
            F::infinity()
        };
        let accepted = match config.step_rule {
            StepRule::Fixed => {
                if !usable {
                    return Err(Error::SingularMatrix {
                        det: proposal.det().f64(),
                    });
                }
                true
            }
            StepRule::Adaptive => kl_new < kl_here,
        };
        let step_norm = if accepted { proposal.sub(&w).frobenius() } else { step };
        let kept_kl = if accepted { kl_new } else { kl_here };
        if accepted {
            w = proposal;
            if config.step_rule == StepRule::Adaptive {
                mu = (mu * F::of(1.2)).min(mu_max);
            }
        } else {
            mu = mu * F::of(0.5);
        }
        last_alpha = alpha;
        last_kl = kept_kl;
        if best.as_ref().is_none_or(|b| kept_kl < b.0) {
            best = Some((kept_kl, w.clone(), alpha));
        }
        trace.records.push(IterationRecord {
            iteration,
            kl: kept_kl,
            cos,
            alpha,
            step_norm,
            mu,
            accepted,
            snr_db: snr(&w)?,
        });
        if step_norm < config.epsilon {
            status = ConvergenceStatus::Converged;
            break;
        }
    }

    let (w, alpha, kl) = match (status, best) {
        (ConvergenceStatus::Unconverged, Some((kl, bw, ba))) => (bw, ba, kl),
        _ => (w, last_alpha, last_kl),
    };
    let y = w.apply(x, SignalRole::Estimates);
    Ok(SeparationResult {
        w,
        y,
        trace,
        status,
        alpha,
        kl,
    })
}

/// Search interval for the pseudo-likelihood fit.
fn likelihood_bracket(family: CopulaFamily) -> (f64, f64) {
    match family {
        CopulaFamily::Gumbel => (1.0, 30.0),
        CopulaFamily::Clayton => (1e-4, 30.0),
        CopulaFamily::Frank => (-30.0, 30.0),
        CopulaFamily::Gaussian => (-0.999, 0.999),
        CopulaFamily::Independence => (0.0, 0.0),
    }
}

/// Maximum pseudo-likelihood `α` by golden-section search, on the
/// pseudo-observations `rank / (T + 1)`.
pub fn pseudo_likelihood_alpha<F: Real>(family: CopulaFamily, x: &[F], y: &[F]) -> Result<F> {
    if family == CopulaFamily::Independence {
        return Ok(F::zero());
    }
    let scale = F::of_usize(x.len() + 1);
    let u = ranks(x).into_iter().map(|r| r / scale).collect();
    let v = ranks(y).into_iter().map(|r| r / scale).collect();
    let pobs = PseudoObservations::from_unit_pairs(u, v)?;
    let (lo, hi) = likelihood_bracket(family);
    let nll = |a: f64| -> f64 {
        CopulaModel::<F>::new(family, F::of(a))
            .map(|m| -m.pseudo_log_likelihood(&pobs).f64())
            .unwrap_or(f64::INFINITY)
    };
    Ok(F::of(golden_section(nll, lo, hi, 1e-6)))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs() + d.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gumbel_sources(t: usize, seed: u64) -> SignalMatrix<f64> {
        let s = CopulaModel::<f64>::new(CopulaFamily::Gumbel, 5.0)
            .unwrap()
            .sample(t, seed);
        SignalMatrix::new(vec![s.u, s.v], SignalRole::Sources)
            .unwrap()
            .standardized()
            .unwrap()
    }

    #[test]
    fn golden_section_finds_a_parabola_minimum() {
        let m = golden_section(|x| (x - 1.3) * (x - 1.3), -5.0, 5.0, 1e-9);
        assert!((m - 1.3).abs() < 1e-6);
    }

    #[test]
    fn pseudo_likelihood_recovers_alpha() {
        let s = CopulaModel::<f64>::new(CopulaFamily::Clayton, 3.0)
            .unwrap()
            .sample(2000, 5);
        let a = pseudo_likelihood_alpha(CopulaFamily::Clayton, &s.u, &s.v).unwrap();
        assert!((a - 3.0).abs() < 0.3, "{a}");
    }

    #[test]
    fn cell_probabilities_sum_to_one() {
        for fam in CopulaFamily::PARAMETRIC {
            let alpha = if fam == CopulaFamily::Gaussian { 0.7 } else { 5.0 };
            let m = CopulaModel::<f64>::new(fam, alpha).unwrap();
            let cells = CellGrid::new(&m, 40);
            let total: f64 = cells.prob.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "{fam}: {total}");
        }
    }

    #[test]
    fn unsupported_dimension() {
        let rows = vec![(0..20).map(f64::from).collect::<Vec<_>>(); 3];
        let y = SignalMatrix::new(rows, SignalRole::Estimates).unwrap();
        let m = CopulaModel::independence();
        assert!(matches!(
            kl_divergence_estimate(&y, &m, Contrast::Plugin, Margins::Kernel),
            Err(Error::UnsupportedDimension { p: 3 })
        ));
    }

    #[test]
    fn epsilon_infinity_stops_after_one_iteration() {
        let x = gumbel_sources(200, 3);
        let mut cfg = SeparationConfig::new(CopulaFamily::Gumbel);
        cfg.epsilon = f64::INFINITY;
        let r = separate(&x, &cfg, &AlphaSource::Fixed(5.0), None).unwrap();
        assert_eq!(r.iterations(), 1);
        assert!(r.converged());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let x = gumbel_sources(50, 1);
        let mut cfg = SeparationConfig::new(CopulaFamily::Gumbel);
        cfg.mu = 0.0;
        assert!(separate(&x, &cfg, &AlphaSource::Fixed(5.0), None).is_err());
        let mut cfg = SeparationConfig::new(CopulaFamily::Gumbel);
        cfg.max_iter = 0;
        assert!(separate(&x, &cfg, &AlphaSource::Fixed(5.0), None).is_err());
    }
}

//! Quadratic map from CoS to a copula family's dependence parameter.
//!
//! `α = a1·CoS² + a2·CoS + a3`, fitted by least squares on CoS values of
//! simulated copula samples. CoS carries no sign, so for families that admit
//! negative dependence the fit is on `|α|` and the sign comes from the
//! sample's rank correlation (see [`estimate_alpha`]).

use std::fmt::Write as _;

use crate::copula::{CopulaFamily, CopulaModel};
use crate::empirical::{cos_index, ranks};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default number of α values per family.
pub const DEFAULT_GRID_POINTS: usize = 50;
/// Default sample size per grid point.
pub const DEFAULT_TRAINING_SAMPLES: usize = 5000;

/// Format tag written at the top of coefficient files.
pub const COEFFICIENTS_VERSION: u32 = 1;

/// Simulation plan for one family.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingGrid {
    pub family: CopulaFamily,
    pub alpha_values: Vec<f64>,
    pub samples_per_point: usize,
    pub seed: u64,
}

impl TrainingGrid {
    /// Evenly spaced α over the family's training range.
    pub fn standard(family: CopulaFamily, points: usize, samples_per_point: usize, seed: u64) -> Result<Self> {
        let (lo, hi) = training_range(family)?;
        if points < 3 {
            return Err(Error::InvalidConfig(format!(
                "training grid needs at least 3 points, got {points}"
            )));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let mut alpha_values: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
        alpha_values[points - 1] = hi;
        let grid = Self {
            family,
            alpha_values,
            samples_per_point,
            seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_point < 100 {
            return Err(Error::InvalidConfig(format!(
                "samples_per_point must be at least 100, got {}",
                self.samples_per_point
            )));
        }
        if let Some(&a) = self.alpha_values.iter().find(|&&a| !self.family.admits(a)) {
            return Err(Error::InvalidParameter {
                family: self.family,
                alpha: a,
            });
        }
        Ok(())
    }
}

/// α range used for training.
pub fn training_range(family: CopulaFamily) -> Result<(f64, f64)> {
    match family {
        CopulaFamily::Gaussian => Ok((-0.99, 0.99)),
        CopulaFamily::Frank | CopulaFamily::Clayton => Ok((0.001, 20.0)),
        CopulaFamily::Gumbel => Ok((1.0, 20.0)),
        CopulaFamily::Independence => Err(Error::InvalidConfig(
            "the independence copula has no parameter to regress".into(),
        )),
    }
}

/// Per-point seed: distinct streams for every family and grid index.
fn point_seed(family: CopulaFamily, seed: u64, index: usize) -> u64 {
    let tag = family as u64 + 1;
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tag << 40)
        .wrapping_add(index as u64)
}

/// `(CoS, α)` for every grid point.
pub fn generate_training_data<F: Real>(grid: &TrainingGrid) -> Result<Vec<(F, F)>> {
    grid.validate()?;
    grid.alpha_values
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let model = CopulaModel::<F>::new(grid.family, F::of(a))?;
            let s = model.sample(grid.samples_per_point, point_seed(grid.family, grid.seed, i));
            Ok((cos_index(&s.u, &s.v)?, F::of(a)))
        })
        .collect()
}

/// Fitted quadratic together with the range it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCoefficients<F> {
    pub family: CopulaFamily,
    pub a1: F,
    pub a2: F,
    pub a3: F,
    /// Smallest regressed α (or `|α|` for signed families).
    pub alpha_min: F,
    pub alpha_max: F,
    /// Euclidean norm of the fit residuals.
    pub residual_norm: F,
    pub provenance: Option<TrainingProvenance>,
}

/// How a coefficient record was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingProvenance {
    pub seed: u64,
    pub samples_per_point: usize,
    pub grid_points: usize,
}

impl<F: Real> RegressionCoefficients<F> {
    /// Unclamped polynomial value.
    pub fn polynomial(&self, cos: F) -> F {
        (self.a1 * cos + self.a2) * cos + self.a3
    }
}

/// Least-squares fit of `α` (or `|α|`) on `[CoS², CoS, 1]`.
pub fn fit_alpha_regression<F: Real>(family: CopulaFamily, data: &[(F, F)]) -> Result<RegressionCoefficients<F>> {
    if family == CopulaFamily::Independence {
        return Err(Error::InvalidConfig(
            "the independence copula has no parameter to regress".into(),
        ));
    }
    let mut cs: Vec<F> = data.iter().map(|d| d.0).collect();
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cs.dedup();
    if cs.len() < 3 {
        return Err(Error::RankDeficient { distinct: cs.len() });
    }
    let target = |a: F| if family.is_signed() { a.abs() } else { a };
    let y: Vec<F> = data.iter().map(|&(_, a)| target(a)).collect();
    let cols = [
        data.iter().map(|&(c, _)| c * c).collect::<Vec<F>>(),
        data.iter().map(|&(c, _)| c).collect(),
        vec![F::one(); data.len()],
    ];
    let (coef, residual_norm) = least_squares(&cols, &y).ok_or(Error::RankDeficient { distinct: cs.len() })?;
    let alpha_min = y.iter().copied().fold(F::infinity(), F::min);
    let alpha_max = y.iter().copied().fold(F::neg_infinity(), F::max);
    Ok(RegressionCoefficients {
        family,
        a1: coef[0],
        a2: coef[1],
        a3: coef[2],
        alpha_min,
        alpha_max,
        residual_norm,
        provenance: None,
    })
}

/// Trains one family end to end.
pub fn train<F: Real>(grid: &TrainingGrid) -> Result<RegressionCoefficients<F>> {
    let data = generate_training_data::<F>(grid)?;
    let mut c = fit_alpha_regression(grid.family, &data)?;
    c.provenance = Some(TrainingProvenance {
        seed: grid.seed,
        samples_per_point: grid.samples_per_point,
        grid_points: grid.alpha_values.len(),
    });
    Ok(c)
}

/// Modified Gram-Schmidt QR solve for three columns.
fn least_squares<F: Real>(cols: &[Vec<F>; 3], y: &[F]) -> Option<([F; 3], F)> {
    let dot = |a: &[F], b: &[F]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<F>();
    let mut q = cols.clone();
    let mut r = [[F::zero(); 3]; 3];
    for j in 0..3 {
        let scale = dot(&cols[j], &cols[j]).sqrt();
        for k in 0..j {
            let rkj = dot(&q[k], &q[j]);
            r[k][j] = rkj;
            let (head, tail) = q.split_at_mut(j);
            tail[0].iter_mut().zip(&head[k]).for_each(|(x, &qk)| *x = *x - rkj * qk);
        }
        let norm = dot(&q[j], &q[j]).sqrt();
        if !(norm > scale * F::epsilon().sqrt()) {
            return None;
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|x| *x = *x / norm);
    }
    let qty = [dot(&q[0], y), dot(&q[1], y), dot(&q[2], y)];
    let mut a = [F::zero(); 3];
    for i in (0..3).rev() {
        let s = (i + 1..3).fold(qty[i], |s, k| s - r[i][k] * a[k]);
        a[i] = s / r[i][i];
    }
    let res = y
        .iter()
        .enumerate()
        .map(|(n, &yn)| {
            let e = yn - (a[0] * cols[0][n] + a[1] * cols[1][n] + a[2]);
            e * e
        })
        .sum::<F>()
        .sqrt();
    Some((a, res))
}

/// Polynomial prediction clamped to the trained range and the family domain.
///
/// For signed families this is the magnitude `|α|`.
pub fn predict_alpha<F: Real>(coeffs: &RegressionCoefficients<F>, cos: F) -> F {
    let cos = cos.max(F::zero()).min(F::one());
    let raw = coeffs.polynomial(cos);
    let raw = if raw.is_nan() { coeffs.alpha_min } else { raw };
    clamp_to_domain(coeffs.family, raw.max(coeffs.alpha_min).min(coeffs.alpha_max))
}

fn clamp_to_domain<F: Real>(family: CopulaFamily, a: F) -> F {
    match family {
        CopulaFamily::Gumbel => a.max(F::one()),
        CopulaFamily::Clayton => a.max(F::of(1e-6)),
        CopulaFamily::Frank => {
            if a.abs() < F::of(1e-6) {
                F::of(1e-6).copysign(a)
            } else {
                a
            }
        }
        CopulaFamily::Gaussian => a.max(F::of(-0.999)).min(F::of(0.999)),
        CopulaFamily::Independence => F::zero(),
    }
}

/// Sign of the rank correlation of `x` and `y` (`+1` on ties).
pub fn concordance_sign<F: Real>(x: &[F], y: &[F]) -> F {
    let (rx, ry) = (ranks(x), ranks(y));
    let mid = F::of_usize(x.len() + 1) * F::of(0.5);
    let s: F = rx.iter().zip(&ry).map(|(&a, &b)| (a - mid) * (b - mid)).sum();
    if s < F::zero() {
        -F::one()
    } else {
        F::one()
    }
}

/// α̂ for a pair of signals: CoS, regression, and the concordance sign for
/// signed families. Returns the CoS value alongside.
pub fn estimate_alpha<F: Real>(coeffs: &RegressionCoefficients<F>, x: &[F], y: &[F]) -> Result<(F, F)> {
    let cos = cos_index(x, y)?;
    let mag = predict_alpha(coeffs, cos);
    let alpha = if coeffs.family.is_signed() {
        clamp_to_domain(coeffs.family, mag * concordance_sign(x, y))
    } else {
        mag
    };
    Ok((cos, alpha))
}

/// Serialises coefficient records to the line-oriented key-value format.
pub fn coefficients_to_text<F: Real>(records: &[RegressionCoefficients<F>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# ccca alpha regression: alpha = a1*cos^2 + a2*cos + a3");
    let _ = writeln!(out, "version = {COEFFICIENTS_VERSION}");
    for r in records {
        let _ = writeln!(out);
        let _ = writeln!(out, "[{}]", r.family.name());
        for (k, v) in [
            ("a1", r.a1),
            ("a2", r.a2),
            ("a3", r.a3),
            ("alpha_min", r.alpha_min),
            ("alpha_max", r.alpha_max),
            ("residual_norm", r.residual_norm),
        ] {
            let _ = writeln!(out, "{k} = {:?}", v.f64());
        }
        if let Some(p) = r.provenance {
            let _ = writeln!(out, "seed = {}", p.seed);
            let _ = writeln!(out, "samples_per_point = {}", p.samples_per_point);
            let _ = writeln!(out, "grid_points = {}", p.grid_points);
        }
    }
    out
}

/// Line number, family and raw `key = value` pairs of one section.
type RawSection = (usize, CopulaFamily, Vec<(String, String)>);

/// Parses the output of [`coefficients_to_text`].
pub fn coefficients_from_text<F: Real>(text: &str) -> Result<Vec<RegressionCoefficients<F>>> {
    let bad = |line: usize, msg: String| Error::InvalidConfig(format!("coefficients line {line}: {msg}"));
    let mut records: Vec<RawSection> = Vec::new();
    let mut version = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let fam: CopulaFamily = name.parse().map_err(|e| bad(line_no, e))?;
            records.push((line_no, fam, Vec::new()));
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(line_no, format!("expected `key = value`, got `{line}`")))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        match records.last_mut() {
            Some(rec) => rec.2.push((k, v)),
            None if k == "version" => version = Some(v.parse::<u32>().map_err(|e| bad(line_no, e.to_string()))?),
            None => return Err(bad(line_no, format!("key `{k}` outside a family section"))),
        }
    }
    match version {
        Some(COEFFICIENTS_VERSION) => {}
        Some(v) => return Err(Error::InvalidConfig(format!("unsupported coefficients version {v}"))),
        None => return Err(Error::InvalidConfig("coefficients file has no version".into())),
    }
    records
        .into_iter()
        .map(|(line_no, family, kv)| {
            let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
            let real = |key: &str| -> Result<F> {
                let v = get(key).ok_or_else(|| bad(line_no, format!("[{family}] missing `{key}`")))?;
                let x: f64 = v
                    .parse()
                    .map_err(|_| bad(line_no, format!("[{family}] `{key}` is not a number")))?;
                if x.is_finite() {
                    Ok(F::of(x))
                } else {
                    Err(bad(line_no, format!("[{family}] `{key}` is not finite")))
                }
            };
            let int = |key: &str| get(key).map(|v| v.parse::<u64>().ok());
            let provenance = match (int("seed"), int("samples_per_point"), int("grid_points")) {
                (Some(Some(seed)), Some(Some(s)), Some(Some(g))) => Some(TrainingProvenance {
                    seed,
                    samples_per_point: s as usize,
                    grid_points: g as usize,
                }),
                _ => None,
            };
            Ok(RegressionCoefficients {
                family,
                a1: real("a1")?,
                a2: real("a2")?,
                a3: real("a3")?,
                alpha_min: real("alpha_min")?,
                alpha_max: real("alpha_max")?,
                residual_norm: real("residual_norm").unwrap_or(F::zero()),
                provenance,
            })
        })
        .collect()
}

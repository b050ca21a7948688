//! Bivariate parametric copulas: Gumbel, Clayton, Frank, Gaussian and the
//! independence copula.
//!
//! Every family exposes its CDF, density (through the log-density), the
//! conditional distribution used for sampling, and the pseudo log-likelihood
//! used by the likelihood-driven baseline in [`crate::separation`].

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::empirical::PseudoObservations;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{bvn_cdf, normal_quantile, phi, phi_inv};

/// Density arguments are clamped to `[CORNER_GUARD, 1 - CORNER_GUARD]`.
pub const CORNER_GUARD: f64 = 1e-6;

/// Below this magnitude Frank and Gaussian parameters collapse to independence.
pub const INDEPENDENCE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopulaFamily {
    Gumbel,
    Clayton,
    Frank,
    Gaussian,
    Independence,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 5] = [
        CopulaFamily::Gumbel,
        CopulaFamily::Clayton,
        CopulaFamily::Frank,
        CopulaFamily::Gaussian,
        CopulaFamily::Independence,
    ];

    /// The parametric families a CoS regression can be trained for.
    pub const PARAMETRIC: [CopulaFamily; 4] = [
        CopulaFamily::Gumbel,
        CopulaFamily::Clayton,
        CopulaFamily::Frank,
        CopulaFamily::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Independence => "independence",
        }
    }

    /// Whether `alpha` is an admissible dependence parameter.
    pub fn admits(self, alpha: f64) -> bool {
        if !alpha.is_finite() {
            return matches!(self, CopulaFamily::Independence);
        }
        match self {
            CopulaFamily::Gumbel => alpha >= 1.0,
            CopulaFamily::Clayton => alpha > 0.0,
            CopulaFamily::Frank => alpha != 0.0,
            CopulaFamily::Gaussian => alpha > -1.0 && alpha < 1.0,
            CopulaFamily::Independence => true,
        }
    }

    /// Families whose parameter domain covers negative dependence.
    pub fn is_signed(self) -> bool {
        matches!(self, CopulaFamily::Frank | CopulaFamily::Gaussian)
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "clayton" => Ok(CopulaFamily::Clayton),
            "frank" => Ok(CopulaFamily::Frank),
            "gaussian" | "normal" => Ok(CopulaFamily::Gaussian),
            "independence" | "independent" | "product" => Ok(CopulaFamily::Independence),
            other => Err(format!("unknown copula family `{other}`")),
        }
    }
}

/// A copula family together with a validated dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaModel<F> {
    family: CopulaFamily,
    alpha: F,
}

/// Draws from a bivariate copula.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSample<F> {
    pub u: Vec<F>,
    pub v: Vec<F>,
}

impl<F> CopulaSample<F> {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Internal view with the near-independence collapse already applied.
#[derive(Clone, Copy)]
enum Kind<F> {
    Gumbel(F),
    Clayton(F),
    Frank(F),
    Gaussian(F),
    Independence,
}

impl<F: Real> CopulaModel<F> {
    pub fn new(family: CopulaFamily, alpha: F) -> Result<Self> {
        if !family.admits(alpha.f64()) {
            return Err(Error::InvalidParameter {
                family,
                alpha: alpha.f64(),
            });
        }
        Ok(Self { family, alpha })
    }

    pub fn independence() -> Self {
        Self {
            family: CopulaFamily::Independence,
            alpha: F::zero(),
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    fn kind(&self) -> Kind<F> {
        let a = self.alpha;
        let tiny = a.abs() < F::of(INDEPENDENCE_EPS);
        match self.family {
            CopulaFamily::Gumbel if a == F::one() => Kind::Independence,
            CopulaFamily::Gumbel => Kind::Gumbel(a),
            CopulaFamily::Clayton => Kind::Clayton(a),
            CopulaFamily::Frank if tiny => Kind::Independence,
            CopulaFamily::Frank => Kind::Frank(a),
            CopulaFamily::Gaussian if tiny => Kind::Independence,
            CopulaFamily::Gaussian => Kind::Gaussian(a),
            CopulaFamily::Independence => Kind::Independence,
        }
    }

    /// Joint CDF `C(u, v)`; arguments outside `[0, 1]` are clamped.
    pub fn cdf(&self, u: F, v: F) -> F {
        let (zero, one) = (F::zero(), F::one());
        let u = u.max(zero).min(one);
        let v = v.max(zero).min(one);
        if u == zero || v == zero {
            return zero;
        }
        if u == one {
            return v;
        }
        if v == one {
            return u;
        }
        match self.kind() {
            Kind::Independence => u * v,
            Kind::Gumbel(a) => {
                let s = (-u.ln()).powf(a) + (-v.ln()).powf(a);
                (-s.powf(a.recip())).exp()
            }
            Kind::Clayton(a) => (-clayton_log_sum(u, v, a) / a).exp(),
            Kind::Frank(a) => {
                let num = (-a * u).exp_m1() * (-a * v).exp_m1();
                -(num / (-a).exp_m1()).ln_1p() / a
            }
            Kind::Gaussian(r) => {
                let c = bvn_cdf(phi_inv(u.f64()), phi_inv(v.f64()), r.f64());
                F::of(c)
            }
        }
        .max(zero)
        .min(u.min(v))
    }

    /// Copula density `∂²C/∂u∂v` after the corner guard.
    pub fn density(&self, u: F, v: F) -> F {
        self.log_density(u, v).exp()
    }

    /// Natural log of the copula density after the corner guard.
    pub fn log_density(&self, u: F, v: F) -> F {
        let u = guard(u);
        let v = guard(v);
        match self.kind() {
            Kind::Independence => F::zero(),
            Kind::Gumbel(a) => {
                let (x, y) = (-u.ln(), -v.ln());
                let s = x.powf(a) + y.powf(a);
                let sa = s.powf(a.recip());
                -sa - (u * v).ln()
                    + (a - F::one()) * (x * y).ln()
                    + (a.recip() - F::of(2.0)) * s.ln()
                    + (sa + a - F::one()).ln()
            }
            Kind::Clayton(a) => {
                (F::one() + a).ln()
                    - (F::one() + a) * (u.ln() + v.ln())
                    - (F::of(2.0) + a.recip()) * clayton_log_sum(u, v, a)
            }
            Kind::Frank(a) => {
                // D = (1 - e^{-a}) - (1 - e^{-au})(1 - e^{-av})
                let d = -(-a).exp_m1() - (-a * u).exp_m1() * (-a * v).exp_m1();
                (a * -(-a).exp_m1()).ln() - a * (u + v) - F::of(2.0) * d.abs().ln()
            }
            Kind::Gaussian(r) => {
                let x = normal_quantile(u);
                let y = normal_quantile(v);
                let one_m = F::one() - r * r;
                -F::of(0.5) * one_m.ln() - (r * r * (x * x + y * y) - F::of(2.0) * r * x * y) / (F::of(2.0) * one_m)
            }
        }
    }

    /// Conditional CDF `P(V <= v | U = u) = ∂C/∂u`.
    pub fn conditional_cdf(&self, u: F, v: F) -> F {
        let u = guard(u);
        let (zero, one) = (F::zero(), F::one());
        if v <= zero {
            return zero;
        }
        if v >= one {
            return one;
        }
        match self.kind() {
            Kind::Independence => v,
            Kind::Gumbel(a) => {
                let (x, y) = (-u.ln(), -v.ln());
                let s = x.powf(a) + y.powf(a);
                let c = (-s.powf(a.recip())).exp();
                c * s.powf(a.recip() - one) * x.powf(a - one) / u
            }
            Kind::Clayton(a) => {
                // u^{-a-1} (u^{-a} + v^{-a} - 1)^{-1/a - 1}
                (-(a + one) * u.ln() - (a.recip() + one) * clayton_log_sum(u, v, a)).exp()
            }
            Kind::Frank(a) => {
                let eu = (-a * u).exp();
                let ev1 = (-a * v).exp_m1();
                eu * ev1 / ((-a).exp_m1() + (-a * u).exp_m1() * ev1)
            }
            Kind::Gaussian(r) => {
                let x = phi_inv(u.f64());
                let y = phi_inv(v.f64());
                let r = r.f64();
                F::of(phi((y - r * x) / (1.0 - r * r).sqrt()))
            }
        }
        .max(zero)
        .min(one)
    }

    /// Inverse of [`conditional_cdf`](Self::conditional_cdf) in `v`.
    fn conditional_quantile(&self, u: F, w: F) -> F {
        let one = F::one();
        match self.kind() {
            Kind::Independence => w,
            Kind::Clayton(a) => {
                let t = (w.powf(-a / (one + a)) - one) * u.powf(-a) + one;
                t.powf(-a.recip())
            }
            Kind::Frank(a) => {
                let z = w * (-a).exp_m1() / (w + (one - w) * (-a * u).exp());
                -z.ln_1p() / a
            }
            // Gaussian is sampled through its Cholesky factor instead.
            Kind::Gaussian(_) | Kind::Gumbel(_) => bisect(|v| self.conditional_cdf(u, v) - w),
        }
    }

    /// Draws `n` pairs with a ChaCha8 stream seeded by `seed`.
    ///
    /// Archimedean families use conditional inversion; the Gaussian copula
    /// transforms correlated normals through the normal CDF.
    pub fn sample(&self, n: usize, seed: u64) -> CopulaSample<F> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        let kind = self.kind();
        for _ in 0..n {
            let a: f64 = rng.sample(Open01);
            let b: f64 = rng.sample(Open01);
            let (x, y) = match kind {
                Kind::Gaussian(r) => {
                    let r = r.f64();
                    let z1 = phi_inv(a);
                    let z2 = r * z1 + (1.0 - r * r).sqrt() * phi_inv(b);
                    (F::of(a), F::of(phi(z2)))
                }
                _ => {
                    let x = F::of(a);
                    (x, self.conditional_quantile(x, F::of(b)))
                }
            };
            u.push(x);
            v.push(open_unit(y));
        }
        CopulaSample { u, v }
    }

    /// Sum of log-densities over the pseudo-observations.
    pub fn pseudo_log_likelihood(&self, pobs: &PseudoObservations<F>) -> F {
        pobs.u.iter().zip(&pobs.v).map(|(&u, &v)| self.log_density(u, v)).sum()
    }
}

impl<F: Real> fmt::Display for CopulaModel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            CopulaFamily::Independence => f.write_str("independence"),
            fam => write!(f, "{fam}(alpha={})", self.alpha),
        }
    }
}

fn guard<F: Real>(x: F) -> F {
    let g = F::of(CORNER_GUARD);
    x.max(g).min(F::one() - g)
}

fn open_unit<F: Real>(x: F) -> F {
    let eps = F::epsilon();
    x.max(eps).min(F::one() - eps)
}

/// `ln(u^{-a} + v^{-a} - 1)` without overflow.
fn clayton_log_sum<F: Real>(u: F, v: F, a: F) -> F {
    let p = -a * u.ln();
    let q = -a * v.ln();
    let m = p.max(q);
    m + ((p - m).exp() + (q - m).exp() - (-m).exp()).ln()
}

/// Root of an increasing function on `(0, 1)`.
fn bisect<F: Real>(f: impl Fn(F) -> F) -> F {
    let (mut lo, mut hi) = (F::zero(), F::one());
    let half = F::of(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > F::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * half
}

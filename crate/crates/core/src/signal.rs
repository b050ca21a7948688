//! Signal containers and the small dense matrices used for mixing and
//! de-mixing.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalRole {
    Sources,
    #[default]
    Observations,
    Estimates,
}

/// `p × T` samples, one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix<F> {
    rows: Vec<Vec<F>>,
    role: SignalRole,
}

/// Smallest sample count accepted by the separation engine.
pub const MIN_SAMPLES: usize = 10;

impl<F: Real> SignalMatrix<F> {
    /// Validates shape (`p >= 2`, `T >= 10`, equal row lengths) and finiteness.
    pub fn new(rows: Vec<Vec<F>>, role: SignalRole) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::UnsupportedDimension { p: rows.len() });
        }
        let t = rows[0].len();
        for r in &rows[1..] {
            if r.len() != t {
                return Err(Error::LengthMismatch {
                    left: t,
                    right: r.len(),
                });
            }
        }
        if t < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: MIN_SAMPLES,
                got: t,
            });
        }
        for (channel, r) in rows.iter().enumerate() {
            if let Some(sample) = r.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { channel, sample });
            }
        }
        Ok(Self { rows, role })
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<Vec<F>> {
        self.rows
    }

    pub fn role(&self) -> SignalRole {
        self.role
    }

    pub fn with_role(mut self, role: SignalRole) -> Self {
        self.role = role;
        self
    }

    pub fn channels(&self) -> usize {
        self.rows.len()
    }

    pub fn samples(&self) -> usize {
        self.rows[0].len()
    }

    /// Each row shifted to zero mean and scaled to unit variance.
    pub fn standardized(&self) -> Result<Self> {
        let mut rows = self.rows.clone();
        for (channel, r) in rows.iter_mut().enumerate() {
            let m = crate::scalar::mean(r);
            let s = crate::scalar::std_dev(r);
            if !(s > F::zero()) {
                return Err(Error::DegenerateSignal { channel });
            }
            r.iter_mut().for_each(|x| *x = (*x - m) / s);
        }
        Ok(Self { rows, role: self.role })
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![F::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = F::one();
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![F::zero(); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig("matrix must be square".into()));
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: F) {
        self.data[i * self.n + j] = x;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Matrix<F> {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s = (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum();
                out.set(i, j, s);
            }
        }
        out
    }

    /// `self · X` for a `p × T` signal.
    pub fn apply(&self, x: &SignalMatrix<F>, role: SignalRole) -> SignalMatrix<F> {
        let t = x.samples();
        let rows = (0..self.n)
            .map(|i| {
                let mut out = vec![F::zero(); t];
                for (k, xr) in x.rows().iter().enumerate() {
                    let w = self.get(i, k);
                    if w != F::zero() {
                        out.iter_mut().zip(xr).for_each(|(o, &v)| *o = *o + w * v);
                    }
                }
                out
            })
            .collect();
        SignalMatrix { rows, role }
    }

    pub fn sub(&self, other: &Matrix<F>) -> Matrix<F> {
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scaled_add(&self, other: &Matrix<F>, s: F) -> Matrix<F> {
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect(),
        }
    }

    pub fn frobenius(&self) -> F {
        self.data.iter().map(|&x| x * x).sum::<F>().sqrt()
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, x| m.max(x.abs()))
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Matrix<F>) -> F {
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    /// Each row divided by its Euclidean norm.
    pub fn row_normalized(&self) -> Matrix<F> {
        let mut out = self.clone();
        for i in 0..self.n {
            let norm = self.row(i).iter().map(|&x| x * x).sum::<F>().sqrt();
            if norm > F::zero() {
                for j in 0..self.n {
                    out.set(i, j, self.get(i, j) / norm);
                }
            }
        }
        out
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> F {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = F::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs()
                        .partial_cmp(&a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[piv * n + col] == F::zero() {
                return F::zero();
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det = det * d;
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                for j in col..n {
                    a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Matrix<F>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n).data;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs()
                        .partial_cmp(&a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            let p = a[piv * n + col];
            if p.abs() <= F::epsilon() * self.max_abs() {
                return Err(Error::SingularMatrix { det: self.det().f64() });
            }
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
            for j in 0..n {
                a[col * n + j] = a[col * n + j] / p;
                inv[col * n + j] = inv[col * n + j] / p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r * n + col];
                    for j in 0..n {
                        a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                        inv[r * n + j] = inv[r * n + j] - f * inv[col * n + j];
                    }
                }
            }
        }
        Ok(Matrix { n, data: inv })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok: Vec<Vec<f64>> = vec![vec![0.0; 10], vec![1.0; 10]];
        assert!(SignalMatrix::new(ok, SignalRole::Sources).is_ok());
        assert!(matches!(
            SignalMatrix::new(vec![vec![0.0f64; 10]], SignalRole::Sources),
            Err(Error::UnsupportedDimension { p: 1 })
        ));
        assert!(matches!(
            SignalMatrix::new(vec![vec![0.0f64; 5], vec![0.0; 5]], SignalRole::Sources),
            Err(Error::TooFewSamples { .. })
        ));
        let mut bad = vec![vec![0.0f64; 10], vec![0.0; 10]];
        bad[1][3] = f64::NAN;
        assert!(matches!(
            SignalMatrix::new(bad, SignalRole::Sources),
            Err(Error::NonFinite { channel: 1, sample: 3 })
        ));
    }

    #[test]
    fn inverse_and_determinant() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 0.8], vec![0.8, 1.0]]).unwrap();
        assert!((a.det() - 0.36f64).abs() < 1e-15);
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv);
        assert!(id.sub(&Matrix::identity(2)).max_abs() < 1e-14);
        let sing = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(sing.inverse().is_err());
        assert_eq!(sing.det(), 0.0);
    }

    #[test]
    fn apply_mixes_rows() {
        let s = SignalMatrix::new(
            vec![(0..10).map(f64::from).collect(), vec![1.0; 10]],
            SignalRole::Sources,
        )
        .unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, -1.0]]).unwrap();
        let x = a.apply(&s, SignalRole::Observations);
        assert_eq!(x.row(0)[3], 5.0);
        assert_eq!(x.row(1)[7], -1.0);
    }
}

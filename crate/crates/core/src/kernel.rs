//! Kernel functions, Gram matrices and a positive-semidefiniteness check.
//!
//! Every kernel is a pure function of two equal-length vectors. The textual
//! token form (`linear`, `poly:p=3`, `rbf:sigma=10`, `sigmoid:kappa=1,delta=0`)
//! is what model files and command-line flags carry.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest point count [`gram_matrix`] accepts before refusing to allocate.
pub const DEFAULT_GRAM_CAP: usize = 10_000;

/// Default tolerance for [`psd_violation`], relative to the largest entry.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Which kernel to use, with the hyperparameters relevant to it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelSpec {
    /// Bare dot product `x·y`.
    #[default]
    Linear,
    /// `(x·y + 1)^degree`.
    Polynomial { degree: u32 },
    /// `exp(-|x-y|² / (2σ²))`.
    Rbf { sigma: f64 },
    /// `tanh(κ·(x·y) - δ)`. Not positive semidefinite in general.
    Sigmoid { kappa: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
    Sigmoid,
}

impl KernelSpec {
    pub const DEFAULT_DEGREE: u32 = 3;
    pub const DEFAULT_SIGMA: f64 = 10.0;

    pub fn polynomial(degree: u32) -> Result<Self> {
        let spec = KernelSpec::Polynomial { degree };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rbf(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sigmoid(kappa: f64, delta: f64) -> Result<Self> {
        let spec = KernelSpec::Sigmoid { kappa, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            KernelSpec::Linear => KernelKind::Linear,
            KernelSpec::Polynomial { .. } => KernelKind::Polynomial,
            KernelSpec::Rbf { .. } => KernelKind::Rbf,
            KernelSpec::Sigmoid { .. } => KernelKind::Sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree } if degree >= 1 => Ok(()),
            KernelSpec::Polynomial { degree } => {
                Err(Error::invalid(format!("polynomial degree must be >= 1, got {degree}")))
            }
            KernelSpec::Rbf { sigma } if sigma.is_finite() && sigma > 0.0 => Ok(()),
            KernelSpec::Rbf { sigma } => {
                Err(Error::invalid(format!("rbf sigma must be positive and finite, got {sigma}")))
            }
            KernelSpec::Sigmoid { kappa, delta } if kappa.is_finite() && delta.is_finite() => Ok(()),
            KernelSpec::Sigmoid { .. } => Err(Error::invalid("sigmoid kappa and delta must be finite")),
        }
    }

    /// Kernel value without dimension or finiteness checks.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree } => powu(dot(x, y) + 1.0, degree),
            KernelSpec::Rbf { sigma } => (-squared_distance(x, y) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Sigmoid { kappa, delta } => (kappa * dot(x, y) - delta).tanh(),
        }
    }
}


impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Polynomial { degree } => write!(f, "poly:p={degree}"),
            KernelSpec::Rbf { sigma } => write!(f, "rbf:sigma={sigma}"),
            KernelSpec::Sigmoid { kappa, delta } => write!(f, "sigmoid:kappa={kappa},delta={delta}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let bad = || Error::KernelToken(token.to_string());
        let (name, params) = match token.split_once(':') {
            Some((name, params)) => (name, Some(params)),
            None => (token, None),
        };
        // Keys are mandatory and appear in a fixed order.
        let values = |keys: &[&str]| -> Result<Vec<&str>> {
            let params = params.ok_or_else(bad)?;
            let parts: Vec<&str> = params.split(',').collect();
            if parts.len() != keys.len() {
                return Err(bad());
            }
            parts
                .iter()
                .zip(keys)
                .map(|(part, key)| match part.split_once('=') {
                    Some((k, v)) if k == *key && !v.is_empty() => Ok(v),
                    _ => Err(bad()),
                })
                .collect()
        };
        let real = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let spec = match name {
            "linear" if params.is_none() => KernelSpec::Linear,
            "poly" => {
                let v = values(&["p"])?;
                KernelSpec::Polynomial {
                    degree: v[0].parse().map_err(|_| bad())?,
                }
            }
            "rbf" => {
                let v = values(&["sigma"])?;
                KernelSpec::Rbf { sigma: real(v[0])? }
            }
            "sigmoid" => {
                let v = values(&["kappa", "delta"])?;
                KernelSpec::Sigmoid {
                    kappa: real(v[0])?,
                    delta: real(v[1])?,
                }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

// Repeated multiplication keeps (x·y+1)^p exact for small integer bases.
#[inline]
fn powu(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `K(x, y)` for the given kernel.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Empty("kernel argument"));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("kernel argument"));
    }
    Ok(spec.eval_unchecked(x, y))
}

/// Dense square matrix of kernel values, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    /// Builds a matrix from explicit rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Gram { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Gram matrix of `points` under `spec`, refusing more than [`DEFAULT_GRAM_CAP`] points.
pub fn gram_matrix<P: AsRef<[f64]> + Sync>(spec: &KernelSpec, points: &[P]) -> Result<Gram> {
    gram_matrix_capped(spec, points, DEFAULT_GRAM_CAP)
}

/// Gram matrix with an explicit point cap.
///
/// Rows are filled in parallel; each entry is computed on its own, so the
/// result does not depend on the thread schedule.
pub fn gram_matrix_capped<P: AsRef<[f64]> + Sync>(
    spec: &KernelSpec,
    points: &[P],
    cap: usize,
) -> Result<Gram> {
    spec.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("point list"));
    }
    if n > cap {
        return Err(Error::TooLarge { points: n, cap });
    }
    let dim = points[0].as_ref().len();
    if dim == 0 {
        return Err(Error::Empty("feature vector"));
    }
    for p in points {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("gram point"));
        }
    }
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = points[i].as_ref();
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = spec.eval_unchecked(xi, points[j].as_ref());
        }
    });
    Ok(Gram { n, data })
}

/// `max(0, -λ_min)` of a symmetric matrix.
///
/// `tol` is relative to the largest absolute entry; it bounds the accepted
/// asymmetry and is the threshold [`is_acceptably_psd`] compares against.
pub fn psd_violation(gram: &Gram, tol: f64) -> Result<f64> {
    let n = gram.len();
    let scale = gram.max_abs().max(1.0);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((gram.get(i, j) - gram.get(j, i)).abs());
        }
    }
    if asym > tol * scale {
        return Err(Error::NotSymmetric(asym));
    }
    if !gram.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    let matrix = DMatrix::from_row_slice(n, n, &gram.data);
    let eig = SymmetricEigen::new(matrix);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((-min).max(0.0))
}

/// True when the smallest eigenvalue is no lower than `-tol · max|G|`.
pub fn is_acceptably_psd(gram: &Gram, tol: f64) -> Result<bool> {
    let scale = gram.max_abs().max(1.0);
    Ok(psd_violation(gram, tol)? <= tol * scale)
}

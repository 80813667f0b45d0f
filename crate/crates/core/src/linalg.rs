//! Dense symmetric matrices, their eigendecomposition, and the proximal maps
//! used by the splitting solver: eigenvalue shrinkage (nuclear norm), entrywise
//! shrinkage (l1 norm) and projection onto a box cut by a sum halfspace.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square real matrix with `m[(i, j)] == m[(j, i)]` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RowMajor", into = "RowMajor")]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Wraps `m`, which must be square, finite and exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::input(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Replaces `m` by `(m + m^T) / 2`.
    pub fn symmetrize(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(SymmetricMatrix(symmetrized(m)))
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn filled(n: usize, value: f64) -> Self {
        SymmetricMatrix(DMatrix::from_element(n, n, value))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Internal constructor for matrices symmetric by construction.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        SymmetricMatrix(m)
    }
}

impl std::ops::Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;
    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.0[ij]
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    Ok(())
}

pub(crate) fn symmetrized(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Eigenpairs of a symmetric matrix, ordered by decreasing |eigenvalue|.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal columns, `eigenvectors.column(k)` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `V diag(f(lambda)) V^T`, skipping eigenpairs mapped to zero.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.eigenvectors.nrows();
        let mut out = DMatrix::zeros(n, n);
        let kept: Vec<(usize, f64)> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| (k, f(l)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        if kept.is_empty() {
            return out;
        }
        let mut scaled = DMatrix::zeros(n, kept.len());
        let mut basis = DMatrix::zeros(n, kept.len());
        for (c, &(k, v)) in kept.iter().enumerate() {
            let col = self.eigenvectors.column(k);
            basis.set_column(c, &col);
            scaled.set_column(c, &(col * v));
        }
        out.gemm(1.0, &scaled, &basis.transpose(), 0.0);
        out
    }

    pub fn recompose(&self) -> DMatrix<f64> {
        self.recompose_with(|l| l)
    }
}

/// Symmetric eigendecomposition (Householder tridiagonalization + implicit QR).
pub fn eig_sym(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    check_square_finite(&m.0)?;
    Ok(eig_unchecked(m.0.clone()))
}

pub(crate) fn eig_unchecked(m: DMatrix<f64>) -> EigenDecomposition {
    let n = m.nrows();
    if n == 0 {
        return EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        };
    }
    let se = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (se.eigenvalues[a], se.eigenvalues[b]);
        lb.abs()
            .partial_cmp(&la.abs())
            .unwrap_or(Ordering::Equal)
            .then(lb.partial_cmp(&la).unwrap_or(Ordering::Equal))
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| se.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        eigenvectors.set_column(c, &se.eigenvectors.column(k));
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Sum of singular values; for a symmetric matrix, the sum of |eigenvalues|.
pub fn nuclear_norm(m: &SymmetricMatrix) -> Result<f64> {
    Ok(eig_sym(m)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

pub(crate) fn nuclear_norm_unchecked(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// Entrywise sum of absolute values.
pub fn l1_norm(m: &SymmetricMatrix) -> f64 {
    m.0.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::input(format!(
            "threshold must be finite and >= 0, got {tau}"
        )));
    }
    Ok(())
}

/// Proximal map of `tau * ||.||_*`: shrinks every eigenvalue toward zero by `tau`.
pub fn svt(m: &SymmetricMatrix, tau: f64) -> Result<SymmetricMatrix> {
    check_tau(tau)?;
    check_square_finite(&m.0)?;
    Ok(SymmetricMatrix(svt_unchecked(m.0.clone(), tau)))
}

pub(crate) fn svt_unchecked(m: DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let eig = eig_unchecked(m);
    symmetrized(eig.recompose_with(|l| shrink(l, tau)))
}

/// Proximal map of `tau * ||.||_1`: entrywise `sign(x) max(|x| - tau, 0)`.
pub fn soft_threshold(m: &SymmetricMatrix, tau: f64) -> Result<SymmetricMatrix> {
    check_tau(tau)?;
    Ok(SymmetricMatrix(m.0.map(|x| shrink(x, tau))))
}

/// Euclidean projection of `m` onto `{X : lo <= X_ij <= hi, sum(X) >= target}`.
///
/// When the clamped matrix already meets the sum, that is the answer.
/// Otherwise the minimizer is `clamp(m + theta)` for the unique `theta > 0`
/// making the sum equal `target`; `theta` is found exactly by sweeping the
/// breakpoints of the piecewise-linear sum.
pub fn project_box_halfspace(
    m: &SymmetricMatrix,
    lo: f64,
    hi: f64,
    target: f64,
) -> Result<SymmetricMatrix> {
    check_square_finite(&m.0)?;
    if lo > hi || !lo.is_finite() || !hi.is_finite() || target.is_nan() {
        return Err(Error::input(format!("invalid bounds [{lo}, {hi}]")));
    }
    let n = m.n();
    let cap = hi * (n * n) as f64;
    if target > cap * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::input(format!(
            "sum target {target} exceeds the largest attainable sum {cap}"
        )));
    }
    Ok(SymmetricMatrix(project_box_halfspace_masked(
        &m.0, lo, hi, target, None,
    )))
}

/// As [`project_box_halfspace`], with entries flagged in `fixed_zero` pinned
/// at zero and excluded from the sum. The target must be attainable.
pub(crate) fn project_box_halfspace_masked(
    m: &DMatrix<f64>,
    lo: f64,
    hi: f64,
    target: f64,
    fixed_zero: Option<&[bool]>,
) -> DMatrix<f64> {
    let free = |k: usize| fixed_zero.is_none_or(|mask| !mask[k]);
    let mut out = m.map(|x| x.clamp(lo, hi));
    if let Some(mask) = fixed_zero {
        for (x, &z) in out.iter_mut().zip(mask) {
            if z {
                *x = 0.0;
            }
        }
    }
    let mut sum: f64 = out
        .iter()
        .enumerate()
        .filter(|&(k, _)| free(k))
        .map(|(_, x)| x)
        .sum();
    if sum >= target {
        return out;
    }

    // f(theta) = sum_k clamp(m_k + theta) is increasing and piecewise linear;
    // entry k is on a slope-one piece for theta in (lo - m_k, hi - m_k).
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * m.len());
    let mut slope = 0i64;
    for (k, &x) in m.iter().enumerate() {
        if !free(k) {
            continue;
        }
        let start = lo - x;
        let end = hi - x;
        if end <= 0.0 {
            continue;
        }
        if start <= 0.0 {
            slope += 1;
        } else {
            events.push((start, 1));
        }
        events.push((end, -1));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let mut theta = 0.0;
    let mut solved = None;
    for &(at, delta) in &events {
        if slope > 0 {
            let reach = sum + slope as f64 * (at - theta);
            if reach >= target {
                solved = Some(theta + (target - sum) / slope as f64);
                break;
            }
            sum = reach;
        }
        theta = at;
        slope += delta as i64;
    }
    // target at the cap: every free entry saturates at the last breakpoint
    let theta = solved.unwrap_or(theta);

    for (k, (o, &x)) in out.iter_mut().zip(m.iter()).enumerate() {
        if free(k) {
            *o = (x + theta).clamp(lo, hi);
        }
    }
    out
}

/// Serde helper storing a matrix as nested row arrays.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub(crate) struct RowMajor(Vec<Vec<f64>>);

impl From<SymmetricMatrix> for RowMajor {
    fn from(m: SymmetricMatrix) -> Self {
        RowMajor(to_rows(&m.0))
    }
}

impl TryFrom<RowMajor> for SymmetricMatrix {
    type Error = Error;
    fn try_from(r: RowMajor) -> Result<Self> {
        SymmetricMatrix::new(from_rows(&r.0)?)
    }
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::input(
            "matrix rows must all have length equal to the row count",
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) mod row_major {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        super::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

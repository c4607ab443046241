//! Two-core tensor trains for 2D fields.
//!
//! A field `X` of shape `(n_x, n_y)` is stored as `X = core_x * core_y` with
//! `core_x: (n_x, r)` and `core_y: (r, n_y)`. Every operation here is a pure
//! value transformation: inputs are never mutated and nothing is cached.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
    #[error(
        "reciprocal series did not converge after {iterations} iterations \
         (last increment {last_increment:.3e}, max |1 - x/x_avg| = {max_abs_deviation:.3e})"
    )]
    ReciprocalDiverged {
        iterations: usize,
        last_increment: f64,
        max_abs_deviation: f64,
    },
}

/// Mode selector for [`TTMatrix::apply_core_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// A linear map acting on one mode of a field.
///
/// `apply` maps a matrix of shape `(n_in, k)` to `(n_out, k)`, column by column.
pub trait AxisMap {
    fn n_in(&self) -> usize;
    fn n_out(&self) -> usize;
    fn apply(&self, input: &DMatrix<f64>) -> DMatrix<f64>;
}

impl AxisMap for DMatrix<f64> {
    fn n_in(&self) -> usize {
        self.ncols()
    }

    fn n_out(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, input: &DMatrix<f64>) -> DMatrix<f64> {
        self * input
    }
}

/// Banded operator with a fixed number of coefficients per output row.
///
/// Output row `o` is `sum_k coeffs[o][k] * input[starts[o] + k]`. Shifts,
/// stencil reconstructions, quadrature sums and ghost padding all fit this
/// shape, and applying it costs `O(n_out * width * k)` instead of a dense
/// matrix product.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMap {
    n_in: usize,
    width: usize,
    starts: Vec<usize>,
    coeffs: Vec<f64>,
}

impl BandedMap {
    pub fn new(n_in: usize, width: usize, starts: Vec<usize>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), starts.len() * width, "coefficient table size");
        for &s in &starts {
            assert!(s + width <= n_in, "band row exceeds input size");
        }
        Self {
            n_in,
            width,
            starts,
            coeffs,
        }
    }

    /// Map whose rows each pick one (optional) input entry with unit weight.
    /// `None` rows produce zeros.
    pub fn selection(n_in: usize, picks: &[Option<usize>]) -> Self {
        let mut starts = Vec::with_capacity(picks.len());
        let mut coeffs = Vec::with_capacity(picks.len());
        for p in picks {
            match p {
                Some(i) => {
                    starts.push(*i);
                    coeffs.push(1.0);
                }
                None => {
                    starts.push(0);
                    coeffs.push(0.0);
                }
            }
        }
        Self::new(n_in, 1, starts, coeffs)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, o: usize) -> (usize, &[f64]) {
        (self.starts[o], &self.coeffs[o * self.width..(o + 1) * self.width])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_out(), self.n_in);
        for o in 0..self.n_out() {
            let (s, c) = self.row(o);
            for (k, &w) in c.iter().enumerate() {
                m[(o, s + k)] += w;
            }
        }
        m
    }

    /// Apply to a single vector.
    pub fn apply_slice(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.n_in);
        for (o, slot) in out.iter_mut().enumerate() {
            let (s, c) = self.row(o);
            *slot = c.iter().zip(&input[s..s + self.width]).map(|(a, b)| a * b).sum();
        }
    }
}

impl AxisMap for BandedMap {
    fn n_in(&self) -> usize {
        self.n_in
    }

    fn n_out(&self) -> usize {
        self.starts.len()
    }

    fn apply(&self, input: &DMatrix<f64>) -> DMatrix<f64> {
        let k = input.ncols();
        let mut out = DMatrix::zeros(self.n_out(), k);
        for c in 0..k {
            let src = input.column(c);
            let src = src.as_slice();
            let mut dst = out.column_mut(c);
            self.apply_slice(src, dst.as_mut_slice());
        }
        out
    }
}

/// Two-core tensor train: `X(i, j) = sum_a core_x(i, a) * core_y(a, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTMatrix {
    core_x: DMatrix<f64>,
    core_y: DMatrix<f64>,
}

impl TTMatrix {
    pub fn new(core_x: DMatrix<f64>, core_y: DMatrix<f64>) -> Result<Self, TtError> {
        if core_x.ncols() != core_y.nrows() || core_x.ncols() == 0 {
            return Err(TtError::ShapeMismatch(format!(
                "core_x is {}x{}, core_y is {}x{}",
                core_x.nrows(),
                core_x.ncols(),
                core_y.nrows(),
                core_y.ncols()
            )));
        }
        if let Some((row, col)) = first_non_finite(&core_x) {
            return Err(TtError::NonFinite { row, col });
        }
        if let Some((row, col)) = first_non_finite(&core_y) {
            return Err(TtError::NonFinite { row, col });
        }
        Ok(Self { core_x, core_y })
    }

    fn from_cores_unchecked(core_x: DMatrix<f64>, core_y: DMatrix<f64>) -> Self {
        debug_assert_eq!(core_x.ncols(), core_y.nrows());
        Self { core_x, core_y }
    }

    /// Canonical rank-1 zero.
    pub fn zeros(n_x: usize, n_y: usize) -> Self {
        Self::from_cores_unchecked(DMatrix::zeros(n_x, 1), DMatrix::zeros(1, n_y))
    }

    pub fn constant(n_x: usize, n_y: usize, value: f64) -> Self {
        Self::from_cores_unchecked(DMatrix::from_element(n_x, 1, value), DMatrix::from_element(1, n_y, 1.0))
    }

    pub fn ones(n_x: usize, n_y: usize) -> Self {
        Self::constant(n_x, n_y, 1.0)
    }

    /// Outer product `a * b^T`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Self::from_cores_unchecked(
            DMatrix::from_column_slice(a.len(), 1, a),
            DMatrix::from_row_slice(1, b.len(), b),
        )
    }

    /// Compress a dense matrix by truncated SVD at relative Frobenius tolerance `eps`.
    pub fn from_full(a: &DMatrix<f64>, eps: f64) -> Result<Self, TtError> {
        check_eps(eps)?;
        if let Some((row, col)) = first_non_finite(a) {
            return Err(TtError::NonFinite { row, col });
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(TtError::ShapeMismatch("empty matrix".into()));
        }
        let svd = linalg::sorted_svd(a.clone());
        let keep = truncation_rank(&svd.singular_values, eps);
        if keep == 0 {
            return Ok(Self::zeros(a.nrows(), a.ncols()));
        }
        let mut core_x = svd.u.columns(0, keep).into_owned();
        for k in 0..keep {
            core_x.column_mut(k).scale_mut(svd.singular_values[k]);
        }
        let core_y = svd.v_t.rows(0, keep).into_owned();
        Ok(Self::from_cores_unchecked(core_x, core_y))
    }

    pub fn nrows(&self) -> usize {
        self.core_x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.core_y.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    pub fn rank(&self) -> usize {
        self.core_x.ncols()
    }

    pub fn core_x(&self) -> &DMatrix<f64> {
        &self.core_x
    }

    pub fn core_y(&self) -> &DMatrix<f64> {
        &self.core_y
    }

    pub fn into_cores(self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.core_x, self.core_y)
    }

    pub fn transpose(&self) -> Self {
        Self::from_cores_unchecked(self.core_y.transpose(), self.core_x.transpose())
    }

    pub fn to_full(&self) -> DMatrix<f64> {
        &self.core_x * &self.core_y
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.core_x.row(i).dot(&self.core_y.column(j).transpose())
    }

    /// Row `i` of the dense matrix, written into `out` (length `ncols`).
    pub fn row_into(&self, i: usize, out: &mut [f64]) {
        let r = self.rank();
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..r {
            let w = self.core_x[(i, a)];
            if w == 0.0 {
                continue;
            }
            for (j, v) in out.iter_mut().enumerate() {
                *v += w * self.core_y[(a, j)];
            }
        }
    }

    /// Column `j` of the dense matrix, written into `out` (length `nrows`).
    pub fn col_into(&self, j: usize, out: &mut [f64]) {
        let r = self.rank();
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..r {
            let w = self.core_y[(a, j)];
            if w == 0.0 {
                continue;
            }
            let col = self.core_x.column(a);
            for (v, c) in out.iter_mut().zip(col.iter()) {
                *v += w * c;
            }
        }
    }

    /// Recompress to the smallest rank meeting the relative Frobenius bound `eps`.
    ///
    /// Both cores are orthogonalized by QR; the small core product is then
    /// truncated by SVD. The zero field comes back as the canonical rank-1 zero.
    pub fn round(&self, eps: f64) -> Self {
        let (n, m) = self.shape();
        let qa = self.core_x.clone().qr();
        let qb = self.core_y.transpose().qr();
        let small = qa.r() * qb.r().transpose();
        let svd = linalg::sorted_svd(small);
        let keep = truncation_rank(&svd.singular_values, eps.max(0.0));
        if keep == 0 {
            return Self::zeros(n, m);
        }
        let mut left = svd.u.columns(0, keep).into_owned();
        for k in 0..keep {
            left.column_mut(k).scale_mut(svd.singular_values[k]);
        }
        let core_x = qa.q() * left;
        let core_y = (qb.q() * svd.v_t.rows(0, keep).transpose()).transpose();
        Self::from_cores_unchecked(core_x, core_y)
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<(), TtError> {
        if self.shape() != other.shape() {
            return Err(TtError::ShapeMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Exact sum; ranks add.
    pub fn add(&self, other: &Self) -> Result<Self, TtError> {
        self.check_same_shape(other, "add")?;
        let (r1, r2) = (self.rank(), other.rank());
        let mut core_x = DMatrix::zeros(self.nrows(), r1 + r2);
        core_x.columns_mut(0, r1).copy_from(&self.core_x);
        core_x.columns_mut(r1, r2).copy_from(&other.core_x);
        let mut core_y = DMatrix::zeros(r1 + r2, self.ncols());
        core_y.rows_mut(0, r1).copy_from(&self.core_y);
        core_y.rows_mut(r1, r2).copy_from(&other.core_y);
        Ok(Self::from_cores_unchecked(core_x, core_y))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TtError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_cores_unchecked(&self.core_x * a, self.core_y.clone())
    }

    /// `sum_k coeffs[k] * terms[k]` as one block concatenation.
    pub fn linear_combination(terms: &[(f64, &TTMatrix)]) -> Result<Self, TtError> {
        let first = terms
            .first()
            .ok_or_else(|| TtError::ShapeMismatch("empty linear combination".into()))?
            .1;
        for (_, t) in terms {
            first.check_same_shape(t, "linear combination")?;
        }
        let total: usize = terms.iter().map(|(_, t)| t.rank()).sum();
        let mut core_x = DMatrix::zeros(first.nrows(), total);
        let mut core_y = DMatrix::zeros(total, first.ncols());
        let mut off = 0;
        for (a, t) in terms {
            let r = t.rank();
            core_x.columns_mut(off, r).copy_from(&(&t.core_x * *a));
            core_y.rows_mut(off, r).copy_from(&t.core_y);
            off += r;
        }
        Ok(Self::from_cores_unchecked(core_x, core_y))
    }

    /// Entrywise product; ranks multiply.
    pub fn hadamard(&self, other: &Self) -> Result<Self, TtError> {
        self.check_same_shape(other, "hadamard")?;
        let (r1, r2) = (self.rank(), other.rank());
        let (n, m) = self.shape();
        let mut core_x = DMatrix::zeros(n, r1 * r2);
        for a in 0..r1 {
            for b in 0..r2 {
                let mut col = core_x.column_mut(a * r2 + b);
                for i in 0..n {
                    col[i] = self.core_x[(i, a)] * other.core_x[(i, b)];
                }
            }
        }
        let mut core_y = DMatrix::zeros(r1 * r2, m);
        for j in 0..m {
            for a in 0..r1 {
                let ya = self.core_y[(a, j)];
                for b in 0..r2 {
                    core_y[(a * r2 + b, j)] = ya * other.core_y[(b, j)];
                }
            }
        }
        Ok(Self::from_cores_unchecked(core_x, core_y))
    }

    /// Frobenius norm from the two Gram matrices, without densifying.
    pub fn norm_fro(&self) -> f64 {
        let gx = self.core_x.transpose() * &self.core_x;
        let gy = &self.core_y * self.core_y.transpose();
        gx.component_mul(&gy).sum().max(0.0).sqrt()
    }

    pub fn sum_entries(&self) -> f64 {
        let sx = self.core_x.row_sum();
        let sy = self.core_y.column_sum();
        (sx * sy)[(0, 0)]
    }

    /// Apply a linear map to one mode: `M * X` for [`Axis::X`], `X * M^T` for [`Axis::Y`].
    pub fn apply_core_map<M: AxisMap + ?Sized>(&self, axis: Axis, map: &M) -> Result<Self, TtError> {
        match axis {
            Axis::X => {
                if map.n_in() != self.nrows() {
                    return Err(TtError::ShapeMismatch(format!(
                        "x map expects {} rows, field has {}",
                        map.n_in(),
                        self.nrows()
                    )));
                }
                Ok(Self::from_cores_unchecked(map.apply(&self.core_x), self.core_y.clone()))
            }
            Axis::Y => {
                if map.n_in() != self.ncols() {
                    return Err(TtError::ShapeMismatch(format!(
                        "y map expects {} columns, field has {}",
                        map.n_in(),
                        self.ncols()
                    )));
                }
                let mapped = map.apply(&self.core_y.transpose()).transpose();
                Ok(Self::from_cores_unchecked(self.core_x.clone(), mapped))
            }
        }
    }

    /// Largest absolute entry, streamed row by row (`O(n_x n_y r)` time, `O(n_y)` memory).
    pub fn max_abs(&self) -> f64 {
        let mut row = vec![0.0; self.ncols()];
        let mut best = 0.0f64;
        for i in 0..self.nrows() {
            self.row_into(i, &mut row);
            best = row.iter().fold(best, |acc, v| acc.max(v.abs()));
        }
        best
    }
}

fn check_eps(eps: f64) -> Result<(), TtError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(TtError::InvalidTolerance(eps));
    }
    Ok(())
}

fn first_non_finite(a: &DMatrix<f64>) -> Option<(usize, usize)> {
    let idx = a.iter().position(|v| !v.is_finite())?;
    Some((idx % a.nrows(), idx / a.nrows()))
}

/// Smallest `r` with `sqrt(sum_{k >= r} s_k^2) <= eps * sqrt(sum_k s_k^2)`.
/// `sigma` must be sorted in decreasing order. Returns 0 for an all-zero spectrum.
pub fn truncation_rank(sigma: &[f64], eps: f64) -> usize {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0;
    }
    let budget = eps * eps * total;
    let mut tail = 0.0;
    let mut keep = sigma.len();
    for k in (0..sigma.len()).rev() {
        let t = tail + sigma[k] * sigma[k];
        if t > budget {
            break;
        }
        tail = t;
        keep = k;
    }
    keep.max(1)
}

/// Result of the Taylor-series reciprocal.
#[derive(Debug, Clone)]
pub struct Reciprocal {
    pub value: TTMatrix,
    pub iterations: usize,
    pub last_increment: f64,
}

pub const RECIPROCAL_MAX_ITER: usize = 200;
const DIVERGENCE_WINDOW: usize = 5;

/// `1 / X` via the Neumann series of `1 - X / mean(X)`, rounding every update at `eps`.
pub fn reciprocal_taylor(x: &TTMatrix, eps: f64) -> Result<TTMatrix, TtError> {
    reciprocal_taylor_with(x, eps, RECIPROCAL_MAX_ITER).map(|r| r.value)
}

pub fn reciprocal_taylor_with(x: &TTMatrix, eps: f64, max_iter: usize) -> Result<Reciprocal, TtError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(TtError::InvalidTolerance(eps));
    }
    let (n, m) = x.shape();
    let numel = (n * m) as f64;
    let x_avg = x.sum_entries() / numel;
    let diverged = |iterations: usize, last: f64| -> TtError {
        let max_abs_deviation = if x_avg == 0.0 {
            f64::INFINITY
        } else {
            TTMatrix::ones(n, m)
                .sub(&x.scale(1.0 / x_avg))
                .map(|d| d.max_abs())
                .unwrap_or(f64::NAN)
        };
        TtError::ReciprocalDiverged {
            iterations,
            last_increment: last,
            max_abs_deviation,
        }
    };
    if x_avg == 0.0 || !x_avg.is_finite() {
        return Err(diverged(0, f64::NAN));
    }
    let ones = TTMatrix::ones(n, m);
    let x_tilde = ones.sub(&x.scale(1.0 / x_avg))?.round(eps);
    let mut y = ones.clone();
    let mut dy = ones;
    let mut err = 1.0;
    let mut iterations = 0;
    let mut growth_streak = 0;
    let mut prev = f64::INFINITY;
    while err > eps {
        if iterations >= max_iter {
            return Err(diverged(iterations, err));
        }
        dy = dy.hadamard(&x_tilde)?.round(eps);
        y = y.add(&dy)?.round(eps);
        err = dy.norm_fro() / numel.sqrt();
        iterations += 1;
        if !err.is_finite() {
            return Err(diverged(iterations, err));
        }
        if err > prev {
            growth_streak += 1;
            if growth_streak >= DIVERGENCE_WINDOW {
                return Err(diverged(iterations, err));
            }
        } else {
            growth_streak = 0;
        }
        prev = err;
    }
    Ok(Reciprocal {
        value: y.scale(1.0 / x_avg),
        iterations,
        last_increment: err,
    })
}

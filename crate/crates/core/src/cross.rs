//! Rank-adaptive skeleton (CUR) cross interpolation of implicitly defined matrices.
//!
//! The matrix is only ever touched through whole rows, whole columns and a
//! random validation sample, so the evaluation count scales with
//! `(n_x + n_y) * rank * sweeps` rather than `n_x * n_y`.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::tt::{TTMatrix, TtError};

/// Swap threshold for [`maxvol`].
pub const MAXVOL_TOLERANCE: f64 = 1.01;
const MAXVOL_MAX_SWEEPS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossError {
    #[error("maxvol: matrix is rank deficient ({rows}x{cols})")]
    Degenerate { rows: usize, cols: usize },
    #[error("maxvol: need at least as many rows as columns, got {rows}x{cols}")]
    TooFewRows { rows: usize, cols: usize },
    #[error("cross did not converge: residual {residual:.3e} at rank {rank} after {sweeps} sweeps")]
    NotConverged { residual: f64, rank: usize, sweeps: usize },
    #[error("function returned a non-finite value at ({row}, {col})")]
    Evaluation { row: usize, col: usize },
    #[error("invalid cross configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tt(#[from] TtError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossConfig {
    pub eps: f64,
    pub max_rank: usize,
    pub max_sweeps: usize,
    pub rank_increment: usize,
    pub validation_sample: usize,
    pub seed: u64,
}

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_rank: 512,
            max_sweeps: 30,
            rank_increment: 2,
            validation_sample: 1000,
            seed: 0,
        }
    }
}

impl CrossConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    fn validate(&self) -> Result<(), CrossError> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(CrossError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_rank == 0 || self.max_sweeps == 0 || self.rank_increment == 0 {
            return Err(CrossError::Config(
                "max_rank, max_sweeps and rank_increment must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Quasi-maximal-volume row subset of a tall matrix.
///
/// Rows are initialised by partial-pivot elimination and then swapped until
/// no entry of `M * M[I]^{-1}` exceeds [`MAXVOL_TOLERANCE`] in magnitude.
pub fn maxvol(m: &DMatrix<f64>) -> Result<Vec<usize>, CrossError> {
    let (n, r) = m.shape();
    if n < r {
        return Err(CrossError::TooFewRows { rows: n, cols: r });
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let scale = m.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(CrossError::Degenerate { rows: n, cols: r });
    }
    let degenerate = || CrossError::Degenerate { rows: n, cols: r };

    // Partial-pivot elimination on a working copy picks the starting rows.
    let mut work = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..r {
        let (mut best, mut piv) = (0.0, k);
        for i in k..n {
            let v = work[(i, k)].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= 1e-14 * scale {
            return Err(degenerate());
        }
        work.swap_rows(k, piv);
        perm.swap(k, piv);
        let p = work[(k, k)];
        for i in k + 1..n {
            let l = work[(i, k)] / p;
            if l != 0.0 {
                for c in k..r {
                    let t = work[(k, c)];
                    work[(i, c)] -= l * t;
                }
            }
        }
    }
    let mut rows: Vec<usize> = perm[..r].to_vec();

    let sub = DMatrix::from_fn(r, r, |a, b| m[(rows[a], b)]);
    let inv = sub.try_inverse().ok_or_else(degenerate)?;
    let mut b = m * inv;
    for _ in 0..MAXVOL_MAX_SWEEPS * r {
        let (mut bi, mut bj, mut bv) = (0, 0, 0.0);
        for j in 0..r {
            for i in 0..n {
                let v = b[(i, j)].abs();
                if v > bv {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if bv <= MAXVOL_TOLERANCE {
            break;
        }
        // Rank-one update for replacing row rows[bj] by bi.
        let col = b.column(bj).into_owned();
        let mut row = b.row(bi).into_owned();
        row[bj] -= 1.0;
        let piv = b[(bi, bj)];
        b -= (col * row) / piv;
        rows[bj] = bi;
    }
    Ok(rows)
}

/// Access to an implicitly defined matrix by fibers and entries.
pub trait MatrixOracle: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Dense `rows.len() x ncols` block.
    fn eval_rows(&self, rows: &[usize]) -> Result<DMatrix<f64>, CrossError>;
    /// Dense `nrows x cols.len()` block.
    fn eval_cols(&self, cols: &[usize]) -> Result<DMatrix<f64>, CrossError>;
    fn eval_entries(&self, entries: &[(usize, usize)]) -> Result<Vec<f64>, CrossError>;
}

/// Result of [`cross_approximate`] with diagnostics.
#[derive(Debug, Clone)]
pub struct CrossOutcome {
    pub tt: TTMatrix,
    pub sweeps: usize,
    pub residual: f64,
}

/// Skeleton cross approximation of `oracle`, rounded at `cfg.eps`.
///
/// `init_cols` seeds the column skeleton; an empty slice starts from a single
/// random column.
pub fn cross_approximate<O: MatrixOracle + ?Sized>(
    oracle: &O,
    init_cols: &[usize],
    cfg: &CrossConfig,
) -> Result<CrossOutcome, CrossError> {
    cfg.validate()?;
    let (n, m) = (oracle.nrows(), oracle.ncols());
    let full_rank = n.min(m);
    let rank_cap = cfg.max_rank.min(full_rank);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let sample: Vec<(usize, usize)> = if n * m <= cfg.validation_sample {
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect()
    } else {
        (0..cfg.validation_sample)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..m)))
            .collect()
    };
    let z_sample = oracle.eval_entries(&sample)?;
    let z_rms = rms(&z_sample);

    let mut cols: Vec<usize> = Vec::new();
    for &c in init_cols {
        if c < m && !cols.contains(&c) && cols.len() < rank_cap {
            cols.push(c);
        }
    }
    if cols.is_empty() {
        cols.push(rng.random_range(0..m));
    }

    let mut residual = f64::INFINITY;
    let mut previous: Option<TTMatrix> = None;
    for sweep in 1..=cfg.max_sweeps {
        let c_block = oracle.eval_cols(&cols)?;
        let q = c_block.qr().q();
        let rows = maxvol(&q)?;
        let r_block = oracle.eval_rows(&rows)?;
        let q_sub = DMatrix::from_fn(rows.len(), rows.len(), |a, b| q[(rows[a], b)]);
        let q_inv = q_sub.try_inverse().ok_or(CrossError::Degenerate {
            rows: n,
            cols: rows.len(),
        })?;
        let left = &q * q_inv;

        let approx: Vec<f64> = sample
            .iter()
            .map(|&(i, j)| left.row(i).dot(&r_block.column(j).transpose()))
            .collect();
        let resid: Vec<f64> = approx.iter().zip(&z_sample).map(|(a, z)| z - a).collect();
        residual = rms(&resid);
        let current = TTMatrix::new(left, r_block)?;

        // The sample can miss localized errors, so the skeleton must also have
        // stopped moving: the change from the previous sweep is exact over all entries.
        let settled = match &previous {
            Some(p) => current.sub(p)?.norm_fro() <= cfg.eps * current.norm_fro(),
            None => false,
        };
        let rank = cols.len();
        if (residual <= cfg.eps * z_rms && settled) || rank >= full_rank {
            return Ok(CrossOutcome {
                tt: current.round(cfg.eps),
                sweeps: sweep,
                residual,
            });
        }

        // Next column skeleton from the current row fibers.
        let qr_t = current.core_y().transpose().qr().q();
        let mut next = maxvol(&qr_t)?;
        // Grow geometrically so slowly decaying residuals do not exhaust the sweeps.
        let target = (rank + cfg.rank_increment.max(rank / 2)).min(rank_cap);
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| resid[b].abs().total_cmp(&resid[a].abs()));
        for k in order {
            if next.len() >= target || resid[k] == 0.0 {
                break;
            }
            let c = sample[k].1;
            if !next.contains(&c) {
                next.push(c);
            }
        }
        let mut guard = 0;
        while next.len() < target && guard < 16 * m {
            let c = rng.random_range(0..m);
            if !next.contains(&c) {
                next.push(c);
            }
            guard += 1;
        }
        if next.len() <= rank && rank >= rank_cap && sweep > 1 {
            return Err(CrossError::NotConverged {
                residual: residual / z_rms.max(f64::MIN_POSITIVE),
                rank,
                sweeps: sweep,
            });
        }
        cols = next;
        previous = Some(current);
    }
    Err(CrossError::NotConverged {
        residual: residual / z_rms.max(f64::MIN_POSITIVE),
        rank: cols.len(),
        sweeps: cfg.max_sweeps,
    })
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// `Z(i, j * n_out + q) = f(X_1(i, j), ..., X_k(i, j))[q]` over TT operands.
pub struct ElementwiseOracle<'a, F> {
    operands: &'a [&'a TTMatrix],
    n_out: usize,
    f: F,
    evaluations: AtomicUsize,
}

impl<'a, F> ElementwiseOracle<'a, F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(operands: &'a [&'a TTMatrix], n_out: usize, f: F) -> Result<Self, CrossError> {
        let first = operands
            .first()
            .ok_or_else(|| CrossError::Config("no operands".into()))?;
        for op in operands {
            if op.shape() != first.shape() {
                return Err(TtError::ShapeMismatch(format!("operands {:?} vs {:?}", first.shape(), op.shape())).into());
            }
        }
        if n_out == 0 {
            return Err(CrossError::Config("n_out must be positive".into()));
        }
        Ok(Self {
            operands,
            n_out,
            f,
            evaluations: AtomicUsize::new(0),
        })
    }

    /// Number of output values computed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    fn base_cols(&self) -> usize {
        self.operands[0].ncols()
    }

    fn point(&self, args: &[f64], i: usize, col: usize, out: &mut [f64]) -> Result<f64, CrossError> {
        (self.f)(args, out);
        let v = out[col % self.n_out];
        if !v.is_finite() {
            return Err(CrossError::Evaluation { row: i, col });
        }
        Ok(v)
    }
}

impl<F> MatrixOracle for ElementwiseOracle<'_, F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn nrows(&self) -> usize {
        self.operands[0].nrows()
    }

    fn ncols(&self) -> usize {
        self.base_cols() * self.n_out
    }

    fn eval_rows(&self, rows: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        let k = self.operands.len();
        let mb = self.base_cols();
        let blocks: Vec<Vec<f64>> = rows
            .par_iter()
            .map(|&i| {
                let vals: Vec<Vec<f64>> = self
                    .operands
                    .iter()
                    .map(|op| {
                        let mut r = vec![0.0; mb];
                        op.row_into(i, &mut r);
                        r
                    })
                    .collect();
                let mut args = vec![0.0; k];
                let mut out = vec![0.0; self.n_out];
                let mut row = vec![0.0; mb * self.n_out];
                for j in 0..mb {
                    for (a, v) in args.iter_mut().zip(&vals) {
                        *a = v[j];
                    }
                    (self.f)(&args, &mut out);
                    for (q, &o) in out.iter().enumerate() {
                        if !o.is_finite() {
                            return Err(CrossError::Evaluation {
                                row: i,
                                col: j * self.n_out + q,
                            });
                        }
                        row[j * self.n_out + q] = o;
                    }
                }
                Ok(row)
            })
            .collect::<Result<_, _>>()?;
        self.evaluations
            .fetch_add(rows.len() * mb * self.n_out, Ordering::Relaxed);
        Ok(DMatrix::from_fn(rows.len(), mb * self.n_out, |a, b| blocks[a][b]))
    }

    fn eval_cols(&self, cols: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        let n = self.nrows();
        let k = self.operands.len();
        let blocks: Vec<Vec<f64>> = cols
            .par_iter()
            .map(|&c| {
                let j = c / self.n_out;
                let vals: Vec<Vec<f64>> = self
                    .operands
                    .iter()
                    .map(|op| {
                        let mut v = vec![0.0; n];
                        op.col_into(j, &mut v);
                        v
                    })
                    .collect();
                let mut args = vec![0.0; k];
                let mut out = vec![0.0; self.n_out];
                (0..n)
                    .map(|i| {
                        for (a, v) in args.iter_mut().zip(&vals) {
                            *a = v[i];
                        }
                        self.point(&args, i, c, &mut out)
                    })
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<_, _>>()?;
        self.evaluations.fetch_add(cols.len() * n, Ordering::Relaxed);
        Ok(DMatrix::from_fn(n, cols.len(), |a, b| blocks[b][a]))
    }

    fn eval_entries(&self, entries: &[(usize, usize)]) -> Result<Vec<f64>, CrossError> {
        let k = self.operands.len();
        let vals = entries
            .par_iter()
            .map(|&(i, c)| {
                let j = c / self.n_out;
                let mut args = vec![0.0; k];
                for (a, op) in args.iter_mut().zip(self.operands) {
                    *a = op.entry(i, j);
                }
                let mut out = vec![0.0; self.n_out];
                self.point(&args, i, c, &mut out)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        self.evaluations.fetch_add(entries.len(), Ordering::Relaxed);
        Ok(vals)
    }
}

/// Column skeleton suggested by a TT guess of the output shape.
pub fn guess_columns(guess: &TTMatrix) -> Vec<usize> {
    let q = guess.core_y().transpose().qr().q();
    maxvol(&q).unwrap_or_default()
}

/// Cross interpolation of `Z(i, j) = f(X_1(i, j), ..., X_k(i, j))`.
pub fn cross_elementwise<F>(
    f: F,
    operands: &[&TTMatrix],
    guess: &TTMatrix,
    cfg: &CrossConfig,
) -> Result<TTMatrix, CrossError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let wrapped = |args: &[f64], out: &mut [f64]| out[0] = f(args);
    cross_elementwise_multi(wrapped, 1, operands, guess, cfg).map(|o| o.tt)
}

/// Multi-output cross: `f` writes `n_out` values, interleaved along columns
/// (base column major, output index minor). `guess` must have shape
/// `(n_x, n_y * n_out)`.
pub fn cross_elementwise_multi<F>(
    f: F,
    n_out: usize,
    operands: &[&TTMatrix],
    guess: &TTMatrix,
    cfg: &CrossConfig,
) -> Result<CrossOutcome, CrossError>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let oracle = ElementwiseOracle::new(operands, n_out, f)?;
    if guess.shape() != (oracle.nrows(), oracle.ncols()) {
        return Err(TtError::ShapeMismatch(format!(
            "guess {:?} vs output ({}, {})",
            guess.shape(),
            oracle.nrows(),
            oracle.ncols()
        ))
        .into());
    }
    cross_approximate(&oracle, &guess_columns(guess), cfg)
}

/// Dense oracle, mainly for tests and small problems.
pub struct DenseOracle<'a>(pub &'a DMatrix<f64>);

impl MatrixOracle for DenseOracle<'_> {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }

    fn ncols(&self) -> usize {
        self.0.ncols()
    }

    fn eval_rows(&self, rows: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        Ok(DMatrix::from_fn(rows.len(), self.0.ncols(), |a, j| {
            self.0[(rows[a], j)]
        }))
    }

    fn eval_cols(&self, cols: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        Ok(DMatrix::from_fn(self.0.nrows(), cols.len(), |i, b| {
            self.0[(i, cols[b])]
        }))
    }

    fn eval_entries(&self, entries: &[(usize, usize)]) -> Result<Vec<f64>, CrossError> {
        Ok(entries.iter().map(|&(i, j)| self.0[(i, j)]).collect())
    }
}

/// Oracle over a closure `f(i, j)`, e.g. an analytic field sampled on a grid.
pub struct FnOracle<F> {
    n: usize,
    m: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    pub fn new(n: usize, m: usize, f: F) -> Self {
        Self { n, m, f }
    }
}

impl<F> MatrixOracle for FnOracle<F>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.m
    }

    fn eval_rows(&self, rows: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        let vals: Vec<f64> = (0..self.m)
            .into_par_iter()
            .flat_map_iter(|j| rows.iter().map(move |&i| (i, j)))
            .map(|(i, j)| (self.f)(i, j))
            .collect();
        check_finite(DMatrix::from_vec(rows.len(), self.m, vals))
    }

    fn eval_cols(&self, cols: &[usize]) -> Result<DMatrix<f64>, CrossError> {
        let vals: Vec<f64> = cols
            .par_iter()
            .flat_map_iter(|&j| (0..self.n).map(move |i| (i, j)))
            .map(|(i, j)| (self.f)(i, j))
            .collect();
        check_finite(DMatrix::from_vec(self.n, cols.len(), vals))
    }

    fn eval_entries(&self, entries: &[(usize, usize)]) -> Result<Vec<f64>, CrossError> {
        entries
            .par_iter()
            .map(|&(i, j)| {
                let v = (self.f)(i, j);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(CrossError::Evaluation { row: i, col: j })
                }
            })
            .collect()
    }
}

fn check_finite(m: DMatrix<f64>) -> Result<DMatrix<f64>, CrossError> {
    match m.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(CrossError::Evaluation {
            row: k % m.nrows(),
            col: k / m.nrows(),
        }),
        None => Ok(m),
    }
}

/// Cross approximation of the closure-defined `n x m` matrix `f(i, j)`.
pub fn cross_fn<F>(n: usize, m: usize, f: F, cfg: &CrossConfig) -> Result<TTMatrix, CrossError>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    cross_approximate(&FnOracle::new(n, m, f), &[], cfg).map(|o| o.tt)
}

use nalgebra::DMatrix;

use super::{Forcing, SweError};
use crate::recon::GHOSTS;
use crate::tt::{Axis, BandedMap, TTMatrix};

/// Map from `n` interior cells to `n + 2 * GHOSTS` cells wrapped periodically.
pub fn periodic_pad_map(n: usize) -> BandedMap {
    let picks: Vec<Option<usize>> = (0..n + 2 * GHOSTS)
        .map(|a| Some((a + n * GHOSTS - GHOSTS) % n))
        .collect();
    BandedMap::selection(n, &picks)
}

/// Periodic padding on both axes.
pub fn pad_periodic_dense(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = q.shape();
    let g = GHOSTS as isize;
    DMatrix::from_fn(n + 2 * GHOSTS, m + 2 * GHOSTS, |a, b| {
        let i = (a as isize - g).rem_euclid(n as isize) as usize;
        let j = (b as isize - g).rem_euclid(m as isize) as usize;
        q[(i, j)]
    })
}

/// Doubly periodic domain with no external source.
#[derive(Debug, Clone, Copy, Default)]
pub struct Periodic;

impl Forcing for Periodic {
    fn ghost_dense(&self, _comp: usize, q: &DMatrix<f64>, _t: f64) -> Result<DMatrix<f64>, SweError> {
        Ok(pad_periodic_dense(q))
    }

    fn ghost_tt(&self, _comp: usize, q: &TTMatrix, _t: f64, _eps: f64) -> Result<TTMatrix, SweError> {
        let (n, m) = q.shape();
        q.apply_core_map(Axis::X, &periodic_pad_map(n))
            .and_then(|x| x.apply_core_map(Axis::Y, &periodic_pad_map(m)))
            .map_err(SweError::tt("periodic ghost fill"))
    }
}

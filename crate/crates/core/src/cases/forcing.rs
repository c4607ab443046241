use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{Boundary, CaseSpec, MmsParams};
use crate::cross::{cross_fn, CrossConfig};
use crate::recon::{gauss_rule, SchemeId, GHOSTS};
use crate::swe::{pad_periodic_dense, periodic_pad_map, ConservedState, Field, Forcing, Grid, SweError};
use crate::tt::{Axis, BandedMap, TTMatrix};

/// Tensor Gauss average of `f` over cell `(i, j)`; indices may lie outside the grid.
fn cell_average<F>(grid: &Grid, n_q: usize, i: isize, j: isize, f: &F) -> [f64; 3]
where
    F: Fn(f64, f64) -> [f64; 3],
{
    let rule = gauss_rule(n_q).expect("supported quadrature");
    let (dx, dy) = (grid.dx(), grid.dy());
    let (xc, yc) = (grid.x_center(i), grid.y_center(j));
    let mut acc = [0.0; 3];
    for (ox, wx) in rule.offsets.iter().zip(&rule.weights) {
        for (oy, wy) in rule.offsets.iter().zip(&rule.weights) {
            let v = f(xc + ox * dx, yc + oy * dy);
            for k in 0..3 {
                acc[k] += wx * wy * v[k];
            }
        }
    }
    acc
}

/// Cell averages of a three-component field on the whole grid.
pub fn cell_averages<F>(grid: &Grid, n_q: usize, f: F) -> [DMatrix<f64>; 3]
where
    F: Fn(f64, f64) -> [f64; 3] + Sync,
{
    let (n, m) = grid.shape();
    let cols: Vec<Vec<[f64; 3]>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| cell_average(grid, n_q, i as isize, j as isize, &f))
                .collect()
        })
        .collect();
    [0, 1, 2].map(|k| DMatrix::from_fn(n, m, |i, j| cols[j][i][k]))
}

/// Dense initial state from exact cell averages at `t = 0`.
pub fn init_cell_averages(spec: &CaseSpec, grid: &Grid, scheme: SchemeId) -> ConservedState {
    let avg = cell_averages(grid, scheme.n_quad(), |x, y| spec.exact_conserved(x, y, 0.0));
    ConservedState {
        model: spec.model,
        comps: avg.map(Field::Dense),
    }
}

/// TT initial state, compressed per component at `eps`.
pub fn init_tt(spec: &CaseSpec, grid: &Grid, scheme: SchemeId, eps: [f64; 3]) -> Result<ConservedState, SweError> {
    init_cell_averages(spec, grid, scheme).to_tt(eps)
}

/// Boundary ghosts and manufactured source of a case on a given grid.
#[derive(Debug, Clone)]
pub struct CaseForcing {
    pub spec: CaseSpec,
    pub grid: Grid,
    pub n_q: usize,
    mms: Option<MmsParams>,
    pub cross: CrossConfig,
}

impl CaseForcing {
    /// `with_source = false` drops the manufactured source even for that case.
    pub fn new(spec: &CaseSpec, grid: Grid, scheme: SchemeId, with_source: bool) -> Result<Self, SweError> {
        if spec.boundary[1] != Boundary::Periodic {
            return Err(SweError::Boundary(
                "only periodic boundaries are supported along y".into(),
            ));
        }
        let mms = if with_source { spec.mms_params() } else { None };
        Ok(Self {
            spec: spec.clone(),
            grid,
            n_q: scheme.n_quad(),
            mms,
            cross: CrossConfig::default(),
        })
    }

    pub fn has_source(&self) -> bool {
        self.mms.is_some()
    }

    fn exact_ghost(&self, comp: usize, i: isize, j: isize, t: f64) -> f64 {
        cell_average(&self.grid, self.n_q, i, j, &|x, y| self.spec.exact_conserved(x, y, t))[comp]
    }

    /// Cell index of ghost row `r` of the six-row x strip.
    fn strip_cell(&self, r: usize) -> isize {
        let g = GHOSTS as isize;
        if r < GHOSTS {
            r as isize - g
        } else {
            self.grid.n_x as isize + r as isize - g
        }
    }

    fn source_entry(&self, p: &MmsParams, i: usize, j: usize, t: f64) -> [f64; 3] {
        cell_average(&self.grid, self.n_q, i as isize, j as isize, &|x, y| {
            super::mms_source(p, x, y, t)
        })
    }
}

impl Forcing for CaseForcing {
    fn ghost_dense(&self, comp: usize, q: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, SweError> {
        let mut out = pad_periodic_dense(q);
        if self.spec.boundary[0] == Boundary::DirichletExact {
            let (n, m) = q.shape();
            let g = GHOSTS as isize;
            for r in 0..2 * GHOSTS {
                let a = if r < GHOSTS { r } else { n + r };
                let i = self.strip_cell(r);
                for b in 0..m + 2 * GHOSTS {
                    out[(a, b)] = self.exact_ghost(comp, i, b as isize - g, t);
                }
            }
        }
        Ok(out)
    }

    fn ghost_tt(&self, comp: usize, q: &TTMatrix, t: f64, eps: f64) -> Result<TTMatrix, SweError> {
        let (n, m) = q.shape();
        let e = SweError::tt;
        let y_map = periodic_pad_map(m);
        match self.spec.boundary[0] {
            Boundary::Periodic => q
                .apply_core_map(Axis::X, &periodic_pad_map(n))
                .and_then(|x| x.apply_core_map(Axis::Y, &y_map))
                .map_err(e("periodic ghost fill")),
            Boundary::DirichletExact => {
                let inject: Vec<Option<usize>> = (0..n + 2 * GHOSTS)
                    .map(|a| (GHOSTS..n + GHOSTS).contains(&a).then(|| a - GHOSTS))
                    .collect();
                let interior = q
                    .apply_core_map(Axis::X, &BandedMap::selection(n, &inject))
                    .and_then(|x| x.apply_core_map(Axis::Y, &y_map))
                    .map_err(e("ghost fill"))?;
                let g = GHOSTS as isize;
                let cols: Vec<Vec<f64>> = (0..m + 2 * GHOSTS)
                    .into_par_iter()
                    .map(|b| {
                        (0..2 * GHOSTS)
                            .map(|r| self.exact_ghost(comp, self.strip_cell(r), b as isize - g, t))
                            .collect()
                    })
                    .collect();
                let strip = DMatrix::from_fn(2 * GHOSTS, m + 2 * GHOSTS, |r, b| cols[b][r]);
                let strip = TTMatrix::from_full(&strip, eps).map_err(e("ghost strip"))?;
                let embed: Vec<Option<usize>> = (0..n + 2 * GHOSTS)
                    .map(|a| match a {
                        a if a < GHOSTS => Some(a),
                        a if a >= n + GHOSTS => Some(a - n),
                        _ => None,
                    })
                    .collect();
                let strip = strip
                    .apply_core_map(Axis::X, &BandedMap::selection(2 * GHOSTS, &embed))
                    .map_err(e("ghost strip"))?;
                Ok(interior.add(&strip).map_err(e("ghost fill"))?.round(eps))
            }
        }
    }

    fn source_dense(&self, t: f64) -> Result<Option<[DMatrix<f64>; 3]>, SweError> {
        Ok(self
            .mms
            .map(|p| cell_averages(&self.grid, self.n_q, |x, y| super::mms_source(&p, x, y, t))))
    }

    fn source_tt(&self, t: f64, eps: f64) -> Result<Option<[TTMatrix; 3]>, SweError> {
        let Some(p) = self.mms else { return Ok(None) };
        let (n, m) = self.grid.shape();
        let cfg = CrossConfig {
            eps,
            ..self.cross.clone()
        };
        let mut out = Vec::with_capacity(3);
        for k in 0..3 {
            let tt =
                cross_fn(n, m, |i, j| self.source_entry(&p, i, j, t)[k], &cfg).map_err(|source| SweError::Cross {
                    stage: "manufactured source",
                    source,
                })?;
            out.push(tt);
        }
        Ok(Some(out.try_into().expect("three components")))
    }
}

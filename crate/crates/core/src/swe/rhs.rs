use nalgebra::DMatrix;

use super::{
    max_wave_speed_dense, max_wave_speed_tt, physical_flux, physical_flux_tt, ConservedState, Field, Grid, Model,
    PhysParams, StepTolerances, SweError,
};
use crate::cross::CrossConfig;
use crate::recon::{gauss_rule, reconstruct_faces_dense, tt_recon_linear, tt_recon_weno, SchemeId, TtFaces};
use crate::tt::{Axis, BandedMap, TTMatrix};

/// Boundary treatment and external forcing of a problem.
pub trait Forcing: Sync {
    /// Pad component `comp` with ghost cells valid at time `t`.
    fn ghost_dense(&self, comp: usize, q: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, SweError>;

    fn ghost_tt(&self, comp: usize, q: &TTMatrix, t: f64, eps: f64) -> Result<TTMatrix, SweError>;

    /// Cell-averaged external source, if any.
    fn source_dense(&self, _t: f64) -> Result<Option<[DMatrix<f64>; 3]>, SweError> {
        Ok(None)
    }

    fn source_tt(&self, _t: f64, _eps: f64) -> Result<Option<[TTMatrix; 3]>, SweError> {
        Ok(None)
    }
}

/// Everything the semi-discrete operator needs besides the state.
pub struct RhsContext<'a> {
    pub model: Model,
    pub params: PhysParams,
    pub grid: Grid,
    pub scheme: SchemeId,
    pub forcing: &'a dyn Forcing,
    /// Sampling settings for WENO cross interpolation; `eps` is replaced per call.
    pub cross: CrossConfig,
    /// Densify and check the depth at every evaluation.
    pub check_depth: bool,
}

/// Time derivative of the cell averages at time `t`.
pub fn rhs(
    ctx: &RhsContext<'_>,
    state: &ConservedState,
    t: f64,
    tol: &StepTolerances,
) -> Result<ConservedState, SweError> {
    if state.model != ctx.model {
        return Err(SweError::State("state model differs from context".into()));
    }
    if state.shape() != ctx.grid.shape() {
        return Err(SweError::State(format!(
            "state shape {:?} vs grid {:?}",
            state.shape(),
            ctx.grid.shape()
        )));
    }
    if ctx.check_depth {
        state.check_positive_depth("rhs input")?;
    }
    let comps = match &state.comps {
        [Field::Dense(a), Field::Dense(b), Field::Dense(c)] => rhs_dense(ctx, [a, b, c], t)?.map(Field::Dense),
        [Field::Tt(a), Field::Tt(b), Field::Tt(c)] => rhs_tt(ctx, [a, b, c], t, tol)?.map(Field::Tt),
        _ => return Err(SweError::State("mixed representations".into())),
    };
    Ok(ConservedState {
        model: state.model,
        comps,
    })
}

fn spacings(grid: &Grid, axis: Axis) -> (f64, f64) {
    match axis {
        Axis::X => (grid.dx(), grid.dy()),
        Axis::Y => (grid.dy(), grid.dx()),
    }
}

fn rhs_dense(ctx: &RhsContext<'_>, q: [&DMatrix<f64>; 3], t: f64) -> Result<[DMatrix<f64>; 3], SweError> {
    let (n_x, n_y) = ctx.grid.shape();
    let aug = [0, 1, 2]
        .map(|k| ctx.forcing.ghost_dense(k, q[k], t))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let w = gauss_rule(ctx.scheme.n_quad()).expect("scheme rule").weights;
    let n_q = w.len();
    let mut out = [0, 1, 2].map(|_| DMatrix::zeros(n_x, n_y));

    for axis in [Axis::X, Axis::Y] {
        let (h, h_t) = spacings(&ctx.grid, axis);
        let mut faces = Vec::with_capacity(3);
        for (k, a) in aug.iter().enumerate() {
            faces.push(
                reconstruct_faces_dense(a, axis, ctx.scheme, h, h_t).map_err(|source| SweError::Recon {
                    component: k,
                    axis,
                    source,
                })?,
            );
        }
        let minus = [&faces[0].minus, &faces[1].minus, &faces[2].minus];
        let plus = [&faces[0].plus, &faces[1].plus, &faces[2].plus];
        let lambda = max_wave_speed_dense(ctx.model, &ctx.params, minus, plus, axis)?;
        let (rows, cols) = minus[0].shape();
        let mut num = [0, 1, 2].map(|_| DMatrix::zeros(rows, cols));
        for idx in 0..rows * cols {
            let um = [minus[0][idx], minus[1][idx], minus[2][idx]];
            let up = [plus[0][idx], plus[1][idx], plus[2][idx]];
            let fm = physical_flux(ctx.model, &ctx.params, um, axis);
            let fp = physical_flux(ctx.model, &ctx.params, up, axis);
            for k in 0..3 {
                num[k][idx] = super::llf(fm[k], fp[k], um[k], up[k], lambda);
            }
        }
        for k in 0..3 {
            let nk = &num[k];
            let o = &mut out[k];
            match axis {
                Axis::X => {
                    let flux = |f: usize, j: usize| -> f64 { (0..n_q).map(|m| w[m] * nk[(f, j * n_q + m)]).sum() };
                    for j in 0..n_y {
                        for i in 0..n_x {
                            o[(i, j)] -= (flux(i + 1, j) - flux(i, j)) / h;
                        }
                    }
                }
                Axis::Y => {
                    let flux = |i: usize, g: usize| -> f64 { (0..n_q).map(|m| w[m] * nk[(i * n_q + m, g)]).sum() };
                    for j in 0..n_y {
                        for i in 0..n_x {
                            o[(i, j)] -= (flux(i, j + 1) - flux(i, j)) / h;
                        }
                    }
                }
            }
        }
    }

    let f = ctx.params.f;
    if f != 0.0 {
        out[1] += q[2] * f;
        out[2] -= q[1] * f;
    }
    if let Some(s) = ctx.forcing.source_dense(t)? {
        for k in 0..3 {
            out[k] += &s[k];
        }
    }
    Ok(out)
}

/// Gauss-weighted sum of each group of `n_q` consecutive entries.
fn quadrature_map(n: usize, w: &[f64]) -> BandedMap {
    let n_q = w.len();
    let starts = (0..n).map(|j| j * n_q).collect();
    let coeffs = (0..n).flat_map(|_| w.iter().copied()).collect();
    BandedMap::new(n * n_q, n_q, starts, coeffs)
}

/// `-(F[i + 1] - F[i]) / h` from `n + 1` face values.
fn difference_map(n: usize, h: f64) -> BandedMap {
    let starts = (0..n).collect();
    let coeffs = (0..n).flat_map(|_| [1.0 / h, -1.0 / h]).collect();
    BandedMap::new(n + 1, 2, starts, coeffs)
}

fn rhs_tt(ctx: &RhsContext<'_>, q: [&TTMatrix; 3], t: f64, tol: &StepTolerances) -> Result<[TTMatrix; 3], SweError> {
    let (n_x, n_y) = ctx.grid.shape();
    let eps = tol.global;
    let aug = [0, 1, 2]
        .map(|k| ctx.forcing.ghost_tt(k, q[k], t, eps))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let w = gauss_rule(ctx.scheme.n_quad()).expect("scheme rule").weights;
    let cfg = CrossConfig {
        eps,
        ..ctx.cross.clone()
    };
    let e = SweError::tt;

    let mut parts: Vec<[TTMatrix; 3]> = Vec::with_capacity(2);
    for axis in [Axis::X, Axis::Y] {
        let (h, h_t) = spacings(&ctx.grid, axis);
        let mut faces: Vec<TtFaces> = Vec::with_capacity(3);
        for (k, a) in aug.iter().enumerate() {
            let f = if ctx.scheme.is_linear() {
                tt_recon_linear(a, axis, ctx.scheme)
            } else {
                tt_recon_weno(a, axis, h, h_t, &cfg)
            };
            faces.push(f.map_err(|source| SweError::Recon {
                component: k,
                axis,
                source,
            })?);
        }
        let minus = [&faces[0].minus, &faces[1].minus, &faces[2].minus];
        let plus = [&faces[0].plus, &faces[1].plus, &faces[2].plus];
        let lambda = max_wave_speed_tt(ctx.model, &ctx.params, minus, plus, axis)?;
        let fm = physical_flux_tt(ctx.model, &ctx.params, minus, axis, eps)?;
        let fp = physical_flux_tt(ctx.model, &ctx.params, plus, axis, eps)?;
        let (quad, diff) = match axis {
            Axis::X => (quadrature_map(n_y, &w), difference_map(n_x, h)),
            Axis::Y => (quadrature_map(n_x, &w), difference_map(n_y, h)),
        };
        let mut div = Vec::with_capacity(3);
        for k in 0..3 {
            let num = TTMatrix::linear_combination(&[
                (0.5, &fm[k]),
                (0.5, &fp[k]),
                (-0.5 * lambda, plus[k]),
                (0.5 * lambda, minus[k]),
            ])
            .map_err(e("numerical flux"))?
            .round(eps);
            let d = match axis {
                Axis::X => num
                    .apply_core_map(Axis::Y, &quad)
                    .and_then(|x| x.apply_core_map(Axis::X, &diff)),
                Axis::Y => num
                    .apply_core_map(Axis::X, &quad)
                    .and_then(|x| x.apply_core_map(Axis::Y, &diff)),
            }
            .map_err(e("flux divergence"))?;
            div.push(d);
        }
        parts.push(div.try_into().expect("three components"));
    }

    let source = ctx.forcing.source_tt(t, eps)?;
    let f = ctx.params.f;
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let mut terms: Vec<(f64, &TTMatrix)> = vec![(1.0, &parts[0][k]), (1.0, &parts[1][k])];
        if f != 0.0 {
            match k {
                1 => terms.push((f, q[2])),
                2 => terms.push((-f, q[1])),
                _ => {}
            }
        }
        if let Some(s) = &source {
            terms.push((1.0, &s[k]));
        }
        let sum = TTMatrix::linear_combination(&terms).map_err(e("tendency"))?;
        out.push(sum.round(tol.per_var[k]));
    }
    Ok(out.try_into().expect("three components"))
}

use nalgebra::DMatrix;

use super::{Model, PhysParams, SweError};
use crate::cross::{cross_elementwise, CrossConfig};
use crate::tt::{reciprocal_taylor, Axis, TTMatrix};

/// Physical flux `F` (x) or `G` (y) at one point.
pub fn physical_flux(model: Model, p: &PhysParams, u: [f64; 3], axis: Axis) -> [f64; 3] {
    match (model, axis) {
        (Model::Linear, Axis::X) => [p.depth * u[1], p.g * u[0], 0.0],
        (Model::Linear, Axis::Y) => [p.depth * u[2], 0.0, p.g * u[0]],
        (Model::Nonlinear, axis) => {
            let h = u[0];
            let pressure = 0.5 * p.g * h * h;
            match axis {
                Axis::X => [u[1], u[1] * u[1] / h + pressure, u[1] * u[2] / h],
                Axis::Y => [u[2], u[1] * u[2] / h, u[2] * u[2] / h + pressure],
            }
        }
    }
}

/// Flux in TT form. Linear fluxes are exact rescalings; nonlinear ones go
/// through the reciprocal of `h` and are rounded at `eps` after every product and sum.
pub fn physical_flux_tt(
    model: Model,
    p: &PhysParams,
    u: [&TTMatrix; 3],
    axis: Axis,
    eps: f64,
) -> Result<[TTMatrix; 3], SweError> {
    let (n, m) = u[0].shape();
    match model {
        Model::Linear => {
            let zero = TTMatrix::zeros(n, m);
            Ok(match axis {
                Axis::X => [u[1].scale(p.depth), u[0].scale(p.g), zero],
                Axis::Y => [u[2].scale(p.depth), zero, u[0].scale(p.g)],
            })
        }
        Model::Nonlinear => {
            let e = SweError::tt;
            let inv_h = reciprocal_taylor(u[0], eps).map_err(e("reciprocal of depth"))?;
            let (normal, other) = match axis {
                Axis::X => (u[1], u[2]),
                Axis::Y => (u[2], u[1]),
            };
            let vel = normal.hadamard(&inv_h).map_err(e("velocity"))?.round(eps);
            let nn = normal.hadamard(&vel).map_err(e("momentum flux"))?.round(eps);
            let no = other.hadamard(&vel).map_err(e("momentum flux"))?.round(eps);
            let hh = u[0].hadamard(u[0]).map_err(e("pressure"))?.round(eps);
            let normal_flux = nn.add(&hh.scale(0.5 * p.g)).map_err(e("momentum flux"))?.round(eps);
            Ok(match axis {
                Axis::X => [normal.clone(), normal_flux, no],
                Axis::Y => [normal.clone(), no, normal_flux],
            })
        }
    }
}

/// Largest characteristic speed at one point.
pub fn wave_speed(model: Model, p: &PhysParams, u: [f64; 3], axis: Axis) -> f64 {
    match model {
        Model::Linear => p.wave_speed(),
        Model::Nonlinear => {
            let q = match axis {
                Axis::X => u[1],
                Axis::Y => u[2],
            };
            (q / u[0]).abs() + (p.g * u[0]).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveSpeed {
    Const(f64),
    Field(TTMatrix),
}

/// Characteristic speed in TT form: a constant for the linear model, a
/// cross-interpolated field for the nonlinear one.
pub fn wave_speed_tt(
    model: Model,
    p: &PhysParams,
    u: [&TTMatrix; 3],
    axis: Axis,
    cfg: &CrossConfig,
) -> Result<WaveSpeed, SweError> {
    match model {
        Model::Linear => Ok(WaveSpeed::Const(p.wave_speed())),
        Model::Nonlinear => {
            let q = match axis {
                Axis::X => u[1],
                Axis::Y => u[2],
            };
            let g = p.g;
            let f = move |v: &[f64]| (v[1] / v[0]).abs() + (g * v[0]).sqrt();
            cross_elementwise(f, &[u[0], q], u[0], cfg)
                .map(WaveSpeed::Field)
                .map_err(|source| SweError::Cross {
                    stage: "wave speed",
                    source,
                })
        }
    }
}

/// Largest wave speed over both sides of a batch of face points.
pub fn max_wave_speed_dense(
    model: Model,
    p: &PhysParams,
    minus: [&DMatrix<f64>; 3],
    plus: [&DMatrix<f64>; 3],
    axis: Axis,
) -> Result<f64, SweError> {
    if model == Model::Linear {
        return Ok(p.wave_speed());
    }
    let mut best = 0.0f64;
    for side in [minus, plus] {
        for k in 0..side[0].len() {
            let h = side[0][k];
            if !(h > 0.0) {
                return Err(SweError::NonPositiveDepth {
                    min: h,
                    context: "face reconstruction",
                });
            }
            best = best.max(wave_speed(model, p, [h, side[1][k], side[2][k]], axis));
        }
    }
    Ok(best)
}

/// TT version of [`max_wave_speed_dense`], streaming rows without densifying.
pub fn max_wave_speed_tt(
    model: Model,
    p: &PhysParams,
    minus: [&TTMatrix; 3],
    plus: [&TTMatrix; 3],
    axis: Axis,
) -> Result<f64, SweError> {
    if model == Model::Linear {
        return Ok(p.wave_speed());
    }
    let q_idx = match axis {
        Axis::X => 1,
        Axis::Y => 2,
    };
    let m = minus[0].ncols();
    let mut h = vec![0.0; m];
    let mut q = vec![0.0; m];
    let mut best = 0.0f64;
    for side in [minus, plus] {
        for i in 0..side[0].nrows() {
            side[0].row_into(i, &mut h);
            side[q_idx].row_into(i, &mut q);
            for (hv, qv) in h.iter().zip(&q) {
                if !(*hv > 0.0) {
                    return Err(SweError::NonPositiveDepth {
                        min: *hv,
                        context: "face reconstruction",
                    });
                }
                best = best.max((qv / hv).abs() + (p.g * hv).sqrt());
            }
        }
    }
    Ok(best)
}

/// Local Lax-Friedrichs flux for one component.
pub fn llf(f_minus: f64, f_plus: f64, u_minus: f64, u_plus: f64, lambda: f64) -> f64 {
    0.5 * (f_minus + f_plus) - 0.5 * lambda * (u_plus - u_minus)
}

/// Coriolis source at one point: `(0, f v, -f u)` or `(0, f hv, -f hu)`.
pub fn coriolis_source(p: &PhysParams, u: [f64; 3]) -> [f64; 3] {
    [0.0, p.f * u[2], -p.f * u[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: PhysParams = PhysParams {
        g: 10.0,
        f: 1e-4,
        depth: 1000.0,
    };

    #[test]
    fn linear_flux_example() {
        assert_eq!(
            physical_flux(Model::Linear, &P, [1.0, 2.0, 3.0], Axis::X),
            [2000.0, 10.0, 0.0]
        );
        assert_eq!(
            physical_flux(Model::Linear, &P, [1.0, 2.0, 3.0], Axis::Y),
            [3000.0, 0.0, 10.0]
        );
    }

    #[test]
    fn nonlinear_rest_flux() {
        let f = physical_flux(Model::Nonlinear, &P, [1000.0, 0.0, 0.0], Axis::X);
        assert_eq!(f, [0.0, 0.5 * 10.0 * 1e6, 0.0]);
    }

    #[test]
    fn wave_speeds() {
        assert_eq!(wave_speed(Model::Linear, &P, [0.0; 3], Axis::X), 100.0);
        assert_eq!(wave_speed(Model::Nonlinear, &P, [1000.0, 0.0, 5.0], Axis::X), 100.0);
        assert_eq!(wave_speed(Model::Nonlinear, &P, [1000.0, -2000.0, 0.0], Axis::X), 102.0);
    }

    #[test]
    fn llf_examples() {
        let f = |u: f64| 0.5 * u * u;
        assert_eq!(llf(f(1.0), f(0.0), 1.0, 0.0, 1.0), 0.75);
        assert_eq!(llf(f(2.0), f(2.0), 2.0, 2.0, 7.0), f(2.0));
        assert_eq!(llf(3.0, 5.0, 1.0, 9.0, 0.0), 4.0);
    }

    #[test]
    fn coriolis_examples() {
        let s = coriolis_source(&P, [0.0, 2.0, 3.0]);
        assert!((s[1] - 3e-4).abs() < 1e-18 && (s[2] + 2e-4).abs() < 1e-18 && s[0] == 0.0);
        let p0 = PhysParams { f: 0.0, ..P };
        assert_eq!(coriolis_source(&p0, [1.0, 2.0, 3.0]), [0.0, 0.0, -0.0]);
    }

    fn smooth_state(n: usize) -> [DMatrix<f64>; 3] {
        let h = DMatrix::from_fn(n, n, |i, j| {
            1000.0 + 50.0 * ((i as f64) * 0.2).sin() * ((j as f64) * 0.1).cos()
        });
        let hu = DMatrix::from_fn(n, n, |i, j| 300.0 * ((i + 2 * j) as f64 * 0.05).cos());
        let hv = DMatrix::from_fn(n, n, |i, j| 100.0 * ((i as f64) * 0.07 - (j as f64) * 0.13).sin());
        [h, hu, hv]
    }

    #[test]
    fn nonlinear_tt_flux_matches_dense() {
        let n = 40;
        let d = smooth_state(n);
        let tt = [0, 1, 2].map(|k| TTMatrix::from_full(&d[k], 1e-14).unwrap());
        let eps = 1e-10;
        for axis in [Axis::X, Axis::Y] {
            let f = physical_flux_tt(Model::Nonlinear, &P, [&tt[0], &tt[1], &tt[2]], axis, eps).unwrap();
            for k in 0..3 {
                let want = DMatrix::from_fn(n, n, |i, j| {
                    physical_flux(Model::Nonlinear, &P, [d[0][(i, j)], d[1][(i, j)], d[2][(i, j)]], axis)[k]
                });
                let diff = f[k].to_full() - &want;
                let rms = (diff.norm_squared() / (n * n) as f64).sqrt();
                let scale = (want.norm_squared() / (n * n) as f64).sqrt();
                assert!(rms <= 10.0 * eps * scale, "axis {axis:?} comp {k}: {rms:e}");
            }
        }
    }

    #[test]
    fn nonlinear_wave_speed_field_matches_dense() {
        let n = 40;
        let mut d = smooth_state(n);
        d[1] = d[1].map(|v| v.abs() + 10.0);
        let tt = [0, 1, 2].map(|k| TTMatrix::from_full(&d[k], 1e-14).unwrap());
        let eps = 1e-10;
        let w = wave_speed_tt(
            Model::Nonlinear,
            &P,
            [&tt[0], &tt[1], &tt[2]],
            Axis::X,
            &CrossConfig::with_eps(eps),
        )
        .unwrap();
        let WaveSpeed::Field(w) = w else {
            panic!("expected field")
        };
        let want = DMatrix::from_fn(n, n, |i, j| {
            wave_speed(Model::Nonlinear, &P, [d[0][(i, j)], d[1][(i, j)], 0.0], Axis::X)
        });
        assert!((w.to_full().max() - want.max()).abs() <= 10.0 * eps * want.max());
        let s = max_wave_speed_tt(
            Model::Nonlinear,
            &P,
            [&tt[0], &tt[1], &tt[2]],
            [&tt[0], &tt[1], &tt[2]],
            Axis::X,
        )
        .unwrap();
        assert!((s - want.max()).abs() <= 1e-9 * want.max());
        assert_eq!(
            wave_speed_tt(
                Model::Linear,
                &P,
                [&tt[0], &tt[1], &tt[2]],
                Axis::Y,
                &CrossConfig::default()
            )
            .unwrap(),
            WaveSpeed::Const(100.0)
        );
    }
}

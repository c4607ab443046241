//! Verification cases: Kelvin wave, inertia-gravity wave, barotropic tide and
//! a manufactured nonlinear solution, with their reference scales.

mod exact;
mod forcing;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::recon::SchemeId;
use crate::swe::{Model, PhysParams};

pub use exact::{mms_fields, mms_source, MmsParams};
pub use forcing::{cell_averages, init_cell_averages, init_tt, CaseForcing};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("reference scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("unknown case '{0}' (expected kelvin, inertia-gravity, barotropic-tide or manufactured)")]
    UnknownCase(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    Kelvin,
    InertiaGravity,
    BarotropicTide,
    Manufactured,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::Kelvin,
        CaseId::InertiaGravity,
        CaseId::BarotropicTide,
        CaseId::Manufactured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Kelvin => "kelvin",
            CaseId::InertiaGravity => "inertia-gravity",
            CaseId::BarotropicTide => "barotropic-tide",
            CaseId::Manufactured => "manufactured",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = CaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "kelvin" => Ok(CaseId::Kelvin),
            "inertia-gravity" => Ok(CaseId::InertiaGravity),
            "barotropic-tide" => Ok(CaseId::BarotropicTide),
            "manufactured" | "mms" => Ok(CaseId::Manufactured),
            _ => Err(CaseError::UnknownCase(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Ghost cells hold exact-solution cell averages.
    DirichletExact,
}

/// Characteristic scales of one case (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefScales {
    pub length: f64,
    pub velocity: f64,
    pub height: f64,
}

impl RefScales {
    pub fn new(length: f64, velocity: f64, height: f64) -> Result<Self, CaseError> {
        for v in [length, velocity, height] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CaseError::InvalidScale(v));
            }
        }
        Ok(Self {
            length,
            velocity,
            height,
        })
    }

    pub fn time(&self) -> f64 {
        self.length / self.velocity
    }

    pub fn gravity(&self) -> f64 {
        self.velocity * self.velocity / self.height
    }

    pub fn frequency(&self) -> f64 {
        self.velocity / self.length
    }

    pub fn nondim_params(&self, p: &PhysParams) -> PhysParams {
        PhysParams {
            g: p.g / self.gravity(),
            f: p.f / self.frequency(),
            depth: p.depth / self.height,
        }
    }

    pub fn redim_params(&self, p: &PhysParams) -> PhysParams {
        PhysParams {
            g: p.g * self.gravity(),
            f: p.f * self.frequency(),
            depth: p.depth * self.height,
        }
    }

    /// `(x, y, t)` to nondimensional coordinates.
    pub fn nondim_coords(&self, c: [f64; 3]) -> [f64; 3] {
        [c[0] / self.length, c[1] / self.length, c[2] / self.time()]
    }

    pub fn redim_coords(&self, c: [f64; 3]) -> [f64; 3] {
        [c[0] * self.length, c[1] * self.length, c[2] * self.time()]
    }

    /// `(eta or h, u, v)` to nondimensional values.
    pub fn nondim_primitive(&self, q: [f64; 3]) -> [f64; 3] {
        [q[0] / self.height, q[1] / self.velocity, q[2] / self.velocity]
    }

    pub fn redim_primitive(&self, q: [f64; 3]) -> [f64; 3] {
        [q[0] * self.height, q[1] * self.velocity, q[2] * self.velocity]
    }
}

/// One wave component: amplitude (m) and wavenumbers (1/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveMode {
    pub amp: f64,
    pub kx: f64,
    pub ky: f64,
}

/// Everything that defines a verification case, stored dimensionally.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub id: CaseId,
    pub model: Model,
    /// Side of the square domain `[0, L]^2` (m).
    pub length: f64,
    /// Final time (s).
    pub t_final: f64,
    pub phys: PhysParams,
    pub scales: RefScales,
    pub modes: Vec<WaveMode>,
    /// Velocity amplitude of the manufactured solution (m/s).
    pub u_hat: f64,
    /// Boundary treatment along x and y.
    pub boundary: [Boundary; 2],
    /// Time step ratios indexed like [`SchemeId::ALL`]: `dt / dx` for
    /// Upwind3, `dt / dx^(5/3)` for the fifth-order schemes.
    pub dt_ratio: [f64; 3],
    pub c_eps: [f64; 3],
}

const DEFAULT_PHYS: PhysParams = PhysParams {
    g: 10.0,
    f: 1e-4,
    depth: 1000.0,
};

fn scheme_index(s: SchemeId) -> usize {
    match s {
        SchemeId::Upwind3 => 0,
        SchemeId::Upwind5 => 1,
        SchemeId::Weno5 => 2,
    }
}

impl CaseSpec {
    pub fn get(id: CaseId) -> Self {
        let hour = 3600.0;
        match id {
            CaseId::Kelvin => {
                let l = 5e6;
                let k = 2.0 * PI / l;
                Self {
                    id,
                    model: Model::Linear,
                    length: l,
                    t_final: 3.0 * hour,
                    phys: DEFAULT_PHYS,
                    scales: RefScales::new(5e6, 5e-3, 0.1).unwrap(),
                    modes: vec![
                        WaveMode {
                            amp: 1e-4,
                            kx: 0.0,
                            ky: k,
                        },
                        WaveMode {
                            amp: 2e-4,
                            kx: 0.0,
                            ky: 2.0 * k,
                        },
                    ],
                    u_hat: 0.0,
                    boundary: [Boundary::DirichletExact, Boundary::Periodic],
                    dt_ratio: [5e-5, 2.5e-4, 2.5e-4],
                    c_eps: [1.0, 1.0, 1000.0],
                }
            }
            CaseId::InertiaGravity => {
                let l = 1e7;
                let k = 2.0 * PI / l;
                Self {
                    id,
                    model: Model::Linear,
                    length: l,
                    t_final: 3.0 * hour,
                    phys: DEFAULT_PHYS,
                    scales: RefScales::new(1e7, 1.622e-3, 0.2).unwrap(),
                    modes: vec![
                        WaveMode { amp: 0.1, kx: k, ky: k },
                        WaveMode {
                            amp: 0.2,
                            kx: 2.0 * k,
                            ky: 2.0 * k,
                        },
                    ],
                    u_hat: 0.0,
                    boundary: [Boundary::Periodic, Boundary::Periodic],
                    dt_ratio: [1e-4, 1e-3, 1e-3],
                    c_eps: [1.0, 1.0, 500.0],
                }
            }
            CaseId::BarotropicTide => {
                let l = 25e4;
                Self {
                    id,
                    model: Model::Linear,
                    length: l,
                    t_final: 0.5 * hour,
                    phys: PhysParams {
                        depth: 200.0,
                        ..DEFAULT_PHYS
                    },
                    scales: RefScales::new(25e4, 3.163e-3, 0.2).unwrap(),
                    modes: vec![
                        WaveMode {
                            amp: 0.2,
                            kx: 2.0 * PI / (4.0 * l / 5.0),
                            ky: 0.0,
                        },
                        WaveMode {
                            amp: 0.4,
                            kx: 2.0 * PI / (4.0 * l / 9.0),
                            ky: 0.0,
                        },
                    ],
                    u_hat: 0.0,
                    boundary: [Boundary::DirichletExact, Boundary::Periodic],
                    dt_ratio: [2.5e-4, 5e-4, 5e-4],
                    c_eps: [1.0, 1.0, 1.0],
                }
            }
            CaseId::Manufactured => {
                let l = 1e7;
                let k = 2.0 * PI / l;
                Self {
                    id,
                    model: Model::Nonlinear,
                    length: l,
                    t_final: 3.0 * hour,
                    phys: DEFAULT_PHYS,
                    scales: RefScales::new(1e7, 1e-2, 500.0).unwrap(),
                    modes: vec![WaveMode {
                        amp: 1e-2,
                        kx: k,
                        ky: k,
                    }],
                    u_hat: 1e-2,
                    boundary: [Boundary::Periodic, Boundary::Periodic],
                    dt_ratio: [5e-5, 5e-3, 5e-3],
                    c_eps: [1e-4, 1.0, 1.0],
                }
            }
        }
    }

    pub fn dt_ratio(&self, scheme: SchemeId) -> f64 {
        self.dt_ratio[scheme_index(scheme)]
    }

    pub fn c_eps(&self, scheme: SchemeId) -> f64 {
        self.c_eps[scheme_index(scheme)]
    }

    /// Nondimensional time step for cell size `dx` (nondimensional).
    pub fn time_step(&self, scheme: SchemeId, dx: f64, ratio: Option<f64>) -> f64 {
        let r = ratio.unwrap_or_else(|| self.dt_ratio(scheme));
        match scheme {
            SchemeId::Upwind3 => r * dx,
            SchemeId::Upwind5 | SchemeId::Weno5 => r * dx.powf(5.0 / 3.0),
        }
    }

    pub fn nondim_params(&self) -> PhysParams {
        self.scales.nondim_params(&self.phys)
    }

    pub fn t_final_nd(&self) -> f64 {
        self.t_final / self.scales.time()
    }

    /// Side of the nondimensional domain.
    pub fn length_nd(&self) -> f64 {
        self.length / self.scales.length
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary.iter().all(|b| *b == Boundary::Periodic)
    }

    /// Exact `(eta, u, v)` in SI units at a dimensional point.
    pub fn exact_dimensional(&self, x: f64, y: f64, t: f64) -> [f64; 3] {
        let p = &self.phys;
        let c = p.wave_speed();
        let mut out = [0.0; 3];
        match self.id {
            CaseId::Kelvin => {
                let decay = (-x / p.rossby_radius()).exp();
                let s: f64 = self.modes.iter().map(|m| m.amp * (m.ky * (y + c * t)).sin()).sum();
                out[0] = -p.depth * s * decay;
                out[2] = c * s * decay;
            }
            CaseId::InertiaGravity => {
                for m in &self.modes {
                    let w = (c * c * (m.kx * m.kx + m.ky * m.ky) + p.f * p.f).sqrt();
                    let th = m.kx * x + m.ky * y - w * t;
                    let (s, co) = th.sin_cos();
                    let a = p.g * m.amp / (w * w - p.f * p.f);
                    out[0] += m.amp * co;
                    out[1] += a * (w * m.kx * co - p.f * m.ky * s);
                    out[2] += a * (w * m.ky * co + p.f * m.kx * s);
                }
            }
            CaseId::BarotropicTide => {
                for m in &self.modes {
                    let k = m.kx;
                    let w = (p.g * p.depth * k * k + p.f * p.f).sqrt();
                    let a = p.g * m.amp * k / (w * w - p.f * p.f);
                    let (sx, cx) = (k * x).sin_cos();
                    let (st, ct) = (w * t).sin_cos();
                    out[0] += m.amp * cx * ct;
                    out[1] += a * w * sx * st;
                    out[2] += a * p.f * sx * ct;
                }
            }
            CaseId::Manufactured => {
                let m = &self.modes[0];
                let w = c * (m.kx * m.kx + m.ky * m.ky).sqrt();
                let th = m.kx * x + m.ky * y - w * t;
                out[0] = m.amp * th.sin();
                out[1] = self.u_hat * th.cos();
            }
        }
        out
    }

    /// Exact `(eta, u, v)` at a nondimensional point, nondimensional.
    pub fn exact_solution(&self, x: f64, y: f64, t: f64) -> [f64; 3] {
        let [xs, ys, ts] = self.scales.redim_coords([x, y, t]);
        self.scales.nondim_primitive(self.exact_dimensional(xs, ys, ts))
    }

    /// Exact conserved variables: `(eta, u, v)` or `(h, hu, hv)`.
    pub fn exact_conserved(&self, x: f64, y: f64, t: f64) -> [f64; 3] {
        let q = self.exact_solution(x, y, t);
        match self.model {
            Model::Linear => q,
            Model::Nonlinear => {
                let h = self.nondim_params().depth + q[0];
                [h, h * q[1], h * q[2]]
            }
        }
    }

    /// Parameters of the manufactured solution in nondimensional form.
    pub fn mms_params(&self) -> Option<MmsParams> {
        if self.id != CaseId::Manufactured {
            return None;
        }
        let s = &self.scales;
        let p = self.nondim_params();
        let m = &self.modes[0];
        let (kx, ky) = (m.kx * s.length, m.ky * s.length);
        Some(MmsParams {
            a: m.amp / s.height,
            b: self.u_hat / s.velocity,
            depth: p.depth,
            kx,
            ky,
            omega: p.wave_speed() * (kx * kx + ky * ky).sqrt(),
            g: p.g,
            f: p.f,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scale_arithmetic() {
        let k = CaseSpec::get(CaseId::Kelvin);
        assert!((k.nondim_params().wave_speed() - 2e4).abs() < 1e-8);
        assert!((k.nondim_params().rossby_radius() - 0.2).abs() < 1e-12);
        let m = CaseSpec::get(CaseId::Manufactured);
        assert!((m.nondim_params().g - 5e7).abs() < 1e-6);
        assert_eq!(m.scales.time(), 1e9);
        assert!(RefScales::new(0.0, 1.0, 1.0).is_err());
        for id in CaseId::ALL {
            assert!((CaseSpec::get(id).length_nd() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trips() {
        let s = CaseSpec::get(CaseId::BarotropicTide).scales;
        let p = CaseSpec::get(CaseId::BarotropicTide).phys;
        let back = s.redim_params(&s.nondim_params(&p));
        assert!((back.g - p.g).abs() < 1e-14 * p.g);
        assert!((back.f - p.f).abs() < 1e-14 * p.f);
        assert!((back.depth - p.depth).abs() < 1e-14 * p.depth);
        let q = [0.3, -1e-3, 4e-2];
        let r = s.redim_primitive(s.nondim_primitive(q));
        let c = s.redim_coords(s.nondim_coords([1e4, 2e5, 1800.0]));
        for (a, b) in q.iter().zip(&r).chain([1e4, 2e5, 1800.0].iter().zip(&c)) {
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn exact_point_values() {
        let k = CaseSpec::get(CaseId::Kelvin);
        assert_eq!(k.exact_dimensional(0.0, 0.0, 0.0), [-0.0, 0.0, 0.0]);
        let ig = CaseSpec::get(CaseId::InertiaGravity);
        assert!((ig.exact_dimensional(0.0, 0.0, 0.0)[0] - 0.3).abs() < 1e-15);
        let m = CaseSpec::get(CaseId::Manufactured);
        for (x, y, t) in [(0.1, 0.7, 0.0), (0.5, 0.2, 3e-6)] {
            assert_eq!(m.exact_solution(x, y, t)[2], 0.0);
        }
    }

    #[test]
    fn parse_ids() {
        for id in CaseId::ALL {
            assert_eq!(id.name().parse::<CaseId>().unwrap(), id);
        }
        assert_eq!("inertia_gravity".parse::<CaseId>().unwrap(), CaseId::InertiaGravity);
        assert!("tsunami".parse::<CaseId>().is_err());
    }

    /// Sixth-order central difference.
    fn d6(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let c = [1.0 / 60.0, -3.0 / 20.0, 0.75];
        (0..3)
            .map(|k| c[k] * (f(x + (3 - k) as f64 * h) - f(x - (3 - k) as f64 * h)))
            .sum::<f64>()
            / h
    }

    #[test]
    fn linear_exact_solutions_satisfy_the_equations() {
        for id in [CaseId::Kelvin, CaseId::InertiaGravity, CaseId::BarotropicTide] {
            let c = CaseSpec::get(id);
            let p = c.nondim_params();
            let t_end = c.t_final_nd();
            let ht = 1e-3 * t_end;
            let hx = 1e-3;
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for a in 0..10 {
                for b in 0..10 {
                    for s in 0..3 {
                        let (x, y, t) = (0.05 + 0.09 * a as f64, 0.03 + 0.095 * b as f64, t_end * s as f64 / 2.0);
                        let q = c.exact_solution(x, y, t);
                        let dt = |k: usize| d6(|tt| c.exact_solution(x, y, tt)[k], t, ht);
                        let dx = |k: usize| d6(|xx| c.exact_solution(xx, y, t)[k], x, hx);
                        let dy = |k: usize| d6(|yy| c.exact_solution(x, yy, t)[k], y, hx);
                        let r = [
                            dt(0) + p.depth * (dx(1) + dy(2)),
                            dt(1) + p.g * dx(0) - p.f * q[2],
                            dt(2) + p.g * dy(0) + p.f * q[1],
                        ];
                        let terms = [dt(0).abs(), dt(1).abs(), dt(2).abs(), (p.f * q[1]).abs()];
                        scale = terms.iter().copied().fold(scale, f64::max);
                        worst = r.iter().map(|v| v.abs()).fold(worst, f64::max);
                    }
                }
            }
            assert!(
                worst <= 1e-8 * scale,
                "{id}: residual {worst:e} vs term scale {scale:e}"
            );
        }
    }
}

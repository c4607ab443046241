//! Shallow water physics, the semi-discrete finite-volume operator and
//! SSP-RK3 stepping, for dense and tensor-train fields.

mod flux;
mod ghost;
mod rhs;
mod time;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::cross::CrossError;
use crate::recon::ReconError;
use crate::tt::{Axis, TTMatrix, TtError};

pub use flux::{
    coriolis_source, llf, max_wave_speed_dense, max_wave_speed_tt, physical_flux, physical_flux_tt, wave_speed,
    wave_speed_tt, WaveSpeed,
};
pub use ghost::{pad_periodic_dense, periodic_pad_map, Periodic};
pub use rhs::{rhs, Forcing, RhsContext};
pub use time::{ssprk3, ssprk3_with};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweError {
    #[error("non-positive depth {min:.3e} in {context}")]
    NonPositiveDepth { min: f64, context: &'static str },
    #[error("reconstruction of component {component} along {axis:?}: {source}")]
    Recon {
        component: usize,
        axis: Axis,
        #[source]
        source: ReconError,
    },
    #[error("{stage}: {source}")]
    Tt {
        stage: &'static str,
        #[source]
        source: TtError,
    },
    #[error("{stage}: {source}")]
    Cross {
        stage: &'static str,
        #[source]
        source: CrossError,
    },
    #[error("state mismatch: {0}")]
    State(String),
    #[error("boundary: {0}")]
    Boundary(String),
}

impl SweError {
    pub(crate) fn tt(stage: &'static str) -> impl FnOnce(TtError) -> SweError {
        move |source| SweError::Tt { stage, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Unknowns `(eta, u, v)`.
    Linear,
    /// Unknowns `(h, hu, hv)`.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub g: f64,
    pub f: f64,
    /// Mean rest depth.
    pub depth: f64,
}

impl PhysParams {
    pub fn wave_speed(&self) -> f64 {
        (self.g * self.depth).sqrt()
    }

    pub fn rossby_radius(&self) -> f64 {
        self.wave_speed() / self.f
    }
}

/// Uniform cell-centred grid on `[0, lx] x [0, ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_x: usize,
    pub n_y: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid {
    pub fn square(n: usize, l: f64) -> Self {
        Self {
            n_x: n,
            n_y: n,
            lx: l,
            ly: l,
        }
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.n_y as f64
    }

    pub fn x_center(&self, i: isize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: isize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Dense,
    Tt,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Dense => "dense",
            Representation::Tt => "tt",
        })
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(Representation::Dense),
            "tt" => Ok(Representation::Tt),
            other => Err(format!("unknown representation '{other}' (expected dense or tt)")),
        }
    }
}

/// A 2D field in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Dense(DMatrix<f64>),
    Tt(TTMatrix),
}

impl Field {
    pub fn representation(&self) -> Representation {
        match self {
            Field::Dense(_) => Representation::Dense,
            Field::Tt(_) => Representation::Tt,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Field::Dense(d) => d.shape(),
            Field::Tt(t) => t.shape(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Field::Dense(d) => d.clone(),
            Field::Tt(t) => t.to_full(),
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            Field::Dense(_) => None,
            Field::Tt(t) => Some(t.rank()),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        match self {
            Field::Dense(d) => d.norm(),
            Field::Tt(t) => t.norm_fro(),
        }
    }

    pub fn sum(&self) -> f64 {
        match self {
            Field::Dense(d) => d.sum(),
            Field::Tt(t) => t.sum_entries(),
        }
    }

    /// `sum_k a_k * f_k`, rounded at `eps` for TT fields.
    pub fn combine(terms: &[(f64, &Field)], eps: f64) -> Result<Field, SweError> {
        let first = terms
            .first()
            .ok_or_else(|| SweError::State("empty combination".into()))?
            .1;
        match first {
            Field::Dense(d0) => {
                let mut acc = DMatrix::zeros(d0.nrows(), d0.ncols());
                for (a, f) in terms {
                    match f {
                        Field::Dense(d) if d.shape() == acc.shape() => acc += d * *a,
                        _ => return Err(SweError::State("mixed or mismatched fields".into())),
                    }
                }
                Ok(Field::Dense(acc))
            }
            Field::Tt(_) => {
                let tts: Vec<(f64, &TTMatrix)> = terms
                    .iter()
                    .map(|(a, f)| match f {
                        Field::Tt(t) => Ok((*a, t)),
                        Field::Dense(_) => Err(SweError::State("mixed field representations".into())),
                    })
                    .collect::<Result<_, _>>()?;
                let sum = TTMatrix::linear_combination(&tts).map_err(SweError::tt("combination"))?;
                Ok(Field::Tt(sum.round(eps)))
            }
        }
    }
}

/// Three conserved components sharing a grid and a representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState {
    pub model: Model,
    pub comps: [Field; 3],
}

impl ConservedState {
    pub fn new(model: Model, comps: [Field; 3]) -> Result<Self, SweError> {
        let rep = comps[0].representation();
        let shape = comps[0].shape();
        if comps.iter().any(|c| c.representation() != rep || c.shape() != shape) {
            return Err(SweError::State("components differ in shape or representation".into()));
        }
        Ok(Self { model, comps })
    }

    pub fn representation(&self) -> Representation {
        self.comps[0].representation()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.comps[0].shape()
    }

    pub fn ranks(&self) -> Option<[usize; 3]> {
        match self.representation() {
            Representation::Dense => None,
            Representation::Tt => Some([0, 1, 2].map(|k| self.comps[k].rank().unwrap_or(0))),
        }
    }

    pub fn to_dense(&self) -> Self {
        Self {
            model: self.model,
            comps: [0, 1, 2].map(|k| Field::Dense(self.comps[k].to_dense())),
        }
    }

    pub fn to_tt(&self, eps: [f64; 3]) -> Result<Self, SweError> {
        let mut out = Vec::with_capacity(3);
        for (k, c) in self.comps.iter().enumerate() {
            out.push(match c {
                Field::Tt(t) => Field::Tt(t.round(eps[k])),
                Field::Dense(d) => Field::Tt(TTMatrix::from_full(d, eps[k]).map_err(SweError::tt("compression"))?),
            });
        }
        let comps: [Field; 3] = out.try_into().expect("three components");
        Ok(Self {
            model: self.model,
            comps,
        })
    }

    /// Smallest depth on the interior (nonlinear model only), densifying TT fields.
    pub fn check_positive_depth(&self, context: &'static str) -> Result<(), SweError> {
        if self.model == Model::Nonlinear {
            let h = self.comps[0].to_dense();
            let min = h.min();
            if !(min > 0.0) {
                return Err(SweError::NonPositiveDepth { min, context });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpsMode {
    /// One tolerance from the largest component norm.
    Global,
    /// Each component scaled by its own norm and clipped.
    PerVariable,
}

pub const EPS_CLIP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsPolicy {
    pub c_eps: f64,
    pub order: u32,
    pub volume: f64,
    pub clip: f64,
    pub mode: EpsMode,
}

impl EpsPolicy {
    pub fn new(c_eps: f64, order: u32, volume: f64) -> Self {
        Self {
            c_eps,
            order,
            volume,
            clip: EPS_CLIP,
            mode: EpsMode::PerVariable,
        }
    }

    fn numerator(&self, dx: f64) -> f64 {
        self.c_eps * self.volume.sqrt() * dx.powf(self.order as f64 - 0.5)
    }

    /// Global tolerance from the largest component norm; the clip value if all are zero.
    pub fn global(&self, norms: &[f64], dx: f64) -> f64 {
        let max = norms.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return self.clip;
        }
        self.numerator(dx) / max
    }
}

/// Tolerance for one component at the start of a step.
pub fn eps_for_variable(norm: f64, all_norms: &[f64], policy: &EpsPolicy, dx: f64) -> f64 {
    match policy.mode {
        EpsMode::Global => policy.global(all_norms, dx),
        EpsMode::PerVariable => {
            if norm == 0.0 {
                policy.clip
            } else {
                policy.clip.min(policy.numerator(dx) / norm)
            }
        }
    }
}

/// Tolerances frozen for one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTolerances {
    /// Stage and tendency rounding of each component.
    pub per_var: [f64; 3],
    /// Every other rounding, cross and reciprocal.
    pub global: f64,
}

impl StepTolerances {
    pub fn max(&self) -> f64 {
        self.per_var.iter().copied().fold(self.global, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.per_var.iter().copied().fold(self.global, f64::min)
    }

    /// Compute tolerances for `state`; `calls` counts per-component evaluations.
    pub fn for_state(state: &ConservedState, policy: &EpsPolicy, dx: f64, calls: &mut usize) -> Self {
        let norms = [0, 1, 2].map(|k| state.comps[k].norm_fro());
        let per_var = [0, 1, 2].map(|k| {
            *calls += 1;
            eps_for_variable(norms[k], &norms, policy, dx)
        });
        Self {
            per_var,
            global: policy.global(&norms, dx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_derived_values() {
        let p = PhysParams {
            g: 10.0,
            f: 1e-4,
            depth: 1000.0,
        };
        assert_eq!(p.wave_speed(), 100.0);
        assert!((p.rossby_radius() - 1e6).abs() < 1e-6);
    }

    #[test]
    fn eps_formulas() {
        let policy = EpsPolicy::new(1.0, 5, 1.0);
        let e = eps_for_variable(1.0, &[1.0], &policy, 1.0 / 80.0);
        assert!((e - (1.0f64 / 80.0).powf(4.5)).abs() < 1e-20);
        assert!((e - 2.7296e-9).abs() < 1e-13);
        let e2 = eps_for_variable(2.0, &[2.0], &policy, 1.0 / 80.0);
        assert!((e2 - e / 2.0).abs() < 1e-22);
        assert_eq!(eps_for_variable(0.0, &[0.0, 1.0], &policy, 0.1), 1e-3);
        assert_eq!(eps_for_variable(1e-30, &[1.0], &policy, 0.1), 1e-3);
        let global = EpsPolicy {
            mode: EpsMode::Global,
            ..policy
        };
        assert_eq!(eps_for_variable(0.0, &[0.0, 0.0], &global, 0.1), 1e-3);
        let g = eps_for_variable(0.5, &[0.5, 4.0], &global, 0.1);
        assert!((g - 0.1f64.powf(4.5) / 4.0).abs() < 1e-20);
    }

    #[test]
    fn tolerances_count_calls() {
        let s = ConservedState::new(
            Model::Linear,
            [
                Field::Dense(DMatrix::from_element(4, 4, 1.0)),
                Field::Dense(DMatrix::zeros(4, 4)),
                Field::Dense(DMatrix::from_element(4, 4, 2.0)),
            ],
        )
        .unwrap();
        let mut calls = 0;
        let t = StepTolerances::for_state(&s, &EpsPolicy::new(1.0, 3, 1.0), 0.05, &mut calls);
        assert_eq!(calls, 3);
        assert_eq!(t.per_var[1], 1e-3);
        assert!(t.global <= t.per_var[0]);
    }

    #[test]
    fn combine_dense_and_tt() {
        let a = Field::Dense(DMatrix::from_element(3, 3, 1.0));
        let b = Field::Dense(DMatrix::from_element(3, 3, 2.0));
        let c = Field::combine(&[(0.5, &a), (2.0, &b)], 0.0).unwrap();
        assert_eq!(c.to_dense(), DMatrix::from_element(3, 3, 4.5));
        let ta = Field::Tt(TTMatrix::ones(3, 3));
        let tc = Field::combine(&[(1.0, &ta), (1.0, &ta)], 1e-12).unwrap();
        assert_eq!(tc.rank(), Some(1));
        assert!(Field::combine(&[(1.0, &a), (1.0, &ta)], 0.0).is_err());
    }
}

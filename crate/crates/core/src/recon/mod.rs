//! Dimension-by-dimension reconstruction from cell averages to face
//! Gauss-point values.
//!
//! Step 1 turns 2D cell averages into 1D averages along a face line; step 2
//! turns those into point values at the Gauss points of the face. All arrays
//! carry [`GHOSTS`] ghost cells on every side.

mod dense;
mod tables;
mod ttrecon;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cross::CrossError;
use crate::tt::TtError;

pub use dense::{reconstruct_faces_dense, DenseFaces};
pub use tables::{
    beta_indicators, face_value, point_coefficients, quad_values, weno_weights, PointRule, PointWeights, ReconTables,
    SubStencils, D3, D5, GAMMA_MINUS_CENTRE, GAMMA_PLUS_CENTRE, SIGMA_MINUS, SIGMA_PLUS,
};
pub use ttrecon::{tt_recon_linear, tt_recon_weno, TtFaces};

/// Ghost layer width used for every scheme.
pub const GHOSTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconError {
    #[error("need {needed} ghost cells per side, array has {available}")]
    InsufficientGhosts { needed: usize, available: usize },
    #[error("quadrature index {index} out of range for {n_q} points")]
    InvalidQuadIndex { index: usize, n_q: usize },
    #[error("unsupported quadrature size {0}")]
    UnsupportedQuadrature(usize),
    #[error("{scheme} is nonlinear and has no TT core-map form")]
    NotLinear { scheme: SchemeId },
    #[error("cross failed in {stage} ({side} side): {source}")]
    Cross {
        stage: &'static str,
        side: Side,
        #[source]
        source: CrossError,
    },
    #[error(transparent)]
    Tt(#[from] TtError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Upwind3,
    Upwind5,
    Weno5,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Upwind3, SchemeId::Upwind5, SchemeId::Weno5];

    pub fn order(self) -> u32 {
        match self {
            SchemeId::Upwind3 => 3,
            _ => 5,
        }
    }

    pub fn radius(self) -> usize {
        match self {
            SchemeId::Upwind3 => 1,
            _ => 2,
        }
    }

    pub fn n_quad(self) -> usize {
        match self {
            SchemeId::Upwind3 => 2,
            _ => 3,
        }
    }

    /// Cells per candidate sub-stencil.
    pub fn substencil_len(self) -> usize {
        self.radius() + 1
    }

    pub fn is_linear(self) -> bool {
        self != SchemeId::Weno5
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Upwind3 => "upwind3",
            SchemeId::Upwind5 => "upwind5",
            SchemeId::Weno5 => "weno5",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "upwind3" | "u3" => Ok(SchemeId::Upwind3),
            "upwind5" | "u5" => Ok(SchemeId::Upwind5),
            "weno5" | "weno" => Ok(SchemeId::Weno5),
            other => Err(format!("unknown scheme '{other}' (expected upwind3, upwind5 or weno5)")),
        }
    }
}

/// Which side of a face a value is reconstructed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// From the cell below the face (upwind for positive speed).
    Minus,
    /// From the cell above the face.
    Plus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

/// Gauss-Legendre rule on the unit cell `[-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

pub fn gauss_rule(n_q: usize) -> Result<QuadratureRule, ReconError> {
    match n_q {
        2 => {
            let d = 0.5 / 3f64.sqrt();
            Ok(QuadratureRule {
                offsets: vec![-d, d],
                weights: vec![0.5, 0.5],
            })
        }
        3 => {
            let d = 0.5 * 0.6f64.sqrt();
            Ok(QuadratureRule {
                offsets: vec![-d, 0.0, d],
                weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            })
        }
        other => Err(ReconError::UnsupportedQuadrature(other)),
    }
}

pub(crate) fn stencil(v: &[f64], start: usize, reversed: bool) -> [f64; 5] {
    let mut s = [0.0; 5];
    s.copy_from_slice(&v[start..start + 5]);
    if reversed {
        s.reverse();
    }
    s
}

fn interior_len(len: usize) -> Result<usize, ReconError> {
    if len < 2 * GHOSTS + 1 {
        return Err(ReconError::InsufficientGhosts {
            needed: GHOSTS,
            available: len.saturating_sub(1) / 2,
        });
    }
    Ok(len - 2 * GHOSTS)
}

/// Face values along one line of ghost-padded cell averages.
///
/// For `n` interior cells, returns `n + 1` values at the faces `0..=n`, where
/// face `f` is the left edge of cell `f`.
pub fn step1_interface(v: &[f64], scheme: SchemeId, side: Side, dx: f64) -> Result<Vec<f64>, ReconError> {
    let n = interior_len(v.len())?;
    let t = ReconTables::new(scheme);
    let eps = dx * dx;
    Ok((0..=n)
        .map(|f| match side {
            Side::Minus => face_value(&t, &stencil(v, f, false), eps),
            Side::Plus => face_value(&t, &stencil(v, f + 1, true), eps),
        })
        .collect())
}

/// Point values at Gauss point `m` of every interior cell of a ghost-padded line.
pub fn step2_quadrature(v: &[f64], scheme: SchemeId, m: usize, dx: f64) -> Result<Vec<f64>, ReconError> {
    let n = interior_len(v.len())?;
    let n_q = scheme.n_quad();
    if m >= n_q {
        return Err(ReconError::InvalidQuadIndex { index: m, n_q });
    }
    let t = ReconTables::new(scheme);
    let eps = dx * dx;
    let mut out = vec![0.0; n_q];
    Ok((0..n)
        .map(|j| {
            quad_values(&t, &stencil(v, j + 1, false), eps, &mut out);
            out[m]
        })
        .collect())
}

use super::{face_value, quad_values, ReconError, ReconTables, SchemeId, Side, GHOSTS};
use crate::cross::{cross_elementwise, cross_elementwise_multi, CrossConfig};
use crate::tt::{Axis, BandedMap, TTMatrix};

/// TT counterpart of [`super::DenseFaces`], same shapes and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TtFaces {
    pub minus: TTMatrix,
    pub plus: TTMatrix,
}

fn check(aug: &TTMatrix) -> Result<(usize, usize), ReconError> {
    let (r, c) = aug.shape();
    let min = 2 * GHOSTS + 1;
    if r < min || c < min {
        return Err(ReconError::InsufficientGhosts {
            needed: GHOSTS,
            available: r.min(c).saturating_sub(1) / 2,
        });
    }
    Ok((r - 2 * GHOSTS, c - 2 * GHOSTS))
}

fn face_map(n: usize, t: &ReconTables, side: Side) -> BandedMap {
    let mut coeffs = Vec::with_capacity(5 * (n + 1));
    let mut starts = Vec::with_capacity(n + 1);
    for f in 0..=n {
        match side {
            Side::Minus => {
                starts.push(f);
                coeffs.extend_from_slice(&t.face.combined);
            }
            Side::Plus => {
                starts.push(f + 1);
                coeffs.extend(t.face.combined.iter().rev());
            }
        }
    }
    BandedMap::new(n + 2 * GHOSTS, 5, starts, coeffs)
}

fn quad_map(n: usize, t: &ReconTables) -> BandedMap {
    let n_q = t.quad.len();
    let mut coeffs = Vec::with_capacity(5 * n * n_q);
    let mut starts = Vec::with_capacity(n * n_q);
    for j in 0..n {
        for rule in &t.quad {
            starts.push(j + 1);
            coeffs.extend_from_slice(&rule.combined);
        }
    }
    BandedMap::new(n + 2 * GHOSTS, 5, starts, coeffs)
}

/// Linear schemes as pure core maps: exact, rank preserving, no rounding.
pub fn tt_recon_linear(aug: &TTMatrix, axis: Axis, scheme: SchemeId) -> Result<TtFaces, ReconError> {
    if !scheme.is_linear() {
        return Err(ReconError::NotLinear { scheme });
    }
    match axis {
        Axis::X => linear_x(aug, scheme),
        Axis::Y => {
            let f = linear_x(&aug.transpose(), scheme)?;
            Ok(TtFaces {
                minus: f.minus.transpose(),
                plus: f.plus.transpose(),
            })
        }
    }
}

fn linear_x(aug: &TTMatrix, scheme: SchemeId) -> Result<TtFaces, ReconError> {
    let (n_x, n_y) = check(aug)?;
    let t = ReconTables::new(scheme);
    let q = quad_map(n_y, &t);
    let side = |s| -> Result<TTMatrix, ReconError> {
        Ok(aug
            .apply_core_map(Axis::X, &face_map(n_x, &t, s))?
            .apply_core_map(Axis::Y, &q)?)
    };
    Ok(TtFaces {
        minus: side(Side::Minus)?,
        plus: side(Side::Plus)?,
    })
}

/// WENO reconstruction by cross interpolation of the nonlinear stencil
/// functions over shifted copies of the padded field.
pub fn tt_recon_weno(aug: &TTMatrix, axis: Axis, h: f64, h_t: f64, cfg: &CrossConfig) -> Result<TtFaces, ReconError> {
    match axis {
        Axis::X => weno_x(aug, h, h_t, cfg),
        Axis::Y => {
            let f = weno_x(&aug.transpose(), h, h_t, cfg)?;
            Ok(TtFaces {
                minus: f.minus.transpose(),
                plus: f.plus.transpose(),
            })
        }
    }
}

fn shifts(x: &TTMatrix, axis: Axis, count: usize, first: usize, n_shift: usize) -> Result<Vec<TTMatrix>, ReconError> {
    (0..n_shift)
        .map(|l| {
            let picks: Vec<Option<usize>> = (0..count).map(|k| Some(k + first + l)).collect();
            let n_in = match axis {
                Axis::X => x.nrows(),
                Axis::Y => x.ncols(),
            };
            Ok(x.apply_core_map(axis, &BandedMap::selection(n_in, &picks))?)
        })
        .collect()
}

fn weno_x(aug: &TTMatrix, h: f64, h_t: f64, cfg: &CrossConfig) -> Result<TtFaces, ReconError> {
    let (n_x, n_y) = check(aug)?;
    let t = ReconTables::new(SchemeId::Weno5);
    let n_q = t.quad.len();
    let (e1, e2) = (h * h, h_t * h_t);

    // Rows f..f+5 of the padded field, one operand per offset.
    let s = shifts(aug, Axis::X, n_x + 1, 0, 6)?;
    let step1 = |side: Side| -> Result<TTMatrix, ReconError> {
        let ops: Vec<&TTMatrix> = match side {
            Side::Minus => s[0..5].iter().collect(),
            Side::Plus => s[1..6].iter().rev().collect(),
        };
        let f = |v: &[f64]| face_value(&t, &[v[0], v[1], v[2], v[3], v[4]], e1);
        cross_elementwise(f, &ops, ops[2], cfg).map_err(|source| ReconError::Cross {
            stage: "face averages",
            side,
            source,
        })
    };
    let step2 = |v: &TTMatrix, side: Side| -> Result<TTMatrix, ReconError> {
        let sy = shifts(v, Axis::Y, n_y, 1, 5)?;
        let ops: Vec<&TTMatrix> = sy.iter().collect();
        let spread: Vec<Option<usize>> = (0..n_y * n_q).map(|k| Some(k / n_q)).collect();
        let guess = sy[2].apply_core_map(Axis::Y, &BandedMap::selection(n_y, &spread))?;
        let f = |a: &[f64], out: &mut [f64]| quad_values(&t, &[a[0], a[1], a[2], a[3], a[4]], e2, out);
        cross_elementwise_multi(f, n_q, &ops, &guess, cfg)
            .map(|o| o.tt)
            .map_err(|source| ReconError::Cross {
                stage: "gauss points",
                side,
                source,
            })
    };
    let minus = step2(&step1(Side::Minus)?, Side::Minus)?;
    let plus = step2(&step1(Side::Plus)?, Side::Plus)?;
    Ok(TtFaces { minus, plus })
}

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{face_value, quad_values, stencil, ReconError, ReconTables, SchemeId, GHOSTS};
use crate::tt::Axis;

/// Face Gauss-point values on both sides of every face normal to one axis.
///
/// For x-faces both arrays have shape `(n_x + 1, n_y * n_q)`; for y-faces
/// `(n_x * n_q, n_y + 1)`. The quadrature index runs fastest along the
/// transverse direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFaces {
    pub minus: DMatrix<f64>,
    pub plus: DMatrix<f64>,
}

/// Reconstruct face values from a field padded with [`GHOSTS`] cells on every side.
///
/// `h` is the cell width in the step-1 direction and `h_t` in the transverse
/// direction; they set the WENO regularisation `h^2`.
pub fn reconstruct_faces_dense(
    aug: &DMatrix<f64>,
    axis: Axis,
    scheme: SchemeId,
    h: f64,
    h_t: f64,
) -> Result<DenseFaces, ReconError> {
    match axis {
        Axis::X => x_faces(aug, scheme, h, h_t),
        Axis::Y => {
            let t = x_faces(&aug.transpose(), scheme, h, h_t)?;
            Ok(DenseFaces {
                minus: t.minus.transpose(),
                plus: t.plus.transpose(),
            })
        }
    }
}

fn x_faces(aug: &DMatrix<f64>, scheme: SchemeId, h: f64, h_t: f64) -> Result<DenseFaces, ReconError> {
    let (rows, cols) = aug.shape();
    let min = 2 * GHOSTS + 1;
    if rows < min || cols < min {
        return Err(ReconError::InsufficientGhosts {
            needed: GHOSTS,
            available: rows.min(cols).saturating_sub(1) / 2,
        });
    }
    let n_x = rows - 2 * GHOSTS;
    let n_y = cols - 2 * GHOSTS;
    let n_q = scheme.n_quad();
    let t = ReconTables::new(scheme);
    let (e1, e2) = (h * h, h_t * h_t);

    // Step 1 per padded column, step 2 per face row.
    let step1: Vec<(Vec<f64>, Vec<f64>)> = (0..cols)
        .into_par_iter()
        .map(|c| {
            let col = aug.column(c);
            let v = col.as_slice();
            let minus = (0..=n_x).map(|f| face_value(&t, &stencil(v, f, false), e1)).collect();
            let plus = (0..=n_x)
                .map(|f| face_value(&t, &stencil(v, f + 1, true), e1))
                .collect();
            (minus, plus)
        })
        .collect();

    let (minus_cols, plus_cols): (Vec<Vec<f64>>, Vec<Vec<f64>>) = step1.into_iter().unzip();
    let step2 = |lines: &[Vec<f64>]| -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..=n_x)
            .into_par_iter()
            .map(|f| {
                let line: Vec<f64> = lines.iter().map(|c| c[f]).collect();
                let mut out = vec![0.0; n_y * n_q];
                for j in 0..n_y {
                    quad_values(&t, &stencil(&line, j + 1, false), e2, &mut out[j * n_q..(j + 1) * n_q]);
                }
                out
            })
            .collect();
        DMatrix::from_fn(n_x + 1, n_y * n_q, |f, k| rows[f][k])
    };
    let minus = step2(&minus_cols);
    let plus = step2(&plus_cols);
    Ok(DenseFaces { minus, plus })
}

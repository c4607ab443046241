//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

pub(crate) struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

/// Thin SVD with singular values in decreasing order.
pub(crate) fn sorted_svd(a: DMatrix<f64>) -> SortedSvd {
    // nalgebra's own SVD occasionally returns factors that do not reproduce
    // the input, so the decomposition is delegated to faer.
    let m = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let svd = match m.thin_svd() {
        Ok(svd) if a.iter().all(|v| v.is_finite()) => svd,
        // A blown-up state: keep the shapes and let the NaNs surface downstream.
        _ => return nan_svd(a.nrows(), a.ncols()),
    };
    let (fu, fv) = (svd.U(), svd.V());
    let k = fu.ncols();
    let u = DMatrix::from_fn(a.nrows(), k, |i, j| fu[(i, j)]);
    let v_t = DMatrix::from_fn(k, a.ncols(), |i, j| fv[(j, i)]);
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |k, j| v_t[(order[k], j)]);
    let singular_values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    SortedSvd {
        u,
        singular_values,
        v_t,
    }
}

fn nan_svd(n: usize, m: usize) -> SortedSvd {
    let k = n.min(m);
    SortedSvd {
        u: DMatrix::from_element(n, k, f64::NAN),
        singular_values: vec![f64::NAN; k],
        v_t: DMatrix::from_element(k, m, f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_reproduce_input() {
        let a = DMatrix::from_fn(6, 46, |i, j| ((i * 7 + j * 3) % 11) as f64 - 0.3 * (i * j) as f64);
        let s = sorted_svd(a.clone());
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let mut us = s.u.clone();
        for (k, sv) in s.singular_values.iter().enumerate() {
            us.column_mut(k).scale_mut(*sv);
        }
        assert!((us * &s.v_t - &a).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn non_finite_input_gives_nan_factors() {
        let mut a = DMatrix::from_element(3, 4, 1.0);
        a[(1, 2)] = f64::INFINITY;
        let s = sorted_svd(a);
        assert_eq!(s.u.shape(), (3, 3));
        assert!(s.singular_values.iter().all(|v| v.is_nan()));
    }
}

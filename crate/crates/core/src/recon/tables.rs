//! Reconstruction coefficients, smoothness indicators and nonlinear weights.

use nalgebra::{DMatrix, DVector};

use super::{gauss_rule, SchemeId};

/// Candidate sub-stencils evaluated at one point of the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SubStencils {
    /// `coef[r][l]` multiplies `v_{j - r + l}`.
    pub coef: Vec<Vec<f64>>,
}

impl SubStencils {
    /// Values `v^(r)` on a 5-cell stencil centred at index 2.
    pub fn candidates(&self, s: &[f64; 5], out: &mut [f64; 3]) {
        for (r, c) in self.coef.iter().enumerate() {
            let base = 2 - r;
            out[r] = c.iter().enumerate().map(|(l, w)| w * s[base + l]).sum();
        }
    }
}

/// How the candidates are blended at one point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointWeights {
    /// Positive linear weights.
    Plain(Vec<f64>),
    /// Split treatment of signed linear weights: `sigma_plus * u+ - sigma_minus * u-`.
    Split {
        gamma_plus: Vec<f64>,
        gamma_minus: Vec<f64>,
        sigma_plus: f64,
        sigma_minus: f64,
    },
}

impl PointWeights {
    /// Signed linear weights this blend reduces to.
    pub fn linear(&self) -> Vec<f64> {
        match self {
            PointWeights::Plain(g) => g.clone(),
            PointWeights::Split {
                gamma_plus,
                gamma_minus,
                sigma_plus,
                sigma_minus,
            } => gamma_plus
                .iter()
                .zip(gamma_minus)
                .map(|(p, m)| sigma_plus * p - sigma_minus * m)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRule {
    pub offset: f64,
    pub stencils: SubStencils,
    pub weights: PointWeights,
    /// Equivalent single stencil on the 5 cells `j-2..=j+2`.
    pub combined: [f64; 5],
}

impl PointRule {
    fn new(offset: f64, stencils: SubStencils, weights: PointWeights) -> Self {
        let lin = weights.linear();
        let mut combined = [0.0; 5];
        for (r, c) in stencils.coef.iter().enumerate() {
            for (l, w) in c.iter().enumerate() {
                combined[2 - r + l] += lin[r] * w;
            }
        }
        Self {
            offset,
            stencils,
            weights,
            combined,
        }
    }

    /// Blend with the linear weights.
    pub fn linear_value(&self, s: &[f64; 5]) -> f64 {
        let mut v = [0.0; 3];
        self.stencils.candidates(s, &mut v);
        match &self.weights {
            PointWeights::Plain(g) => g.iter().zip(&v).map(|(a, b)| a * b).sum(),
            PointWeights::Split {
                gamma_plus,
                gamma_minus,
                sigma_plus,
                sigma_minus,
            } => {
                let up: f64 = gamma_plus.iter().zip(&v).map(|(a, b)| a * b).sum();
                let um: f64 = gamma_minus.iter().zip(&v).map(|(a, b)| a * b).sum();
                sigma_plus * up - sigma_minus * um
            }
        }
    }

    /// Blend with WENO weights built from the smoothness indicators `beta`.
    pub fn weno_value(&self, s: &[f64; 5], beta: &[f64; 3], eps_weno: f64) -> f64 {
        let mut v = [0.0; 3];
        self.stencils.candidates(s, &mut v);
        match &self.weights {
            PointWeights::Plain(g) => {
                let w = weno_weights(beta, g, eps_weno);
                w.iter().zip(&v).map(|(a, b)| a * b).sum()
            }
            PointWeights::Split {
                gamma_plus,
                gamma_minus,
                sigma_plus,
                sigma_minus,
            } => {
                let wp = weno_weights(beta, gamma_plus, eps_weno);
                let wm = weno_weights(beta, gamma_minus, eps_weno);
                let up: f64 = wp.iter().zip(&v).map(|(a, b)| a * b).sum();
                let um: f64 = wm.iter().zip(&v).map(|(a, b)| a * b).sum();
                sigma_plus * up - sigma_minus * um
            }
        }
    }
}

/// Full coefficient set for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconTables {
    pub scheme: SchemeId,
    /// Right-edge (`i + 1/2`) value from cell `i`.
    pub face: PointRule,
    /// One rule per Gauss point, ordered by increasing offset.
    pub quad: Vec<PointRule>,
}

/// Split linear weights for the cell centre of the fifth-order schemes.
pub const SIGMA_PLUS: f64 = 107.0 / 40.0;
pub const SIGMA_MINUS: f64 = 67.0 / 40.0;
pub const GAMMA_PLUS_CENTRE: [f64; 3] = [9.0 / 214.0, 98.0 / 107.0, 9.0 / 214.0];
pub const GAMMA_MINUS_CENTRE: [f64; 3] = [9.0 / 67.0, 49.0 / 67.0, 9.0 / 67.0];
/// Ideal face weights of the fifth-order schemes.
pub const D5: [f64; 3] = [3.0 / 10.0, 3.0 / 5.0, 1.0 / 10.0];
/// Ideal face weights of the third-order scheme.
pub const D3: [f64; 2] = [2.0 / 3.0, 1.0 / 3.0];

/// Point-value weights at `offset` of the polynomial whose averages over the
/// cells `first..first + k` (relative to the target cell) match the data.
pub fn point_coefficients(first: i32, k: usize, offset: f64) -> Vec<f64> {
    // a_p integrates xi^p over each cell; solve A^T c = e(offset).
    let a = DMatrix::from_fn(k, k, |cell, p| {
        let s = (first + cell as i32) as f64;
        let e = (p + 1) as i32;
        ((s + 0.5).powi(e) - (s - 0.5).powi(e)) / e as f64
    });
    let e = DVector::from_fn(k, |p, _| offset.powi(p as i32));
    let c = a
        .transpose()
        .lu()
        .solve(&e)
        .expect("cell-average Vandermonde matrix is nonsingular");
    c.iter().copied().collect()
}

fn sub_stencils(k: usize, offset: f64) -> SubStencils {
    SubStencils {
        coef: (0..k).map(|r| point_coefficients(-(r as i32), k, offset)).collect(),
    }
}

/// Linear weights reproducing the wide stencil from the sub-stencils.
fn ideal_weights(st: &SubStencils, offset: f64) -> Vec<f64> {
    let k = st.coef.len();
    let wide = point_coefficients(-((k - 1) as i32), 2 * k - 1, offset);
    // The rightmost cell appears only in r = 0 and the leftmost only in r = k - 1.
    let mut g = vec![0.0; k];
    g[0] = wide[2 * k - 2] / st.coef[0][k - 1];
    g[k - 1] = wide[0] / st.coef[k - 1][0];
    if k == 3 {
        g[1] = 1.0 - g[0] - g[2];
    }
    g
}

impl ReconTables {
    pub fn new(scheme: SchemeId) -> Self {
        let k = scheme.substencil_len();
        let face_st = sub_stencils(k, 0.5);
        let face_w = match scheme {
            SchemeId::Upwind3 => D3.to_vec(),
            _ => D5.to_vec(),
        };
        let face = PointRule::new(0.5, face_st, PointWeights::Plain(face_w));
        let rule = gauss_rule(scheme.n_quad()).expect("supported rule");
        let quad = rule
            .offsets
            .iter()
            .map(|&d| {
                let st = sub_stencils(k, d);
                let w = if k == 3 && d == 0.0 {
                    PointWeights::Split {
                        gamma_plus: GAMMA_PLUS_CENTRE.to_vec(),
                        gamma_minus: GAMMA_MINUS_CENTRE.to_vec(),
                        sigma_plus: SIGMA_PLUS,
                        sigma_minus: SIGMA_MINUS,
                    }
                } else {
                    PointWeights::Plain(ideal_weights(&st, d))
                };
                PointRule::new(d, st, w)
            })
            .collect();
        Self { scheme, face, quad }
    }
}

/// Jiang-Shu smoothness indicators on `v_{i-2..=i+2}`.
pub fn beta_indicators(s: &[f64; 5]) -> [f64; 3] {
    let sq = |x: f64| x * x;
    let (a, b, c, d, e) = (s[0], s[1], s[2], s[3], s[4]);
    [
        13.0 / 12.0 * sq(c - 2.0 * d + e) + 0.25 * sq(3.0 * c - 4.0 * d + e),
        13.0 / 12.0 * sq(b - 2.0 * c + d) + 0.25 * sq(b - d),
        13.0 / 12.0 * sq(a - 2.0 * b + c) + 0.25 * sq(a - 4.0 * b + 3.0 * c),
    ]
}

/// Normalized `ideal / (beta + eps)^2`.
pub fn weno_weights(beta: &[f64; 3], ideal: &[f64], eps_weno: f64) -> [f64; 3] {
    let mut alpha = [0.0; 3];
    for (r, (b, d)) in beta.iter().zip(ideal).enumerate() {
        alpha[r] = d / ((b + eps_weno) * (b + eps_weno));
    }
    let total: f64 = alpha.iter().sum();
    alpha.map(|a| a / total)
}

/// Right-edge value of the centre cell of `s` (minus side of its right face).
pub fn face_value(t: &ReconTables, s: &[f64; 5], eps_weno: f64) -> f64 {
    match t.scheme {
        SchemeId::Weno5 => t.face.weno_value(s, &beta_indicators(s), eps_weno),
        _ => t.face.combined.iter().zip(s).map(|(a, b)| a * b).sum(),
    }
}

/// Gauss-point values of the centre cell of `s`, in increasing offset order.
pub fn quad_values(t: &ReconTables, s: &[f64; 5], eps_weno: f64, out: &mut [f64]) {
    match t.scheme {
        SchemeId::Weno5 => {
            let beta = beta_indicators(s);
            for (o, rule) in out.iter_mut().zip(&t.quad) {
                *o = rule.weno_value(s, &beta, eps_weno);
            }
        }
        _ => {
            for (o, rule) in out.iter_mut().zip(&t.quad) {
                *o = rule.linear_value(s);
            }
        }
    }
}

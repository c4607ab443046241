//! Cross interpolation: build a TT from a few rows and columns of a matrix
//! that is only available entry by entry.

use ttswe::cross::{cross_fn, maxvol, CrossConfig};
use ttswe::{cross_elementwise, TTMatrix};

use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // maxvol picks the rows of a tall matrix spanning the largest volume.
    let tall = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.2, 0.1, 0.0, 1.0, 0.5, 0.5]);
    println!("maxvol rows of a 4x2 matrix: {:?}", maxvol(&tall)?);

    // A smooth kernel sampled entry by entry.
    let n = 400;
    let kernel = |i: usize, j: usize| {
        let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
        1.0 / (1.0 + 25.0 * (x - y).powi(2))
    };
    for eps in [1e-4, 1e-8, 1e-12] {
        let tt = cross_fn(n, n, kernel, &CrossConfig::with_eps(eps))?;
        let dense = DMatrix::from_fn(n, n, kernel);
        let err = (tt.to_full() - &dense).norm() / dense.norm();
        println!(
            "Runge kernel {n}x{n}, eps {eps:.0e}: rank {:2}, error {err:.1e}",
            tt.rank()
        );
    }

    // Elementwise functions of TT operands, as used for fluxes and WENO.
    let m = 300;
    let x: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    let h = TTMatrix::outer(&x.iter().map(|v| 2.0 + v.sin()).collect::<Vec<_>>(), &vec![1.0; m]).add(
        &TTMatrix::outer(&vec![0.5; m], &x.iter().map(|v| v.cos()).collect::<Vec<_>>()),
    )?;
    let cfg = CrossConfig::with_eps(1e-10);
    let root = cross_elementwise(|v| v[0].sqrt(), &[&h], &h, &cfg)?;
    let dense = h.to_full().map(f64::sqrt);
    let err = (root.to_full() - &dense).norm() / dense.norm();
    println!(
        "sqrt(h): operand rank {}, result rank {}, error {err:.1e}",
        h.rank(),
        root.rank()
    );
    Ok(())
}

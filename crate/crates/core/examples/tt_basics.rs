//! Low-rank arithmetic on two-core tensor trains.
//!
//! Builds a smooth field, compresses it, and shows how sums and products
//! grow the rank until `round` brings it back down.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use ttswe::{reciprocal_taylor, TTMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (256, 192);
    let field = DMatrix::from_fn(n, m, |i, j| {
        let (x, y) = (i as f64 / n as f64, j as f64 / m as f64);
        (TAU * x).sin() * (TAU * 2.0 * y).cos() + 0.3 * (TAU * (x + y)).sin()
    });

    for eps in [1e-2, 1e-6, 1e-12] {
        let tt = TTMatrix::from_full(&field, eps)?;
        let err = (tt.to_full() - &field).norm() / field.norm();
        println!("eps {eps:.0e}: rank {:2}, relative error {err:.2e}", tt.rank());
    }

    let a = TTMatrix::from_full(&field, 1e-12)?;
    let b = TTMatrix::outer(&vec![1.0; n], &(0..m).map(|j| j as f64 / m as f64).collect::<Vec<_>>());
    let sum = a.add(&b)?;
    let prod = a.hadamard(&b)?;
    println!("\nrank(a) = {}, rank(b) = {}", a.rank(), b.rank());
    println!(
        "a + b: rank {} before rounding, {} after",
        sum.rank(),
        sum.round(1e-12).rank()
    );
    println!(
        "a * b: rank {} before rounding, {} after",
        prod.rank(),
        prod.round(1e-12).rank()
    );

    // Storage: two cores instead of the full array.
    let r = a.rank();
    println!("\nstorage: {} numbers in TT form vs {} dense", r * (n + m), n * m);

    // Reciprocal of a depth-like field with a large mean.
    let depth = TTMatrix::constant(n, m, 1.0).add(&a.scale(0.05))?.round(1e-12);
    let inv = reciprocal_taylor(&depth, 1e-10)?;
    let check = depth.to_full().component_mul(&inv.to_full());
    let worst = check.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    println!("1 / depth: rank {}, max |h * (1/h) - 1| = {worst:.1e}", inv.rank());
    Ok(())
}

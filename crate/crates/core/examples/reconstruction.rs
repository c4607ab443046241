//! Face values from cell averages with the three reconstructions, on a
//! smooth profile and across a jump.

use ttswe::recon::{gauss_rule, step1_interface, step2_quadrature, Side, GHOSTS};
use ttswe::SchemeId;

/// Padded cell averages of `f` given its antiderivative.
fn averages(n: usize, anti: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..n + 2 * GHOSTS)
        .map(|c| {
            let a = (c as f64 - GHOSTS as f64) * h;
            (anti(a + h) - anti(a)) / h
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use std::f64::consts::TAU;
    println!("face error on sin(2 pi x):");
    for scheme in SchemeId::ALL {
        let mut prev = None;
        for n in [20, 40, 80] {
            let h = 1.0 / n as f64;
            let v = averages(n, |x| -(TAU * x).cos() / TAU);
            let faces = step1_interface(&v, scheme, Side::Minus, h)?;
            let err = faces
                .iter()
                .enumerate()
                .map(|(f, val)| (val - (TAU * f as f64 * h).sin()).abs())
                .fold(0.0, f64::max);
            let order = prev
                .map(|p: f64| format!("{:.2}", (p / err).log2()))
                .unwrap_or_default();
            println!("  {scheme:8} N={n:3}  max err {err:.2e}  {order}");
            prev = Some(err);
        }
    }

    // Unit jump at x = 0.5: the linear schemes overshoot, WENO does not.
    let n = 20;
    let h = 1.0 / n as f64;
    let v = averages(n, |x| (x - 0.5).max(0.0));
    println!("\njump at x = 0.5, face values near it (data in [0, 1]):");
    for scheme in SchemeId::ALL {
        let faces = step1_interface(&v, scheme, Side::Minus, h)?;
        let near: Vec<String> = faces[8..13].iter().map(|f| format!("{f:+.4}")).collect();
        let (lo, hi) = faces
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &f| (a.min(f), b.max(f)));
        println!("  {scheme:8} {}  range [{lo:+.4}, {hi:+.4}]", near.join(" "));
    }

    // Step 2: point values at the Gauss points inside each cell.
    let v = averages(n, |x| x * x * x / 3.0);
    let pts = step2_quadrature(&v, SchemeId::Upwind5, 0, h)?;
    let x = (0.5 + gauss_rule(3)?.offsets[0]) * h;
    println!(
        "\nupwind5 on x^2 at the first Gauss point of cell 0: {:.15} (exact {:.15})",
        pts[0],
        x * x
    );
    Ok(())
}

//! Wall time of dense and TT runs of the Kelvin wave as the grid grows.
//!
//! The dense cost grows with N^2 per step, the TT cost roughly with N times
//! the rank squared. Only a fixed number of steps is timed.

use ttswe::harness::{run, RunConfig};
use ttswe::{CaseId, Representation, SchemeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps = 20;
    println!("kelvin upwind5, {steps} steps");
    println!(
        "{:>6} {:>10} {:>10} {:>8} {:>6}",
        "N", "dense s", "tt s", "ratio", "rank"
    );
    for n in [64, 128, 256, 512] {
        let cfg = |rep| RunConfig {
            max_steps: Some(steps),
            ..RunConfig::new(CaseId::Kelvin, SchemeId::Upwind5, rep, n)
        };
        let d = run(&cfg(Representation::Dense))?;
        let t = run(&cfg(Representation::Tt))?;
        println!(
            "{n:>6} {:>10.3} {:>10.3} {:>7.1}x {:>6}",
            d.wall_s,
            t.wall_s,
            d.wall_s / t.wall_s,
            t.max_rank_overall().unwrap_or(0)
        );
    }
    Ok(())
}

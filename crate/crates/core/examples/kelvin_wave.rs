//! Coastal Kelvin wave with both representations.
//!
//! The wave decays away from the coast at x = 0 and travels along it, so its
//! cell averages are close to rank two and the TT solver carries very few
//! numbers per step.

use ttswe::harness::{run_full, RunConfig};
use ttswe::{CaseId, CaseSpec, Representation, SchemeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(80);
    let spec = CaseSpec::get(CaseId::Kelvin);
    let p = spec.nondim_params();
    println!(
        "kelvin: L = {:.0} km, T = {:.1} h, Rossby radius {:.0} km",
        spec.length / 1e3,
        spec.t_final / 3600.0,
        spec.phys.rossby_radius() / 1e3
    );
    println!("nondimensional g = {:.3e}, f = {:.3e}, H = {:.3e}\n", p.g, p.f, p.depth);

    for rep in [Representation::Dense, Representation::Tt] {
        let out = run_full(&RunConfig::new(CaseId::Kelvin, SchemeId::Upwind5, rep, n))?;
        let r = &out.report;
        println!(
            "{rep:5} N={n}: {} steps, L2 error (eta, u, v) = ({:.2e}, {:.2e}, {:.2e}), {:.2}s",
            r.steps, r.l2[0], r.l2[1], r.l2[2], r.wall_s
        );
        if let Some(ranks) = r.max_rank {
            let first = r.rank_trace.first().copied().unwrap_or_default();
            println!("       ranks: initial {first:?}, max over the run {ranks:?}");
            println!(
                "       tolerances between {:.1e} and {:.1e}",
                r.eps_min.unwrap_or(0.0),
                r.eps_max.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}

//! The manufactured solution of the nonlinear equations: the source that
//! makes it exact, and what happens without it.

use ttswe::cases::{mms_fields, mms_source};
use ttswe::harness::{run, RunConfig};
use ttswe::{CaseId, CaseSpec, Representation, SchemeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CaseSpec::get(CaseId::Manufactured);
    let p = spec.mms_params().expect("manufactured case has parameters");
    println!(
        "h = {} + {} sin(th), u = {} cos(th), v = 0, omega = {:.4e}",
        p.depth, p.a, p.b, p.omega
    );

    // Residual of the equations at one point with centred differences.
    let (x, y, t) = (0.3, 0.7, 0.5 * spec.t_final_nd());
    let d = 1e-4;
    let q = |x, y, t| mms_fields(&p, x, y, t);
    let hu = |x, y, t| q(x, y, t)[1];
    let h = |x, y, t| q(x, y, t)[0];
    let dt = d / p.omega;
    let mass = (h(x, y, t + dt) - h(x, y, t - dt)) / (2.0 * dt) + (hu(x + d, y, t) - hu(x - d, y, t)) / (2.0 * d);
    let s = mms_source(&p, x, y, t);
    println!(
        "mass equation at ({x}, {y}): h_t + (hu)_x = {mass:.6e}, source {:.6e}",
        s[0]
    );

    for source in [true, false] {
        let cfg = RunConfig {
            mms_source: source,
            ..RunConfig::new(CaseId::Manufactured, SchemeId::Upwind3, Representation::Tt, 64)
        };
        let r = run(&cfg)?;
        println!(
            "upwind3 tt N=64 with source {source:5}: L2 error of h {:.2e}, max ranks {:?}",
            r.l2[0],
            r.max_rank.unwrap_or_default()
        );
    }
    Ok(())
}

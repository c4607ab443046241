//! Observed orders on doubling grids, written to CSV.
//!
//! Usage: `convergence_study [case] [scheme] [dt ratio]`, for example
//! `convergence_study inertia-gravity upwind5 1e-4`.

use ttswe::harness::{convergence, write_csv_file, RunConfig};
use ttswe::{CaseId, Representation, SchemeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let case: CaseId = args.next().as_deref().unwrap_or("manufactured").parse()?;
    let scheme: SchemeId = args.next().as_deref().unwrap_or("upwind3").parse()?;
    let dt_ratio: Option<f64> = args.next().map(|s| s.parse()).transpose()?;

    let mut all = Vec::new();
    for rep in [Representation::Dense, Representation::Tt] {
        let cfg = RunConfig {
            dt_ratio,
            ..RunConfig::new(case, scheme, rep, 40)
        };
        let reports = convergence(&cfg, &[40, 80, 160])?;
        println!("{case} {scheme} {rep}:");
        for r in &reports {
            let order = r.order_c1.map(|o| format!("{o:5.2}")).unwrap_or_else(|| "    -".into());
            let rank = r.max_rank.map(|k| format!("{k:?}")).unwrap_or_else(|| "-".into());
            println!(
                "  N={:4}  steps {:4}  L2 {:.3e}  order {order}  rank {rank}",
                r.n, r.steps, r.l2[0]
            );
        }
        all.extend(reports);
    }
    let path = std::env::temp_dir().join(format!("ttswe_{case}_{scheme}.csv"));
    write_csv_file(&all, &path)?;
    println!("\nwrote {}", path.display());
    Ok(())
}

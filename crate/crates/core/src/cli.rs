//! Command-line front end: `run` and `convergence`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cases::CaseId;
use crate::harness::{
    check_doubling, convergence, init_thread_pool, run, speedups, write_csv, write_csv_file, write_json, HarnessError,
    RunConfig, RunReport,
};
use crate::recon::SchemeId;
use crate::swe::Representation;

#[derive(Debug, Parser)]
#[command(name = "ttswe", version, about = "Dense and tensor-train shallow water solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one case on one grid.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Run a sequence of doubling grids and report observed orders.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma separated, each twice the previous, e.g. 40,80,160.
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    case: CaseId,
    #[arg(long)]
    scheme: SchemeId,
    /// dense, tt, or both for a speed-up comparison.
    #[arg(long, default_value = "tt", value_parser = parse_reps)]
    rep: RepChoice,
    #[arg(long)]
    dt_ratio: Option<f64>,
    #[arg(long)]
    c_eps: Option<f64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full report as JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Stop after this many steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Nondimensional end time instead of the case default.
    #[arg(long)]
    t_end: Option<f64>,
    /// Drop the manufactured source term.
    #[arg(long)]
    no_source: bool,
    /// Check positivity of the depth after every step.
    #[arg(long)]
    debug_positivity: bool,
}

#[derive(Debug, Clone)]
struct RepChoice(Vec<Representation>);

fn parse_reps(s: &str) -> Result<RepChoice, String> {
    if s.eq_ignore_ascii_case("both") {
        return Ok(RepChoice(vec![Representation::Dense, Representation::Tt]));
    }
    s.split(',').map(str::parse).collect::<Result<_, _>>().map(RepChoice)
}

impl Common {
    fn configs(&self, n: usize) -> Vec<RunConfig> {
        self.rep
            .0
            .iter()
            .map(|&rep| RunConfig {
                dt_ratio: self.dt_ratio,
                c_eps: self.c_eps,
                seed: self.seed,
                max_steps: self.steps,
                t_end: self.t_end,
                mms_source: !self.no_source,
                debug_positivity: self.debug_positivity,
                ..RunConfig::new(self.case, self.scheme, rep, n)
            })
            .collect()
    }
}

/// Parse `argv` (program name first), run, and return the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    init_thread_pool()?;
    let (common, reports) = match cli.command {
        Command::Run { common, n } => {
            let mut reports = Vec::new();
            for cfg in common.configs(n) {
                reports.push(run(&cfg)?);
            }
            (common, reports)
        }
        Command::Convergence { common, grids } => {
            check_doubling(&grids)?;
            let mut reports = Vec::new();
            for cfg in common.configs(grids[0]) {
                reports.extend(convergence(&cfg, &grids)?);
            }
            (common, reports)
        }
    };
    if let Some(path) = &common.out {
        write_csv_file(&reports, path)?;
    }
    let mut stdout = std::io::stdout().lock();
    if common.json {
        write_json(&reports, &mut stdout)?;
        writeln!(stdout)?;
    } else {
        print_table(&reports, &mut stdout)?;
        if common.out.is_none() {
            writeln!(stdout)?;
            write_csv(&reports, &mut stdout)?;
        }
    }
    Ok(())
}

fn print_table<W: Write>(reports: &[RunReport], w: &mut W) -> Result<(), HarnessError> {
    writeln!(
        w,
        "{:<16} {:<8} {:<5} {:>5} {:>6} {:>12} {:>7} {:>5} {:>9}",
        "case", "scheme", "rep", "N", "steps", "l2_c1", "order", "rank", "wall_s"
    )?;
    for r in reports {
        let order = r.order_c1.map_or("-".to_string(), |o| format!("{o:.2}"));
        let rank = r.max_rank_overall().map_or("-".to_string(), |k| k.to_string());
        writeln!(
            w,
            "{:<16} {:<8} {:<5} {:>5} {:>6} {:>12.4e} {:>7} {:>5} {:>9.3}",
            r.case, r.scheme, r.rep, r.n, r.steps, r.l2[0], order, rank, r.wall_s
        )?;
    }
    for s in speedups(reports) {
        writeln!(
            w,
            "speed-up {} {} N={}: dense {:.3}s / tt {:.3}s = {:.2}x",
            s.case, s.scheme, s.n, s.dense_s, s.tt_s, s.ratio
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(run_cli(["ttswe", "run", "--case", "kelvin"]), 1);
        assert_eq!(
            run_cli(["ttswe", "run", "--case", "nope", "--scheme", "upwind3", "--n", "16"]),
            1
        );
        assert_eq!(
            run_cli([
                "ttswe",
                "convergence",
                "--case",
                "kelvin",
                "--scheme",
                "upwind3",
                "--grids",
                "40,100"
            ]),
            1
        );
        assert_eq!(
            run_cli(["ttswe", "run", "--case", "kelvin", "--scheme", "upwind3", "--n", "8"]),
            1
        );
        assert_eq!(run_cli(["ttswe", "--help"]), 0);
    }

    #[test]
    fn rep_parsing() {
        assert_eq!(parse_reps("both").unwrap().0.len(), 2);
        assert_eq!(parse_reps("tt").unwrap().0, vec![Representation::Tt]);
        assert!(parse_reps("sparse").is_err());
    }
}

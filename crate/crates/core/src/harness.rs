//! Runs, convergence studies and their CSV/JSON reports.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cases::{cell_averages, init_cell_averages, CaseError, CaseForcing, CaseId, CaseSpec};
use crate::cross::CrossConfig;
use crate::recon::SchemeId;
use crate::swe::{ssprk3_with, ConservedState, EpsPolicy, Grid, Representation, RhsContext, StepTolerances, SweError};

/// Smallest grid accepted by [`RunConfig::validate`].
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("step {step} (t = {t:.6e}): {source}")]
    Solver {
        step: usize,
        t: f64,
        #[source]
        source: SweError,
    },
    #[error("setup: {0}")]
    Setup(#[source] SweError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 1 for bad input, 2 for anything that failed while solving or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Case(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub scheme: SchemeId,
    pub rep: Representation,
    /// Cells per axis.
    pub n: usize,
    pub dt_ratio: Option<f64>,
    pub c_eps: Option<f64>,
    pub seed: u64,
    /// Check the depth after every stage (nonlinear case).
    pub debug_positivity: bool,
    /// Stop after this many steps instead of at the final time.
    pub max_steps: Option<usize>,
    /// Keep the manufactured source (ignored by the linear cases).
    pub mms_source: bool,
    /// Dimensional Coriolis parameter replacing the case default.
    pub coriolis: Option<f64>,
    /// Nondimensional end time replacing the case default.
    pub t_end: Option<f64>,
}

impl RunConfig {
    pub fn new(case: CaseId, scheme: SchemeId, rep: Representation, n: usize) -> Self {
        Self {
            case,
            scheme,
            rep,
            n,
            dt_ratio: None,
            c_eps: None,
            seed: 0,
            debug_positivity: false,
            max_steps: None,
            mms_source: true,
            coriolis: None,
            t_end: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n < MIN_CELLS {
            return Err(HarnessError::Config(format!("N = {} is below {MIN_CELLS}", self.n)));
        }
        for (name, v) in [
            ("dt ratio", self.dt_ratio),
            ("C_eps", self.c_eps),
            ("end time", self.t_end),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(HarnessError::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(f) = self.coriolis {
            if !f.is_finite() {
                return Err(HarnessError::Config(format!("Coriolis parameter {f}")));
            }
        }
        Ok(())
    }

    /// Case with the configured overrides applied.
    pub fn spec(&self) -> CaseSpec {
        let mut spec = CaseSpec::get(self.case);
        if let Some(f) = self.coriolis {
            spec.phys.f = f;
        }
        spec
    }

    pub fn grid(&self) -> Grid {
        Grid::square(self.n, self.spec().length_nd())
    }
}

/// Summary of one run. Errors are nondimensional L2 norms of the conserved components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub case: String,
    pub scheme: String,
    pub rep: String,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// Time reached (nondimensional).
    pub t: f64,
    pub l2: [f64; 3],
    /// First-component error over that of the coarsest grid in the study.
    pub rel_l2_c1: f64,
    /// Observed order against the next coarser grid.
    pub order_c1: Option<f64>,
    /// Largest rank of each component over all steps (TT runs).
    pub max_rank: Option<[usize; 3]>,
    pub wall_s: f64,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    /// Tolerances used in each step.
    pub eps_trace: Vec<StepEps>,
    /// Ranks after each step, starting with the initial state.
    pub rank_trace: Vec<[usize; 3]>,
    /// Per-component tolerance evaluations.
    pub eps_calls: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEps {
    pub per_var: [f64; 3],
    pub global: f64,
}

impl From<StepTolerances> for StepEps {
    fn from(t: StepTolerances) -> Self {
        Self {
            per_var: t.per_var,
            global: t.global,
        }
    }
}

impl RunReport {
    pub fn max_rank_overall(&self) -> Option<usize> {
        self.max_rank.map(|r| r.into_iter().max().unwrap_or(0))
    }
}

/// A finished run with its final state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub state: ConservedState,
    pub spec: CaseSpec,
    pub grid: Grid,
}

/// `sqrt(dx dy sum (q - q_exact)^2)` per component against exact cell averages at `t`.
pub fn l2_error(state: &ConservedState, spec: &CaseSpec, grid: &Grid, scheme: SchemeId, t: f64) -> [f64; 3] {
    let exact = cell_averages(grid, scheme.n_quad(), |x, y| spec.exact_conserved(x, y, t));
    let area = grid.dx() * grid.dy();
    [0, 1, 2].map(|k| {
        let d = state.comps[k].to_dense() - &exact[k];
        (area * d.norm_squared()).sqrt()
    })
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    run_full(cfg).map(|o| o.report)
}

/// Integrate one configuration and keep the final state.
pub fn run_full(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let spec = cfg.spec();
    let grid = cfg.grid();
    let scheme = cfg.scheme;
    let params = spec.nondim_params();
    let dx = grid.dx();
    let policy = EpsPolicy::new(
        cfg.c_eps.unwrap_or_else(|| spec.c_eps(scheme)),
        scheme.order(),
        grid.volume(),
    );
    let mut forcing = CaseForcing::new(&spec, grid, scheme, cfg.mms_source).map_err(HarnessError::Setup)?;
    let cross = CrossConfig {
        seed: cfg.seed,
        ..CrossConfig::default()
    };
    forcing.cross = cross.clone();
    let ctx = RhsContext {
        model: spec.model,
        params,
        grid,
        scheme,
        forcing: &forcing,
        cross,
        check_depth: cfg.debug_positivity,
    };

    let dt0 = spec.time_step(scheme, dx, cfg.dt_ratio);
    let t_end = cfg.t_end.unwrap_or_else(|| spec.t_final_nd());
    let started = Instant::now();
    let mut eps_calls = 0;
    let mut state = init_cell_averages(&spec, &grid, scheme);
    if cfg.rep == Representation::Tt {
        let tol = StepTolerances::for_state(&state, &policy, dx, &mut eps_calls);
        state = state.to_tt(tol.per_var).map_err(HarnessError::Setup)?;
    }

    let mut eps_trace = Vec::new();
    let mut rank_trace = Vec::new();
    if let Some(r) = state.ranks() {
        rank_trace.push(r);
    }
    let mut t = 0.0;
    let mut steps = 0;
    // Stop once the remaining interval is at rounding level.
    while t_end - t > 1e-12 * t_end && cfg.max_steps.is_none_or(|m| steps < m) {
        let last = t + dt0 >= t_end;
        let dt = if last { t_end - t } else { dt0 };
        let (next, tol) = ssprk3_with(&ctx, &state, t, dt, &policy, &mut eps_calls)
            .map_err(|source| HarnessError::Solver { step: steps, t, source })?;
        state = next;
        if cfg.debug_positivity {
            state
                .check_positive_depth("end of step")
                .map_err(|source| HarnessError::Solver { step: steps, t, source })?;
        }
        steps += 1;
        t = if last { t_end } else { t + dt };
        if let Some(r) = state.ranks() {
            rank_trace.push(r);
            eps_trace.push(StepEps::from(tol));
        }
    }
    let wall_s = started.elapsed().as_secs_f64();

    let max_rank =
        (!rank_trace.is_empty()).then(|| [0, 1, 2].map(|k| rank_trace.iter().map(|r| r[k]).max().unwrap_or(0)));
    if cfg.debug_positivity {
        if let (Some(m), Some(r)) = (max_rank, state.ranks()) {
            debug_assert!((0..3).all(|k| m[k] >= r[k]));
        }
    }
    let all_eps = eps_trace.iter().flat_map(|e| e.per_var.into_iter().chain([e.global]));
    let eps_min = all_eps.clone().reduce(f64::min);
    let eps_max = all_eps.reduce(f64::max);

    let l2 = l2_error(&state, &spec, &grid, scheme, t);
    let report = RunReport {
        case: cfg.case.to_string(),
        scheme: scheme.to_string(),
        rep: cfg.rep.to_string(),
        n: cfg.n,
        dt: dt0,
        steps,
        t,
        l2,
        rel_l2_c1: 1.0,
        order_c1: None,
        max_rank,
        wall_s,
        eps_min,
        eps_max,
        eps_trace,
        rank_trace,
        eps_calls,
    };
    Ok(RunOutcome {
        report,
        state,
        spec,
        grid,
    })
}

/// Run `cfg` on each grid (each twice the previous) and fill in relative errors and orders.
pub fn convergence(cfg: &RunConfig, grids: &[usize]) -> Result<Vec<RunReport>, HarnessError> {
    check_doubling(grids)?;
    let mut out: Vec<RunReport> = Vec::with_capacity(grids.len());
    for &n in grids {
        let mut r = run(&RunConfig { n, ..cfg.clone() })?;
        if let Some(first) = out.first() {
            r.rel_l2_c1 = r.l2[0] / first.l2[0];
        }
        if let Some(prev) = out.last() {
            r.order_c1 = Some((prev.l2[0] / r.l2[0]).log2());
        }
        out.push(r);
    }
    Ok(out)
}

pub fn check_doubling(grids: &[usize]) -> Result<(), HarnessError> {
    if grids.is_empty() {
        return Err(HarnessError::Config("empty grid list".into()));
    }
    for w in grids.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(HarnessError::Config(format!(
                "grids must double: {} is followed by {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub case: String,
    pub scheme: String,
    pub rep: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub l2_c1: f64,
    pub l2_c2: f64,
    pub l2_c3: f64,
    pub rel_l2_c1: f64,
    pub order_c1: Option<f64>,
    pub max_rank: Option<usize>,
    pub wall_s: f64,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
}

impl From<&RunReport> for CsvRow {
    fn from(r: &RunReport) -> Self {
        Self {
            case: r.case.clone(),
            scheme: r.scheme.clone(),
            rep: r.rep.clone(),
            n: r.n,
            dt: r.dt,
            steps: r.steps,
            l2_c1: r.l2[0],
            l2_c2: r.l2[1],
            l2_c3: r.l2[2],
            rel_l2_c1: r.rel_l2_c1,
            order_c1: r.order_c1,
            max_rank: r.max_rank_overall(),
            wall_s: r.wall_s,
            eps_min: r.eps_min,
            eps_max: r.eps_max,
        }
    }
}

pub fn write_csv<W: Write>(reports: &[RunReport], w: W) -> Result<(), HarnessError> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in reports {
        wtr.serialize(CsvRow::from(r))?;
    }
    if reports.is_empty() {
        wtr.write_record([
            "case",
            "scheme",
            "rep",
            "N",
            "dt",
            "steps",
            "l2_c1",
            "l2_c2",
            "l2_c3",
            "rel_l2_c1",
            "order_c1",
            "max_rank",
            "wall_s",
            "eps_min",
            "eps_max",
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_csv_file(reports: &[RunReport], path: &Path) -> Result<(), HarnessError> {
    write_csv(reports, std::fs::File::create(path)?)
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<CsvRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_json<W: Write>(reports: &[RunReport], w: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

/// Dense over TT wall time for runs matching in case, scheme and N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Speedup {
    pub case: String,
    pub scheme: String,
    pub n: usize,
    pub dense_s: f64,
    pub tt_s: f64,
    pub ratio: f64,
}

pub fn speedups(reports: &[RunReport]) -> Vec<Speedup> {
    let dense = Representation::Dense.to_string();
    let tt = Representation::Tt.to_string();
    reports
        .iter()
        .filter(|r| r.rep == dense)
        .filter_map(|d| {
            reports
                .iter()
                .find(|t| t.rep == tt && t.case == d.case && t.scheme == d.scheme && t.n == d.n)
                .map(|t| Speedup {
                    case: d.case.clone(),
                    scheme: d.scheme.clone(),
                    n: d.n,
                    dense_s: d.wall_s,
                    tt_s: t.wall_s,
                    ratio: d.wall_s / t.wall_s,
                })
        })
        .collect()
}

/// Cap the worker pool from `TTSWE_THREADS`, if set. Later calls are no-ops.
pub fn init_thread_pool() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var("TTSWE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("TTSWE_THREADS must be a positive integer, got '{v}'")))?;
    if n == 0 {
        return Err(HarnessError::Config("TTSWE_THREADS must be positive".into()));
    }
    // Fails only if a global pool already exists, which is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::Field;

    #[test]
    fn l2_error_examples() {
        let spec = CaseSpec::get(CaseId::InertiaGravity);
        let grid = Grid::square(16, 1.0);
        let s = init_cell_averages(&spec, &grid, SchemeId::Upwind5);
        assert_eq!(l2_error(&s, &spec, &grid, SchemeId::Upwind5, 0.0), [0.0; 3]);
        let shifted = ConservedState {
            model: s.model,
            comps: [
                Field::Dense(s.comps[0].to_dense().add_scalar(0.25)),
                s.comps[1].clone(),
                s.comps[2].clone(),
            ],
        };
        let e = l2_error(&shifted, &spec, &grid, SchemeId::Upwind5, 0.0);
        assert!((e[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(CaseId::Kelvin, SchemeId::Upwind3, Representation::Dense, 8);
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        c.n = 16;
        c.dt_ratio = Some(-1.0);
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
        assert!(check_doubling(&[40, 100]).is_err());
        assert!(check_doubling(&[40, 80, 160]).is_ok());
    }

    #[test]
    fn zero_steps_give_quadrature_level_error() {
        for n in [16, 32] {
            let mut c = RunConfig::new(CaseId::Manufactured, SchemeId::Weno5, Representation::Dense, n);
            c.max_steps = Some(0);
            let r = run(&c).unwrap();
            assert_eq!(r.steps, 0);
            assert!(r.l2.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut c = RunConfig::new(CaseId::Kelvin, SchemeId::Upwind3, Representation::Tt, 16);
        c.max_steps = Some(2);
        let r = run(&c).unwrap();
        assert_eq!(r.steps, 2);
        assert_eq!(r.eps_trace.len(), 2);
        assert_eq!(r.rank_trace.len(), 3);
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "case,scheme,rep,N,dt,steps,l2_c1,l2_c2,l2_c3,rel_l2_c1,order_c1,max_rank,wall_s,eps_min,eps_max\n"
        ));
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, vec![CsvRow::from(&r)]);
        let mut j = Vec::new();
        write_json(std::slice::from_ref(&r), &mut j).unwrap();
        let back: Vec<RunReport> = serde_json::from_slice(&j).unwrap();
        assert_eq!(back[0], r);
    }
}

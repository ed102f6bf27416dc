//! Experiment drivers: single runs with CSV output, scheme comparisons and
//! mesh-refinement error tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cfl::CflPolicy;
use crate::config::{CellInit, InitialCondition, RunConfig, Scheme};
use crate::csv::{fmt_num, CsvWriter};
use crate::diagnostics::{h1_norm, h1_norm_sq, l1_distance, l1_error, oleinik_monitor};
use crate::error::{Error, Result, RunError};
use crate::mesh::{d_minus, GridFn, GridSpec};
use crate::scheme1::{run_first_order, StaggeredState};
use crate::scheme2::{run_second_order, CellState};
use crate::stepping::Observer;

/// Read access shared by both scheme states.
pub trait SolutionView {
    fn time(&self) -> f64;
    fn steps(&self) -> usize;
    fn field(&self) -> &GridFn;
    /// Discrete derivative `q`; the stored companion when there is one.
    fn slope(&self, dx: f64) -> GridFn;
}

impl SolutionView for StaggeredState {
    fn time(&self) -> f64 {
        self.t
    }

    fn steps(&self) -> usize {
        self.n
    }

    fn field(&self) -> &GridFn {
        &self.u
    }

    fn slope(&self, dx: f64) -> GridFn {
        self.q.clone().unwrap_or_else(|| d_minus(&self.u, dx))
    }
}

impl SolutionView for CellState {
    fn time(&self) -> f64 {
        self.t
    }

    fn steps(&self) -> usize {
        self.n
    }

    fn field(&self) -> &GridFn {
        &self.u
    }

    fn slope(&self, dx: f64) -> GridFn {
        d_minus(&self.u, dx)
    }
}

/// Final state of a run of either scheme.
#[derive(Debug, Clone)]
pub enum FinalState {
    First(StaggeredState),
    Second(CellState),
}

impl FinalState {
    pub fn view(&self) -> &dyn SolutionView {
        match self {
            FinalState::First(s) => s,
            FinalState::Second(s) => s,
        }
    }
}

/// Outcome of [`solve`]: the last good state and, if the run blew up, where.
#[derive(Debug, Clone)]
pub struct Solved {
    pub state: FinalState,
    pub unstable: Option<(usize, f64)>,
}

/// Runs whichever scheme `cfg` names. Instabilities are reported in the
/// result rather than as an error; only setup problems are errors.
pub fn solve(
    cfg: &RunConfig,
    g: &GridSpec,
    observer: &mut dyn FnMut(&dyn SolutionView, bool),
) -> Result<Solved> {
    let u0 = cfg.initial_data(g)?;
    match cfg.scheme {
        Scheme::First => {
            let mut obs = Forward(observer);
            lift(run_first_order(u0, cfg, g, &mut obs), FinalState::First)
        }
        Scheme::Second => {
            let mut obs = Forward(observer);
            lift(run_second_order(u0, cfg, g, &mut obs), FinalState::Second)
        }
    }
}

struct Forward<'a>(&'a mut dyn FnMut(&dyn SolutionView, bool));

impl<S: SolutionView> Observer<S> for Forward<'_> {
    fn on_step(&mut self, s: &S) {
        (self.0)(s, false)
    }

    fn on_snapshot(&mut self, s: &S) {
        (self.0)(s, true)
    }
}

fn lift<S>(
    r: std::result::Result<S, RunError<S>>,
    wrap: fn(S) -> FinalState,
) -> Result<Solved> {
    match r {
        Ok(s) => Ok(Solved {
            state: wrap(s),
            unstable: None,
        }),
        Err(RunError::Setup(e)) => Err(e),
        Err(RunError::Unstable(a)) => Ok(Solved {
            state: wrap(a.last_good),
            unstable: Some((a.step, a.t)),
        }),
    }
}

/// What `cmd_run` produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scheme: Scheme,
    pub grid: GridSpec,
    pub t: f64,
    pub steps: usize,
    pub unstable: Option<(usize, f64)>,
    pub initial_linf: f64,
    pub final_linf: f64,
    pub final_h1: f64,
    /// L1 error against the exact solution at the final time, if known.
    pub l1_error: Option<f64>,
    /// Largest fitted one-sided-bound constant seen over the run.
    pub max_c_fit: Option<f64>,
    pub energy_ok: bool,
    pub snapshots_csv: PathBuf,
    pub diagnostics_csv: PathBuf,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "scheme={} nx={} dx={} t={} steps={}",
            self.scheme.name(),
            self.grid.nx(),
            self.grid.dx(),
            self.t,
            self.steps
        );
        let _ = writeln!(
            s,
            "linf: initial={:.6} final={:.6}  h1={:.6}",
            self.initial_linf, self.final_linf, self.final_h1
        );
        if let Some(e) = self.l1_error {
            let _ = writeln!(s, "L1 error vs exact: {e:.6}");
        }
        if let Some(c) = self.max_c_fit {
            let _ = writeln!(s, "one-sided bound: max fitted C = {c:.4}");
        }
        let _ = writeln!(s, "energy bound respected: {}", self.energy_ok);
        if let Some((step, t)) = self.unstable {
            let _ = writeln!(s, "UNSTABLE at step {step} (t = {t}); output truncated");
        }
        s
    }
}

/// Runs `cfg`, writing `snapshots.csv` (t, x, u), `diagnostics.csv`
/// (t, h1_norm, linf, energy_margin, oleinik_margin) and `status.txt` into
/// `cfg.output`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    let g = cfg.grid()?;
    let dir = cfg.output.clone();
    std::fs::create_dir_all(&dir)?;
    let snapshots_csv = dir.join("snapshots.csv");
    let diagnostics_csv = dir.join("diagnostics.csv");
    let mut snaps = CsvWriter::create(&snapshots_csv, &["t", "x", "u"])?;
    let mut diags = CsvWriter::create(
        &diagnostics_csv,
        &["t", "h1_norm", "linf", "energy_margin", "oleinik_margin"],
    )?;

    let u0 = cfg.initial_data(&g)?;
    let h1_0 = h1_norm(&u0, &g);
    let energy0 = h1_0 * h1_0;
    let initial_linf = u0.max_abs();
    let theta_pow = g.dx().powf(cfg.cfl.theta);
    let site = u0.site();

    let mut energy_ok = true;
    let mut max_c_fit: Option<f64> = None;
    let mut diag_row = |t: f64, u: &GridFn, slope: &GridFn| -> std::io::Result<()> {
        let value = h1_norm_sq(u, &g);
        let bound = (t * theta_pow).exp() * energy0;
        if value - bound > crate::diagnostics::ENERGY_SLACK * bound {
            energy_ok = false;
        }
        let oleinik = match oleinik_monitor(slope, t, h1_0) {
            Ok(rep) => {
                if let Some(c) = rep.c_fit {
                    max_c_fit = Some(max_c_fit.map_or(c, |m: f64| m.max(c)));
                }
                rep.margin
            }
            // 2/t is unbounded at t = 0
            Err(_) => f64::NEG_INFINITY,
        };
        diags.row(&[t, value.sqrt(), u.max_abs(), bound - value, oleinik])
    };
    diag_row(0.0, &u0, &d_minus(&u0, g.dx()))?;

    let mut io_err: Option<std::io::Error> = None;
    let mut record = |s: &dyn SolutionView, snapshot: bool| {
        if io_err.is_some() {
            return;
        }
        let t = s.time();
        let u = s.field();
        let result = if snapshot {
            u.values()
                .iter()
                .enumerate()
                .try_for_each(|(j, &v)| snaps.row(&[t, g.position(j, site), v]))
        } else {
            diag_row(t, u, &s.slope(g.dx()))
        };
        if let Err(e) = result {
            io_err = Some(e);
        }
    };
    let solved = solve(cfg, &g, &mut record)?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    snaps.flush()?;
    diags.flush()?;

    let view = solved.state.view();
    let t = view.time();
    let l1 = cfg
        .ic
        .exact()
        .filter(|_| solved.unstable.is_none())
        .map(|exact| l1_error(view.field(), exact, t, &g));
    let status = match solved.unstable {
        None => "ok\n".to_string(),
        Some((step, t)) => format!("unstable step={step} t={}\n", fmt_num(t)),
    };
    std::fs::write(dir.join("status.txt"), status)?;

    Ok(RunReport {
        scheme: cfg.scheme,
        grid: g,
        t,
        steps: view.steps(),
        unstable: solved.unstable,
        initial_linf,
        final_linf: view.field().max_abs(),
        final_h1: h1_norm(view.field(), &g),
        l1_error: l1,
        max_c_fit,
        energy_ok,
        snapshots_csv,
        diagnostics_csv,
    })
}

/// Test cases with closed-form references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    Single,
    TwoPeakon,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Single => "single",
            Case::TwoPeakon => "two_peakon",
        }
    }

    pub fn ic(&self) -> InitialCondition {
        match self {
            Case::Single => InitialCondition::SinglePeakon,
            Case::TwoPeakon => InitialCondition::TwoPeakon,
        }
    }

    /// Evaluation time of the error table.
    pub fn t_eval(&self) -> f64 {
        match self {
            Case::Single => 20.0,
            Case::TwoPeakon => 25.0,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.ic().default_domain().expect("peakon cases have a domain")
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "single_peakon" => Ok(Case::Single),
            "two_peakon" | "two" => Ok(Case::TwoPeakon),
            other => Err(Error::InvalidParameter(format!("unknown case `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub k: u32,
    pub dx: f64,
    /// `None` when the scheme was not requested or the run failed.
    pub err_first: Option<f64>,
    pub err_second: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub case: Case,
    pub t_eval: f64,
    pub domain: (f64, f64),
    pub cfl: crate::cfl::CflPolicy,
    pub rows: Vec<ErrorRow>,
}

fn rate(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

impl ErrorTable {
    pub fn column(&self, scheme: Scheme) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| match scheme {
                Scheme::First => r.err_first,
                Scheme::Second => r.err_second,
            })
            .collect()
    }

    /// `log2(err_k / err_{k+1})` for consecutive rows.
    pub fn rates(&self, scheme: Scheme) -> Vec<Option<f64>> {
        let col = self.column(scheme);
        col.windows(2).map(|w| rate(w[0], w[1])).collect()
    }

    pub fn render(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("failed".to_string(), |e| format!("{e:.4}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "L1 errors, case={} t={} domain=[{}, {}]",
            self.case.name(),
            self.t_eval,
            self.domain.0,
            self.domain.1
        );
        let _ = writeln!(s, "{:>3} {:>12} {:>10} {:>10} {:>8} {:>8}", "k", "dx", "first", "second", "rate1", "rate2");
        let r1 = self.rates(Scheme::First);
        let r2 = self.rates(Scheme::Second);
        for (i, row) in self.rows.iter().enumerate() {
            let rate_cell = |r: &[Option<f64>]| {
                if i == 0 {
                    String::new()
                } else {
                    r[i - 1].map_or("-".into(), |v| format!("{v:.3}"))
                }
            };
            let _ = writeln!(
                s,
                "{:>3} {:>12.6e} {:>10} {:>10} {:>8} {:>8}",
                row.k,
                row.dx,
                cell(row.err_first),
                cell(row.err_second),
                rate_cell(&r1),
                rate_cell(&r2)
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = CsvWriter::create(path, &["k", "dx", "err_first", "err_second"])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_num);
        for row in &self.rows {
            w.raw_row(&[row.k.to_string(), fmt_num(row.dx), opt(row.err_first), opt(row.err_second)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One table cell: run `scheme` at level `k` and measure the L1 error at the
/// case's evaluation time. `None` if the run went unstable.
pub fn error_cell(case: Case, k: u32, scheme: Scheme, base: &RunConfig) -> Result<Option<f64>> {
    let (a, b) = case.domain();
    let g = GridSpec::with_level(a, b, k)?;
    let cfg = RunConfig {
        scheme,
        a,
        b,
        nx: g.nx(),
        t_final: case.t_eval(),
        ic: case.ic(),
        snapshot_times: Vec::new(),
        ..base.clone()
    };
    let solved = solve(&cfg, &g, &mut |_, _| {})?;
    if solved.unstable.is_some() {
        return Ok(None);
    }
    let exact = case.ic().exact().expect("peakon cases are exact");
    let view = solved.state.view();
    Ok(Some(l1_error(view.field(), exact, view.time(), &g)))
}

/// Safety factor of the refinement-table step schedule.
pub const TABLE_NU: f64 = 0.3;

/// Settings used for the refinement tables: amplitude-proportional steps
/// with `nu = 0.3` and cell-averaged second-order data.
pub fn table_config() -> RunConfig {
    RunConfig {
        cfl: CflPolicy::amplitude(TABLE_NU),
        cell_init: CellInit::Average,
        ..RunConfig::default()
    }
}

/// Builds the error table for `case` over `ks`, one independent run per
/// (k, scheme) cell, executed on scoped worker threads. `base` supplies the
/// CFL settings and scheme options.
pub fn cmd_convergence(
    case: Case,
    ks: &[u32],
    schemes: &[Scheme],
    base: &RunConfig,
) -> Result<ErrorTable> {
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let jobs: Vec<(u32, Scheme)> = ks
        .iter()
        .flat_map(|&k| schemes.iter().map(move |&s| (k, s)))
        .collect();
    let results: Vec<Result<Option<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(k, s)| scope.spawn(move || error_cell(case, k, s, base)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Ok(None)))
            .collect()
    });

    let (a, b) = case.domain();
    let mut rows: Vec<ErrorRow> = ks
        .iter()
        .map(|&k| ErrorRow {
            k,
            dx: (b - a) / (1u64 << k) as f64,
            err_first: None,
            err_second: None,
        })
        .collect();
    for ((k, scheme), res) in jobs.into_iter().zip(results) {
        let err = res?;
        let row = rows.iter_mut().find(|r| r.k == k).expect("row exists");
        match scheme {
            Scheme::First => row.err_first = err,
            Scheme::Second => row.err_second = err,
        }
    }
    Ok(ErrorTable {
        case,
        t_eval: case.t_eval(),
        domain: (a, b),
        cfl: base.cfl,
        rows,
    })
}

/// Both schemes on the same problem at the final time.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub grid: GridSpec,
    pub t: f64,
    pub first: GridFn,
    pub second: GridFn,
    pub l1_first: Option<f64>,
    pub l1_second: Option<f64>,
    pub unstable_first: Option<(usize, f64)>,
    pub unstable_second: Option<(usize, f64)>,
}

impl Comparison {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "t={} nx={} dx={}", self.t, self.grid.nx(), self.grid.dx());
        for (name, l1, unst) in [
            ("first", self.l1_first, self.unstable_first),
            ("second", self.l1_second, self.unstable_second),
        ] {
            match (l1, unst) {
                (_, Some((step, t))) => {
                    let _ = writeln!(s, "{name:>6}: unstable at step {step} (t = {t})");
                }
                (Some(e), None) => {
                    let _ = writeln!(s, "{name:>6}: L1 error {e:.6}");
                }
                (None, None) => {
                    let _ = writeln!(s, "{name:>6}: no exact reference");
                }
            }
        }
        s
    }
}

/// Runs both schemes from `cfg` (its `scheme` key is ignored) and writes
/// `compare.csv` with columns (x, u_first, u_second, exact). First-order
/// values are interpolated from half nodes onto the integer nodes.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Comparison> {
    let g = cfg.grid()?;
    let quiet = RunConfig {
        snapshot_times: Vec::new(),
        ..cfg.clone()
    };
    let first = solve(&RunConfig { scheme: Scheme::First, ..quiet.clone() }, &g, &mut |_, _| {})?;
    let second = solve(&RunConfig { scheme: Scheme::Second, ..quiet }, &g, &mut |_, _| {})?;
    let t = cfg.t_final;
    let exact = cfg.ic.exact();
    let u1 = first.state.view().field().clone();
    let u2 = second.state.view().field().clone();
    let l1 = |u: &GridFn, unstable: Option<(usize, f64)>| {
        exact
            .filter(|_| unstable.is_none())
            .map(|f| l1_error(u, f, t, &g))
    };

    std::fs::create_dir_all(&cfg.output)?;
    let mut w = CsvWriter::create(&cfg.output.join("compare.csv"), &["x", "u_first", "u_second", "exact"])?;
    let n = g.nx();
    for j in 0..n {
        let x = g.node(j);
        // u_{j-1/2} and u_{j+1/2} straddle x_j
        let on_node = 0.5 * (u1[(j + n - 1) % n] + u1[j]);
        let ex = exact.map_or(f64::NAN, |f| f(t, x));
        w.row(&[x, on_node, u2[j], ex])?;
    }
    w.flush()?;

    Ok(Comparison {
        grid: g,
        t,
        l1_first: l1(&u1, first.unstable),
        l1_second: l1(&u2, second.unstable),
        first: u1,
        second: u2,
        unstable_first: first.unstable,
        unstable_second: second.unstable,
    })
}

/// L1 distance between the two schemes' final fields (first order averaged
/// onto integer nodes).
pub fn scheme_gap(c: &Comparison) -> f64 {
    let n = c.grid.nx();
    let avg: Vec<f64> = (0..n)
        .map(|j| 0.5 * (c.first[(j + n - 1) % n] + c.first[j]))
        .collect();
    let avg = GridFn::new(avg, crate::mesh::Site::Integer).expect("finite");
    l1_distance(&avg, &c.second, &c.grid)
}

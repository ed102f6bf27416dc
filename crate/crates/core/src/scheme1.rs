//! First-order explicit upwind scheme on the staggered lattice.
//!
//! `u` lives at half-integer nodes, `P` and the companion `q = D_- u` at
//! integer nodes. One step reads
//!
//! ```text
//! u^{n+1}_{j+1/2} = u^n_{j+1/2} - dt [ (u v 0) D_- u + (u ^ 0) D_+ u + D_+ P ]_{j+1/2}
//! ```
//!
//! with `P^n` the solution of the discrete Helmholtz problem driven by
//! `u^n`. The `q` update is the exact `D_-` image of the `u` update, so
//! stepping both in lockstep keeps `q^n = D_- u^n` up to roundoff.

use crate::cfl::CflPolicy;
use crate::config::RunConfig;
use crate::diagnostics::h1_norm;
use crate::elliptic::{p_source_from_u, HelmholtzSolver};
use crate::error::{Error, Result, RunError};
use crate::mesh::{init_q, GridFn, GridSpec, Site};
use crate::stepping::{integrate, Observer, TimeStepper};

#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    pub t: f64,
    pub n: usize,
    /// `u^n_{j+1/2}`
    pub u: GridFn,
    /// `q^n_j`, when the companion scheme is stepped as well.
    pub q: Option<GridFn>,
    /// `P^n_j`, always consistent with `u`.
    pub p: GridFn,
}

/// Writes one upwind step of the `u` equation into `out`.
///
/// Shared with the second-order predictor.
pub(crate) fn upwind_update(u: &[f64], p: &[f64], dt: f64, dx: f64, out: &mut [f64]) {
    let n = u.len();
    let r = dt / dx;
    for j in 0..n {
        let jm = if j == 0 { n - 1 } else { j - 1 };
        let jp = if j + 1 == n { 0 } else { j + 1 };
        let uj = u[j];
        let transport = uj.max(0.0) * (uj - u[jm]) + uj.min(0.0) * (u[jp] - uj);
        out[j] = uj - r * (transport + (p[jp] - p[j]));
    }
}

/// Companion update for `q`; `u` and `p` are taken at the old level.
pub(crate) fn upwind_update_q(
    u: &[f64],
    q: &[f64],
    p: &[f64],
    dt: f64,
    dx: f64,
    out: &mut [f64],
) {
    let n = u.len();
    let r = dt / dx;
    for j in 0..n {
        let jm = if j == 0 { n - 1 } else { j - 1 };
        let jp = if j + 1 == n { 0 } else { j + 1 };
        let right = u[j];
        let left = u[jm];
        let transport = left.max(0.0) * (q[j] - q[jm]) + right.min(0.0) * (q[jp] - q[j]);
        let rp = right.max(0.0);
        let lm = left.min(0.0);
        let source = 0.5 * q[j] * q[j] + p[j] - rp * rp - lm * lm;
        out[j] = q[j] - r * transport - dt * source;
    }
}

/// Grid, pre-factored Helmholtz solver and step-size policy for one run.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    grid: GridSpec,
    solver: HelmholtzSolver,
    cfl: CflPolicy,
}

impl FirstOrder {
    pub fn new(grid: GridSpec, cfl: CflPolicy) -> Self {
        Self {
            solver: HelmholtzSolver::new(&grid),
            grid,
            cfl,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cfl(&self) -> &CflPolicy {
        &self.cfl
    }

    /// `P` for the half-node field `u`.
    pub fn pressure(&self, u: &GridFn) -> GridFn {
        let mut f = p_source_from_u(u, self.grid.dx()).into_values();
        self.solver.solve_in_place(&mut f);
        GridFn::from_raw(f, Site::Integer)
    }

    /// State at `t = 0` with `P^0` and, if requested, `q^0 = D_- u^0`.
    pub fn initial_state(&self, u0: GridFn, with_q: bool) -> Result<StaggeredState> {
        if u0.len() != self.grid.nx() {
            return Err(Error::LengthMismatch {
                expected: self.grid.nx(),
                got: u0.len(),
            });
        }
        if let Some(index) = u0.first_non_finite() {
            return Err(Error::NonFinite { index });
        }
        let q = with_q.then(|| init_q(&u0, &self.grid));
        let p = self.pressure(&u0);
        Ok(StaggeredState {
            t: 0.0,
            n: 0,
            u: u0,
            q,
            p,
        })
    }

    /// `q^{n+1}` from the companion scheme. Panics if `s.q` is absent.
    pub fn step_q(&self, s: &StaggeredState, dt: f64) -> GridFn {
        let q = s.q.as_ref().expect("step_q needs a companion q field");
        let mut out = vec![0.0; self.grid.nx()];
        upwind_update_q(
            s.u.values(),
            q.values(),
            s.p.values(),
            dt,
            self.grid.dx(),
            &mut out,
        );
        GridFn::from_raw(out, Site::Integer)
    }

    /// One step of the `u` scheme, stepping `q` alongside when present and
    /// refreshing `P` for the new level.
    pub fn step_u(&self, s: &StaggeredState, dt: f64) -> Result<StaggeredState> {
        let mut out = vec![0.0; self.grid.nx()];
        upwind_update(s.u.values(), s.p.values(), dt, self.grid.dx(), &mut out);
        let u = GridFn::from_raw(out, Site::Half);
        let q = s.q.as_ref().map(|_| self.step_q(s, dt));
        let n = s.n + 1;
        let t = s.t + dt;
        let finite = u.is_finite() && q.as_ref().is_none_or(GridFn::is_finite);
        if !finite {
            return Err(Error::Unstable { step: n, t });
        }
        let p = self.pressure(&u);
        Ok(StaggeredState { t, n, u, q, p })
    }
}

impl TimeStepper for FirstOrder {
    type State = StaggeredState;

    fn time(&self, s: &StaggeredState) -> f64 {
        s.t
    }

    fn time_mut<'a>(&self, s: &'a mut StaggeredState) -> &'a mut f64 {
        &mut s.t
    }

    fn step_index(&self, s: &StaggeredState) -> usize {
        s.n
    }

    fn time_step(&self, s: &StaggeredState) -> f64 {
        self.cfl.time_step(&s.u, self.grid.dx())
    }

    fn advance(&self, s: &StaggeredState, dt: f64) -> Result<StaggeredState> {
        self.step_u(s, dt)
    }
}

/// Runs the first-order scheme from half-node data `u0` to `cfg.t_final`.
///
/// The strict CFL policy takes its `|u^0|_{h1}` from `u0` when the config
/// leaves it at zero.
pub fn run_first_order(
    u0: GridFn,
    cfg: &RunConfig,
    g: &GridSpec,
    observer: &mut dyn Observer<StaggeredState>,
) -> std::result::Result<StaggeredState, RunError<StaggeredState>> {
    let mut cfl = cfg.cfl;
    if cfl.h1norm0 == 0.0 {
        cfl.h1norm0 = h1_norm(&u0, g);
    }
    cfl.validate()?;
    let scheme = FirstOrder::new(*g, cfl);
    let state = scheme.initial_state(u0, cfg.track_q)?;
    Ok(integrate(&scheme, state, cfg.t_final, &cfg.snapshot_times, observer)?)
}

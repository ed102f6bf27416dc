//! Norms, error metrics, runtime monitors and the piecewise space-time
//! reconstructions of the discrete solution.

use crate::error::{Error, Result};
use crate::mesh::{d_minus, GridFn, GridSpec, Site};
use crate::scheme1::StaggeredState;
use crate::stepping::Observer;

/// `sqrt(dx * sum_j [u_j^2 + (D_- u)_j^2])` with periodic wrap.
pub fn h1_norm(u: &GridFn, g: &GridSpec) -> f64 {
    h1_norm_sq(u, g).sqrt()
}

pub fn h1_norm_sq(u: &GridFn, g: &GridSpec) -> f64 {
    let v = u.values();
    let n = v.len();
    let dx = g.dx();
    let mut acc = 0.0;
    for j in 0..n {
        let d = (v[j] - v[(j + n - 1) % n]) / dx;
        acc += v[j] * v[j] + d * d;
    }
    dx * acc
}

pub fn linf_norm(u: &GridFn) -> f64 {
    u.max_abs()
}

pub fn l1_norm(u: &GridFn, g: &GridSpec) -> f64 {
    g.dx() * u.values().iter().map(|v| v.abs()).sum::<f64>()
}

pub fn l2_norm(u: &GridFn, g: &GridSpec) -> f64 {
    (g.dx() * u.values().iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `dx * sum_i |u_num(x_i) - exact(t, x_i)|` over the nodes `u_num` lives on.
pub fn l1_error(u_num: &GridFn, exact: impl Fn(f64, f64) -> f64, t: f64, g: &GridSpec) -> f64 {
    let site = u_num.site();
    g.dx()
        * u_num
            .values()
            .iter()
            .enumerate()
            .map(|(j, &v)| (v - exact(t, g.position(j, site))).abs())
            .sum::<f64>()
}

/// `dx * sum_i |a_i - b_i|`
pub fn l1_distance(a: &GridFn, b: &GridFn, g: &GridSpec) -> f64 {
    g.dx()
        * a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Running record of `|u^n|_{h1}^2` against `exp(t dx^theta) |u^0|_{h1}^2`.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    grid: GridSpec,
    theta: f64,
    initial: f64,
    records: Vec<EnergyRecord>,
}

/// Relative slack before a negative margin counts as a violation.
pub const ENERGY_SLACK: f64 = 1e-9;

impl EnergyLedger {
    pub fn new(u0: &GridFn, grid: GridSpec, theta: f64) -> Self {
        let initial = h1_norm_sq(u0, &grid);
        let mut ledger = Self {
            grid,
            theta,
            initial,
            records: Vec::new(),
        };
        ledger.record(0.0, u0);
        ledger
    }

    pub fn bound(&self, t: f64) -> f64 {
        (t * self.grid.dx().powf(self.theta)).exp() * self.initial
    }

    pub fn record(&mut self, t: f64, u: &GridFn) -> EnergyRecord {
        let value = h1_norm_sq(u, &self.grid);
        let bound = self.bound(t);
        let rec = EnergyRecord {
            t,
            value,
            bound,
            margin: bound - value,
        };
        self.records.push(rec);
        rec
    }

    pub fn records(&self) -> &[EnergyRecord] {
        &self.records
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }
}

impl Observer<StaggeredState> for EnergyLedger {
    fn on_step(&mut self, s: &StaggeredState) {
        self.record(s.t, &s.u);
    }

    fn on_snapshot(&mut self, _s: &StaggeredState) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    pub pass: bool,
    /// Smallest `bound - value` seen.
    pub worst_margin: f64,
    /// Index into the ledger of the worst record.
    pub worst_index: usize,
}

/// Passes iff no record's margin drops below `-ENERGY_SLACK * bound`.
pub fn check_energy(ledger: &EnergyLedger) -> EnergyCheck {
    let mut check = EnergyCheck {
        pass: true,
        worst_margin: f64::INFINITY,
        worst_index: 0,
    };
    for (i, r) in ledger.records.iter().enumerate() {
        if r.margin < check.worst_margin {
            check.worst_margin = r.margin;
            check.worst_index = i;
        }
        if r.margin < -ENERGY_SLACK * r.bound {
            check.pass = false;
        }
    }
    check
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OleinikReport {
    pub t: f64,
    pub max_q: f64,
    /// `max_j q_j - 2/t`
    pub margin: f64,
    /// `margin / |u^0|_{h1}`; `None` for zero initial data.
    pub c_fit: Option<f64>,
}

/// One-sided bound monitor `max_j q_j <= 2/t + C |u^0|_{h1}`.
pub fn oleinik_monitor(q: &GridFn, t: f64, h1norm0: f64) -> Result<OleinikReport> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "one-sided bound needs t > 0, got {t}"
        )));
    }
    let max_q = q.max();
    let margin = max_q - 2.0 / t;
    let c_fit = (h1norm0 > 0.0).then(|| margin / h1norm0);
    Ok(OleinikReport {
        t,
        max_q,
        margin,
        c_fit,
    })
}

/// `max_n max_j |(D_- u^n)_j - q^n_j|`
pub fn q_consistency<'a>(
    u_traj: impl IntoIterator<Item = &'a GridFn>,
    q_traj: impl IntoIterator<Item = &'a GridFn>,
    dx: f64,
) -> f64 {
    u_traj
        .into_iter()
        .zip(q_traj)
        .map(|(u, q)| {
            let dq = d_minus(u, dx);
            dq.values()
                .iter()
                .zip(q.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .fold(0.0, f64::max)
}

/// Two consecutive time levels of the first-order scheme, interpolated to
/// every point of the slab `[t^n, t^{n+1}] x [a, b]`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    grid: GridSpec,
    t0: f64,
    dt: f64,
    u0: Vec<f64>,
    u1: Vec<f64>,
    q0: Vec<f64>,
    q1: Vec<f64>,
    p0: Vec<f64>,
    p1: Vec<f64>,
}

impl Reconstruction {
    /// `q` falls back to `D_- u` on levels that carry no companion field.
    pub fn new(lo: &StaggeredState, hi: &StaggeredState, grid: GridSpec) -> Result<Self> {
        let dt = hi.t - lo.t;
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "reconstruction needs t1 > t0, got [{}, {}]",
                lo.t, hi.t
            )));
        }
        let q_of = |s: &StaggeredState| match &s.q {
            Some(q) => q.values().to_vec(),
            None => d_minus(&s.u, grid.dx()).into_values(),
        };
        Ok(Self {
            grid,
            t0: lo.t,
            dt,
            u0: lo.u.values().to_vec(),
            u1: hi.u.values().to_vec(),
            q0: q_of(lo),
            q1: q_of(hi),
            p0: lo.p.values().to_vec(),
            p1: hi.p.values().to_vec(),
        })
    }

    /// Cell `I_j = [x_{j-1/2}, x_{j+1/2})` containing `x`, as an unwrapped
    /// index in `0..=nx`, plus the time fraction.
    fn locate(&self, t: f64, x: f64) -> Result<(usize, f64)> {
        let slack = 1e-12 * self.dt.max(1.0);
        let g = &self.grid;
        let inside_t = t >= self.t0 - slack && t <= self.t0 + self.dt + slack;
        let inside_x = x >= g.a() && x <= g.b();
        if !(inside_t && inside_x) {
            return Err(Error::OutOfSlab { t, x });
        }
        let j = ((x - g.a()) / g.dx() + 0.5).floor() as usize;
        Ok((j.min(g.nx()), (t - self.t0) / self.dt))
    }

    fn lerp(a: f64, b: f64, s: f64) -> f64 {
        a + s * (b - a)
    }

    fn at(&self, field: &[f64], other: &[f64], j: isize, s: f64) -> f64 {
        let n = field.len() as isize;
        let k = j.rem_euclid(n) as usize;
        Self::lerp(field[k], other[k], s)
    }

    pub fn reconstruct_q(&self, t: f64, x: f64) -> Result<f64> {
        let (j, s) = self.locate(t, x)?;
        Ok(self.at(&self.q0, &self.q1, j as isize, s))
    }

    /// `u_{j-1/2}(t) + (x - x_{j-1/2}) q_j(t)` on `I_j`.
    pub fn reconstruct_u(&self, t: f64, x: f64) -> Result<f64> {
        let (j, s) = self.locate(t, x)?;
        let j = j as isize;
        let left_node = self.grid.a() + (j as f64 - 0.5) * self.grid.dx();
        let u_left = self.at(&self.u0, &self.u1, j - 1, s);
        let q = self.at(&self.q0, &self.q1, j, s);
        Ok(u_left + (x - left_node) * q)
    }

    /// `P_j(t) + (x - x_j) D_+ P_j(t)` on `I_j`.
    pub fn reconstruct_p(&self, t: f64, x: f64) -> Result<f64> {
        let (j, s) = self.locate(t, x)?;
        let j = j as isize;
        let node = self.grid.a() + j as f64 * self.grid.dx();
        let pj = self.at(&self.p0, &self.p1, j, s);
        let pn = self.at(&self.p0, &self.p1, j + 1, s);
        Ok(pj + (x - node) * (pn - pj) / self.grid.dx())
    }
}

/// Site helper for diagnostics output.
pub fn node_positions(g: &GridSpec, site: Site) -> Vec<f64> {
    (0..g.nx()).map(|j| g.position(j, site)).collect()
}

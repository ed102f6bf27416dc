//! The discrete Helmholtz problem `P - D_- D_+ P = f` on the periodic lattice.
//!
//! Two independent solvers live here: [`HelmholtzSolver`] factors the cyclic
//! tridiagonal matrix once per grid (Sherman-Morrison around a Thomas
//! sweep), and [`solve_kernel`] sums the lattice Green's function
//! `h * exp(-kappa |j - i|)` over minimal-image distances. The time
//! steppers use the former; the latter is the cross-check.

use crate::error::{Error, Result};
use crate::mesh::{GridFn, GridSpec, Site};

/// Kernel terms below this weight are dropped.
pub const KERNEL_CUTOFF: f64 = 1e-15;

/// Decay rate and amplitude of the lattice Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticKernel {
    pub dx: f64,
    pub kappa: f64,
    pub h: f64,
}

impl EllipticKernel {
    pub fn new(dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel needs dx > 0, got {dx}"
            )));
        }
        let dx2 = dx * dx;
        let kappa = (1.0 + 0.5 * dx2 + 0.5 * dx * (4.0 + dx2).sqrt()).ln();
        // 1 - e^{-kappa} via expm1 keeps the small-dx limit accurate
        let one_minus = -(-kappa).exp_m1();
        let h = 1.0 / (1.0 + 2.0 * one_minus / dx2);
        Ok(Self { dx, kappa, h })
    }

    /// `h * exp(-kappa * d)`
    pub fn weight(&self, distance: usize) -> f64 {
        self.h * (-self.kappa * distance as f64).exp()
    }

    /// Largest lattice distance whose relative weight is at least
    /// [`KERNEL_CUTOFF`].
    pub fn reach(&self) -> usize {
        (-KERNEL_CUTOFF.ln() / self.kappa).floor() as usize
    }
}

pub fn kernel_constants(dx: f64) -> Result<EllipticKernel> {
    EllipticKernel::new(dx)
}

/// `P_j = h * sum_i exp(-kappa d(j,i)) f_i` with `d` the minimal-image
/// distance on the periodic lattice, truncated at [`KERNEL_CUTOFF`].
pub fn solve_kernel(f: &GridFn, k: &EllipticKernel) -> GridFn {
    let n = f.len();
    let fv = f.values();
    let reach = k.reach();
    let mut out = vec![0.0; n];
    if 2 * reach + 1 >= n {
        let weights: Vec<f64> = (0..=n / 2).map(|d| k.weight(d)).collect();
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &fi) in fv.iter().enumerate() {
                let d = j.abs_diff(i);
                let d = d.min(n - d);
                if d <= reach {
                    acc += weights[d] * fi;
                }
            }
            *slot = acc;
        }
    } else {
        let weights: Vec<f64> = (0..=reach).map(|d| k.weight(d)).collect();
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = weights[0] * fv[j];
            for (d, &w) in weights.iter().enumerate().skip(1) {
                acc += w * (fv[(j + d) % n] + fv[(j + n - d) % n]);
            }
            *slot = acc;
        }
    }
    GridFn::from_raw(out, f.site())
}

/// Pre-factored solver for `(I - D_- D_+) P = f` on one periodic grid.
///
/// The matrix is circulant tridiagonal with diagonal `1 + 2/dx^2` and
/// off-diagonals `-1/dx^2`. The corner entries are folded out with a rank-one
/// Sherman-Morrison correction so each solve is a single Thomas sweep plus
/// an O(n) update. The factorization is immutable and may be shared between
/// threads.
#[derive(Debug, Clone)]
pub struct HelmholtzSolver {
    n: usize,
    dx: f64,
    off: f64,
    // Thomas factorization of the corner-modified matrix B
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
    // B^{-1} u for the rank-one correction A = B + u v^T
    z: Vec<f64>,
    v_last: f64,
    denom: f64,
}

impl HelmholtzSolver {
    pub fn new(g: &GridSpec) -> Self {
        let n = g.nx();
        let dx = g.dx();
        let diag = 1.0 + 2.0 / (dx * dx);
        let off = -1.0 / (dx * dx);
        let gamma = -diag;

        // u = (gamma, 0, ..., 0, off), v = (1, 0, ..., 0, off/gamma)
        let mut b_diag = vec![diag; n];
        b_diag[0] -= gamma;
        b_diag[n - 1] -= off * off / gamma;

        let mut inv_pivot = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut pivot = b_diag[0];
        inv_pivot[0] = 1.0 / pivot;
        for i in 1..n {
            upper[i] = off / pivot;
            pivot = b_diag[i] - off * upper[i];
            inv_pivot[i] = 1.0 / pivot;
        }

        let mut solver = Self {
            n,
            dx,
            off,
            inv_pivot,
            upper,
            z: Vec::new(),
            v_last: off / gamma,
            denom: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = off;
        solver.thomas_in_place(&mut u);
        solver.denom = 1.0 + u[0] + solver.v_last * u[n - 1];
        solver.z = u;
        solver
    }

    pub fn nx(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    fn thomas_in_place(&self, r: &mut [f64]) {
        let n = self.n;
        r[0] *= self.inv_pivot[0];
        for i in 1..n {
            r[i] = (r[i] - self.off * r[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            r[i] -= self.upper[i + 1] * r[i + 1];
        }
    }

    /// Solves in place: `rhs` holds `f` on entry and `P` on exit.
    ///
    /// Constants are eigenvectors with eigenvalue one, so the solve runs on
    /// `f - f_0` and adds `f_0` back; a uniform source then maps to a
    /// bitwise uniform `P`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n, "right-hand side length");
        let shift = rhs[0];
        for r in rhs.iter_mut() {
            *r -= shift;
        }
        self.thomas_in_place(rhs);
        let n = self.n;
        let factor = (rhs[0] + self.v_last * rhs[n - 1]) / self.denom;
        for (r, z) in rhs.iter_mut().zip(&self.z) {
            *r = *r - factor * z + shift;
        }
    }

    pub fn solve(&self, f: &GridFn) -> GridFn {
        let mut values = f.values().to_vec();
        self.solve_in_place(&mut values);
        GridFn::from_raw(values, f.site())
    }
}

/// One-shot direct solve. Time loops should hold a [`HelmholtzSolver`]
/// instead.
pub fn solve_direct(f: &GridFn, g: &GridSpec) -> Result<GridFn> {
    if f.len() != g.nx() {
        return Err(Error::LengthMismatch {
            expected: g.nx(),
            got: f.len(),
        });
    }
    Ok(HelmholtzSolver::new(g).solve(f))
}

/// `P - D_- D_+ P - f`, entrywise.
pub fn helmholtz_residual(p: &GridFn, f: &GridFn, dx: f64) -> GridFn {
    let n = p.len();
    let pv = p.values();
    let inv = 1.0 / (dx * dx);
    let out = (0..n)
        .map(|j| {
            let lap = (pv[(j + 1) % n] - 2.0 * pv[j] + pv[(j + n - 1) % n]) * inv;
            pv[j] - lap - f[j]
        })
        .collect();
    GridFn::from_raw(out, p.site())
}

/// Right-hand side of the pressure equation at integer nodes:
/// `(u_{j+1/2} v 0)^2 + (u_{j-1/2} ^ 0)^2 + (q_j)^2 / 2`.
pub fn p_source(u: &GridFn, q: &GridFn) -> GridFn {
    let n = u.len();
    debug_assert_eq!(q.len(), n);
    let uv = u.values();
    let qv = q.values();
    let out = (0..n)
        .map(|j| {
            let right = uv[j].max(0.0);
            let left = uv[(j + n - 1) % n].min(0.0);
            right * right + left * left + 0.5 * qv[j] * qv[j]
        })
        .collect();
    GridFn::from_raw(out, Site::Integer)
}

/// [`p_source`] with `q = D_- u` formed on the fly.
pub fn p_source_from_u(u: &GridFn, dx: f64) -> GridFn {
    let n = u.len();
    let uv = u.values();
    let out = (0..n)
        .map(|j| {
            let prev = uv[(j + n - 1) % n];
            let right = uv[j].max(0.0);
            let left = prev.min(0.0);
            let q = (uv[j] - prev) / dx;
            right * right + left * left + 0.5 * q * q
        })
        .collect();
    GridFn::from_raw(out, Site::Integer)
}

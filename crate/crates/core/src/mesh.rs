//! Uniform periodic staggered lattice and the difference operators on it.
//!
//! Integer nodes sit at `x_j = a + j*dx`, half-integer nodes at
//! `x_{j+1/2} = a + (j + 1/2)*dx`. Index `j` of a half-node field therefore
//! holds the value at `x_{j+1/2}`. All indexing wraps modulo `nx`.

use crate::error::{Error, Result};

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    a: f64,
    b: f64,
    nx: usize,
    dx: f64,
}

impl GridSpec {
    pub fn new(a: f64, b: f64, nx: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!(
                "interval [{a}, {b}] must be finite with b > a"
            )));
        }
        if nx < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "nx = {nx} is below the minimum of {MIN_CELLS}"
            )));
        }
        Ok(Self {
            a,
            b,
            nx,
            dx: (b - a) / nx as f64,
        })
    }

    /// Grid on `[a, b]` with `2^k` cells.
    pub fn with_level(a: f64, b: f64, k: u32) -> Result<Self> {
        let nx = 1usize
            .checked_shl(k)
            .filter(|_| k < usize::BITS)
            .ok_or_else(|| Error::InvalidGrid(format!("refinement level k = {k} too large")))?;
        Self::new(a, b, nx)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `x_j`
    pub fn node(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx
    }

    /// `x_{j+1/2}`
    pub fn half_node(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.dx
    }

    pub fn position(&self, j: usize, site: Site) -> f64 {
        match site {
            Site::Integer => self.node(j),
            Site::Half => self.half_node(j),
        }
    }

    #[inline]
    pub fn next(&self, j: usize) -> usize {
        if j + 1 == self.nx {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub fn prev(&self, j: usize) -> usize {
        if j == 0 {
            self.nx - 1
        } else {
            j - 1
        }
    }
}

/// Shorthand for [`GridSpec::new`].
pub fn make_grid(a: f64, b: f64, nx: usize) -> Result<GridSpec> {
    GridSpec::new(a, b, nx)
}

/// Which family of lattice points a grid function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    /// `x_j`
    Integer,
    /// `x_{j+1/2}`
    Half,
}

/// Dense periodic grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    values: Vec<f64>,
    site: Site,
}

impl GridFn {
    /// Wraps `values`, rejecting non-finite entries.
    pub fn new(values: Vec<f64>, site: Site) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if values.len() < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "grid function has {} entries, need at least {MIN_CELLS}",
                values.len()
            )));
        }
        Ok(Self { values, site })
    }

    /// Wraps `values` without the finiteness check. Used inside the time
    /// loops, which run their own instability check once per step.
    pub(crate) fn from_raw(values: Vec<f64>, site: Site) -> Self {
        Self { values, site }
    }

    pub fn zeros(nx: usize, site: Site) -> Self {
        Self::from_raw(vec![0.0; nx], site)
    }

    pub fn constant(nx: usize, value: f64, site: Site) -> Self {
        Self::from_raw(vec![value; nx], site)
    }

    pub fn site(&self) -> Site {
        self.site
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Value at `j` with periodic wrap for any signed index.
    pub fn at(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        self.values[j.rem_euclid(n) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shift by one index: `out[j] = self[j - 1]`.
    pub fn rotated(&self) -> Self {
        let mut values = self.values.clone();
        values.rotate_right(1);
        Self::from_raw(values, self.site)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.values.iter().map(|&v| f(v)).collect(), self.site)
    }

    /// Tag swap for operators that move between staggered sites.
    fn retagged(values: Vec<f64>, site: Site) -> Self {
        Self::from_raw(values, site)
    }
}

impl std::ops::Index<usize> for GridFn {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// The site a forward difference of a field on `site` naturally lands on.
///
/// `D_+` of a half-node field sits at integer nodes shifted right
/// (`(u_{j+3/2} - u_{j+1/2})/dx` lives at `x_{j+1}`); by index convention
/// we keep the same index `j` and only flip the tag, which matches how the
/// schemes address these quantities.
fn other(site: Site) -> Site {
    match site {
        Site::Integer => Site::Half,
        Site::Half => Site::Integer,
    }
}

/// `(D_+ v)_j = (v_{j+1} - v_j) / dx`, same index, opposite site.
pub fn d_plus(v: &GridFn, dx: f64) -> GridFn {
    let n = v.len();
    let vals = &v.values;
    let out = (0..n)
        .map(|j| (vals[(j + 1) % n] - vals[j]) / dx)
        .collect();
    GridFn::retagged(out, other(v.site))
}

/// `(D_- v)_j = (v_j - v_{j-1}) / dx`, same index, opposite site.
///
/// For a half-node field `u` this is exactly `q_j = D_- u_{j+1/2}`.
pub fn d_minus(v: &GridFn, dx: f64) -> GridFn {
    let n = v.len();
    let vals = &v.values;
    let out = (0..n)
        .map(|j| (vals[j] - vals[(j + n - 1) % n]) / dx)
        .collect();
    GridFn::retagged(out, other(v.site))
}

/// `D = (D_+ + D_-)/2`; stays on the input site.
pub fn d_central(v: &GridFn, dx: f64) -> GridFn {
    let n = v.len();
    let vals = &v.values;
    let out = (0..n)
        .map(|j| (vals[(j + 1) % n] - vals[(j + n - 1) % n]) / (2.0 * dx))
        .collect();
    GridFn::retagged(out, v.site)
}

/// Pointwise samples of `f` at the half-integer nodes.
pub fn sample_half_nodes(f: impl Fn(f64) -> f64, g: &GridSpec) -> Result<GridFn> {
    sample(f, g, Site::Half)
}

/// Pointwise samples of `f` at the integer nodes.
pub fn sample_nodes(f: impl Fn(f64) -> f64, g: &GridSpec) -> Result<GridFn> {
    sample(f, g, Site::Integer)
}

pub fn sample(f: impl Fn(f64) -> f64, g: &GridSpec, site: Site) -> Result<GridFn> {
    let values = (0..g.nx()).map(|j| f(g.position(j, site))).collect();
    GridFn::new(values, site)
}

/// Cell averages of `f` over `[x - dx/2, x + dx/2]` around each site, by
/// composite Simpson with `panels` sub-intervals per cell.
pub fn sample_cell_averages(
    f: impl Fn(f64) -> f64,
    g: &GridSpec,
    site: Site,
    panels: usize,
) -> Result<GridFn> {
    let panels = panels.max(2) & !1;
    let dx = g.dx();
    let h = dx / panels as f64;
    let values = (0..g.nx())
        .map(|j| {
            let left = g.position(j, site) - 0.5 * dx;
            let mut acc = f(left) + f(left + dx);
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(left + i as f64 * h);
            }
            acc * h / 3.0 / dx
        })
        .collect();
    GridFn::new(values, site)
}

/// Initial `q^0 = D_- u^0` at integer nodes.
///
/// With pointwise half-node samples this equals the cell average of
/// `u_0'` over `I_j` exactly.
pub fn init_q(u0: &GridFn, g: &GridSpec) -> GridFn {
    debug_assert_eq!(u0.site(), Site::Half);
    d_minus(u0, g.dx())
}

//! Time-step controllers.

use crate::error::{Error, Result};
use crate::mesh::GridFn;

/// Fixed safety factor applied to the strict (energy-estimate) step.
pub const STRICT_SAFETY: f64 = 0.9;

/// Velocity floor in the practical speed rule; peakon speeds are O(1).
pub const SPEED_FLOOR: f64 = 1.0;

/// Amplitude floor in the practical amplitude rule, so the step does not
/// collapse once the solution has dissipated.
pub const AMPLITUDE_FLOOR: f64 = 0.1;

/// How the practical step depends on the current field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PracticalRule {
    /// `dt = nu dx / max(1, max |u|)`
    #[default]
    Speed,
    /// `dt = min(nu dx max(0.1, max |u|), dx / max |u|)`: proportional to
    /// the amplitude, capped at unit Courant number.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CflMode {
    /// `dt = 0.9 log(1 + dx^theta) dx^2 / (C |u^0|_{h1}^2 (1 + dx^2))`
    Strict,
    /// See [`PracticalRule`].
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflPolicy {
    pub mode: CflMode,
    pub theta: f64,
    pub big_c: f64,
    pub nu: f64,
    pub rule: PracticalRule,
    /// `|u^0|_{h1}`, filled in when a run starts.
    pub h1norm0: f64,
}

impl Default for CflPolicy {
    fn default() -> Self {
        Self {
            mode: CflMode::Practical,
            theta: 1.0,
            big_c: 1.0,
            nu: 0.9,
            rule: PracticalRule::Speed,
            h1norm0: 0.0,
        }
    }
}

impl CflPolicy {
    pub fn strict(theta: f64, big_c: f64) -> Self {
        Self {
            mode: CflMode::Strict,
            theta,
            big_c,
            ..Self::default()
        }
    }

    pub fn practical(nu: f64) -> Self {
        Self {
            nu,
            ..Self::default()
        }
    }

    /// Step schedule used for the refinement tables.
    pub fn amplitude(nu: f64) -> Self {
        Self {
            nu,
            rule: PracticalRule::Amplitude,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be > 0, got {}", self.theta)));
        }
        if !(self.big_c > 0.0 && self.big_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be > 0, got {}", self.big_c)));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::InvalidParameter(format!("nu must lie in (0, 1], got {}", self.nu)));
        }
        if !(self.h1norm0 >= 0.0 && self.h1norm0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial h1 norm must be finite and >= 0, got {}",
                self.h1norm0
            )));
        }
        Ok(())
    }

    /// Step for the current field under this policy.
    pub fn time_step(&self, u: &GridFn, dx: f64) -> f64 {
        match self.mode {
            CflMode::Strict => dt_strict(dx, self),
            CflMode::Practical => dt_practical(u, dx, self),
        }
    }
}

/// Strict step from the energy estimate. A zero initial norm leaves the
/// bound vacuous; the step then falls back to the norm-one value.
pub fn dt_strict(dx: f64, p: &CflPolicy) -> f64 {
    let norm_sq = if p.h1norm0 > 0.0 {
        p.h1norm0 * p.h1norm0
    } else {
        1.0
    };
    STRICT_SAFETY * dx.powf(p.theta).ln_1p() * dx * dx / (p.big_c * norm_sq * (1.0 + dx * dx))
}

pub fn dt_practical(u: &GridFn, dx: f64, p: &CflPolicy) -> f64 {
    let speed = u.max_abs();
    match p.rule {
        PracticalRule::Speed => p.nu * dx / speed.max(SPEED_FLOOR),
        PracticalRule::Amplitude => {
            let dt = p.nu * dx * speed.max(AMPLITUDE_FLOOR);
            if speed > 0.0 {
                dt.min(dx / speed)
            } else {
                dt
            }
        }
    }
}

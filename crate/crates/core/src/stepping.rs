//! Time loop shared by both schemes.

use crate::error::{Aborted, Result};

/// A single-level explicit scheme.
pub trait TimeStepper {
    type State: Clone;

    fn time(&self, state: &Self::State) -> f64;

    /// Mutable time slot, used to pin the clock onto output times.
    fn time_mut<'a>(&self, state: &'a mut Self::State) -> &'a mut f64;

    fn step_index(&self, state: &Self::State) -> usize;

    /// Admissible step for the current state.
    fn time_step(&self, state: &Self::State) -> f64;

    fn advance(&self, state: &Self::State, dt: f64) -> Result<Self::State>;
}

/// Callbacks from the time loop.
pub trait Observer<S> {
    /// Every accepted step.
    fn on_step(&mut self, _state: &S) {}

    /// Configured output times (always including the final time).
    fn on_snapshot(&mut self, state: &S);
}

impl<S, F: FnMut(&S)> Observer<S> for F {
    fn on_snapshot(&mut self, state: &S) {
        self(state)
    }
}

/// Observer that ignores everything.
pub struct Silent;

impl<S> Observer<S> for Silent {
    fn on_snapshot(&mut self, _state: &S) {}
}

/// Relative slack when deciding that a step lands on an output time.
const LANDING_SLACK: f64 = 1e-12;

/// Steps `state` up to `t_final`, clipping steps so every output time in
/// `snapshot_times` (and `t_final`) is hit exactly.
pub fn integrate<T: TimeStepper>(
    stepper: &T,
    mut state: T::State,
    t_final: f64,
    snapshot_times: &[f64],
    observer: &mut dyn Observer<T::State>,
) -> std::result::Result<T::State, Aborted<T::State>> {
    let t0 = stepper.time(&state);
    let mut targets: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= t0 && s < t_final)
        .collect();
    targets.push(t_final.max(t0));
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut next = 0;
    let slack = |target: f64| LANDING_SLACK * target.abs().max(1.0);
    while next < targets.len() && targets[next] <= t0 + slack(targets[next]) {
        observer.on_snapshot(&state);
        next += 1;
    }

    while next < targets.len() {
        let t = stepper.time(&state);
        let target = targets[next];
        let mut dt = stepper.time_step(&state);
        let landing = t + dt >= target - slack(target);
        if landing {
            dt = target - t;
        }
        let stepped = match stepper.advance(&state, dt) {
            Ok(s) => s,
            Err(_) => {
                return Err(Aborted {
                    step: stepper.step_index(&state) + 1,
                    t: t + dt,
                    last_good: state,
                })
            }
        };
        state = stepped;
        if landing {
            *stepper.time_mut(&mut state) = target;
        }
        observer.on_step(&state);
        if landing {
            observer.on_snapshot(&state);
            next += 1;
        }
    }
    Ok(state)
}

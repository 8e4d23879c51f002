//! Sampling functionals along trajectories: Lyapunov dissipation and
//! conservation of `c_a` / `h_a`.

use std::thread;

use crate::error::Result;
use crate::functional::{ConservedFunctional, LyapunovSpec};
use crate::simulate::{Trajectory, TrajectoryWindow};

/// Relative drift allowed for conserved functionals.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;
/// Per-sample increase allowed for a Lyapunov functional, scaled by `1 + |V_0|`.
pub const DISSIPATION_TOLERANCE: f64 = 1e-7;

pub fn dissipation_tolerance(v0: f64) -> f64 {
    DISSIPATION_TOLERANCE * (1.0 + v0.abs())
}

#[derive(Clone, Debug)]
pub struct DissipationReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max_k (V_{k+1} - V_k)`; negative for strictly decreasing series.
    pub max_increase: f64,
    pub tolerance: f64,
    pub monotone: bool,
}

#[derive(Clone, Debug)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max_k |c_k - c_0| / max(|c_0|, 1e-300)`.
    pub max_relative_drift: f64,
    pub conserved: bool,
}

/// Largest forward difference of `values` (`-inf` for fewer than two).
pub fn max_forward_difference(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// True when no forward difference exceeds `tolerance` and every value is
/// finite.
pub fn check_monotone(values: &[f64], tolerance: f64) -> bool {
    values.iter().all(|v| v.is_finite()) && max_forward_difference(values) <= tolerance
}

/// Samples `V(x_t)` every `sample_dt` and certifies non-increase.
pub fn dissipation_report(traj: &Trajectory, spec: &LyapunovSpec, sample_dt: f64) -> Result<DissipationReport> {
    let times = traj.sample_times(sample_dt);
    let values = sample(traj, &times, |w| spec.evaluate(w))?;
    let tolerance = dissipation_tolerance(values[0]);
    let max_increase = max_forward_difference(&values);
    Ok(DissipationReport {
        monotone: check_monotone(&values, tolerance),
        times,
        values,
        max_increase,
        tolerance,
    })
}

/// Samples a conserved functional every `sample_dt` and measures drift.
pub fn conservation_report(
    traj: &Trajectory,
    functional: &ConservedFunctional,
    sample_dt: f64,
) -> Result<ConservationReport> {
    let times = traj.sample_times(sample_dt);
    let values = sample(traj, &times, |w| functional.evaluate(w))?;
    let c0 = values[0];
    let max_relative_drift = values
        .iter()
        .map(|c| (c - c0).abs())
        .fold(0.0, f64::max)
        / c0.abs().max(1e-300);
    Ok(ConservationReport {
        conserved: max_relative_drift <= CONSERVATION_TOLERANCE,
        times,
        values,
        max_relative_drift,
    })
}

/// Evaluates `f` on the windows at `times`, spread over available cores.
fn sample<F>(traj: &Trajectory, times: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(&TrajectoryWindow<'_>) -> Result<f64> + Sync,
{
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = times.len().div_ceil(workers).max(16);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = times
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&t| f(&traj.window(t)?))
                        .collect::<Result<Vec<f64>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(times.len());
        for h in handles {
            out.extend(h.join().expect("sampling worker panicked")?);
        }
        Ok(out)
    })
}

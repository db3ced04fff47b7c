//! Ground-state estimation from the DIM pitchfork bifurcation.
//!
//! Under a slowly ramped `K_s` the DIM phases first collapse onto the
//! `{π/2, 3π/2}` class and later split towards `{0, π}`. The `K_s` at the
//! split, `K_{s,E}`, estimates the ground energy as
//! `H_min ≈ K_{s,E}·N/K - ξ`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, AnnealSchedule, IntegratorConfig, ModelKind, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{cut_from_energy, CouplingMatrix};
use crate::scalar::{circular_distance, wrap_phase, Real};

/// Threshold on the deviation Δ marking the onset of the bifurcation.
pub const DEFAULT_THRESHOLD: f64 = 0.006;

/// Samples after a crossing that must stay above the threshold.
pub const DEBOUNCE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Largest per-oscillator deviation.
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationReference {
    /// Distance to the nearer of π/2 and 3π/2.
    #[default]
    NearestOddHalfPi,
    /// Distance to π/2 only.
    HalfPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeviationOptions {
    pub aggregate: Aggregate,
    pub reference: DeviationReference,
}

/// Δ for one phase vector.
pub fn deviation<T: Real>(phi: &[T], opts: DeviationOptions) -> T {
    let half = T::frac_pi_2();
    let pi = T::pi();
    let per = phi.iter().map(|&p| match opts.reference {
        DeviationReference::HalfPi => circular_distance(p, half),
        DeviationReference::NearestOddHalfPi => {
            let x = wrap_phase(p - half);
            let y = if x >= pi { x - pi } else { x };
            y.min(pi - y)
        }
    });
    match opts.aggregate {
        Aggregate::Max => per.fold(T::zero(), |m, d| m.max(d)),
        Aggregate::Mean => {
            let n = phi.len().max(1);
            per.fold(T::zero(), |s, d| s + d) / T::from_count(n)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTrace<T> {
    pub times: Vec<T>,
    pub deltas: Vec<T>,
    pub ks_values: Vec<T>,
}

impl<T: Real> DeviationTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn deviation_trace<T: Real>(traj: &Trajectory<T>, opts: DeviationOptions) -> Result<DeviationTrace<T>> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(DeviationTrace {
        times: traj.times.clone(),
        deltas: traj.phases.iter().map(|p| deviation(p, opts)).collect(),
        ks_values: traj.ks_values.clone(),
    })
}

/// Sample index, time and `K_s` of a detected bifurcation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<T> {
    pub index: usize,
    pub t_star: T,
    pub ks_e: T,
}

/// First sample after the global minimum of Δ where Δ rises above
/// `threshold` and stays above it for the next [`DEBOUNCE`] samples.
pub fn detect_bifurcation<T: Real>(trace: &DeviationTrace<T>, threshold: T) -> Result<Crossing<T>> {
    if !(threshold > T::zero()) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    if trace.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let d = &trace.deltas;
    let argmin = d
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < d[best] { i } else { best });
    let no_crossing = || Error::NoBifurcation {
        threshold: threshold.to_f64_lossy(),
    };
    if d[argmin] > threshold {
        return Err(no_crossing());
    }
    (argmin + 1..d.len())
        .find(|&i| {
            d[i - 1] <= threshold
                && d[i] > threshold
                && i + DEBOUNCE < d.len()
                && d[i + 1..=i + DEBOUNCE].iter().all(|&v| v > threshold)
        })
        .map(|i| Crossing {
            index: i,
            t_star: trace.times[i],
            ks_e: trace.ks_values[i],
        })
        .ok_or_else(no_crossing)
}

/// `H_est = round(K_{s,E}·N/K - ξ)` (half away from zero) and its cut.
pub fn estimate_ground_state<T: Real>(ks_e: T, k: T, n: usize, xi: T) -> (i64, T) {
    assert!(n > 0, "node count must be positive");
    let h = (ks_e * T::from_count(n) / k - xi).round();
    let h_est = h.to_f64_lossy() as i64;
    (h_est, cut_from_energy(xi, h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEstimate {
    pub t_star: f64,
    pub ks_e: f64,
    pub h_est: i64,
    pub cut_est: f64,
    pub threshold_used: f64,
    pub deviation: DeviationOptions,
    /// Set when `ξ` is an integer but `ξ - H_est` is odd, so the cut
    /// estimate is a half-integer that no unit-weight cut can attain.
    pub parity_mismatch: bool,
}

/// Detects the bifurcation in a DIM trajectory and turns it into an estimate.
pub fn estimate_from_trajectory<T: Real>(
    traj: &Trajectory<T>,
    k: T,
    xi: T,
    threshold: T,
    opts: DeviationOptions,
) -> Result<BifurcationEstimate> {
    let n = traj.final_state.len();
    if n == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let trace = deviation_trace(traj, opts)?;
    let c = detect_bifurcation(&trace, threshold)?;
    let (h_est, cut_est) = estimate_ground_state(c.ks_e, k, n, xi);
    let xi = xi.to_f64_lossy();
    let parity_mismatch = xi.fract() == 0.0 && (xi as i64 - h_est).rem_euclid(2) == 1;
    Ok(BifurcationEstimate {
        t_star: c.t_star.to_f64_lossy(),
        ks_e: c.ks_e.to_f64_lossy(),
        h_est,
        cut_est: cut_est.to_f64_lossy(),
        threshold_used: threshold.to_f64_lossy(),
        deviation: opts,
        parity_mismatch,
    })
}

/// Integrates the DIM from `phi0` under `schedule` and estimates the ground
/// state from the recorded trajectory.
pub fn estimate_from_run<T: Real>(
    j: &CouplingMatrix<T>,
    phi0: &PhaseState<T>,
    schedule: &AnnealSchedule<T>,
    cfg: &IntegratorConfig<T>,
    threshold: T,
    opts: DeviationOptions,
) -> Result<(BifurcationEstimate, Trajectory<T>)> {
    let traj = integrate(ModelKind::Dim, j, phi0, schedule, cfg)?;
    let est = estimate_from_trajectory(&traj, schedule.k(), j.negated_pair_sum(), threshold, opts)?;
    Ok((est, traj))
}

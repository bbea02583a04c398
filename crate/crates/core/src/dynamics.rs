//! Opinion iteration `X(k+1) = W·X(k)`, limit classification and the
//! empirical decay rate of a trajectory.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{within_bounds, InfluenceMatrix};

pub const DEFAULT_STEP_TOL: f64 = 1e-10;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;
pub const DEFAULT_WINDOW: usize = 50;
pub const DEFAULT_K_MAX: usize = 20_000;

/// Iterates averaged to estimate a nonzero limit.
const LIMIT_AVERAGE: usize = 10;
/// The fit starts once the error is below this fraction of its initial value.
const TRANSIENT_FRACTION: f64 = 0.1;
/// Errors below these floors are rounding noise: against an exact zero limit,
/// and against a limit estimated from the trajectory itself.
const EXACT_FLOOR: f64 = 1e-12;
const ESTIMATED_FLOOR: f64 = 1e-8;
/// Fewest points a slope is fitted through.
const MIN_FIT_POINTS: usize = 3;
/// An error norm below this counts as exact convergence.
const EXACT_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `X(0), X(1), …` up to `X(k_max)`, or on convergence up to
    /// `X(k_stop + 1)` followed by a short converged tail.
    pub states: Vec<DVector<f64>>,
    /// Step `k` at which `‖X(k+1) − X(k)‖∞` first fell below the tolerance.
    pub k_stop: usize,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("a trajectory holds at least X(0)")
    }

    /// Average of the final iterates; the long-run limit when converged.
    pub fn tail_average(&self) -> DVector<f64> {
        let k = self.states.len().min(LIMIT_AVERAGE);
        let mut sum = DVector::zeros(self.last().len());
        for x in &self.states[self.states.len() - k..] {
            sum += x;
        }
        sum / k as f64
    }
}

/// Independent uniform opinions on `[−1, 1]`.
pub fn random_opinions(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Keep clear of the streams used for network pairs.
    rng.set_stream(u64::MAX);
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn simulate(w: &InfluenceMatrix, x0: &DVector<f64>, k_max: usize, step_tol: f64) -> Result<Trajectory> {
    if x0.len() != w.n() {
        return Err(Error::Precondition(format!(
            "initial state has {} entries for {} individuals",
            x0.len(),
            w.n()
        )));
    }
    if !within_bounds(x0) {
        return Err(Error::Precondition("initial opinions must lie in [-1, 1]".into()));
    }
    let m = w.matrix();
    let mut states = vec![x0.clone()];
    for k in 0..k_max {
        let x = states.last().unwrap();
        let next = m * x;
        if !within_bounds(&next) {
            return Err(Error::BoundViolation {
                step: k + 1,
                max_abs: next.amax(),
            });
        }
        let diff = (&next - x).amax();
        states.push(next);
        if diff < step_tol {
            // Record a converged tail for the limit average.
            for _ in 1..LIMIT_AVERAGE {
                let next = m * states.last().unwrap();
                states.push(next);
            }
            return Ok(Trajectory {
                states,
                k_stop: k,
                stop_reason: StopReason::Converged,
            });
        }
    }
    Ok(Trajectory {
        states,
        k_stop: k_max,
        stop_reason: StopReason::MaxIters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Consensus,
    BipartiteConsensus { alpha: f64 },
    StableZero,
    GeneralConvergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitClassification {
    pub kind: LimitKind,
    pub limit: DVector<f64>,
}

/// Labels the limit of a converged trajectory. A zero limit is reported as
/// stable-zero rather than as consensus on 0.
pub fn classify_limit(traj: &Trajectory, tol: f64) -> Result<LimitClassification> {
    if traj.stop_reason != StopReason::Converged {
        return Err(Error::NotConverged);
    }
    let limit = traj.tail_average();
    Ok(LimitClassification {
        kind: classify_vector(&limit, tol),
        limit,
    })
}

pub fn classify_vector(limit: &DVector<f64>, tol: f64) -> LimitKind {
    if limit.amax() < tol {
        return LimitKind::StableZero;
    }
    if limit.max() - limit.min() < tol {
        return LimitKind::Consensus;
    }
    let alpha = limit.iter().map(|v| v.abs()).sum::<f64>() / limit.len() as f64;
    let both_signs = limit.iter().any(|&v| v > 0.0) && limit.iter().any(|&v| v < 0.0);
    if both_signs && alpha > tol && limit.iter().all(|v| (v.abs() - alpha).abs() < tol) {
        return LimitKind::BipartiteConsensus { alpha };
    }
    LimitKind::GeneralConvergence
}

/// Decay rate `−slope` of `ln‖X(k) − limit‖₂`, fitted by least squares.
///
/// Points enter the fit once the error is below a tenth of its initial value
/// and while it stays above the rounding floor; the last `window` of them are
/// used, or all of them when fewer remain (at least three). Pass
/// `limit_is_exact = true` when the limit is known exactly (zero for stable
/// systems), which lowers the floor. Returns `f64::INFINITY` when the error
/// vanishes before three points are available.
pub fn empirical_rate(traj: &Trajectory, limit: &DVector<f64>, window: usize, limit_is_exact: bool) -> Result<f64> {
    let errors: Vec<f64> = traj.states.iter().map(|x| (x - limit).norm()).collect();
    let e0 = errors[0];
    if e0 < EXACT_ZERO {
        return Ok(f64::INFINITY);
    }
    let floor = if limit_is_exact { EXACT_FLOOR } else { ESTIMATED_FLOOR };
    let start = errors.iter().position(|&e| e <= TRANSIENT_FRACTION * e0);
    let usable: Vec<(f64, f64)> = match start {
        Some(s) => errors[s..]
            .iter()
            .enumerate()
            .take_while(|(_, &e)| e > floor)
            .map(|(k, &e)| ((s + k) as f64, e.ln()))
            .collect(),
        None => Vec::new(),
    };
    if usable.len() < MIN_FIT_POINTS {
        let vanished = errors.iter().any(|&e| e < EXACT_ZERO.max(floor));
        if vanished {
            return Ok(f64::INFINITY);
        }
        return Err(Error::Precondition(format!(
            "only {} usable error points for a rate fit ({} steps recorded)",
            usable.len(),
            errors.len()
        )));
    }
    let pts = &usable[usable.len().saturating_sub(window.max(MIN_FIT_POINTS))..];
    Ok(-slope(pts))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

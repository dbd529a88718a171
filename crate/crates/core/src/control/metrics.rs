use serde::{Deserialize, Serialize};

use crate::control::reference::ReferenceTrajectory;
use crate::sim::log::SimLog;
use crate::vessel::wrap_angle;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackingMetrics {
    /// Mean Euclidean position error, m.
    pub mae_position: f64,
    /// Mean absolute wrapped yaw error, rad.
    pub mae_yaw: f64,
    /// Trapezoidal ∫uᵀu dt over the logged commands, N²·s.
    pub effort: f64,
    pub samples: usize,
}

impl TrackingMetrics {
    /// Element-wise mean over several trials.
    pub fn mean(runs: &[TrackingMetrics]) -> TrackingMetrics {
        let n = runs.len().max(1) as f64;
        TrackingMetrics {
            mae_position: runs.iter().map(|m| m.mae_position).sum::<f64>() / n,
            mae_yaw: runs.iter().map(|m| m.mae_yaw).sum::<f64>() / n,
            effort: runs.iter().map(|m| m.effort).sum::<f64>() / n,
            samples: runs.iter().map(|m| m.samples).sum::<usize>() / runs.len().max(1),
        }
    }
}

/// Errors are taken at every logged sample against the reference at the
/// same time. Every sample must fall inside the reference's time span.
pub fn tracking_metrics(log: &SimLog, reference: &ReferenceTrajectory) -> Result<TrackingMetrics> {
    let Some(first) = log.samples.first() else {
        return Err(Error::Misaligned("empty log".into()));
    };
    let last = log.samples[log.samples.len() - 1];
    let tol = 1e-9 + 1e-9 * reference.t_end().abs();
    if first.t < reference.t0 - tol || last.t > reference.t_end() + tol {
        return Err(Error::Misaligned(format!(
            "log spans [{}, {}] but reference spans [{}, {}]",
            first.t,
            last.t,
            reference.t0,
            reference.t_end()
        )));
    }
    let mut pos = 0.0;
    let mut yaw = 0.0;
    for s in &log.samples {
        let r = reference.sample(s.t);
        pos += (s.q[0] - r[0]).hypot(s.q[1] - r[1]);
        yaw += wrap_angle(s.q[2] - r[2]).abs();
    }
    let n = log.samples.len() as f64;
    Ok(TrackingMetrics {
        mae_position: pos / n,
        mae_yaw: yaw / n,
        effort: control_effort(log),
        samples: log.samples.len(),
    })
}

pub fn control_effort(log: &SimLog) -> f64 {
    let sq = |u: &[f64; 4]| u.iter().map(|x| x * x).sum::<f64>();
    log.samples
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (sq(&w[0].u) + sq(&w[1].u)))
        .sum()
}

//! Full identification sweep: maneuver logs at several lengths, per-length
//! identification, regression, and pre/post-regression residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identify::{identify_at_length, velocity_error_cost, IdentificationProblem, Identified};
use super::log::{ManeuverKind, ManeuverLog};
use super::regression::{fit_polynomials, max_relative_deviation};
use crate::sim::maneuver::{generate_maneuver_logs, ManeuverOptions};
use crate::vessel::{HydroParams, ParamPolynomials, MAX_EXPANSION};
use crate::{Error, Result};

pub const DEFAULT_LENGTHS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthResult {
    pub l: f64,
    pub params: HydroParams,
    /// Velocity-error cost with the per-length parameters.
    pub residual_pre: f64,
    /// Velocity-error cost with the regressed polynomials evaluated at `l`.
    pub residual_post: f64,
    pub active_bound: bool,
    pub starts: Vec<super::identify::StartReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedSet {
    pub entries: Vec<LengthResult>,
    pub polynomials: ParamPolynomials,
    /// Largest relative deviation from the reference functions, when known.
    pub deviation_from_truth: Option<f64>,
}

impl IdentifiedSet {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Log(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSweep {
    pub truth: ParamPolynomials,
    pub lengths: Vec<f64>,
    pub duration: f64,
    pub maneuver: ManeuverOptions,
    pub seed: u64,
}

impl Default for SyntheticSweep {
    fn default() -> Self {
        Self {
            truth: ParamPolynomials::default(),
            lengths: DEFAULT_LENGTHS.to_vec(),
            duration: 20.0,
            maneuver: ManeuverOptions::default(),
            seed: 0,
        }
    }
}

impl SyntheticSweep {
    /// One log per maneuver kind at each length, each with its own seed.
    pub fn logs(&self) -> Result<Vec<Vec<ManeuverLog>>> {
        self.lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                ManeuverKind::ALL
                    .iter()
                    .enumerate()
                    .map(|(j, &kind)| {
                        let seed = self
                            .seed
                            .wrapping_mul(1000)
                            .wrapping_add((3 * i + j) as u64);
                        generate_maneuver_logs(
                            &self.truth,
                            kind,
                            l,
                            self.duration,
                            seed,
                            &self.maneuver,
                        )
                    })
                    .collect()
            })
            .collect()
    }

    pub fn run(&self) -> Result<IdentifiedSet> {
        let mut set = run_identification(self.logs()?, |logs| {
            let mut p = IdentificationProblem::new(logs);
            p.arm_offset = self.maneuver.arm_offset;
            p
        })?;
        set.deviation_from_truth = Some(max_relative_deviation(
            &set.polynomials,
            &self.truth,
            MAX_EXPANSION,
            50,
        ));
        Ok(set)
    }
}

/// Identifies each group of logs (one group per length), fits the
/// polynomials and scores the fit at every length.
pub fn run_identification<F>(
    groups: Vec<Vec<ManeuverLog>>,
    make_problem: F,
) -> Result<IdentifiedSet>
where
    F: Fn(Vec<ManeuverLog>) -> IdentificationProblem + Sync,
{
    let mut problems: Vec<IdentificationProblem> = groups
        .into_iter()
        .map(|logs| {
            if logs.is_empty() {
                return Err(Error::Identification("empty log group".into()));
            }
            let l = logs[0].expansion;
            if logs.iter().any(|g| g.expansion != l) {
                return Err(Error::Identification(
                    "a log group mixes expansion lengths".into(),
                ));
            }
            Ok(make_problem(logs))
        })
        .collect::<Result<_>>()?;
    problems.sort_by(|a, b| a.logs[0].expansion.total_cmp(&b.logs[0].expansion));
    if problems
        .windows(2)
        .any(|w| w[0].logs[0].expansion == w[1].logs[0].expansion)
    {
        return Err(Error::Identification(
            "two log groups share one expansion length".into(),
        ));
    }

    let identified: Vec<Result<Identified>> = problems.par_iter().map(identify_at_length).collect();
    let mut per_length = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in problems.iter().zip(identified) {
        match r {
            Ok(id) => per_length.push((p.logs[0].expansion, id)),
            Err(e) => failures.push(format!("l = {}: {e}", p.logs[0].expansion)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Identification(failures.join("; ")));
    }
    let points: Vec<(f64, HydroParams)> =
        per_length.iter().map(|(l, id)| (*l, id.params)).collect();
    let polynomials = fit_polynomials(&points)?;
    let entries = problems
        .iter()
        .zip(per_length)
        .map(|(p, (l, id))| LengthResult {
            l,
            params: id.params,
            residual_pre: id.residual,
            residual_post: velocity_error_cost(p, &polynomials.eval_extrapolated(l)),
            active_bound: id.active_bound,
            starts: id.starts,
        })
        .collect();
    Ok(IdentifiedSet {
        entries,
        polynomials,
        deviation_from_truth: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_lengths_fail_in_regression() {
        let sweep = SyntheticSweep {
            lengths: vec![0.0, 0.5],
            ..SyntheticSweep::default()
        };
        assert_eq!(sweep.run().unwrap_err(), Error::Rank { needed: 3, got: 2 });
    }

    #[test]
    fn duplicate_lengths_rejected() {
        let sweep = SyntheticSweep {
            lengths: vec![0.0, 0.2, 0.2],
            ..SyntheticSweep::default()
        };
        assert!(matches!(sweep.run(), Err(Error::Identification(_))));
    }
}

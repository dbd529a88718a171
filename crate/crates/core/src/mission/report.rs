use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::machine::{MissionLog, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub success: bool,
    pub blocks_placed: usize,
    pub retries: usize,
    pub total_time: f64,
    /// Time spent in each phase, summed over all visits, s.
    pub phase_durations: BTreeMap<Phase, f64>,
    pub failing_phase: Option<Phase>,
    pub reason: Option<String>,
    pub timeline: Vec<super::machine::PhaseRecord>,
}

pub fn mission_report(log: &MissionLog) -> MissionSummary {
    let mut phase_durations = BTreeMap::new();
    for r in &log.records {
        *phase_durations.entry(r.phase).or_insert(0.0) += r.end - r.start;
    }
    MissionSummary {
        success: log.aborted.is_none() && log.final_state.phase == Phase::Done,
        blocks_placed: log.final_state.blocks_placed,
        retries: log.final_state.total_retries,
        total_time: log.end - log.start,
        phase_durations,
        failing_phase: log.failing_phase,
        reason: log.aborted.clone(),
        timeline: log.records.clone(),
    }
}

//! Phase graph of the bridge-building mission and its executor.

use serde::{Deserialize, Serialize};

use super::plan::{preparation_pose, MissionPlan};
use crate::sim::dock::DockPort;
use crate::vessel::Pose;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Init,
    MoveToPickupPrep,
    ExpandAndMagnetOn,
    DockPickup,
    ReturnToPrep,
    SpinToFaceBridge,
    Deliver,
    ExpandForAssembly,
    DockAssembly,
    MagnetOff,
    Retreat,
    Done,
}

impl Phase {
    pub const ALL: [Phase; 12] = [
        Phase::Init,
        Phase::MoveToPickupPrep,
        Phase::ExpandAndMagnetOn,
        Phase::DockPickup,
        Phase::ReturnToPrep,
        Phase::SpinToFaceBridge,
        Phase::Deliver,
        Phase::ExpandForAssembly,
        Phase::DockAssembly,
        Phase::MagnetOff,
        Phase::Retreat,
        Phase::Done,
    ];

    /// Phases in which the hulls may be extended.
    pub fn allows_expansion(self) -> bool {
        matches!(
            self,
            Phase::ExpandAndMagnetOn
                | Phase::DockPickup
                | Phase::ExpandForAssembly
                | Phase::DockAssembly
        )
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Everything a transition may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionInput {
    /// Outcome of the phase just executed (only docking phases can fail).
    pub success: bool,
    /// The block being handled is the last one of the plan.
    pub last_block: bool,
    /// Blocks still to be placed after the current one.
    pub remaining: usize,
}

/// The mission graph. Pickup docking loops back to the preparation point
/// on failure; assembly docking loops back to delivery; the last block is
/// assembled without expanding.
pub fn next_phase(phase: Phase, input: TransitionInput) -> Phase {
    use Phase::*;
    match phase {
        Init => {
            if input.remaining == 0 {
                Done
            } else {
                MoveToPickupPrep
            }
        }
        MoveToPickupPrep => ExpandAndMagnetOn,
        ExpandAndMagnetOn => DockPickup,
        DockPickup => {
            if input.success {
                ReturnToPrep
            } else {
                MoveToPickupPrep
            }
        }
        ReturnToPrep => SpinToFaceBridge,
        SpinToFaceBridge => Deliver,
        Deliver => {
            if input.last_block {
                DockAssembly
            } else {
                ExpandForAssembly
            }
        }
        ExpandForAssembly => DockAssembly,
        DockAssembly => {
            if input.success {
                MagnetOff
            } else {
                Deliver
            }
        }
        MagnetOff => Retreat,
        Retreat => {
            if input.remaining == 0 {
                Done
            } else {
                MoveToPickupPrep
            }
        }
        Done => Done,
    }
}

/// The allowed edges, listed independently of [`next_phase`].
pub const EDGES: [(Phase, Phase); 17] = {
    use Phase::*;
    [
        (Init, MoveToPickupPrep),
        (Init, Done),
        (MoveToPickupPrep, ExpandAndMagnetOn),
        (ExpandAndMagnetOn, DockPickup),
        (DockPickup, ReturnToPrep),
        (DockPickup, MoveToPickupPrep),
        (ReturnToPrep, SpinToFaceBridge),
        (SpinToFaceBridge, Deliver),
        (Deliver, ExpandForAssembly),
        (Deliver, DockAssembly),
        (ExpandForAssembly, DockAssembly),
        (DockAssembly, MagnetOff),
        (DockAssembly, Deliver),
        (MagnetOff, Retreat),
        (Retreat, MoveToPickupPrep),
        (Retreat, Done),
        (Done, Done),
    ]
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub phase: Phase,
    pub blocks_placed: usize,
    pub carrying: bool,
    pub magnet_on: bool,
    /// Consecutive failures of the current docking phase.
    pub retry_count: usize,
    pub total_retries: usize,
}

impl Default for MissionState {
    fn default() -> Self {
        Self {
            phase: Phase::Init,
            blocks_placed: 0,
            carrying: false,
            magnet_on: false,
            retry_count: 0,
            total_retries: 0,
        }
    }
}

/// Motion primitives the mission needs from a simulator.
pub trait MissionSim {
    fn time(&self) -> f64;
    fn pose(&self) -> Pose;
    fn expansion(&self) -> f64;
    /// Moves to `target` at the current expansion and settles there.
    fn goto(&mut self, target: Pose) -> Result<()>;
    /// Changes expansion while holding the current pose.
    fn set_expansion(&mut self, l: f64) -> Result<()>;
    /// Approaches `port` from the current pose; true on capture.
    fn dock(&mut self, port: &DockPort) -> Result<bool>;
    /// Adds or removes the carried block from the dynamics.
    fn set_payload(&mut self, carrying: bool);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: Phase,
    pub start: f64,
    pub end: f64,
    pub block: usize,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionOptions {
    pub retry_cap: usize,
    /// Expansion used for docking in the expanded form, m.
    pub dock_expansion: f64,
    /// Yaw tolerance of the spin toward the bridge, rad.
    pub spin_tolerance: f64,
}

impl Default for MissionOptions {
    fn default() -> Self {
        Self {
            retry_cap: 5,
            dock_expansion: 0.5,
            spin_tolerance: 10f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionLog {
    pub records: Vec<PhaseRecord>,
    pub start: f64,
    pub end: f64,
    pub final_state: MissionState,
    /// Set when the mission stopped before `Done`.
    pub aborted: Option<String>,
    pub failing_phase: Option<Phase>,
}

/// Executes the current phase and advances the state along the graph.
pub fn mission_step<S: MissionSim>(
    state: &MissionState,
    plan: &MissionPlan,
    opts: &MissionOptions,
    sim: &mut S,
) -> Result<(MissionState, PhaseRecord)> {
    let mut next = state.clone();
    let block = state.blocks_placed;
    let start = sim.time();
    let remaining_after = plan.targets.len().saturating_sub(block + 1);
    let last_block = block + 1 == plan.targets.len();
    let mut success = true;
    let pickup_prep = preparation_pose(&plan.pickup, plan.preparation_offset);
    let target = plan.targets.get(block);
    let assembly_prep = target.map(|t| preparation_pose(t, plan.preparation_offset));

    match state.phase {
        Phase::Init => {
            sim.set_expansion(0.0)?;
        }
        Phase::MoveToPickupPrep => sim.goto(pickup_prep)?,
        Phase::ExpandAndMagnetOn => {
            sim.set_expansion(opts.dock_expansion)?;
            next.magnet_on = true;
        }
        Phase::DockPickup => {
            success = sim.dock(&plan.pickup)?;
            if success {
                next.carrying = true;
                sim.set_payload(true);
            }
            sim.set_expansion(0.0)?;
        }
        Phase::ReturnToPrep => sim.goto(pickup_prep)?,
        Phase::SpinToFaceBridge => {
            let prep = assembly_prep
                .ok_or_else(|| Error::Planning("no slot left for the carried block".into()))?;
            let here = sim.pose();
            let bearing = (prep.y - here.y).atan2(prep.x - here.x);
            sim.goto(Pose::new(here.x, here.y, bearing))?;
            let err = crate::vessel::wrap_angle(sim.pose().psi - bearing).abs();
            if err > opts.spin_tolerance {
                return Err(Error::MissionAborted {
                    phase: Phase::SpinToFaceBridge.to_string(),
                    reason: format!("heading error {:.1}° after spin", err.to_degrees()),
                });
            }
        }
        Phase::Deliver => sim.goto(assembly_prep.expect("checked in SpinToFaceBridge"))?,
        Phase::ExpandForAssembly => sim.set_expansion(opts.dock_expansion)?,
        Phase::DockAssembly => {
            success = sim.dock(target.expect("checked in SpinToFaceBridge"))?;
            sim.set_expansion(0.0)?;
        }
        Phase::MagnetOff => {
            next.magnet_on = false;
            next.carrying = false;
            sim.set_payload(false);
            next.blocks_placed += 1;
        }
        Phase::Retreat => {
            let placed = block
                .checked_sub(1)
                .and_then(|i| plan.targets.get(i))
                .ok_or_else(|| Error::Planning("retreat without a placed block".into()))?;
            sim.goto(preparation_pose(placed, plan.preparation_offset))?
        }
        Phase::Done => {}
    }

    if matches!(state.phase, Phase::DockPickup | Phase::DockAssembly) {
        if success {
            next.retry_count = 0;
        } else {
            next.retry_count += 1;
            next.total_retries += 1;
            if next.retry_count > opts.retry_cap {
                return Err(Error::MissionAborted {
                    phase: state.phase.to_string(),
                    reason: format!(
                        "{} consecutive failed captures (cap {})",
                        next.retry_count, opts.retry_cap
                    ),
                });
            }
        }
    }
    let remaining = match state.phase {
        Phase::Init => plan.targets.len(),
        Phase::Retreat => plan.targets.len() - next.blocks_placed,
        _ => remaining_after,
    };
    next.phase = next_phase(
        state.phase,
        TransitionInput {
            success,
            last_block,
            remaining,
        },
    );
    let record = PhaseRecord {
        phase: state.phase,
        start,
        end: sim.time(),
        block,
        success,
    };
    Ok((next, record))
}

/// Runs the plan to `Done` or until a phase fails hard.
pub fn run_mission<S: MissionSim>(
    plan: &MissionPlan,
    opts: &MissionOptions,
    sim: &mut S,
) -> MissionLog {
    let mut state = MissionState::default();
    let start = sim.time();
    let mut records = Vec::new();
    let mut aborted = None;
    let mut failing_phase = None;
    while state.phase != Phase::Done {
        match mission_step(&state, plan, opts, sim) {
            Ok((next, record)) => {
                records.push(record);
                state = next;
            }
            Err(e) => {
                let t = sim.time();
                records.push(PhaseRecord {
                    phase: state.phase,
                    start: records.last().map_or(start, |r: &PhaseRecord| r.end),
                    end: t,
                    block: state.blocks_placed,
                    success: false,
                });
                failing_phase = Some(state.phase);
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    MissionLog {
        records,
        start,
        end: sim.time(),
        final_state: state,
        aborted,
        failing_phase,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mission::plan::{plan_bridge, SiteGeometry};
    use std::collections::VecDeque;

    /// Scripted simulator: moves are instantaneous but take one second,
    /// docking outcomes come from a queue (default success).
    #[derive(Default)]
    pub(crate) struct FakeSim {
        pub t: f64,
        pub pose: Pose,
        pub expansion: f64,
        pub carrying: bool,
        pub dock_results: VecDeque<bool>,
        pub trace: Vec<(f64, bool)>,
    }

    impl MissionSim for FakeSim {
        fn time(&self) -> f64 {
            self.t
        }
        fn pose(&self) -> Pose {
            self.pose
        }
        fn expansion(&self) -> f64 {
            self.expansion
        }
        fn goto(&mut self, target: Pose) -> Result<()> {
            self.t += 1.0;
            self.pose = target;
            self.trace.push((self.expansion, self.carrying));
            Ok(())
        }
        fn set_expansion(&mut self, l: f64) -> Result<()> {
            self.t += 1.0;
            self.expansion = l;
            Ok(())
        }
        fn dock(&mut self, port: &DockPort) -> Result<bool> {
            self.t += 1.0;
            let ok = self.dock_results.pop_front().unwrap_or(true);
            if ok {
                self.pose = Pose::new(port.position[0], port.position[1], port.facing);
            }
            Ok(ok)
        }
        fn set_payload(&mut self, carrying: bool) {
            self.carrying = carrying;
        }
    }

    fn plan(blocks: usize) -> MissionPlan {
        plan_bridge(&SiteGeometry {
            blocks,
            ..SiteGeometry::default()
        })
        .unwrap()
    }

    #[test]
    fn every_transition_is_an_allowed_edge() {
        for phase in Phase::ALL {
            for success in [false, true] {
                for last_block in [false, true] {
                    for remaining in 0..3 {
                        let to = next_phase(
                            phase,
                            TransitionInput {
                                success,
                                last_block,
                                remaining,
                            },
                        );
                        assert!(EDGES.contains(&(phase, to)), "{phase} -> {to}");
                    }
                }
            }
        }
        // ... and every listed edge is reachable.
        for (from, to) in EDGES {
            let reachable = [false, true].iter().any(|&success| {
                [false, true].iter().any(|&last_block| {
                    (0..3).any(|remaining| {
                        next_phase(
                            from,
                            TransitionInput {
                                success,
                                last_block,
                                remaining,
                            },
                        ) == to
                    })
                })
            });
            assert!(reachable, "{from} -> {to}");
        }
    }

    #[test]
    fn successful_pickup_carries_the_block() {
        let p = plan(6);
        let mut sim = FakeSim::default();
        let state = MissionState {
            phase: Phase::DockPickup,
            ..MissionState::default()
        };
        let (next, _) = mission_step(&state, &p, &MissionOptions::default(), &mut sim).unwrap();
        assert_eq!(next.phase, Phase::ReturnToPrep);
        assert!(next.carrying && sim.carrying);
    }

    #[test]
    fn failed_pickup_loops_back_and_counts() {
        let p = plan(6);
        let mut sim = FakeSim::default();
        sim.dock_results.push_back(false);
        let state = MissionState {
            phase: Phase::DockPickup,
            ..MissionState::default()
        };
        let (next, rec) = mission_step(&state, &p, &MissionOptions::default(), &mut sim).unwrap();
        assert_eq!(next.phase, Phase::MoveToPickupPrep);
        assert_eq!(next.retry_count, 1);
        assert!(!next.carrying && !rec.success);
    }

    #[test]
    fn clean_run_places_all_blocks_with_the_form_policy() {
        let p = plan(6);
        let mut sim = FakeSim::default();
        let log = run_mission(&p, &MissionOptions::default(), &mut sim);
        assert_eq!(log.aborted, None);
        assert_eq!(log.final_state.blocks_placed, 6);
        assert_eq!(log.final_state.total_retries, 0);
        // All moves happen contracted.
        assert!(sim.trace.iter().all(|(l, _)| *l == 0.0));
        // The last block is assembled without expanding.
        let last: Vec<Phase> = log
            .records
            .iter()
            .filter(|r| r.block == 5)
            .map(|r| r.phase)
            .collect();
        assert!(!last.contains(&Phase::ExpandForAssembly));
        let first: Vec<Phase> = log
            .records
            .iter()
            .filter(|r| r.block == 0)
            .map(|r| r.phase)
            .collect();
        assert!(first.contains(&Phase::ExpandForAssembly));
    }

    #[test]
    fn single_block_skips_expand_for_assembly() {
        let p = plan(1);
        let mut sim = FakeSim::default();
        let log = run_mission(&p, &MissionOptions::default(), &mut sim);
        let phases: Vec<Phase> = log.records.iter().map(|r| r.phase).collect();
        use Phase::*;
        assert_eq!(
            phases,
            vec![
                Init,
                MoveToPickupPrep,
                ExpandAndMagnetOn,
                DockPickup,
                ReturnToPrep,
                SpinToFaceBridge,
                Deliver,
                DockAssembly,
                MagnetOff,
                Retreat
            ]
        );
        assert_eq!(log.final_state.phase, Done);
    }

    #[test]
    fn empty_plan_is_done_immediately() {
        let mut sim = FakeSim::default();
        let log = run_mission(&plan(0), &MissionOptions::default(), &mut sim);
        assert_eq!(log.final_state.phase, Phase::Done);
        assert_eq!(log.records.len(), 1);
    }

    #[test]
    fn retry_cap_aborts_with_the_phase_named() {
        let mut sim = FakeSim {
            dock_results: std::iter::repeat_n(false, 10).collect(),
            ..FakeSim::default()
        };
        let log = run_mission(&plan(2), &MissionOptions::default(), &mut sim);
        assert_eq!(log.failing_phase, Some(Phase::DockPickup));
        assert!(log.aborted.unwrap().contains("DockPickup"));
        assert_eq!(log.final_state.total_retries, 5);
    }

    #[test]
    fn failed_assembly_goes_back_to_delivery() {
        // Pickup succeeds, first assembly fails, then everything succeeds.
        let mut sim = FakeSim {
            dock_results: [true, false].into_iter().collect(),
            ..FakeSim::default()
        };
        let log = run_mission(&plan(1), &MissionOptions::default(), &mut sim);
        let phases: Vec<Phase> = log.records.iter().map(|r| r.phase).collect();
        let i = phases
            .iter()
            .position(|p| *p == Phase::DockAssembly)
            .unwrap();
        assert_eq!(phases[i + 1], Phase::Deliver);
        assert_eq!(log.final_state.blocks_placed, 1);
        assert_eq!(log.final_state.total_retries, 1);
    }

    #[test]
    fn carrying_matches_payload_throughout() {
        let p = plan(3);
        let mut sim = FakeSim::default();
        let opts = MissionOptions::default();
        let mut state = MissionState::default();
        while state.phase != Phase::Done {
            let (next, _) = mission_step(&state, &p, &opts, &mut sim).unwrap();
            assert_eq!(next.carrying, sim.carrying);
            assert!(next.blocks_placed <= 3);
            if !next.phase.allows_expansion() {
                assert_eq!(sim.expansion, 0.0, "{:?}", next.phase);
            }
            state = next;
        }
    }
}

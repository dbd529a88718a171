//! Bridge construction: shuttle blocks from one pickup station to slots
//! laid end to end, expanding for docking and moving contracted.

pub mod driver;
pub mod machine;
pub mod plan;
pub mod report;

pub use driver::{DriverOptions, SimMission};
pub use machine::{
    mission_step, next_phase, run_mission, MissionLog, MissionOptions, MissionSim, MissionState,
    Phase, PhaseRecord, TransitionInput,
};
pub use plan::{plan_bridge, preparation_pose, MissionPlan, SiteGeometry};
pub use report::{mission_report, MissionSummary};

use crate::sim::log::SimLog;
use crate::sim::wave::WaveDisturbance;
use crate::vessel::VesselModel;
use crate::Result;

#[derive(Debug, Clone)]
pub struct BridgeRun {
    pub plan: MissionPlan,
    pub mission: MissionLog,
    pub summary: MissionSummary,
    pub log: SimLog,
}

/// Plans the site and runs the mission in the simulator.
pub fn run_bridge(
    model: &VesselModel,
    site: &SiteGeometry,
    waves: &WaveDisturbance,
    opts: &MissionOptions,
    driver: &DriverOptions,
) -> Result<BridgeRun> {
    let plan = plan_bridge(site)?;
    let mut sim = SimMission::new(model, plan.start, *waves, plan.block_mass, *driver);
    let mission = run_mission(&plan, opts, &mut sim);
    let summary = mission_report(&mission);
    Ok(BridgeRun {
        plan,
        mission,
        summary,
        log: sim.log,
    })
}

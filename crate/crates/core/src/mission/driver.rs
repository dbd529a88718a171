//! [`MissionSim`] backed by closed-loop scenario runs.
//!
//! Each motion primitive is one NMPC scenario started from the current
//! state and clock; the per-primitive logs are concatenated into a single
//! continuous log.

use serde::{Deserialize, Serialize};

use super::machine::MissionSim;
use crate::control::reference::Leg;
use crate::sim::dock::DockPort;
use crate::sim::log::SimLog;
use crate::sim::scenario::{run_scenario, ControllerSpec, Payload, ReferenceSpec, ScenarioConfig};
use crate::sim::wave::WaveDisturbance;
use crate::vessel::{Pose, VesselModel, VesselState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverOptions {
    pub transit_speed: f64,
    pub approach_speed: f64,
    /// Time allowed at the port before a docking attempt counts as failed, s.
    pub dock_timeout: f64,
    /// Time allowed after a move's reference ends to settle, s.
    pub settle_timeout: f64,
    pub payload_yaw_radius: f64,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self {
            transit_speed: 0.2,
            approach_speed: 0.05,
            dock_timeout: 60.0,
            settle_timeout: 30.0,
            payload_yaw_radius: 0.6,
        }
    }
}

pub struct SimMission<'m> {
    pub model: &'m VesselModel,
    pub state: VesselState,
    pub t: f64,
    pub waves: WaveDisturbance,
    pub log: SimLog,
    pub payload: Option<Payload>,
    pub block_mass: f64,
    pub opts: DriverOptions,
}

impl<'m> SimMission<'m> {
    pub fn new(
        model: &'m VesselModel,
        start: Pose,
        waves: WaveDisturbance,
        block_mass: f64,
        opts: DriverOptions,
    ) -> Self {
        Self {
            model,
            state: VesselState::at_rest(start, 0.0),
            t: 0.0,
            waves,
            log: SimLog::new(model.dt),
            payload: None,
            block_mass,
            opts,
        }
    }

    fn run(&mut self, mut cfg: ScenarioConfig) -> Result<crate::sim::scenario::ScenarioRun> {
        cfg.waves = self.waves;
        cfg.payload = self.payload;
        cfg.start_time = self.t;
        let run = run_scenario(self.model, &cfg)?;
        self.state = run.final_state;
        self.t = run.log.last().map_or(self.t, |s| s.t);
        self.log.extend(run.log.clone())?;
        if let Some(e) = &run.aborted {
            return Err(e.clone());
        }
        Ok(run)
    }
}

impl MissionSim for SimMission<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn pose(&self) -> Pose {
        self.state.pose
    }

    fn expansion(&self) -> f64 {
        self.state.expansion
    }

    fn goto(&mut self, target: Pose) -> Result<()> {
        let legs = vec![Leg::new(target, self.opts.transit_speed)];
        let start = self.state.pose;
        let probe = ReferenceSpec::Legs {
            start,
            legs: legs.clone(),
        }
        .build(&self.state, 0.0, 0.1)?;
        let mut cfg = ScenarioConfig::new(
            self.state,
            ControllerSpec::nmpc(),
            ReferenceSpec::Legs { start, legs },
            probe.duration() + self.opts.settle_timeout,
        );
        cfg.stop.convergence = true;
        let run = self.run(cfg)?;
        if run.converged_at.is_none() {
            return Err(Error::Planning(format!(
                "did not settle at ({:.2}, {:.2}) within {} s",
                target.x, target.y, self.opts.settle_timeout
            )));
        }
        Ok(())
    }

    fn set_expansion(&mut self, l: f64) -> Result<()> {
        if l == self.state.expansion {
            return Ok(());
        }
        let change = (l - self.state.expansion).abs() / self.model.max_expansion_rate;
        let mut cfg = ScenarioConfig::new(
            self.state,
            ControllerSpec::nmpc(),
            ReferenceSpec::Hold,
            change + self.opts.settle_timeout,
        );
        cfg.expansion = vec![(self.t, l)];
        cfg.stop.convergence = true;
        let run = self.run(cfg)?;
        if run.converged_at.is_none() {
            return Err(Error::Planning(format!(
                "expansion to {l} m did not settle"
            )));
        }
        Ok(())
    }

    fn dock(&mut self, port: &DockPort) -> Result<bool> {
        let target = Pose::new(port.position[0], port.position[1], port.facing);
        let travel = self.state.pose.distance_to(&target) / self.opts.approach_speed;
        let legs =
            vec![Leg::new(target, self.opts.approach_speed).with_hold(self.opts.dock_timeout)];
        let mut cfg = ScenarioConfig::new(
            self.state,
            ControllerSpec::nmpc(),
            ReferenceSpec::Legs {
                start: self.state.pose,
                legs,
            },
            travel + self.opts.dock_timeout,
        );
        cfg.ports = vec![*port];
        cfg.stop.capture = true;
        Ok(self.run(cfg)?.captured.is_some())
    }

    fn set_payload(&mut self, carrying: bool) {
        self.payload = carrying.then_some(Payload {
            mass: self.block_mass,
            yaw_radius: self.opts.payload_yaw_radius,
        });
    }
}

//! Closed-loop scenario engine.
//!
//! The plant is integrated at the model step (0.02 s by default); the
//! controller runs at its own period and its command is held in between.
//! Each logged sample records the state at the start of a step together
//! with the command, total force and disturbance applied over that step and
//! the expansion whose parameters were used. A final sample closes the run
//! with the last command.

use nalgebra::{Vector3, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use super::dock::{CaptureMonitor, DockPort};
use super::log::{EventKind, LogSample, SimLog};
use super::wave::{WaveDisturbance, WaveField};
use crate::control::nmpc::{Nmpc, NmpcConfig, PlantModel, SolveStatus};
use crate::control::pid::{pid_step, PidGains, PidState};
use crate::control::reference::{build_reference, Leg, ReferenceTrajectory, Shape};
use crate::vessel::dynamics::rk4;
use crate::vessel::thrusters::apply_allocation;
use crate::vessel::{wrap_angle, HydroParams, Pose, VesselModel, VesselState};
use crate::{Error, Result};

/// Rigid payload carried after a capture: its mass adds to the surge and
/// sway terms and `mass · yaw_radius²` to the yaw inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Payload {
    pub mass: f64,
    pub yaw_radius: f64,
}

impl Default for Payload {
    fn default() -> Self {
        Self {
            mass: 2.0,
            yaw_radius: 0.6,
        }
    }
}

/// Clamps the command to `±f_max`, adds the disturbance and advances one
/// RK4 step. Returns the new state, the clamped command and whether
/// clamping occurred.
pub fn step(
    state: &VesselState,
    u_command: &Vector4<f64>,
    disturbance: &Vector3<f64>,
    params: &HydroParams,
    arm: f64,
    f_max: f64,
    dt: f64,
) -> Result<(VesselState, Vector4<f64>, bool)> {
    let u = u_command.map(|f| f.clamp(-f_max, f_max));
    let clamped = u != *u_command;
    let force = apply_allocation(&u, arm) + disturbance;
    let next = rk4(&state.q(), &force, params, dt);
    if let Some(i) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numerical {
            component: ["x", "y", "psi", "u", "v", "r"][i],
        });
    }
    Ok((VesselState::from_q(&next, state.expansion), u, clamped))
}

/// Steps a vessel through time, logging every step.
pub struct Simulator<'m> {
    pub model: &'m VesselModel,
    pub state: VesselState,
    pub log: SimLog,
    pub payload: Option<Payload>,
    t0: f64,
    steps: u64,
    expansion_target: f64,
    waves: WaveField,
    wave_config: WaveDisturbance,
}

impl<'m> Simulator<'m> {
    pub fn new(
        model: &'m VesselModel,
        state: VesselState,
        waves: &WaveDisturbance,
        t0: f64,
    ) -> Result<Self> {
        state.check_expansion()?;
        waves.validate()?;
        Ok(Self {
            model,
            state,
            log: SimLog::new(model.dt),
            payload: None,
            t0,
            steps: 0,
            expansion_target: state.expansion,
            waves: WaveField::new(waves),
            wave_config: *waves,
        })
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.steps as f64 * self.model.dt
    }

    pub fn waves(&self) -> &WaveDisturbance {
        &self.wave_config
    }

    /// Hydrodynamic parameters for the current expansion and payload.
    pub fn params(&self) -> Result<HydroParams> {
        let p = self.model.params(self.state.expansion)?;
        Ok(match self.payload {
            Some(pl) => p.with_payload(pl.mass, pl.yaw_radius),
            None => p,
        })
    }

    pub fn plant(&self) -> Result<PlantModel> {
        Ok(PlantModel {
            params: self.params()?,
            arm: self.model.arm(self.state.expansion),
        })
    }

    pub fn expansion_target(&self) -> f64 {
        self.expansion_target
    }

    pub fn set_expansion_target(&mut self, target: f64) -> Result<()> {
        if !(0.0..=self
            .model
            .geometry
            .max_expansion()
            .min(crate::vessel::MAX_EXPANSION))
            .contains(&target)
        {
            return Err(Error::Range {
                what: "expansion target",
                value: target,
                min: 0.0,
                max: crate::vessel::MAX_EXPANSION,
            });
        }
        if target != self.expansion_target {
            self.log.event(
                self.t(),
                EventKind::Expansion,
                format!("target {:.4} m from {:.4} m", target, self.state.expansion),
            );
            self.expansion_target = target;
        }
        Ok(())
    }

    pub fn expansion_settled(&self) -> bool {
        self.state.expansion == self.expansion_target
    }

    /// One integration step under `u_command`.
    pub fn step(&mut self, u_command: &Vector4<f64>) -> Result<()> {
        let t = self.t();
        let params = self.params()?;
        let arm = self.model.arm(self.state.expansion);
        let d = self.waves.force(t);
        let (next, u, clamped) = match step(
            &self.state,
            u_command,
            &d,
            &params,
            arm,
            self.model.f_max(),
            self.model.dt,
        ) {
            Ok(r) => r,
            Err(e) => {
                self.log.event(
                    t,
                    EventKind::Abort,
                    format!("{e}; state {:?}", self.state.q().as_slice()),
                );
                return Err(e);
            }
        };
        if clamped {
            self.log
                .event(t, EventKind::Clamp, format!("{:?}", u_command.as_slice()));
        }
        let force = apply_allocation(&u, arm) + d;
        self.log.push(LogSample {
            t,
            q: self.state.q().into(),
            u: u.into(),
            force: force.into(),
            disturbance: d.into(),
            expansion: self.state.expansion,
        })?;
        self.state = next;
        self.steps += 1;
        self.advance_expansion();
        Ok(())
    }

    fn advance_expansion(&mut self) {
        let gap = self.expansion_target - self.state.expansion;
        if gap == 0.0 {
            return;
        }
        let max_step = self.model.max_expansion_rate * self.model.dt;
        if gap.abs() <= max_step {
            self.state.expansion = self.expansion_target;
            self.log.event(
                self.t(),
                EventKind::Expansion,
                format!("reached {:.4} m", self.expansion_target),
            );
        } else {
            self.state.expansion += max_step.copysign(gap);
        }
    }

    /// Appends the terminal sample holding `last_u`.
    pub fn finish(&mut self, last_u: &Vector4<f64>) -> Result<()> {
        let arm = self.model.arm(self.state.expansion);
        let t = self.t();
        let d = self.waves.force(t);
        let u = last_u.map(|f| f.clamp(-self.model.f_max(), self.model.f_max()));
        self.log.push(LogSample {
            t,
            q: self.state.q().into(),
            u: u.into(),
            force: (apply_allocation(&u, arm) + d).into(),
            disturbance: d.into(),
            expansion: self.state.expansion,
        })
    }
}

/// Data a controller sees at each control instant.
pub struct ControlContext<'a> {
    pub t: f64,
    pub state: &'a VesselState,
    pub reference: &'a ReferenceTrajectory,
    pub plant: PlantModel,
    pub last_u: Vector4<f64>,
    pub f_max: f64,
    pub dt_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub u: Vector4<f64>,
    pub degraded: bool,
    pub diagnostics: Option<String>,
}

pub trait Controller: Send {
    fn name(&self) -> &'static str;
    fn reset(&mut self);
    fn command(&mut self, ctx: &ControlContext) -> Result<Command>;
}

/// Zero thrust.
#[derive(Debug, Clone, Default)]
pub struct NoController;

impl Controller for NoController {
    fn name(&self) -> &'static str {
        "none"
    }

    fn reset(&mut self) {}

    fn command(&mut self, _ctx: &ControlContext) -> Result<Command> {
        Ok(Command {
            u: Vector4::zeros(),
            degraded: false,
            diagnostics: None,
        })
    }
}

pub struct NmpcController {
    pub nmpc: Nmpc,
    pub log_diagnostics: bool,
}

impl NmpcController {
    pub fn new(cfg: NmpcConfig) -> Result<Self> {
        Ok(Self {
            nmpc: Nmpc::new(cfg)?,
            log_diagnostics: true,
        })
    }
}

impl Controller for NmpcController {
    fn name(&self) -> &'static str {
        "nmpc"
    }

    fn reset(&mut self) {
        self.nmpc.reset();
    }

    fn command(&mut self, ctx: &ControlContext) -> Result<Command> {
        let cfg = &self.nmpc.cfg;
        let window = ctx.reference.window(ctx.t, cfg.dt, cfg.horizon);
        let sol = self
            .nmpc
            .solve(&ctx.state.q(), &window, &ctx.last_u, ctx.plant)?;
        Ok(Command {
            u: sol.first(),
            degraded: sol.status == SolveStatus::IterationCap,
            diagnostics: self.log_diagnostics.then(|| {
                format!(
                    "cost {:.6e} iterations {} stationarity {:.3e}",
                    sol.cost, sol.iterations, sol.stationarity
                )
            }),
        })
    }
}

/// PID baseline. Without fixed gains the contracted or expanded set is
/// chosen from the current expansion.
pub struct PidController {
    pub gains: Option<PidGains>,
    state: PidState,
}

impl PidController {
    pub fn new(gains: Option<PidGains>) -> Self {
        Self {
            gains,
            state: PidState::default(),
        }
    }
}

impl Controller for PidController {
    fn name(&self) -> &'static str {
        "pid"
    }

    fn reset(&mut self) {
        self.state = PidState::default();
    }

    fn command(&mut self, ctx: &ControlContext) -> Result<Command> {
        let gains = self
            .gains
            .unwrap_or_else(|| PidGains::for_expansion(ctx.state.expansion));
        let q_ref = ctx.reference.sample(ctx.t);
        let (out, next) = pid_step(
            ctx.state,
            &q_ref,
            &gains,
            ctx.dt_c,
            ctx.plant.arm,
            ctx.f_max,
            &self.state,
        );
        self.state = next;
        Ok(Command {
            u: out.u,
            degraded: false,
            diagnostics: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ControllerSpec {
    None,
    Nmpc {
        #[serde(default)]
        config: Option<NmpcConfig>,
    },
    Pid {
        #[serde(default)]
        gains: Option<PidGains>,
    },
}

impl ControllerSpec {
    pub fn nmpc() -> Self {
        ControllerSpec::Nmpc { config: None }
    }

    pub fn pid() -> Self {
        ControllerSpec::Pid { gains: None }
    }

    pub fn build(&self, model: &VesselModel) -> Result<Box<dyn Controller>> {
        Ok(match self {
            ControllerSpec::None => Box::new(NoController),
            ControllerSpec::Nmpc { config } => {
                let cfg = config
                    .clone()
                    .unwrap_or_else(|| NmpcConfig::with_thrust_limit(model.f_max()));
                Box::new(NmpcController::new(cfg)?)
            }
            ControllerSpec::Pid { gains } => {
                if let Some(g) = gains {
                    if !g.is_valid() {
                        return Err(Error::config(
                            "controller.gains",
                            "gains must be nonnegative",
                        ));
                    }
                }
                Box::new(PidController::new(*gains))
            }
        })
    }

    fn thresholds(&self) -> (f64, f64) {
        match self {
            ControllerSpec::Nmpc { config: Some(c) } => (c.position_threshold, c.yaw_threshold),
            _ => {
                let d = NmpcConfig::default();
                (d.position_threshold, d.yaw_threshold)
            }
        }
    }
}

/// Where the reference comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Hold the initial pose.
    Hold,
    Shape {
        shape: Shape,
        size: f64,
        speed: f64,
        origin: (f64, f64),
        #[serde(default = "one")]
        laps: usize,
    },
    Legs {
        start: Pose,
        legs: Vec<Leg>,
    },
    Trajectory(ReferenceTrajectory),
}

fn one() -> usize {
    1
}

impl ReferenceSpec {
    pub fn build(&self, initial: &VesselState, t0: f64, dt: f64) -> Result<ReferenceTrajectory> {
        match self {
            ReferenceSpec::Hold => {
                let p = initial.pose;
                Ok(ReferenceTrajectory::from_poses(
                    Shape::Custom,
                    t0,
                    dt,
                    vec![(p.x, p.y, p.psi); 2],
                    Vec::new(),
                ))
            }
            ReferenceSpec::Shape {
                shape,
                size,
                speed,
                origin,
                laps,
            } => {
                let mut r = build_reference(*shape, *size, *speed, *origin, *laps, dt)?;
                r.t0 = t0;
                for c in r.corners.iter_mut() {
                    c.t += t0;
                }
                Ok(r)
            }
            ReferenceSpec::Legs { start, legs } => {
                ReferenceTrajectory::from_legs(Shape::Custom, *start, legs, t0, dt)
            }
            ReferenceSpec::Trajectory(r) => Ok(r.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopWhen {
    /// End the run at the first capture.
    pub capture: bool,
    /// End the run once the reference has finished, the tracking error is
    /// inside the controller thresholds and the expansion has settled.
    pub convergence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub initial: VesselState,
    pub controller: ControllerSpec,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub waves: WaveDisturbance,
    #[serde(default)]
    pub ports: Vec<DockPort>,
    pub duration: f64,
    /// `(time, target)` expansion commands, applied rate-limited.
    #[serde(default)]
    pub expansion: Vec<(f64, f64)>,
    #[serde(default)]
    pub payload: Option<Payload>,
    #[serde(default)]
    pub stop: StopWhen,
    #[serde(default = "default_control_period")]
    pub control_period: f64,
    #[serde(default)]
    pub start_time: f64,
}

fn default_control_period() -> f64 {
    0.1
}

impl ScenarioConfig {
    pub fn new(
        initial: VesselState,
        controller: ControllerSpec,
        reference: ReferenceSpec,
        duration: f64,
    ) -> Self {
        Self {
            initial,
            controller,
            reference,
            waves: WaveDisturbance::calm(),
            ports: Vec::new(),
            duration,
            expansion: Vec::new(),
            payload: None,
            stop: StopWhen::default(),
            control_period: 0.1,
            start_time: 0.0,
        }
    }

    pub fn validate(&self, model: &VesselModel) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::config("scenario.duration", "must be positive"));
        }
        let ratio = self.control_period / model.dt;
        if !(self.control_period >= model.dt) || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config(
                "scenario.control_period",
                format!(
                    "must be a whole multiple of the {} s integration step",
                    model.dt
                ),
            ));
        }
        self.initial.check_expansion()?;
        self.waves.validate()?;
        for (i, port) in self.ports.iter().enumerate() {
            port.validate(model.dt)
                .map_err(|e| Error::config(format!("scenario.ports[{i}]"), e.to_string()))?;
        }
        for (i, (t, l)) in self.expansion.iter().enumerate() {
            if !t.is_finite() || !(0.0..=crate::vessel::MAX_EXPANSION).contains(l) {
                return Err(Error::config(
                    format!("scenario.expansion[{i}]"),
                    "time must be finite and target in [0, 0.5]",
                ));
            }
        }
        Ok(())
    }
}

/// Result of a scenario: the log plus the reference it tracked.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub log: SimLog,
    pub reference: ReferenceTrajectory,
    pub final_state: VesselState,
    pub captured: Option<(usize, f64)>,
    pub converged_at: Option<f64>,
    /// Set when integration produced a non-finite state.
    pub aborted: Option<Error>,
    pub payload: Option<Payload>,
}

/// Runs a full closed-loop scenario. Controller failures are logged and the
/// previous command is held; a non-finite state ends the run early with an
/// abort event and `aborted` set.
pub fn run_scenario(model: &VesselModel, cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate(model)?;
    let reference =
        cfg.reference
            .build(&cfg.initial, cfg.start_time, cfg.control_period.min(0.1))?;
    let mut controller = cfg.controller.build(model)?;
    let (pos_thr, yaw_thr) = cfg.controller.thresholds();
    let mut sim = Simulator::new(model, cfg.initial, &cfg.waves, cfg.start_time)?;
    sim.payload = cfg.payload;
    sim.log
        .metadata
        .insert("controller".into(), controller.name().into());
    sim.log
        .metadata
        .insert("reference".into(), reference.shape.to_string());
    sim.log
        .metadata
        .insert("wave_seed".into(), cfg.waves.seed.to_string());

    let steps = (cfg.duration / model.dt).round() as u64;
    let every = (cfg.control_period / model.dt).round() as u64;
    let mut monitors: Vec<CaptureMonitor> = cfg
        .ports
        .iter()
        .map(|p| CaptureMonitor::new(*p, model.dt))
        .collect();
    let mut schedule: Vec<(f64, f64)> = cfg.expansion.clone();
    schedule.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut next_schedule = 0;

    let mut u = Vector4::zeros();
    let mut captured = None;
    let mut converged_at = None;
    let mut aborted = None;
    for k in 0..steps {
        let t = sim.t();
        while next_schedule < schedule.len() && schedule[next_schedule].0 <= t + 1e-12 {
            sim.set_expansion_target(schedule[next_schedule].1)?;
            next_schedule += 1;
        }

        for (i, m) in monitors.iter_mut().enumerate() {
            if m.update(&sim.state).is_captured() && captured.is_none() {
                captured = Some((i, t));
                sim.log.event(t, EventKind::Capture, format!("port {i}"));
            }
        }
        let r_now = reference.sample(t);
        if t >= reference.t_end() - 1e-9 && converged_at.is_none() && sim.expansion_settled() {
            let pos = (sim.state.pose.x - r_now[0]).hypot(sim.state.pose.y - r_now[1]);
            let yaw = wrap_angle(sim.state.pose.psi - r_now[2]).abs();
            if pos < pos_thr && yaw < yaw_thr {
                converged_at = Some(t);
                sim.log.event(
                    t,
                    EventKind::Converged,
                    format!("position {pos:.4} m yaw {yaw:.4} rad"),
                );
            }
        }
        if (cfg.stop.capture && captured.is_some())
            || (cfg.stop.convergence && converged_at.is_some())
        {
            break;
        }

        if k % every == 0 {
            let ctx = ControlContext {
                t,
                state: &sim.state,
                reference: &reference,
                plant: sim.plant()?,
                last_u: u,
                f_max: model.f_max(),
                dt_c: cfg.control_period,
            };
            match controller.command(&ctx) {
                Ok(cmd) => {
                    u = cmd.u;
                    if cmd.degraded {
                        sim.log.event(
                            t,
                            EventKind::SolverDegraded,
                            cmd.diagnostics.clone().unwrap_or_default(),
                        );
                    }
                    if let Some(d) = cmd.diagnostics {
                        sim.log.event(t, EventKind::Solver, d);
                    }
                }
                Err(e) => sim.log.event(t, EventKind::ControllerError, e.to_string()),
            }
        }
        if let Err(e) = sim.step(&u) {
            aborted = Some(e);
            break;
        }
    }
    if aborted.is_none() {
        sim.finish(&u)?;
    }
    Ok(ScenarioRun {
        log: sim.log,
        reference,
        final_state: sim.state,
        captured,
        converged_at,
        aborted,
        payload: sim.payload,
    })
}

/// Position/yaw error of a state against a reference state.
pub fn pose_error(state: &VesselState, r: &Vector6<f64>) -> (f64, f64) {
    (
        (state.pose.x - r[0]).hypot(state.pose.y - r[1]),
        wrap_angle(state.pose.psi - r[2]).abs(),
    )
}

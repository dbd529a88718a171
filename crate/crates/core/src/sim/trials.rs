//! Tracking and docking experiments built on [`run_scenario`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dock::DockPort;
use super::log::SimLog;
use super::scenario::{run_scenario, ControllerSpec, ReferenceSpec, ScenarioConfig};
use super::wave::WaveDisturbance;
use crate::control::metrics::{tracking_metrics, TrackingMetrics};
use crate::control::reference::{Leg, ReferenceTrajectory, Shape};
use crate::vessel::{Pose, VesselModel, VesselState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Contracted,
    Expanded,
}

impl Form {
    pub const ALL: [Form; 2] = [Form::Contracted, Form::Expanded];

    pub fn expansion(self) -> f64 {
        match self {
            Form::Contracted => 0.0,
            Form::Expanded => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Water {
    #[default]
    Calm,
    Turbulent,
}

impl Water {
    pub fn disturbance(self, seed: u64) -> WaveDisturbance {
        match self {
            Water::Calm => WaveDisturbance::calm().with_seed(seed),
            Water::Turbulent => WaveDisturbance::turbulent(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Nmpc,
    Pid,
}

impl ControllerKind {
    pub fn spec(self) -> ControllerSpec {
        match self {
            ControllerKind::Nmpc => ControllerSpec::nmpc(),
            ControllerKind::Pid => ControllerSpec::pid(),
        }
    }
}

macro_rules! names {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name),+ })
            }
        }

        impl std::str::FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(Error::config(stringify!($ty).to_ascii_lowercase(), format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

names!(Form, Contracted => "contracted", Expanded => "expanded");
names!(Water, Calm => "calm", Turbulent => "turbulent");
names!(ControllerKind, Nmpc => "nmpc", Pid => "pid");

/// Path sizing for the tracking experiments: circle radius 1.5 m, square
/// side 2 m, hourglass 2 m wide, all at 0.2 m/s.
pub fn tracking_reference_spec(shape: Shape) -> Result<ReferenceSpec> {
    let size = match shape {
        Shape::Circle => 1.5,
        Shape::Square | Shape::Hourglass => 2.0,
        other => {
            return Err(Error::config(
                "shape",
                format!("`{other}` is not a tracking shape"),
            ))
        }
    };
    Ok(ReferenceSpec::Shape {
        shape,
        size,
        speed: 0.2,
        origin: (0.0, 0.0),
        laps: 1,
    })
}

#[derive(Debug, Clone)]
pub struct TrackingRun {
    pub log: SimLog,
    pub reference: ReferenceTrajectory,
    pub metrics: TrackingMetrics,
}

/// One lap from the reference's first pose, offset by a seeded error of up
/// to 5 cm and 3°.
pub fn tracking_trial(
    model: &VesselModel,
    shape: Shape,
    controller: ControllerKind,
    form: Form,
    seed: u64,
) -> Result<TrackingRun> {
    let spec = tracking_reference_spec(shape)?;
    let probe = spec.build(&VesselState::default(), 0.0, 0.1)?;
    let start = probe.sample(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = Pose::new(
        start[0] + rng.gen_range(-0.05..=0.05),
        start[1] + rng.gen_range(-0.05..=0.05),
        start[2] + rng.gen_range(-3.0f64..=3.0).to_radians(),
    );
    let cfg = ScenarioConfig::new(
        VesselState::at_rest(pose, form.expansion()),
        controller.spec(),
        spec,
        probe.duration(),
    );
    let run = run_scenario(model, &cfg)?;
    if let Some(e) = run.aborted {
        return Err(e);
    }
    let metrics = tracking_metrics(&run.log, &run.reference)?;
    Ok(TrackingRun {
        log: run.log,
        reference: run.reference,
        metrics,
    })
}

/// Mean metrics over `trials` seeded runs (`seed`, `seed + 1`, …).
pub fn tracking_experiment(
    model: &VesselModel,
    shape: Shape,
    controller: ControllerKind,
    form: Form,
    trials: usize,
    seed: u64,
) -> Result<TrackingMetrics> {
    let runs: Result<Vec<TrackingMetrics>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| tracking_trial(model, shape, controller, form, seed + i).map(|r| r.metrics))
        .collect();
    Ok(TrackingMetrics::mean(&runs?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DockingOptions {
    pub port: DockPort,
    /// Distance of the preparation point in front of the port, m.
    pub preparation_offset: f64,
    /// Distance of the start point in front of the preparation point, m.
    pub start_distance: f64,
    /// Largest seeded lateral offset of the start, m.
    pub start_lateral: f64,
    /// Largest seeded heading error at the start, rad.
    pub start_yaw: f64,
    pub transit_speed: f64,
    pub approach_speed: f64,
    pub timeout: f64,
}

impl Default for DockingOptions {
    fn default() -> Self {
        Self {
            port: DockPort::at(0.0, 0.0, 0.0),
            preparation_offset: 0.4,
            start_distance: 1.2,
            start_lateral: 0.3,
            start_yaw: 20f64.to_radians(),
            transit_speed: 0.15,
            approach_speed: 0.05,
            timeout: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DockTrialSummary {
    pub seed: u64,
    pub form: Form,
    pub captured: bool,
    pub time_to_dock: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DockTrial {
    pub summary: DockTrialSummary,
    pub log: SimLog,
}

/// Legs of the approach: start → preparation point (facing the port) →
/// port, then hold at the port.
pub fn docking_legs(opts: &DockingOptions, hold: f64) -> Vec<Leg> {
    let port = opts.port;
    let (s, c) = port.facing.sin_cos();
    let prep = Pose::new(
        port.position[0] - c * opts.preparation_offset,
        port.position[1] - s * opts.preparation_offset,
        port.facing,
    );
    vec![
        Leg::new(prep, opts.transit_speed),
        Leg::new(
            Pose::new(port.position[0], port.position[1], port.facing),
            opts.approach_speed,
        )
        .with_hold(hold),
    ]
}

/// Seeded start pose in front of the preparation point.
pub fn docking_start(opts: &DockingOptions, seed: u64) -> Pose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d0c4);
    let port = opts.port;
    let (s, c) = port.facing.sin_cos();
    let back = opts.preparation_offset + opts.start_distance;
    let lateral = rng.gen_range(-opts.start_lateral..=opts.start_lateral);
    let yaw = rng.gen_range(-opts.start_yaw..=opts.start_yaw);
    Pose::new(
        port.position[0] - c * back - s * lateral,
        port.position[1] - s * back + c * lateral,
        port.facing + yaw,
    )
}

pub fn docking_trial(
    model: &VesselModel,
    form: Form,
    waves: &WaveDisturbance,
    seed: u64,
    opts: &DockingOptions,
) -> Result<DockTrial> {
    let start = docking_start(opts, seed);
    let legs = docking_legs(opts, opts.timeout);
    let mut cfg = ScenarioConfig::new(
        VesselState::at_rest(start, form.expansion()),
        ControllerSpec::nmpc(),
        ReferenceSpec::Legs { start, legs },
        opts.timeout,
    );
    cfg.waves = *waves;
    cfg.ports = vec![opts.port];
    cfg.stop.capture = true;
    let run = run_scenario(model, &cfg)?;
    let mut log = run.log;
    if run.captured.is_none() {
        log.event(
            log.last().map_or(0.0, |s| s.t),
            super::log::EventKind::CaptureTimeout,
            "no capture",
        );
    }
    Ok(DockTrial {
        summary: DockTrialSummary {
            seed,
            form,
            captured: run.captured.is_some(),
            time_to_dock: run.captured.map(|c| c.1),
        },
        log,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockingReport {
    pub form: Form,
    pub water: Water,
    pub trials: Vec<DockTrialSummary>,
    pub success_rate: f64,
    /// Times of the successful trials, s.
    pub times: Vec<f64>,
    pub mean_time: Option<f64>,
}

impl DockingReport {
    pub fn from_trials(form: Form, water: Water, trials: Vec<DockTrialSummary>) -> Self {
        let times: Vec<f64> = trials.iter().filter_map(|t| t.time_to_dock).collect();
        let success_rate = if trials.is_empty() {
            0.0
        } else {
            times.len() as f64 / trials.len() as f64
        };
        let mean_time = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
        Self {
            form,
            water,
            trials,
            success_rate,
            times,
            mean_time,
        }
    }
}

/// Independent trials with seeds `seed, seed + 1, …`, run on the rayon
/// pool and merged in seed order. The same seed gives the same start pose
/// and wave field for either form.
pub fn docking_monte_carlo(
    model: &VesselModel,
    form: Form,
    water: Water,
    repetitions: usize,
    seed: u64,
    opts: &DockingOptions,
) -> Result<(DockingReport, Vec<SimLog>)> {
    let trials: Result<Vec<DockTrial>> = (0..repetitions as u64)
        .into_par_iter()
        .map(|i| docking_trial(model, form, &water.disturbance(seed + i), seed + i, opts))
        .collect();
    let trials = trials?;
    let summaries = trials.iter().map(|t| t.summary).collect();
    let logs = trials.into_iter().map(|t| t.log).collect();
    Ok((DockingReport::from_trials(form, water, summaries), logs))
}

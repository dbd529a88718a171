//! Closed-loop simulation: disturbances, docking capture, maneuvers,
//! scenario runs and the tracking and docking experiments.

pub mod dock;
pub mod log;
pub mod maneuver;
pub mod scenario;
pub mod trials;
pub mod wave;

pub use dock::{
    docking_capture_check, CaptureFailure, CaptureMonitor, CaptureOutcome, DockPort, LatchForces,
};
pub use log::{EventKind, LogSample, SimEvent, SimLog};
pub use maneuver::{generate_maneuver_logs, ManeuverOptions};
pub use scenario::{
    run_scenario, step, Command, ControlContext, Controller, ControllerSpec, Payload,
    ReferenceSpec, ScenarioConfig, ScenarioRun, Simulator, StopWhen,
};
pub use trials::{
    docking_monte_carlo, docking_trial, tracking_experiment, tracking_trial, ControllerKind,
    DockingOptions, DockingReport, Form, Water,
};
pub use wave::{wave_force, WaveDisturbance, WaveField};

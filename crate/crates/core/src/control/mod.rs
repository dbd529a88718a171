//! Receding-horizon tracking controller, PID baseline, reference generation
//! and tracking metrics.

pub mod allocation;
pub mod metrics;
pub mod nmpc;
pub mod pid;
pub mod reference;

pub use allocation::{allocate_forces, Allocation};
pub use metrics::{tracking_metrics, TrackingMetrics};
pub use nmpc::{nmpc_step, Nmpc, NmpcConfig, NmpcSolution, PlantModel, SolveStatus};
pub use pid::{pid_step, AxisGains, PidGains, PidOutput, PidState};
pub use reference::{build_reference, ReferenceTrajectory, Shape};

//! Planar dynamics, gray-box identification, receding-horizon control and
//! bridge-building mission logic for a four-thruster surface vessel whose
//! outrigger hulls extend and retract.
//!
//! The crate is organised bottom-up:
//!
//! * [`vessel`]: mechanism kinematics, hydrodynamic parameter polynomials,
//!   thruster allocation and the 3-DOF dynamics with an RK4 integrator.
//! * [`sim`]: wave disturbances, docking capture, maneuver log generation and
//!   the closed-loop scenario runner.
//! * [`sysid`]: replay-based parameter identification and quadratic regression.
//! * [`control`]: NMPC by single shooting, the PID baseline, reference
//!   generators and tracking metrics.
//! * [`mission`]: the pickup / deliver / assemble state machine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod error;
pub mod mission;
pub mod optim;
pub mod sim;
pub mod sysid;
pub mod vessel;

pub use error::{Error, Result};

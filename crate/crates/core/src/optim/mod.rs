//! Small dense optimizers shared by the NMPC solver and identification.

pub mod box_qp;
pub mod trust_region;

pub use box_qp::{solve_box_qp, BoxQpOutcome};
pub use trust_region::{minimize_bounded, LsqOptions, LsqReport};

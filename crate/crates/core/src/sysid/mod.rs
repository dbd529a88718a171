//! Gray-box identification: replay maneuver logs through the model, fit the
//! reduced parameter vector per expansion length, then regress quadratics.

pub mod identify;
pub mod log;
pub mod pipeline;
pub mod regression;

pub use identify::{
    identify_at_length, rigid_body_guess, simulate_candidate, velocity_error_cost,
    IdentificationProblem, Identified,
};
pub use log::{ManeuverKind, ManeuverLog};
pub use pipeline::{
    run_identification, IdentifiedSet, LengthResult, SyntheticSweep, DEFAULT_LENGTHS,
};
pub use regression::{fit_polynomials, fit_quadratic, max_relative_deviation};

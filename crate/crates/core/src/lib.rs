//! Mean-field model of a driven two-cavity semiconductor system with a
//! quantum dot shared by both cavities and a movable mirror.
//!
//! * [`model`]: parameters, coupling cases and cooperativities.
//! * [`steady_state`]: drift system, direct steady-state solve, RK4 integration.
//! * [`closed_form`]: closed-form intensities and conversion efficiencies.
//! * [`dark_bright`]: dark/bright decomposition and the dark-mode fraction.

pub mod cli;
pub mod closed_form;
pub mod dark_bright;
pub mod error;
pub mod linalg;
pub mod model;
pub mod output;
pub mod steady_state;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
pub use model::{Cooperativities, CouplingCase, SystemParams};

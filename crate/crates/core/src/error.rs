use std::fmt;

use thiserror::Error;

use crate::model::Violation;

/// A list of parameter invariants that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(Violations),

    #[error("cooperativity `{name}` must be non-negative, got {value}")]
    NegativeCooperativity { name: &'static str, value: f64 },

    #[error("drift matrix is numerically singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("time step {dt} exceeds the RK4 bound {max_dt}")]
    StepSize { dt: f64, max_dt: f64 },

    #[error("invalid integration window: {0}")]
    InvalidTime(String),

    #[error("drive amplitude A_in is zero; normalized outputs are undefined")]
    ZeroDrive,

    #[error("dark/bright basis is undefined for g1 = g2 = 0")]
    DegenerateBasis,

    #[error("dark-mode fraction is undefined for zero total cavity intensity")]
    ZeroIntensity,

    #[error("outside the closed-form regime: {0}")]
    Regime(String),

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("column `{0}` is not present in the table")]
    MissingColumn(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;

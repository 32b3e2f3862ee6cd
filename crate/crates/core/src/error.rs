//! Error type shared by all engine modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    /// An operation defined only on zero-average measures received a measure
    /// with total mass beyond the gate.
    #[error("measure has nonzero total mass {mass:e}; |mass| must be <= {gate:e}")]
    NonZeroMass { mass: f64, gate: f64 },

    /// A derivative kernel must carry zero total mass.
    #[error("derivative kernel has nonzero total mass {mass:e}")]
    NonZeroMassKernel { mass: f64 },

    /// Noise radius outside its admissible range.
    #[error("noise radius {radius} outside (0, {max}]")]
    BadRadius { radius: f64, max: f64 },

    /// `delta * Lip(S) >= 1`, so `1 + delta*S` is not a bijection.
    #[error("perturbation not bijective: delta * Lip(S) = {product} >= 1")]
    NotBijective { product: f64 },

    /// A map image left the unit interval during operator assembly.
    #[error("map image {image} of x = {x} falls outside [0,1]")]
    MapRange { x: f64, image: f64 },

    /// Iterative solver ran out of budget.
    #[error("{what} did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// The control denominator -L_T(f0) vanishes where S must be nonzero.
    #[error(
        "control denominator |L_T(f0)({position})| = {value:e} is below the floor {floor:e} \
         on the active support"
    )]
    DenominatorVanishes {
        position: f64,
        value: f64,
        floor: f64,
    },

    /// A config field failed validation; the message names the precondition.
    #[error("config error: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Parse(String),
}

impl EngineError {
    pub fn invalid_config(field: impl Into<String>, message: impl Into<String>) -> Self {
        EngineError::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    /// CLI exit code for this error: 3 for config/input problems, 4 for
    /// numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::NotConverged { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;

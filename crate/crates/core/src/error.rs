use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid generator polynomial: {0}")]
    InvalidGenerator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stationary distribution did not converge (residual {residual:e})")]
    StationaryNotConverged { residual: f64 },

    #[error("threshold bracket violated: decoding succeeds at the upper end epsilon = {epsilon}")]
    BracketViolation { epsilon: f64 },

    #[error("EXIT curve anomaly: area above the BP threshold is {area}, below the rate {rate}")]
    ExitCurveAnomaly { area: f64, rate: f64 },

    #[error("no feasible permeability for rate {rate}")]
    InfeasibleRate { rate: f64 },

    #[error("could not build an S-random interleaver of length {len} with spread {spread}; try a smaller spread")]
    Interleaver { len: usize, spread: usize },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("observations are inconsistent with every codeword ({0})")]
    Inconsistent(&'static str),
}

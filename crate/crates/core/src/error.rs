use std::fmt;

use serde::{Deserialize, Serialize};

/// Evidence attached to a divergence failure: the refinement ladder that
/// failed to settle, or the quantity that blew up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub what: String,
    pub widths: Vec<f64>,
    pub estimates: Vec<f64>,
    pub note: String,
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (ladder {:?})", self.what, self.note, self.estimates)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what}: argument {value} outside trusted range [0, {cap}]")]
    Range { what: &'static str, value: f64, cap: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("mollifier width {eps} is below twice the grid step {h}")]
    Resolution { eps: f64, h: f64 },
    #[error("numerical divergence: {0}")]
    Divergence(Box<DivergenceReport>),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("line search step underflow at iteration {iteration} (residual {residual:e})")]
    StepUnderflow { iteration: usize, residual: f64 },
    #[error("search bracket exhausted: {0}")]
    Bracket(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn divergence(what: impl Into<String>, widths: &[f64], estimates: &[f64], note: impl Into<String>) -> Self {
        Error::Divergence(Box::new(DivergenceReport {
            what: what.into(),
            widths: widths.to_vec(),
            estimates: estimates.to_vec(),
            note: note.into(),
        }))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Errors shared by the comparative-advantage solvers.

use crate::model::ModelError;
use thiserror::Error;

/// One unmet throughput floor.
#[derive(Debug, Clone, PartialEq)]
pub struct RequirementViolation {
    pub vnf: String,
    pub required: f64,
    /// Best throughput the check could establish for this VNF: the column
    /// capacity bound when that alone is exceeded, otherwise the value
    /// reached by the best joint attempt.
    pub reachable: f64,
}

impl std::fmt::Display for RequirementViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vnf {} requires {} but at most {} is reachable",
            self.vnf, self.required, self.reachable
        )
    }
}

fn join_violations(violations: &[RequirementViolation]) -> String {
    if violations.is_empty() {
        return "the floors cannot be met jointly".to_string();
    }
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("this operation needs a linear model (every curve two samples)")]
    NonLinearModel,
    #[error("unsupported shape {n}x{m}: expected {expected}")]
    UnsupportedShape {
        n: usize,
        m: usize,
        expected: &'static str,
    },
    #[error("machine {machine}, vnf {vnf}: rate must be positive")]
    NonPositiveRate { machine: usize, vnf: usize },
    #[error("vnf {vnf} has zero total capacity, so the objective is -inf everywhere")]
    ZeroColumn { vnf: usize },
    #[error("machine {machine} has zero rate for both vnfs; the ratio is undefined")]
    UndefinedComparison { machine: usize },
    #[error("this operation needs a {0} utility")]
    WrongUtility(&'static str),
    #[error("infeasible requirements: {}", join_violations(.0))]
    Infeasible(Vec<RequirementViolation>),
    #[error("objective is unbounded or the pivot limit was hit")]
    Unbounded,
    #[error("grid of {points} points exceeds the budget of {max_points}")]
    GridTooLarge { points: u128, max_points: u64 },
    #[error("grid step {step} must divide 1 within 1e-12 and lie in (0, 0.5]")]
    BadGridStep { step: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

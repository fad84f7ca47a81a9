use thiserror::Error;

use crate::model::VarKey;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubproblemError {
    #[error("job {job} demand {demand} exceeds capacity {capacity}; tardiness subproblems require c <= C")]
    DemandExceedsCapacity { job: usize, demand: i64, capacity: i64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MasterError {
    #[error("job {0} cannot be assigned to any facility")]
    Unassignable(usize),
    #[error("cut references variable {0} which the model does not declare")]
    UnknownVariable(VarKey),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CutError {
    #[error("analytic deadline cut requires zero release times; job {0} has a positive release")]
    NonzeroRelease(usize),
    #[error("analytic release cut requires inactive deadlines; job {0} has a binding deadline")]
    ActiveDeadline(usize),
    #[error("facility {0} is feasible; no feasibility cut applies")]
    FeasibleFacility(usize),
    #[error("facility {0} has no optimal subproblem value")]
    NoOptimum(usize),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("objective {0} is not supported by this procedure")]
    WrongObjective(crate::model::Objective),
    #[error(transparent)]
    Subproblem(#[from] SubproblemError),
    #[error(transparent)]
    Master(#[from] MasterError),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Subproblem(#[from] SubproblemError),
}

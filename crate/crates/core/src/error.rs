//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("multiplication table is not a Latin square (row {row}, col {col})")]
    NotLatinSquare { row: usize, col: usize },
    #[error("associativity fails at ({a}, {b}, {c})")]
    NonAssociative { a: usize, b: usize, c: usize },
    #[error("permutation closure exceeds cap {cap}")]
    ClosureTooLarge { cap: usize },
    #[error("operands belong to different groups")]
    GroupMismatch,
    #[error("bad group descriptor: {0}")]
    BadDescriptor(String),
    #[error("operation requires a non-empty set")]
    EmptySet,
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("measure has negative weights")]
    NegativeMeasure,
    #[error("Lp exponent must be >= 1")]
    BadExponent,
    #[error("step index {i} out of range (r = {r})")]
    StepOutOfRange { i: usize, r: usize },
    #[error("element {x} is not in level {i} of the system")]
    NotInNextLevel { x: usize, i: usize },
    #[error("truncation indices out of range")]
    BadIndices,
    #[error("truncation tail is not contained in B_{{m+1}}")]
    TailNotContained,
    #[error("truncation tail is not a symmetric neighbourhood of the identity")]
    TailNotSymmetric,
    #[error("gluing condition violated: B'_{{0+}} is not contained in the tail")]
    GlueConditionViolated,
    #[error("group is not abelian")]
    NotAbelian,
    #[error("pigeonhole scan exhausted (l > {max_l})")]
    PigeonholeExhausted { max_l: usize },
    #[error("chain entry {index} is not a subgroup")]
    NotSubgroup { index: usize },
    #[error("chain entries are not nested")]
    NotNested,
    #[error("set is not a symmetric neighbourhood of the identity")]
    NotSymmetricNeighbourhood,
    #[error("certification retries exhausted after {tries} attempts")]
    RetriesExhausted { tries: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("L2 increment hypothesis fails on recomputation: defect {measured:.3e} < {required:.3e}")]
    HypothesisNotMet { measured: f64, required: f64 },
    #[error("{what}: measured {measured:.6e} below asserted bound {bound:.6e}")]
    SlackViolated {
        what: String,
        measured: f64,
        bound: f64,
    },
    #[error("required inclusion violated: {0}")]
    InclusionViolated(String),
    #[error("set does not have distinct squares")]
    DistinctSquaresViolated,
    #[error("anchor count bound violated: hit count {hits} below {bound}")]
    BoundViolated { hits: usize, bound: usize },
    #[error("equalised set S has measure {measured:.4} < 1/2 in A")]
    SBelowHalf { measured: f64 },
    #[error("neither norm bound holds in the U2 dichotomy (left {left:.3e}, right {right:.3e}, threshold {threshold:.3e})")]
    DichotomyFailed {
        left: f64,
        right: f64,
        threshold: f64,
    },
    #[error("W is empty; the count step has no mass to work with")]
    EmptyW,
    #[error("group order {order} exceeds cap {cap}")]
    CapExceeded { order: usize, cap: usize },
    #[error("certificate check failed: {0}")]
    CertificateInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

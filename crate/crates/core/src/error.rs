use thiserror::Error;

/// Errors raised while constructing or evaluating quasi-Einstein specifications.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("xi = {xi} lies outside the domain ({lo}, {hi}) of profile `{profile}`")]
    OutsideDomain {
        profile: String,
        xi: f64,
        lo: f64,
        hi: f64,
    },

    #[error("conformal factor vanishes at xi = {xi}")]
    SingularConformalFactor { xi: f64 },

    #[error("warping function must be positive, got f = {value} at xi = {xi}")]
    InvalidWarping { xi: f64, value: f64 },

    #[error("potential must be positive, got h = {value} at xi = {xi}")]
    InvalidPotential { xi: f64, value: f64 },

    #[error("no real branch: discriminant {discriminant} < 0")]
    NoRealBranch { discriminant: f64 },

    #[error("degenerate exponent: a - rN = {slope} vanishes")]
    DegenerateExponent { slope: f64 },

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("complex exponent: C = {c} < 0")]
    ComplexExponent { c: f64 },

    #[error("near-singular denominator {denominator} at z = {z}")]
    NearSingularity { z: f64, denominator: f64 },

    #[error("integration failed at xi = {xi}: {reason}")]
    IntegrationFailure { xi: f64, reason: String },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("assembly rejected: certified mu = {certified:e}, fiber constant = {supplied:e}, mismatch = {mismatch:e}")]
    AssemblyRejected {
        certified: f64,
        supplied: f64,
        mismatch: f64,
    },

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

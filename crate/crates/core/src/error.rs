// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised across the compiler, simulator and trap-physics modules.
///
/// Numeric payloads are carried as f64 regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("dimension mismatch: {what} ({left} vs {right})")]
    DimensionMismatch { what: &'static str, left: usize, right: usize },

    #[error("state space of dimension {dim} exceeds the dense limit {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("invalid gradient profile: {0}")]
    InvalidProfile(String),

    #[error("phase of bond ({i},{j}) is {ratio} pi, not an integer multiple of pi")]
    NonIntegerPhase { i: usize, j: usize, ratio: f64 },

    #[error("gradient cannot separate bonds: phase {phase}pi needs both beta={first} and beta={second}")]
    ConflictingConstraint { phase: i64, first: f64, second: f64 },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("no filter with at most {max_terms} terms meets tolerance {tol:e}; best residual {best_residual:e}")]
    FitFailure { max_terms: usize, tol: f64, best_residual: f64 },

    #[error("central gradient pulse would be negative ({tau_prime:e} s); W={w} too large for {l} pulses")]
    NegativeCentralPulse { w: f64, l: usize, tau_prime: f64 },

    #[error("compiled sequence gives beta={beta} at phase {phase}pi but the filter gives {expected}")]
    SelfVerification { phase: i64, beta: f64, expected: f64 },

    #[error("malformed sequence: {0}")]
    MalformedSequence(String),

    #[error("target coupling matrix is identically zero")]
    ZeroTarget,

    #[error("sequences have different cycle durations ({0:e} s vs {1:e} s)")]
    MismatchedCycles(f64, f64),

    #[error("invalid trap configuration: {0}")]
    InvalidTrap(String),

    #[error("zigzag instability: transverse mode {mode} has omega^2 = {omega_sq:e}")]
    Unstable { mode: usize, omega_sq: f64 },

    #[error("beat note at {mu:e} rad/s lies within {floor:e} rad/s of mode {mode}")]
    Resonance { mu: f64, mode: usize, floor: f64 },

    #[error("detuning ordering violated: {0}")]
    DetuningOrder(String),

    #[error("coupling for bond ({i},{j}) is not positive: {value:e}")]
    NonPositiveCoupling { i: usize, j: usize, value: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

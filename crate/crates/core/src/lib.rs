//! Rate-memory tradeoff toolkit for the coded caching broadcast problem:
//! closed-form lower bounds and achievable envelopes, gap-ratio scans that
//! reproduce the 2.315 (worst-case) and 2.507 (average-case) multiplicative
//! gap constants, an exact entropy kit that verifies the converse lemmas on
//! concrete schemes, a bit-exact placement/delivery simulator, and an exact
//! rational entropy LP for machine-checked converses on tiny instances.

pub mod bounds;
pub mod gap;
pub mod info;
pub mod lp;
pub mod scheme;
pub mod types;
pub mod verify;

pub use types::{
    CornerKind, CornerLadder, DemandVector, Memory, PiecewiseCurve, ProblemSize, Rate,
};

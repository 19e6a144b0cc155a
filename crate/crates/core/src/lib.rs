//! Invariant measures of weighted 2-valued interval transformations.
//!
//! The transformation `S = S1 ∪ S2` with parameter `a ∈ (0, 1/2]` acts on
//! `[0, 1]`; an equipment `α1` chooses the branch. This crate computes the
//! pushforward of an absolutely continuous measure with step density `p`,
//! checks the invariance conditions exactly, builds explicit invariant
//! families and cross-checks them by simulation.

pub mod criterion;
pub mod error;
pub mod expansion;
pub mod families;
pub mod numerics;
pub mod piecewise;
pub mod simulate;
pub mod system;

pub use error::{Error, Result};
pub use numerics::{Backend, Interval, QuadSurd, Scalar};
pub use piecewise::StepFunction;
pub use system::{Branch, EquippedSystem};

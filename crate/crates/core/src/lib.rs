//! Infinite extensive-form games as parametric rational trees.
//!
//! A [`CoSystem`] is a finite set of equations `name(n) = term`, where terms
//! refer to other equations at `n + k` and leaf payoffs are affine in `n`.
//! The tree it denotes is the infinite unfolding from the root.

pub mod coterm;
pub mod dsl;
pub mod equilibria;
pub mod error;
pub mod families;
pub mod histories;
pub mod oracle;
pub mod semantics;
pub mod verdict;

pub use coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef, UtilityFun};
pub use error::{Error, Result, ValidationError};
pub use verdict::{Evidence, Outcome, Verdict};

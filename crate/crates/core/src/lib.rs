//! Model checking for resource agent logic (RAL) over resource-bounded
//! models with a single shared, unbounded resource.
//!
//! The checker reduces a cooperation formula to CTL over a compact
//! alternating Büchi pushdown system whose stack counts the shared
//! endowment in unary, expands it to a plain alternating Büchi pushdown
//! system, and computes the accepted configurations as an alternating
//! word automaton by saturation. The [`oracle`] module provides an
//! independent bounded-game evaluator used to cross-check every stage.

pub mod automata;
pub mod cli;
pub mod ctl;
mod error;
pub mod model;
pub mod oracle;
pub mod pushdown;
pub mod ral;
pub mod saturation;

pub use error::{Error, Result};

/// The implicit stack-bottom symbol.
pub const BOTTOM: char = '#';
/// The unary resource token.
pub const TOKEN: char = '|';

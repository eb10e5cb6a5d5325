//! A workbench for the combinatorial structure of Latin squares.
//!
//! The crate is organised around a small set of validated core types
//! ([`model`]), counting routines for 2×2 subsquares — *intercalates* —
//! and general subsquares ([`intercalates`]), the local surgery operations
//! that add or remove intercalates ([`switchings`]), a uniform sampler
//! based on the ±1 incidence-cube chain ([`sampler`]), brute-force ground
//! truth for small orders ([`oracle`]), permanent and discrepancy bounds
//! ([`bounds`]), and the experiment layer behind the `latinlab` binary
//! ([`harness`]).
//!
//! Rows, columns and symbols are 0-based everywhere inside the library.
//! The text and JSON interchange formats are 1-based; conversion happens
//! only at the serialization boundary in [`model`].
//!
//! Most runnable entry points live under `examples/`; each example
//! exercises one capability end to end and prints what it verifies.

pub mod bounds;
pub mod harness;
pub mod intercalates;
pub mod model;
pub mod oracle;
pub mod sampler;
pub mod switchings;

pub use model::{LatinRectangle, LatinSquare};

use std::fmt;

/// A search, enumeration or sampling run exceeded its node budget.
///
/// Budgets count elementary units of work (backtracking nodes, chain moves,
/// candidate tuples) so that exploratory calls fail predictably instead of
/// running away. The default budget for backtracking searches is
/// [`DEFAULT_NODE_BUDGET`]; the `LATINLAB_BUDGET` environment variable and
/// per-call arguments override it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceError {
    /// Which budget was exhausted, e.g. `"subsquare backtracking nodes"`.
    pub task: &'static str,
    /// The configured limit that was hit.
    pub budget: u64,
}

impl fmt::Display for ResourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "budget of {} exhausted for {}", self.budget, self.task)
    }
}

impl std::error::Error for ResourceError {}

/// Default node budget for backtracking searches.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Resolves a node budget: an explicit override wins, otherwise the
/// `LATINLAB_BUDGET` environment variable, otherwise [`DEFAULT_NODE_BUDGET`].
pub fn resolve_budget(explicit: Option<u64>) -> u64 {
    if let Some(b) = explicit {
        return b;
    }
    if let Ok(s) = std::env::var("LATINLAB_BUDGET") {
        if let Ok(b) = s.trim().parse::<u64>() {
            return b;
        }
    }
    DEFAULT_NODE_BUDGET
}

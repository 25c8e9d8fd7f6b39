//! Soft type assignment with booleans.
//!
//! Terms, type derivations with their weights, a big-step and a small-step
//! abstract machine with space accounting, and an encoding of alternating
//! Turing machines as typed terms.

pub mod atm;
pub mod corpus;
pub mod machine;
pub mod report;
pub mod syntax;
pub mod types;

pub use syntax::{Fresh, Name, Term, TermKind};

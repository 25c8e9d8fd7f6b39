//! Small machines used by the tests and the command line examples.

use super::spec::AtmSpec;

pub const ALWAYS_ACCEPT: &str = include_str!("../../machines/always_accept.toml");
pub const CONTAINS_ONE: &str = include_str!("../../machines/contains_one.toml");
pub const ZERO_THEN_ONE: &str = include_str!("../../machines/zero_then_one.toml");

pub fn always_accept() -> AtmSpec {
    AtmSpec::from_toml(ALWAYS_ACCEPT).unwrap()
}

/// Existential: accepts iff a 1 is found within the time bound.
pub fn contains_one() -> AtmSpec {
    AtmSpec::from_toml(CONTAINS_ONE).unwrap()
}

/// Universal root over two existential-style checks.
pub fn zero_then_one() -> AtmSpec {
    AtmSpec::from_toml(ZERO_THEN_ONE).unwrap()
}

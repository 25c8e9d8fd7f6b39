//! Compilation of polynomial-time alternating machines into typed terms.

mod compile;
mod encode;
pub mod machines;
mod oracle;
mod spec;
pub mod sugar;

pub use compile::{alpha, alpha3, compile, CompileError, Combinators, Compiled};
pub use encode::{
    bool_string, church, church_aterm, church_value, connectives, string_aterm, string_value, Library, Poly,
};
pub use oracle::{atm_oracle, atm_oracle_strict, FuelExhausted, MachineState};
pub use spec::{show_code, Action, AtmSpec, Code, Kind, Move, SpecError};

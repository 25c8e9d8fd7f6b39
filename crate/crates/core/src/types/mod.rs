//! Types, typing derivations and the operations on them.

mod derivation;
mod elab;
mod io;
mod sysf;
mod rewrite;
mod ty;

pub use derivation::{
    conclude, contexts_alpha_eq, show_context, Context, Derivation, Payload, Rule, Shape, TypeError,
};
pub use ty::{fresh_tyvar, parse_type, Type, TypeParseError};
pub use rewrite::{
    freshen_forall_binders, generation_bang, generation_lambda, lift_var, map_types, rename_var,
    strengthen, subject_reduce, subst_derivation, subst_tyvar, weaken_all, weaken_any, NameSupply,
};
pub use elab::{ATerm, ElabError, Elaborator};
pub use sysf::{check_simulation, translate_position, translate_term, translate_type, FType, SimulationError, SIMULATION_FUEL};
pub use io::{from_records, read_jsonl, to_records, write_jsonl, DerivationFileError, NodeRecord, PayloadRecord};

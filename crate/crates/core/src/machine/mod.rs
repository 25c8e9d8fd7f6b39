//! Abstract machines evaluating programs of boolean type.

mod big;
mod context;
mod small;

pub use big::{
    check_weakening, computation_tree, eval_big, eval_from, eval_observed, space, ComputationStats,
    ComputationTree, Configuration, CsvTrace, MachineError, MachineRule, Observer, PathCounts, View,
};
pub use context::{BContext, Frame, MContext};
pub use small::{
    program_supply, run_small, run_small_observed, small_step, small_trace, translate_bigstep, SmallConfig,
    SmallStep,
};

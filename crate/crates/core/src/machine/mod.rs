//! The multi-stack abstract machine.

mod config;
mod memory;
mod render;
mod run;
mod supplier;

pub use config::{memory_from_json, ConfigError};
pub use memory::{render_stack, Memory, PopError};
pub use render::{
    column_order, describe_outcome, memory_to_json, render_table, render_trace, trace_to_json,
};
pub use run::{
    run, run_composed_check, run_quiet, MachineState, Outcome, StepResult, StuckReason, Summary,
    Trace, Transition, DEFAULT_FUEL,
};
pub use supplier::{church, ChoicePolicy, Sample, Supplier};

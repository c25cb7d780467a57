//! Terms, binding, substitution and the concrete syntax.

mod context;
mod parse;
mod print;
mod subst;
mod term;

pub use context::HeadContext;
pub use parse::{parse, parse_with, Features, ParseError, ParseOptions};
pub use print::print;
pub(crate) use print::write_action;
pub use subst::{
    alpha_eq, canonical, compose, free_vars, fresh_name, locations, occurs_free, rename, substitute,
};
pub use term::{Constant, Location, Name, Path, Prim, Step, Term, MAIN};

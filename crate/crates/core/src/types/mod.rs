//! Simple types over location-indexed vector families, the checker, and the
//! type algebra.

mod algebra;
mod check;
mod parse;
mod semantics;
mod ty;

pub use algebra::{bottom, expand, singleton, slice, type_compose, type_eq};
pub use check::{
    check, check_with, find_type, is_typeable, prim_type, validate, CheckOptions, Derivation, Rule,
    TypeError, TypingContext,
};
pub use parse::{parse_type, parse_vector, TypeParseError};
pub use semantics::{run_set_member, run_set_member_depth};
pub use ty::{Arrow, FmcType, Type, TypeVector, VectorFamily};

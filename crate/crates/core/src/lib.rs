//! The Functional Machine Calculus: terms, the multi-stack machine,
//! rewriting, simple types and encodings of effectful source calculi.

pub mod encodings;
pub mod enumerate;
pub mod machine;
pub mod reduction;
pub mod syntax;
pub mod types;

pub use syntax::{alpha_eq, compose, parse, print, substitute, Location, Name, Term};

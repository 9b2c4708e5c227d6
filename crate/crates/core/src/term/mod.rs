//! Term syntax: the AST, the DSL parser and the canonical printer.
//!
//! Every term over the truncated or unital generators denotes a
//! cylinder-measurable function of its variables. This holds by
//! construction and is not checked at runtime.

mod ast;
mod parse;
mod print;
pub mod random;

pub use ast::{
    Derived, Direction, IndexExpr, IndexSet, Schema, Signature, Term, VarIndex,
    DEFAULT_STABILIZATION_HINT,
};
pub use parse::{parse, ParseError, Pos};

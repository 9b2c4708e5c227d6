// Errors carry the exact rationals involved.
#![allow(clippy::result_large_err)]

pub mod arith;
pub mod certify;
pub mod equality;
pub mod eval;
pub mod models;
pub mod synthesis;
pub mod term;
pub mod witness;

pub use arith::{Interval, PiecewiseAffine, Rational};
pub use certify::{infer_bound, BoundCertificate};
pub use equality::{free_eq, FreeEq, FreeEqError};
pub use eval::{eval, eval_traced, EvalError, Point};
pub use models::{check_identity, IdentityId, IdentityReport, Model, ModelSchema};
pub use term::{parse, Signature, Term};

//! Exact numeric substrate: rationals, intervals, piecewise-affine sequences.
//!
//! Nothing here rounds. Suprema over the naturals are computed in closed form.

mod interval;
mod pwa;
mod rational;

pub use interval::{Interval, InvertedInterval};
pub use pwa::{pwa_sup_capped, sup_affine_capped, Affine, PiecewiseAffine, PwaError};
pub use rational::{Rational, RationalParseError};

pub(crate) use rational::trailing_twos;

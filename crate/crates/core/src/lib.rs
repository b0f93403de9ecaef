#![allow(clippy::needless_range_loop)]

pub mod bracket;
pub mod constraints;
pub mod covariant;
pub mod error;
pub mod form;
pub mod geometry;
pub mod harness;
pub mod identities;
pub mod io;
pub mod random;
pub mod scalar;
pub mod star;

pub use error::{Error, Result};
pub use form::{Shape, TensorValuedForm};
pub use geometry::{ChartGeometry, Connection, Mode, SpecialChartSpec};
pub use scalar::{parse_scalar, Rational, ScalarExpr};

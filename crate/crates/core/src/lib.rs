//! Finite-resolution laboratory for induced hyperspace dynamics.
//!
//! Two concrete flows are modelled: the substitution subshift generated by
//! `0 -> 0110, 1 -> 1001` and the skew product `T(x, y) = (x + alpha, x + y)`
//! on the two-torus. On top of them the crate provides the Hausdorff
//! hyperspace, the action of the four minimal idempotents of the subshift,
//! prolongations along certified time sequences, recurrence and proximality
//! reports, and a scenario harness that writes reproducible run records.

mod bits;
pub mod error;
pub mod harness;
pub mod hyperspace;
pub mod limits;
pub mod spaces;
pub mod symbolic;
pub mod torus;

pub use error::{Error, Result};
pub use hyperspace::{BallCover, FiniteClosedSet};
pub use spaces::{MetricValue, Point, SymbolicPoint, SystemSpec};
pub use symbolic::{Base, IdempotentTable, Substitution};
pub use torus::{Circle, SkewSystem, TorusPoint};

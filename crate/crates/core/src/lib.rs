//! Conflict-tree size analysis for Conflict-Based Search on grid maps.
//!
//! - [`model`]: grids, scenarios, instances, paths and BFS distances.
//! - [`mdd`]: multi-valued decision diagrams and their size bounds.
//! - [`recurrence`]: the CT-size recurrence `T(r, s)`, exact and in log space.
//! - [`genfunc`]: its generating function, critical points and asymptotics.
//! - [`bounds`]: closed-form upper bounds and their comparison.
//! - [`cbs`]: a reference CBS solver and an empirical bound check.

pub mod bounds;
pub mod cbs;
pub mod genfunc;
pub mod magnitude;
pub mod mdd;
pub mod model;
pub mod recurrence;

pub use bounds::{compare, BoundError, BoundInputs, BoundReport, EdgeMode, Objective};
pub use cbs::{solve, validate, Constraint, Solution, SolveConfig, SolveError, SolveStats, Splitting};
pub use genfunc::{Contribution, CriticalPoint, GenFuncError};
pub use magnitude::{BigCount, Log2Value};
pub use mdd::{build_mdd, Mdd, MddError, MddSize};
pub use model::{Cell, GridMap, Instance, ModelError, Path};
pub use recurrence::{eval_exact, eval_log, RecurrenceError};

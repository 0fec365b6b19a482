//! Desk-scale compact C*-dynamical systems and their multiple recurrence.
//!
//! The algebras are finite direct sums of matrix algebras, semigroups are
//! discrete with counting measure, and every limit statement is reported as
//! evidence over finite Folner windows.

pub mod algebra;
pub mod compactness;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod recurrence;
pub mod sample;
pub mod semigroup;

pub use algebra::{AlgebraElement, BlockShape, TraceState, C64};
pub use dynamics::{verify_system, DynamicalSystem, VerificationReport};
pub use error::{Error, Hypothesis, Result};
pub use recurrence::{RecurrenceQuery, RecurrenceSet, Syndeticity};
pub use semigroup::{Element, FolnerWindow, MeasureSemigroup, SemigroupKind};

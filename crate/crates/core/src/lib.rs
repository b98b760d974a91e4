//! Computable topological dynamics.
//!
//! The crate materializes a small catalog of compact dynamical systems
//! (irrational rotations, full shifts, Sturmian and Toeplitz subshifts,
//! odometers, products, collapse quotients, natural extensions) together
//! with engines that compute finite-horizon sensitivity time sets
//! S_T(U, δ) and their complements J_T(U, δ), certify combinatorial
//! properties of subsets of ℕ (thick, syndetic, Δ, IP), test points for
//! (syndetic) equicontinuity, and probe proximality and the regionally
//! proximal relation along single orbits.
//!
//! Everything is evidence-first: a verdict is either an exact statement
//! about a finite horizon (when the system supports exact set diameters),
//! a certificate that re-validates from the data embedded in it, or an
//! explicitly scale-stamped "no witness found up to N". No engine claims
//! to decide an infinite-horizon property.
//!
//! Determinism contract: all operations are pure functions of their
//! inputs (plus an explicit seed where sampling is involved) and produce
//! bit-identical results regardless of thread schedule.

pub mod angle;
pub mod error;
pub mod point;
pub mod relations;
pub mod report;
pub mod sensitivity;
pub mod space;
pub mod systems;
pub mod timeset;

pub use error::{Error, Result};
pub use point::PointRef;
pub use space::{Membership, OpenSetDescriptor, System, SystemFlags};
pub use timeset::{SetCertificate, TimeSet, TimeSetMode};

/// Distance values as handed to callers. Every exact engine in the
/// catalog emits dyadics or small rationals that round-trip through f64;
/// exact comparisons happen upstream in integer arithmetic.
pub type Dist = f64;

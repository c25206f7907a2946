//! The projected body `C`, the fiber volumes `V(y)`, the scaling constant
//! `c = (l |C|)^{1/p}` and the counting profiles `m_{k,n}(y)`.
//!
//! Volumes are exact rationals in every dimension (Lasserre's recursion on
//! an irredundant half-space description); only `∫_C V` for `p >= 3` is
//! estimated by Monte Carlo.

pub mod body;
pub mod halfspace;
pub mod lp;
pub mod scalar;

pub use body::{profile_csv, Geometry, GeometryReport, IntegralEstimate, ProfileRow};
pub use halfspace::{Constraint, HalfSpaces};
pub use lp::{maximize, LpOutcome};

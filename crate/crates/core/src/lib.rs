//! Group-theoretic analysis and simulation of stationary symmetric
//! α-stable random fields on `Z^d` whose translation action has a
//! nontrivial kernel.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: exact algebra of `Z^d / K` (Smith normal form, the group
//!   `(H, ⊕)`, the norm `N`, `H_n` and the counts `m(t, n)`).
//! * [`geometry`]: the projected body `C`, fiber volumes `V(y)`, the scaling
//!   constant `c = (l |C|)^{1/p}` and the counting profiles.
//! * [`stable`]: SαS sampling, LePage series fields and partial maxima.
//! * [`process`]: normalized empirical random measures, the limit random
//!   measure and Laplace functional comparisons.

pub mod error;
pub mod geometry;
pub mod lattice;
pub mod process;
pub mod quad;
pub mod rng;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::Geometry;
pub use lattice::{GroupSpec, HElement, QuotientStructure};

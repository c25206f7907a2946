//! Exact integer computations for the kernel lattice `K ⊆ Z^d`: Smith normal
//! form, the splitting `Z^d / K ≅ F ⊕ N`, the group `(H, ⊕)`, the norm `N`,
//! the balls `H_n` and the coset counts `m(t, n)`.

pub mod matrix;
pub mod quotient;
pub mod smith;

pub use matrix::{Basis, IntMatrix, RatMatrix};
pub use quotient::{box_size, CosetCoords, GroupSpec, HElement, QuotientStructure, QuotientSummary};
pub use smith::{smith_normal_form, SmithDecomposition};

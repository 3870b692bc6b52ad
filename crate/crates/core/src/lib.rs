//! Heisenberg groups and Weil representations of finite abelian groups.
//!
//! The crate builds, for any finite abelian group `A`, the Weyl operators on
//! `L^2(A)` and the phase space `K = A x A^`; validates centre-fixing
//! automorphisms of the associated Heisenberg group as exact phase/table
//! pairs; constructs the unitary Weil operator attached to each automorphism
//! and its projective cocycle; decomposes the commutant of any subgroup of
//! such automorphisms by orbit propagation with exact phases; and works out
//! the full symplectic example over `(Z/p^n)^g` (delta-operator algebra,
//! invariant subspace chain, dimension and level tables).
//!
//! Phase bookkeeping is exact (reduced fractions in `Q/Z`); floating point
//! appears only in dense operator entries, with max-norm tolerances scaled
//! as `1e-9 * |A|`.

pub mod abelian;
pub mod automorphism;
pub mod decomposition;
pub mod error;
pub mod heisenberg;
mod linalg;
mod modsolve;
pub mod spexample;
pub mod weil;

pub use abelian::{DualElement, FiniteAbelianGroup, GroupElement, UnitPhase};
pub use automorphism::{
    closure, closure_automorphisms, closure_k_automorphisms, closure_matrices, from_symplectic,
    lift, orbits, symplectic_generators, AutomorphismRecord, CentreFixingAutomorphism,
    KAutomorphism, SymplecticMatrix, DEFAULT_CLOSURE_BOUND,
};
pub use error::{Error, Result};
pub use heisenberg::{operator_tol, Heisenberg, Operator, PhasePoint, PhaseSpace, WeylExpansion};

//! Exact computations around the arithmetic lattice
//!
//! ```text
//! Γ_n = { g ∈ SL_n(Z[⁴√2]) : τ(gᵀ) D_n g = D_n },   D_n = diag(−1, √2, …, √2)
//! ```
//!
//! where `τ` is the field automorphism `⁴√2 ↦ −⁴√2` of `L = Q[⁴√2]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`qfield`]: the field `L`, its ring of integers, Galois maps, real
//!   embeddings and the unit group generated by `u₀`.
//! * [`modring`]: the finite rings `Z[x]/(x⁴−2, m)`, square tables, power
//!   orbits and linear algebra over `Z/m`.
//! * [`linalg`]: exact dense matrices over `L`.
//! * [`lattice`]: membership in `Γ_n`, the flat and block subgroups,
//!   congruence reduction, distances and bounded enumeration.
//! * [`intersection`]: the linear system `a·t = γtγ⁻¹·a, a·u = u·a`, its
//!   solutions over `L` and `Z/m`, orientation and the sign pipeline.
//! * [`liealg`]: rational `sl_n` computations: Cartan pieces, wedge powers
//!   of `𝔭` and invariant forms.
//!
//! Every verification outcome that is meant for a human or a script is
//! packaged as a [`report::Report`].

pub mod error;
pub mod intersection;
pub mod lattice;
pub mod liealg;
pub mod linalg;
pub mod modring;
pub mod qfield;
pub mod report;

pub use error::{Error, Result};
pub use linalg::FieldMatrix;
pub use qfield::{Embedding, FieldElement, RingElement};

/// Exact rational numbers used throughout.
pub type Q = num_rational::BigRational;

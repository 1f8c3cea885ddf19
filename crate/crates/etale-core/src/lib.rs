//! Cohomology of constructible sheaves of Z/n-modules on curves over finite
//! fields, computed through finite quotients of the fundamental group.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: integer helpers (gcd, Bezout, unit normalisation mod n).
//! - [`mat`]: matrices over Z/n, Howell normal form, linear solving.
//! - [`module`]: finitely presented Z/n-modules, maps, tensor, hom, invariants.
//! - [`group`]: finite groups (tables, presentations), subgroups, G-modules.
//! - [`gcoh`]: group cohomology in low degrees (crossed homomorphisms, bar
//!   complex, restriction, inflation sections, cup products).
//! - [`complex`]: bounded cochain complexes, cones, shifts, total complexes.
//! - [`field`]: towers of finite fields with recorded embeddings and
//!   univariate polynomial arithmetic over them.
//! - [`curve`]: function fields, divisors, torsion, pairings.
//! - [`cover`]: Kummer covers, their automorphism groups, inertia, and the
//!   conjugation action of Frobenius.
//! - [`sheaf`]: constructible sheaves glued from lisse data and stalks.
//! - [`rgamma`]: the assemblers producing explicit complexes for RGamma,
//!   Galois actions on them, Gysin maps and cup products.
//!
//! Everything is deterministic: all choices (basis orderings, coset
//! representatives, roots, irreducible polynomials) are made by documented
//! tie-breaking rules, so identical inputs give identical outputs.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod arith;
pub mod complex;
pub mod cover;
pub mod curve;
pub mod error;
pub mod field;
pub mod gcoh;
pub mod group;
pub mod mat;
pub mod module;
pub mod rgamma;
pub mod sheaf;

pub use error::{Error, Result};

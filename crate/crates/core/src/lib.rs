//! Finite circle geometries (Möbius, Laguerre and Minkowski planes) built
//! from quadratic sets in PG(3,q) and from their algebraic models, with exact
//! association-scheme verification and exact searches for intersecting
//! families of circles and of low-degree polynomials.

#![allow(clippy::needless_range_loop)]

pub mod bits;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod gf;
pub mod pg;
pub mod polyfam;
pub mod quadset;
pub mod scheme;
pub mod search;

pub use error::{Error, Result};

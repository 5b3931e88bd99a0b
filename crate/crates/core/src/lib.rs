//! Exact computation of disc potentials for toric Calabi-Yau mirrors.
//!
//! The crate is organized bottom-up: [`series`] is the truncated series ring,
//! [`toric`] holds lattice data and curve classes, [`mirror_map`] the
//! hypergeometric series and their inversion, [`slab`] the mirror slab
//! function, [`solver`] the Newton solver and potentials, [`special`] the
//! infinite-product and theta-type mirrors, and [`corpus`] the stored
//! reference tables with the comparison harness.

pub mod error;
pub mod series;
pub mod toric;
pub mod mirror_map;
pub mod slab;
pub mod solver;
pub mod special;
pub mod geometry;
pub mod corpus;

pub use error::{Error, Result};
pub use geometry::Geometry;
pub use series::{Rational, Ring, TruncatedSeries, Truncation, VariableSpec};

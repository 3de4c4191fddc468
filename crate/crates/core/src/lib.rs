#![no_std]
//! Finite-dimensional ordered spaces, span norms and lattice constructions on
//! grids and matrix semigroups.

extern crate alloc;

pub mod error;
pub mod extrapolation;
pub mod linalg;
pub mod lp;
pub mod ordered_space;
pub mod sobolev_grid;
pub mod span_lattice;

pub use error::{Error, Result};

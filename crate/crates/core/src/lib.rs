//! Equivalence generators, prolongation and determining equations for the
//! balance laws of simple nonpolar continuum media.

pub mod catalog;
pub mod cli;
pub mod deteq;
pub mod dsl;
pub mod error;
pub mod jetspace;
pub mod liegen;
pub mod linalg;
pub mod report;
pub mod symcore;
pub mod system;

pub use error::{Error, Result};

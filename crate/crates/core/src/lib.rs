//! Finite-dimensional Hilbert renormings of subhomogeneous Banach bundles.

pub mod bundle;
pub mod error;
pub mod geometry;
pub mod hyperspace;
pub mod json;
pub mod linalg;
pub mod loewner;
pub mod lp;
pub mod qp;
pub mod renorming;
pub mod seminorm;

pub use error::{Error, Result};

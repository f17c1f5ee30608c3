//! Exact-arithmetic and numerical verification toolkit for isoparametric
//! hypersurfaces in the products of a sphere or hyperbolic space with a
//! Euclidean factor.

pub mod coeff;
pub mod error;
pub mod geometry;
pub mod jacobi;
pub mod kac;
pub mod matrix;
pub mod poly;
pub mod quadext;

pub use error::{Error, Result};

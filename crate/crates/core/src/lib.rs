//! Discretization of integral norms of multivariate trigonometric polynomials
//! with frequencies in step hyperbolic crosses.

pub mod cli;
pub mod error;
pub mod grids;
pub mod indexset;
pub mod korobov;
pub mod linalg;
pub mod montecarlo;
pub mod pointset;
pub mod polynomial;
pub mod rng;
pub mod sparsify;
pub mod wavelet;

pub use error::{Error, Result};
pub use indexset::IndexSet;
pub use pointset::PointSet;
pub use polynomial::TrigPolynomial;

//! Dense linear-algebra and clustering primitives.

mod decomp;
mod kmeans;
mod matrix;

pub use decomp::{cholesky, solve_linear, sym_eigen, top_k_eigenpairs, LuFactor};
pub use kmeans::{kmeans, KmeansFit};
pub use matrix::{EigenPairs, Matrix};

//! Scalars, dense polynomials, matrices and the linear-algebra kernels that
//! every other module builds on.

pub mod dd;
pub mod linalg;
pub mod matrix;
pub mod poly;
pub mod scalar;

pub use linalg::{kernel_basis, rank, solve_linear, DEFAULT_RANK_TOL};
pub use matrix::Matrix;
pub use poly::{wronskian, UniPoly};
pub use scalar::{parse_rational, rat, Scalar, C64, Q};

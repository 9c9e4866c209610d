//! Scalar and small dense kernels shared by the rest of the crate.

pub mod bessel;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod roots;

pub use bessel::{bessel_j, bessel_j_prime, bessel_y, bessel_y_prime};
pub use linalg::{null_vector, Matrix};
pub use poly::{poly_roots, Polynomial};
pub use roots::{bisect, fd_derivative, find_root};

//! Fourier-mode model problem for partitioned fluid-structure coupling.
//!
//! The crate covers the acoustic solid on a 1D lattice, the AMP, TP,
//! iterated-TP and ATP interface closures, a normal-mode stability analyzer
//! for those closures, and exact polar solutions used as reference data.

pub mod cli;
pub mod csvfmt;
pub mod error;
pub mod mode_coupler;
pub mod numerics;
pub mod oracles;
pub mod solid_lattice;
pub mod stability;

pub use error::{Error, Result};
pub use num_complex::Complex64;

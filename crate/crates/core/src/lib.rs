//! Exact finite-N expected spectral statistics of noncommutative polynomials
//! in the six classical random-matrix ensembles, their 1/N asymptotic
//! expansions, the polynomial-inequality toolkit behind them, and
//! reproducible Monte Carlo verification at desk scale.
//!
//! The Gaussian ensembles (GUE/GOE/GSE) are handled by an exact genus
//! expansion over Wick gluings; the compact groups (U/O/Sp) by exact
//! Weingarten calculus with rational-function reconstruction. Everything on
//! the exact side is arbitrary-precision rational arithmetic; the sampling
//! side is plain f64.

pub mod cheb;
pub mod error;
pub mod expansion;
pub mod genus;
pub mod interp;
pub mod linalg;
pub mod ncpoly;
pub mod poly;
pub mod rat;
pub mod rng;
pub mod sampler;
pub mod testfn;
pub mod weingarten;

pub use error::{Error, Result};
pub use poly::Poly;
pub use rat::{CRat, Rat};

//! Spectral solver for the two-dimensional time-fractional subdiffusion
//! equation on the unit square.
//!
//! The spatial discretization is a Petrov-Galerkin method with interior
//! Bernstein polynomials as trial functions and compact combinations of
//! dual Bernstein polynomials as test functions; biorthogonality makes the
//! mass matrix tridiagonal and the stiffness matrix seven-diagonal. Time
//! is discretized with the L1 approximation of the Caputo derivative of
//! order alpha in (0, 1). Each step solves one banded linear system whose
//! factorization is reused across all steps.
//!
//! Modules:
//! - [`bernstein`]: trial basis evaluation and exact binomials;
//! - [`dual`]: dual basis coefficients and the modal test basis;
//! - [`operators`]: exact transformation/operational matrices G, P, Q, D
//!   and the Petrov-Galerkin pair B, A;
//! - [`quadrature`]: Gauss-Legendre rules on [0, 1];
//! - [`caputo`]: L1 weights and history combinations;
//! - [`band`]: band storage, Kronecker-sum assembly, band LU;
//! - [`solver`]: the time-marching solver, field evaluation and norms;
//! - [`experiments`]: the benchmark problems, convergence/stability runs
//!   and their CSV emission.

pub mod band;
pub mod bernstein;
pub mod caputo;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod operators;
pub mod quadrature;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};

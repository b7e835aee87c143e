//! Numerical tools for abelian integrals of hyperelliptic Hamiltonians and the
//! Chebyshev property of their ratios.

pub mod error;
pub mod hamiltonian;
pub mod poly;
pub mod quadrature;
pub mod asymptotics;
pub mod bifurcation;
pub mod chebyshev;

pub use error::{Error, Result};

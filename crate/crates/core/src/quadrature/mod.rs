//! Evaluation and continuation of the integrals `I_k(h) = ∮ xᵏ dx/y`.

pub mod contour;
pub mod gauss;
pub mod rcurve;
pub mod real;
pub mod winding;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use contour::{
    complex_cycle_integral, delta_at_critical, delta_grid, delta_determinant, CriticalDelta, DeltaSample,
    Determination, RootTracker,
};
pub use rcurve::{continued_integral, continued_integrals, trace_r_branch, upper_branch_point, RBranch};
pub use real::{abelian_integral, oval_endpoints, OvalFamily, RealIntegrals};
pub use winding::{winding, WindingReport};

/// Accuracy controls shared by every quadrature routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Relative tolerance on successive node doublings.
    pub tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_nodes: 16,
            max_nodes: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    RealOval,
    RCurve,
    ComplexContour,
}

/// One evaluation of `I_k(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralSample {
    pub h: Complex64,
    pub k: u32,
    pub value: Complex64,
    pub error_estimate: f64,
    pub method: Method,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    h_re: f64,
    h_im: f64,
    k: u32,
    val_re: f64,
    val_im: f64,
    err: f64,
    method: Method,
}

impl Serialize for IntegralSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SampleRecord {
            h_re: self.h.re,
            h_im: self.h.im,
            k: self.k,
            val_re: self.value.re,
            val_im: self.value.im,
            err: self.error_estimate,
            method: self.method,
        }
        .serialize(s)
    }
}

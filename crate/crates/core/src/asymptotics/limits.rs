//! Limits of `F = I₁/I₀` at the ends of a period annulus.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_model, EndpointFit, FitModel, FitOptions};
use crate::bifurcation::{PeriodAnnulus, Terminator};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::quadrature::{OvalFamily, QuadratureOptions, RealIntegrals};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Lower,
    Upper,
}

/// `I₀, I₁` at `n` levels approaching one end of `Σ` geometrically, from
/// `0.1·|Σ|` down by a factor `√10` per level.
pub fn endpoint_samples(fam: &OvalFamily, end: End, n: usize, opts: &QuadratureOptions) -> Result<Vec<RealIntegrals>> {
    let w = fam.width();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let d = 0.1 * w * 10f64.powf(-0.5 * j as f64);
            let h = match end {
                End::Lower => fam.sigma.0 + d,
                End::Upper => fam.sigma.1 - d,
            };
            fam.integrals(h, &[0, 1], opts)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndLimit {
    pub value: f64,
    /// What the endpoint type predicts; absent for heteroclinic loops.
    pub expected: Option<f64>,
    pub model: FitModel,
    pub i0_fit: Option<EndpointFit>,
    pub i1_fit: Option<EndpointFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FLimits {
    pub at_hc: EndLimit,
    pub at_hs: EndLimit,
    /// For heteroclinic ends, whether `F(h_s)` lies strictly between 0 and `x_s`.
    pub within_bounds: bool,
}

/// Levels used by the singular fits.
pub const LIMIT_SAMPLES: usize = 14;

fn singular_limit(fam: &OvalFamily, end: End, model: FitModel, expected: Option<f64>, opts: &QuadratureOptions) -> Result<EndLimit> {
    let samples = endpoint_samples(fam, end, LIMIT_SAMPLES, opts)?;
    let h_end = match end {
        End::Lower => fam.sigma.0,
        End::Upper => fam.sigma.1,
    };
    let series = |k: u32| -> Vec<(f64, f64)> { samples.iter().map(|r| (r.h, r.value(k).unwrap_or(f64::NAN))).collect() };
    let fo = FitOptions::default();
    let f0 = fit_model(&series(0), h_end, model, &fo)?;
    let f1 = fit_model(&series(1), h_end, model, &fo)?;
    if f0.coefficient == 0.0 {
        return Err(Error::Fit("vanishing singular coefficient of I0".into()));
    }
    // Both integrals carry the same singular cycle; at the saddle xᵏ → x_sᵏ.
    Ok(EndLimit {
        value: f1.coefficient / f0.coefficient,
        expected,
        model,
        i0_fit: Some(f0),
        i1_fit: Some(f1),
    })
}

fn center_limit(fam: &OvalFamily, xc: f64, opts: &QuadratureOptions) -> Result<EndLimit> {
    let w = fam.width();
    let f = |d: f64| -> Result<f64> {
        let r = fam.integrals(fam.sigma.0 + d * w, &[0, 1], opts)?;
        Ok(r.values[1] / r.values[0])
    };
    // F is analytic at h_c; one Richardson step removes the linear term.
    let value = 2.0 * f(1e-4)? - f(2e-4)?;
    Ok(EndLimit {
        value,
        expected: Some(xc),
        model: FitModel::RegularCenter,
        i0_fit: None,
        i1_fit: None,
    })
}

/// `F(h_c)` and `F(h_s)` on annulus `a`.
pub fn f_limits(m: &HamiltonianModel, a: &PeriodAnnulus, opts: &QuadratureOptions) -> Result<FLimits> {
    let fam = OvalFamily::from_annulus(m, a);
    let at_hc = match a.center {
        Some(c) => center_limit(&fam, c.re, opts)?,
        // The exterior family is born on the loop through its anchor, a saddle
        // or, when μ = λ, a cusp.
        None => {
            let d = m.derivatives(a.anchor.into());
            let model = if d.d2p.norm() <= 1e-8 * (d.d3p.norm() + d.d4p.norm()) {
                FitModel::CuspPower
            } else {
                FitModel::LogLoop
            };
            singular_limit(&fam, End::Lower, model, Some(a.anchor), opts)?
        }
    };
    let xs = a.saddle;
    let at_hs = match a.terminator {
        Terminator::SaddleLoop | Terminator::EightLoopBoundary => {
            singular_limit(&fam, End::Upper, FitModel::LogLoop, Some(xs), opts)?
        }
        Terminator::HeteroclinicLoop => singular_limit(&fam, End::Upper, FitModel::HeteroclinicLog, None, opts)?,
        Terminator::CuspidalLoop => singular_limit(&fam, End::Upper, FitModel::CuspPower, Some(xs), opts)?,
    };
    let within_bounds = match a.terminator {
        Terminator::HeteroclinicLoop => at_hs.value * xs > 0.0 && at_hs.value.abs() < xs.abs(),
        _ => true,
    };
    Ok(FLimits {
        at_hc,
        at_hs,
        within_bounds,
    })
}

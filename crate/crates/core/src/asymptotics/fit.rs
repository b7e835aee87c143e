//! Least-squares identification of endpoint singularities and of the power
//! law of `I_k` at infinity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitModel {
    LogLoop,
    HeteroclinicLog,
    CuspPower,
    RegularCenter,
    InfinityPower,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::LogLoop => "LogLoop",
            FitModel::HeteroclinicLog => "HeteroclinicLog",
            FitModel::CuspPower => "CuspPower",
            FitModel::RegularCenter => "RegularCenter",
            FitModel::InfinityPower => "InfinityPower",
        }
    }
}

/// Result of fitting `v(h)` near `h_s`.
///
/// For the log models `v ≈ c·log|h − h_s| + limit + …`, for the power model
/// `v ≈ c·|h − h_s|^exponent + limit + …`, for the regular model
/// `v ≈ limit + …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointFit {
    pub model: FitModel,
    pub coefficient: f64,
    pub exponent: Option<f64>,
    /// Value of the regular part at `h_s`.
    pub limit: f64,
    /// RMS residual relative to the RMS of the data.
    pub residual: f64,
    /// Second-best model and its residual over the best one; absent when
    /// the model was prescribed.
    pub runner_up: Option<FitModel>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Minimal runner-up to best residual ratio for a decision.
    pub ratio: f64,
    /// Report log singularities as [`FitModel::HeteroclinicLog`].
    pub heteroclinic: bool,
    /// Search interval for the power-law exponent. Corrections are spaced by
    /// 1/3, so a window wider than that makes the leading exponent ambiguous.
    pub exponent_range: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            ratio: 10.0,
            heteroclinic: false,
            exponent_range: (-0.48, -0.02),
        }
    }
}

// Relative residuals below this count as exact.
const RESIDUAL_FLOOR: f64 = 1e-15;

struct Linear {
    coef: Vec<f64>,
    residual: f64,
}

/// Least squares with unit-normalised columns.
fn lsq(cols: &[Vec<f64>], ys: &[f64]) -> Result<Linear> {
    let n = ys.len();
    let m = cols.len();
    if n < m {
        return Err(Error::Fit(format!("{n} samples for {m} parameters")));
    }
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(n, m, |i, j| cols[j][i] / norms[j]);
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(format!("least squares failed: {e}")))?;
    let r = &a * &x - &b;
    let scale = (b.norm_squared() / n as f64).sqrt().max(f64::MIN_POSITIVE);
    Ok(Linear {
        coef: x.iter().zip(&norms).map(|(v, s)| v / s).collect(),
        residual: ((r.norm_squared() / n as f64).sqrt() / scale).max(RESIDUAL_FLOOR),
    })
}

struct Candidate {
    model: FitModel,
    coefficient: f64,
    exponent: Option<f64>,
    limit: f64,
    residual: f64,
}

fn powers(s: &[f64], from: i32, to: i32) -> Vec<Vec<f64>> {
    (from..=to).map(|j| s.iter().map(|v| v.powi(j)).collect()).collect()
}

fn fit_log(s: &[f64], ys: &[f64], dmax: f64) -> Result<Candidate> {
    let mut cols: Vec<Vec<f64>> = (0..3).map(|j| s.iter().map(|v| v.powi(j) * v.ln()).collect()).collect();
    cols.extend(powers(s, 0, 2));
    let f = lsq(&cols, ys)?;
    Ok(Candidate {
        model: FitModel::LogLoop,
        coefficient: f.coef[0],
        exponent: None,
        // c·ln s = c·ln d − c·ln d_max.
        limit: f.coef[3] - f.coef[0] * dmax.ln(),
        residual: f.residual,
    })
}

fn fit_power_at(s: &[f64], ys: &[f64], e: f64) -> Result<Linear> {
    // A cubic degeneracy rescales x by |h − h_s|^{1/3}, so corrections to the
    // leading power come in steps of 1/3.
    let mut cols: Vec<Vec<f64>> = (0..4)
        .map(|j| s.iter().map(|v| v.powf(e + j as f64 / 3.0)).collect())
        .collect();
    cols.extend(powers(s, 0, 2));
    lsq(&cols, ys)
}

fn fit_power(s: &[f64], ys: &[f64], dmax: f64, range: (f64, f64)) -> Result<Candidate> {
    let obj = |e: f64| fit_power_at(s, ys, e).map(|f| f.residual).unwrap_or(f64::INFINITY);
    // Coarse scan, then golden section on the best bracket.
    let n = 48;
    let grid: Vec<f64> = (0..=n).map(|j| range.0 + (range.1 - range.0) * j as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&e| obj(e)).collect();
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = obj(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = obj(x2);
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    let e = 0.5 * (lo + hi);
    let f = fit_power_at(s, ys, e)?;
    Ok(Candidate {
        model: FitModel::CuspPower,
        coefficient: f.coef[0] / dmax.powf(e),
        exponent: Some(e),
        limit: f.coef[4],
        residual: f.residual,
    })
}

fn fit_regular(s: &[f64], ys: &[f64]) -> Result<Candidate> {
    let f = lsq(&powers(s, 0, 5), ys)?;
    Ok(Candidate {
        model: FitModel::RegularCenter,
        coefficient: 0.0,
        exponent: None,
        limit: f.coef[0],
        residual: f.residual,
    })
}

fn prepare(samples: &[(f64, f64)], h_s: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if samples.len() < 8 {
        return Err(Error::InvalidInput(format!("{} samples, need at least 8", samples.len())));
    }
    let d: Vec<f64> = samples.iter().map(|(h, _)| (h - h_s).abs()).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || samples.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidInput("samples must be finite and distinct from h_s".into()));
    }
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let s = d.iter().map(|v| v / dmax).collect();
    let ys = samples.iter().map(|(_, v)| *v).collect();
    Ok((s, ys, dmax))
}

/// Fits a single prescribed model; used when the endpoint type is known.
pub fn fit_model(samples: &[(f64, f64)], h_s: f64, model: FitModel, opts: &FitOptions) -> Result<EndpointFit> {
    let (s, ys, dmax) = prepare(samples, h_s)?;
    let c = match model {
        FitModel::LogLoop | FitModel::HeteroclinicLog => {
            let mut c = fit_log(&s, &ys, dmax)?;
            c.model = model;
            c
        }
        FitModel::CuspPower => fit_power(&s, &ys, dmax, opts.exponent_range)?,
        FitModel::RegularCenter => fit_regular(&s, &ys)?,
        FitModel::InfinityPower => {
            return Err(Error::InvalidInput("use infinity_exponent_fit for the behavior at infinity".into()))
        }
    };
    Ok(EndpointFit {
        model: c.model,
        coefficient: c.coefficient,
        exponent: c.exponent,
        limit: c.limit,
        residual: c.residual,
        runner_up: None,
        ratio: None,
    })
}

/// Chooses between a log singularity, a power singularity and a regular
/// endpoint by residual; the winner must beat the runner-up by
/// `opts.ratio`.
pub fn endpoint_fit_with(samples: &[(f64, f64)], h_s: f64, opts: &FitOptions) -> Result<EndpointFit> {
    let (s, ys, dmax) = prepare(samples, h_s)?;
    let mut cands = [
        fit_log(&s, &ys, dmax)?,
        fit_power(&s, &ys, dmax, opts.exponent_range)?,
        fit_regular(&s, &ys)?,
    ];
    if opts.heteroclinic {
        cands[0].model = FitModel::HeteroclinicLog;
    }
    cands.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let ratio = cands[1].residual / cands[0].residual;
    if ratio < opts.ratio {
        return Err(Error::Fit(format!(
            "indecisive endpoint fit: {} {:.3e} vs {} {:.3e}",
            cands[0].model.name(),
            cands[0].residual,
            cands[1].model.name(),
            cands[1].residual
        )));
    }
    let best = &cands[0];
    Ok(EndpointFit {
        model: best.model,
        coefficient: best.coefficient,
        exponent: best.exponent,
        limit: best.limit,
        residual: best.residual,
        runner_up: Some(cands[1].model),
        ratio: Some(ratio),
    })
}

pub fn endpoint_fit(samples: &[(f64, f64)], h_s: f64) -> Result<EndpointFit> {
    endpoint_fit_with(samples, h_s, &FitOptions::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfinityFit {
    /// Slope with the `|h|^{−j/5}` corrections removed.
    pub exponent: f64,
    pub uncertainty: f64,
    /// Plain log–log regression slope.
    pub raw_slope: f64,
    pub residual: f64,
    pub corrections: usize,
}

/// Number of `|h|^{−j/5}` correction terms in [`infinity_exponent_fit`].
pub const INFINITY_CORRECTIONS: usize = 3;

/// Slope of `log|I|` against `log|h|`.
///
/// Rescaling `x = h^{1/5}u` turns the curve into `u⁵/5 + O(h^{−1/5}) = 1`,
/// so `I(h) = c·h^s·(1 + b₁h^{−1/5} + b₂h^{−2/5} + …)` and the corrections are
/// fitted alongside the slope.
pub fn infinity_exponent_fit(samples: &[(Complex64, Complex64)]) -> Result<InfinityFit> {
    let hs: Vec<f64> = samples.iter().map(|(h, _)| h.norm()).collect();
    let (lo, hi) = hs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi / lo >= 999.0) {
        return Err(Error::InvalidInput(format!("|h| spans {:.2} decades, need 3", (hi / lo).log10())));
    }
    if samples.iter().any(|(_, v)| !(v.norm() > 0.0) || !v.norm().is_finite()) {
        return Err(Error::InvalidInput("samples must be finite and nonzero".into()));
    }
    let x: Vec<f64> = hs.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|(_, v)| v.norm().ln()).collect();
    let fit = |m: usize| -> Result<Linear> {
        let mut cols = vec![vec![1.0; x.len()], x.clone()];
        for j in 1..=m {
            cols.push(hs.iter().map(|v| v.powf(-(j as f64) / 5.0)).collect());
        }
        lsq(&cols, &y)
    };
    let raw = fit(0)?;
    let full = fit(INFINITY_CORRECTIONS)?;
    let reduced = fit(INFINITY_CORRECTIONS - 1)?;
    // Residual of log|I| in absolute terms.
    let yscale = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let residual = full.residual * yscale;
    if residual > 1e-3 {
        return Err(Error::Fit(format!("log–log data not linear (residual {residual:.3e})")));
    }
    Ok(InfinityFit {
        exponent: full.coef[1],
        uncertainty: (full.coef[1] - reduced.coef[1]).abs(),
        raw_slope: raw.coef[1],
        residual,
        corrections: INFINITY_CORRECTIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(h_s: f64, side: f64, n: usize) -> Vec<f64> {
        (0..n).map(|j| h_s + side * 0.1 * 0.5f64.powi(j as i32)).collect()
    }

    #[test]
    fn planted_log() {
        let s: Vec<(f64, f64)> = geometric(1.0, 1.0, 16)
            .into_iter()
            .map(|h| (h, 3.0 * (h - 1.0f64).abs().ln() + 2.0))
            .collect();
        let f = endpoint_fit(&s, 1.0).unwrap();
        assert_eq!(f.model, FitModel::LogLoop);
        assert!((f.coefficient - 3.0).abs() < 1e-9);
        assert!((f.limit - 2.0).abs() < 1e-8);
    }

    #[test]
    fn planted_power() {
        let s: Vec<(f64, f64)> = geometric(0.0, -1.0, 16)
            .into_iter()
            .map(|h| (h, 1.5 * h.abs().powf(-1.0 / 6.0) + 0.3 - h))
            .collect();
        let f = endpoint_fit(&s, 0.0).unwrap();
        assert_eq!(f.model, FitModel::CuspPower);
        assert!((f.exponent.unwrap() + 1.0 / 6.0).abs() < 1e-6);
        assert!((f.coefficient - 1.5).abs() < 1e-5);
    }

    #[test]
    fn planted_regular() {
        let s: Vec<(f64, f64)> = geometric(0.0, 1.0, 16).into_iter().map(|h| (h, (1.0 + h).exp())).collect();
        let f = endpoint_fit(&s, 0.0).unwrap();
        assert_eq!(f.model, FitModel::RegularCenter);
        assert!((f.limit - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        let s: Vec<(f64, f64)> = (1..5).map(|j| (j as f64, 1.0)).collect();
        assert!(matches!(endpoint_fit(&s, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn planted_infinity_power() {
        let s: Vec<(Complex64, Complex64)> = (0..40)
            .map(|j| {
                let h = 10f64.powf(2.0 + 3.0 * j as f64 / 39.0);
                (h.into(), Complex64::from_polar(2.0 * h.powf(-0.3), 0.4))
            })
            .collect();
        let f = infinity_exponent_fit(&s).unwrap();
        assert!((f.exponent + 0.3).abs() < 1e-10);
        assert!((f.raw_slope + 0.3).abs() < 1e-12);
    }
}

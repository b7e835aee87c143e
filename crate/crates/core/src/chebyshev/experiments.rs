//! Small-energy constructions on center families: a quadruple of parameters
//! with two small zeros of `α₀I₀ + α₁I₁`, and combinations `∮G dx/y` with
//! `[3g/2] − 1` small zeros.

use serde::Serialize;

use super::zeros::{sigma_grid, zeros_on_table, IntegralTable, ZeroReport};
use crate::asymptotics::center_expansion;
use crate::error::{Error, Result};
use crate::hamiltonian::CenterFamilyModel;
use crate::quadrature::{OvalFamily, QuadratureOptions};

/// Retries allowed when choosing `ε` or the scale ratio.
pub const MAX_RETRIES: usize = 6;

/// Grid points on `(0, ε)`.
pub const SMALL_GRID: usize = 1200;

fn count_small(
    cf: &CenterFamilyModel,
    eps: f64,
    ks: &[u32],
    coeffs: &[f64],
    opts: &QuadratureOptions,
) -> Result<ZeroReport> {
    let fam = OvalFamily {
        ham: cf.hamiltonian(),
        anchor: 0.0,
        sigma: (0.0, eps),
    };
    let grid = sigma_grid(fam.sigma, SMALL_GRID);
    let table = IntegralTable::build(&fam, &grid, ks, opts)?;
    zeros_on_table(&fam, &table, coeffs, true, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CyclicityParams {
    /// Chosen by the recipe when absent: `a₁ = −0.05·a₃`.
    pub a1: Option<f64>,
    pub a2: f64,
    pub a3: f64,
    /// Chosen by the recipe when absent: `α₀ = 2·10⁻³·a₁`.
    pub alpha0: Option<f64>,
    pub alpha1: f64,
}

impl CyclicityParams {
    pub fn recipe(a2: f64, a3: f64) -> Self {
        Self {
            a1: None,
            a2,
            a3,
            alpha0: None,
            alpha1: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclicityReport {
    pub a: [f64; 3],
    pub alpha0: f64,
    pub alpha1: f64,
    pub epsilon: f64,
    /// Positive roots of the two-term truncation of `I(t)/(2π)`.
    pub expansion_roots: Vec<f64>,
    pub zeros: ZeroReport,
    pub attempts: usize,
    /// `I₁(t)/t²` extrapolated to `t = 0` with `α₀ = a₁ = 0`.
    pub double_zero_limit: f64,
    /// `−(15/8)π·a₃`, the expansion's prediction for that limit.
    pub double_zero_expected: f64,
    pub success: bool,
}

fn positive_quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    let mut r = Vec::new();
    if c2 == 0.0 {
        if c1 != 0.0 && -c0 / c1 > 0.0 {
            r.push(-c0 / c1);
        }
        return r;
    }
    let disc = c1 * c1 - 4.0 * c0 * c2;
    if disc < 0.0 {
        return r;
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    for t in [q / c2, if q != 0.0 { c0 / q } else { f64::NAN }] {
        if t > 0.0 {
            r.push(t);
        }
    }
    r.sort_by(f64::total_cmp);
    r
}

/// Two small zeros of `α₀I₀ + α₁I₁` for `H = y² + x²(1 + a₁x + a₂x² + a₃x³)`.
///
/// `ε` starts at twice the outer root of the truncated expansion when that
/// root lies beyond `0.1·h_top`, otherwise at `0.1·h_top`, and shrinks by 10
/// while the count is wrong.
pub fn cyclicity_experiment(p: &CyclicityParams, opts: &QuadratureOptions) -> Result<CyclicityReport> {
    if p.a3 == 0.0 || !p.a3.is_finite() || !p.a2.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite a3 != 0, got {}", p.a3)));
    }
    let a1 = p.a1.unwrap_or(-0.05 * p.a3);
    let alpha0 = p.alpha0.unwrap_or(2e-3 * a1);
    let cf = CenterFamilyModel::new(vec![a1, p.a2, p.a3])?;
    let top = cf.annulus_top()?;
    let c = 21.0 / 8.0 * a1.powi(3) - 3.5 * a1 * p.a2 + p.a3;
    let roots = positive_quadratic_roots(alpha0, -0.75 * a1 * p.alpha1, -15.0 / 16.0 * c * p.alpha1);
    let mut eps = 0.1 * top;
    if let Some(&outer) = roots.last() {
        if outer >= eps {
            eps = (2.0 * outer).min(0.9 * top);
        }
    }
    let mut attempts = 0;
    let mut zeros = count_small(&cf, eps, &[0, 1], &[alpha0, p.alpha1], opts)?;
    while zeros.count != 2 && attempts < MAX_RETRIES {
        attempts += 1;
        eps /= 10.0;
        zeros = count_small(&cf, eps, &[0, 1], &[alpha0, p.alpha1], opts)?;
    }

    // With α₀ = a₁ = 0 the combination is I₁ = −(15/8)π a₃ t² + O(t³).
    let flat = CenterFamilyModel::new(vec![0.0, p.a2, p.a3])?;
    let fam = OvalFamily::center_family(&flat)?;
    let t0 = 1e-3 * fam.width();
    let ratio = |t: f64| -> Result<f64> { Ok(fam.integrals(t, &[1], opts)?.values[0] / (t * t)) };
    let double_zero_limit = 2.0 * ratio(0.5 * t0)? - ratio(t0)?;
    let double_zero_expected = center_expansion(&flat, 1, 2)?.coeffs()[2];

    Ok(CyclicityReport {
        a: [a1, p.a2, p.a3],
        alpha0,
        alpha1: p.alpha1,
        epsilon: eps,
        expansion_roots: roots,
        success: zeros.count == 2 && zeros.zeros.iter().all(|z| z.multiplicity == 1),
        zeros,
        attempts,
        double_zero_limit,
        double_zero_expected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NochebReport {
    pub degree: usize,
    pub genus: usize,
    pub m: usize,
    pub expected: u32,
    /// `γ₀, γ₂, …, γ_{2m−2}`.
    pub gammas: Vec<f64>,
    /// The full coefficient vector `a₁ … a_{n−2}` used.
    pub a: Vec<f64>,
    pub ratio: f64,
    pub retries: usize,
    pub epsilon: f64,
    pub zeros: ZeroReport,
    pub success: bool,
}

/// Initial scale ratio between consecutive coefficients of the chain.
pub const NOCHEB_RATIO: f64 = 0.1;

/// Builds `G(x) = Σ_{k<m} γ_{2k}x^{2k} − x^{2m−1}` and odd coefficients
/// `a_{2j−1}` of alternating sign and separated scales, keeping the even
/// coefficients of `cf`, and counts the small zeros of `∮G dx/y`.
///
/// The chain `γ₀, …, γ_{2m−2}, a₁, …, a_{2g−1}` multiplies `t⁰, t¹, …, t^N`
/// in the expansion; giving entry `i` magnitude `r^{1 + (N−i)(N−i+1)/2}`
/// puts the roots near `r^{N−i}`, one per sign change.
pub fn nocheb_experiment(cf: &CenterFamilyModel, opts: &QuadratureOptions) -> Result<NochebReport> {
    let n = cf.degree();
    let g = cf.genus();
    if g < 2 {
        return Err(Error::InvalidParameter(format!("genus {g} < 2")));
    }
    let m = g / 2;
    let big_n = m + g - 1;
    let expected = big_n as u32;
    if m == 0 {
        return Err(Error::InvalidParameter("m = [g/2] must be positive".into()));
    }
    if 2 * g - 1 > n - 2 {
        return Err(Error::InvalidParameter(format!("degree {n} has no coefficient a_{}", 2 * g - 1)));
    }
    let mut ratio = NOCHEB_RATIO;
    let mut last = None;
    for retry in 0..=MAX_RETRIES {
        let mag = |i: usize| ratio.powi(1 + ((big_n - i) * (big_n - i + 1) / 2) as i32);
        // Top of the chain negative, signs alternating downwards.
        let sign = |i: usize| if (big_n - i).is_multiple_of(2) { -1.0 } else { 1.0 };
        let gammas: Vec<f64> = (0..m).map(|i| sign(i) * mag(i)).collect();
        let mut a = cf.a().to_vec();
        for j in 1..=g {
            let i = m - 1 + j;
            a[2 * j - 2] = sign(i) * mag(i);
        }
        let fam_cf = CenterFamilyModel::new(a.clone())?;
        let eps = 0.1 * fam_cf.annulus_top()?;
        let mut ks: Vec<u32> = (0..m as u32).map(|k| 2 * k).collect();
        ks.push(2 * m as u32 - 1);
        let mut coeffs = gammas.clone();
        coeffs.push(-1.0);
        let zeros = count_small(&fam_cf, eps, &ks, &coeffs, opts)?;
        let success = zeros.count == expected && zeros.zeros.iter().all(|z| !z.suspected);
        let report = NochebReport {
            degree: n,
            genus: g,
            m,
            expected,
            gammas,
            a,
            ratio,
            retries: retry,
            epsilon: eps,
            zeros,
            success,
        };
        if success {
            return Ok(report);
        }
        last = Some(report);
        ratio *= 0.5;
    }
    Ok(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots_are_positive_and_sorted() {
        // (t − 1)(t − 3) = t² − 4t + 3
        assert_eq!(positive_quadratic_roots(3.0, -4.0, 1.0), vec![1.0, 3.0]);
        assert_eq!(positive_quadratic_roots(-3.0, -2.0, 1.0), vec![3.0]);
        assert!(positive_quadratic_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(positive_quadratic_roots(-2.0, 1.0, 0.0), vec![2.0]);
    }

    #[test]
    fn cyclicity_rejects_zero_a3() {
        let p = CyclicityParams::recipe(0.0, 0.0);
        let e = cyclicity_experiment(&p, &QuadratureOptions::default()).unwrap_err();
        assert!(e.is_input_error());
    }

    #[test]
    fn nocheb_quintic_has_two_small_zeros() {
        let cf = CenterFamilyModel::new(vec![0.0, 0.5, -1.0]).unwrap();
        let r = nocheb_experiment(&cf, &QuadratureOptions::default()).unwrap();
        assert_eq!((r.genus, r.expected), (2, 2));
        assert!(r.success, "{r:?}");
        // Even coefficients are kept.
        assert_eq!(r.a[1], 0.5);
    }
}

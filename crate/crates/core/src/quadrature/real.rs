//! Integrals over real ovals by Gauss–Chebyshev quadrature after deflating
//! the two turning points out of `h − P(x)`.

use num_complex::Complex64;

use super::gauss::chebyshev_nodes;
use super::{IntegralSample, Method, QuadratureOptions};
use crate::bifurcation::PeriodAnnulus;
use crate::error::{Error, Result};
use crate::hamiltonian::{CenterFamilyModel, Hamiltonian, HamiltonianModel};
use crate::poly::{bracketed_root, Poly};

/// A family of real ovals of a Hamiltonian: an interior anchor point and the
/// energy interval on which the ovals exist.
#[derive(Debug, Clone, PartialEq)]
pub struct OvalFamily {
    pub ham: Hamiltonian,
    pub anchor: f64,
    pub sigma: (f64, f64),
}

impl OvalFamily {
    pub fn from_annulus(m: &HamiltonianModel, a: &PeriodAnnulus) -> Self {
        Self {
            ham: m.hamiltonian().clone(),
            anchor: a.anchor,
            sigma: a.sigma,
        }
    }

    /// Ovals around the origin of a center family, `Σ = (0, h_top)`.
    pub fn center_family(cf: &CenterFamilyModel) -> Result<Self> {
        Ok(Self {
            ham: cf.hamiltonian(),
            anchor: 0.0,
            sigma: (0.0, cf.annulus_top()?),
        })
    }

    pub fn width(&self) -> f64 {
        self.sigma.1 - self.sigma.0
    }

    fn check(&self, h: f64) -> Result<()> {
        if self.sigma.0 < h && h < self.sigma.1 {
            Ok(())
        } else {
            Err(Error::EnergyOutOfRange {
                h,
                lo: self.sigma.0,
                hi: self.sigma.1,
            })
        }
    }

    pub fn endpoints(&self, h: f64) -> Result<(f64, f64)> {
        self.check(h)?;
        oval_interval(&self.ham, self.anchor, h)
    }

    pub fn integrals(&self, h: f64, ks: &[u32], opts: &QuadratureOptions) -> Result<RealIntegrals> {
        let (a, b) = self.endpoints(h)?;
        real_integrals(&self.ham, h, a, b, ks, opts)
    }
}

/// Abscissae of real critical points of `P`, including near-real pairs that
/// the root finder did not snap to the axis.
fn critical_abscissae(p: &Poly) -> Result<Vec<f64>> {
    let dp = p.derivative();
    if dp.degree() == 0 {
        return Ok(vec![]);
    }
    let mut xs: Vec<f64> = dp
        .level_roots(0.0)?
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

/// Turning points `α < anchor < β` of the oval through the level `h` that
/// contains `anchor`. Each is found on a monotone piece of `P`.
pub fn oval_interval(ham: &Hamiltonian, anchor: f64, h: f64) -> Result<(f64, f64)> {
    let p = ham.p();
    if p.eval(anchor) >= h {
        return Err(Error::Bracketing(format!(
            "level {h} does not enclose the anchor {anchor} (P = {})",
            p.eval(anchor)
        )));
    }
    let crit = critical_abscissae(p)?;
    let c = p.coeffs();
    let lead = p.leading().abs();
    let bound = 1.0
        + c[..c.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { (v - h).abs() } else { v.abs() })
            .fold(0.0, f64::max)
            / lead;
    let gap = 1e-13 * (1.0 + anchor.abs());
    let mut right: Vec<f64> = vec![anchor];
    right.extend(crit.iter().copied().filter(|&x| x > anchor + gap));
    right.push(bound.max(anchor + 1.0));
    let mut left: Vec<f64> = vec![anchor];
    left.extend(crit.iter().rev().copied().filter(|&x| x < anchor - gap));
    left.push(-bound.max(1.0 - anchor));

    let find = |pts: &[f64]| -> Result<f64> {
        for w in pts.windows(2) {
            if p.eval(w[1]) >= h {
                let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
                return bracketed_root(p, h, lo, hi);
            }
        }
        Err(Error::Bracketing(format!("level set {h} is unbounded from anchor {anchor}")))
    };
    let beta = find(&right)?;
    let alpha = find(&left)?;
    Ok((alpha, beta))
}

/// Turning points of the oval of annulus `a` at level `h ∈ Σ`.
pub fn oval_endpoints(m: &HamiltonianModel, a: &PeriodAnnulus, h: f64) -> Result<(f64, f64)> {
    OvalFamily::from_annulus(m, a).endpoints(h)
}

/// Values and error estimates of several `I_k` on one oval.
#[derive(Debug, Clone, PartialEq)]
pub struct RealIntegrals {
    pub h: f64,
    pub ks: Vec<u32>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub nodes: usize,
    pub converged: bool,
}

impl RealIntegrals {
    pub fn value(&self, k: u32) -> Option<f64> {
        self.ks.iter().position(|&j| j == k).map(|i| self.values[i])
    }

    pub fn sample(&self, i: usize) -> IntegralSample {
        IntegralSample {
            h: self.h.into(),
            k: self.ks[i],
            value: Complex64::new(self.values[i], 0.0),
            error_estimate: self.errors[i],
            method: Method::RealOval,
            converged: self.converged,
        }
    }
}

/// `∮ xᵏ dx/y` over the oval with turning points `α < β` at level `h`.
///
/// `h − P = (x − α)(β − x) S(x)`; the nodes integrate `xᵏ/√S` against the
/// Chebyshev weight, doubling until successive sums agree.
pub fn real_integrals(
    ham: &Hamiltonian,
    h: f64,
    alpha: f64,
    beta: f64,
    ks: &[u32],
    opts: &QuadratureOptions,
) -> Result<RealIntegrals> {
    if !(alpha < beta) {
        return Err(Error::Bracketing(format!("degenerate oval [{alpha}, {beta}]")));
    }
    let (s, _) = ham.p().shifted(h).divide_quadratic(alpha, beta);
    let mid = 0.5 * (alpha + beta);
    let rad = 0.5 * (beta - alpha);
    let factor = ham.cycle_factor();
    // Horner rounding in P − h moves each turning point by about
    // ε·scale/|P′|. The weight absorbs (x − α)(β − x) exactly, so that shift
    // acts on the integrand through xᵏ and S; rounding in S itself is relative
    // to its size.
    let noise = 8.0 * f64::EPSILON * (ham.p().abs_scale(mid.abs() + rad) + h.abs());
    let dp = ham.p().derivative();
    let shift = noise / dp.eval(alpha).abs().min(dp.eval(beta).abs());
    let (s_mid, ds_mid) = (s.eval(mid), s.derivative().eval(mid));
    let s_rel = noise / s_mid.abs() + 0.5 * shift * (ds_mid / s_mid).abs();
    let reach = mid.abs() + rad;
    let eval = |n: usize| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut sums = vec![0.0; ks.len()];
        let mut abs = vec![0.0; ks.len()];
        let mut base = 0.0;
        for t in chebyshev_nodes(n) {
            let x = mid + rad * t;
            let sv = s.eval(x);
            if !(sv > 0.0) {
                return Err(Error::Bracketing(format!(
                    "deflated factor not positive at x = {x} (S = {sv:.3e})"
                )));
            }
            let w = 1.0 / sv.sqrt();
            base += w;
            for (i, &k) in ks.iter().enumerate() {
                let v = w * x.powi(k as i32);
                sums[i] += v;
                abs[i] += v.abs();
            }
        }
        let scale = std::f64::consts::PI / n as f64;
        Ok((
            sums.into_iter().map(|v| v * scale).collect(),
            abs.into_iter().map(|v| v * scale).collect(),
            base * scale,
        ))
    };
    let mut n = opts.min_nodes.max(4);
    let (mut prev, _, _) = eval(n)?;
    loop {
        n *= 2;
        let (cur, abs, base) = eval(n)?;
        let errs: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).collect();
        let ok = errs.iter().zip(&abs).all(|(e, s)| *e <= opts.tol * s);
        if ok || n >= opts.max_nodes {
            return Ok(RealIntegrals {
                h,
                ks: ks.to_vec(),
                values: cur.iter().map(|v| v * factor).collect(),
                errors: errs
                    .iter()
                    .zip(&cur)
                    .zip(ks)
                    .map(|((e, v), &k)| {
                        let moved = if k == 0 { 0.0 } else { shift * k as f64 * reach.powi(k as i32 - 1) * base };
                        (e + s_rel * v.abs() + moved) * factor
                    })
                    .collect(),
                nodes: n,
                converged: ok,
            });
        }
        prev = cur;
    }
}

/// `I_k(h)` on a real oval of annulus `a`.
pub fn abelian_integral(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    h: f64,
    k: u32,
    opts: &QuadratureOptions,
) -> Result<IntegralSample> {
    let r = OvalFamily::from_annulus(m, a).integrals(h, &[k], opts)?;
    Ok(r.sample(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::{classify, AnnulusKind};
    use crate::hamiltonian::{build_normal_form, ParameterPoint};
    use std::f64::consts::PI;

    #[test]
    fn circle_period_is_two_pi() {
        let ham = Hamiltonian::new(1.0, Poly::new(vec![0.0, 0.0, 1.0])).unwrap();
        for t in [1e-6, 0.3, 7.0] {
            let (a, b) = oval_interval(&ham, 0.0, t).unwrap();
            let r = real_integrals(&ham, t, a, b, &[0, 1, 2], &QuadratureOptions::default()).unwrap();
            assert!((r.values[0] - 2.0 * PI).abs() < 1e-12);
            assert!(r.values[1].abs() < 1e-12);
            assert!((r.values[2] - PI * t).abs() < 1e-12 * (1.0 + t));
        }
    }

    #[test]
    fn harmonic_limit_of_normal_form() {
        let p = ParameterPoint::real(0.5, 0.25).unwrap();
        let m = build_normal_form(p);
        let r = classify(p);
        let o1 = r.annulus(AnnulusKind::O1).unwrap();
        let h = o1.h_c() + 1e-8 * o1.width();
        let s = abelian_integral(&m, o1, h, 0, &QuadratureOptions::default()).unwrap();
        let expect = 2.0 * PI / (0.5f64 * 0.75).sqrt();
        assert!((s.value.re - expect).abs() < 1e-4 * expect);
    }

    #[test]
    fn eight_loop_interval_straddles_both_centers() {
        let p = ParameterPoint::real(0.9, 0.5).unwrap();
        let m = build_normal_form(p);
        let r = classify(p);
        let oe = r.annulus(AnnulusKind::OE).unwrap();
        let h = 0.5 * (oe.h_c() + oe.h_s());
        let (a, b) = oval_endpoints(&m, oe, h).unwrap();
        assert!(a < 0.5 && b > 1.0, "({a}, {b})");
        assert!(abelian_integral(&m, oe, h, 0, &QuadratureOptions::default()).unwrap().value.re > 0.0);
    }

    #[test]
    fn out_of_range_energy_is_input_error() {
        let p = ParameterPoint::real(0.5, 0.25).unwrap();
        let m = build_normal_form(p);
        let o1 = *classify(p).annulus(AnnulusKind::O1).unwrap();
        let e = abelian_integral(&m, &o1, 1.0, 0, &QuadratureOptions::default()).unwrap_err();
        assert!(e.is_input_error());
    }
}

//! Continuation of `I_k(h)` below the center level along the curve
//! `R(x, y) = Im P(x + iy) / y = 0`.
//!
//! For `h < h_c` the turning points become a conjugate pair `β, β̄` and the
//! cycle can be drawn through `x(y) + iy` with `x(y)` on the branch of `R = 0`
//! through the center. On that path `P` is real, equal to
//! `Q(x, y) = Re P(x + iy)`, and `I₀(h) = 2√f · 2∫₀^{y_h} dy/√(Q − h)`.

use num_complex::Complex64;
use serde::Serialize;

use super::contour::RootTracker;
use super::gauss::gauss_legendre;
use super::real::OvalFamily;
use super::{IntegralSample, Method, QuadratureOptions};
use crate::bifurcation::PeriodAnnulus;
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianModel};

/// Samples of the branch `x(y)` of `R = 0` starting at the center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RBranch {
    /// `(y, x(y))` with `y` strictly increasing from `0` to `y_max`.
    pub samples: Vec<(f64, f64)>,
    /// `y_h = Im β(h)`.
    pub y_max: f64,
    /// `Re β(h)`, where the branch must end.
    pub x_end: f64,
    pub max_residual: f64,
}

struct RCurve<'a> {
    ham: &'a Hamiltonian,
    xc: f64,
}

/// `R`, `∂R/∂x`, `∂R/∂y` at `(x, y)` from the Taylor expansion of
/// `P(x + iy)` in `iy`.
fn r_parts(ham: &Hamiltonian, x: f64, y: f64) -> (f64, f64, f64, f64) {
    let p = ham.p();
    let n = p.degree();
    let d: Vec<f64> = p.derivatives_at(x.into(), n + 2).iter().map(|z| z.re).collect();
    let mut r = 0.0;
    let mut rx = 0.0;
    let mut ry = 0.0;
    let mut scale = 0.0;
    let mut fact = 1.0;
    let mut yp = 1.0; // y^{j−1}
    for j in 1..=n {
        fact *= j as f64;
        if j % 2 == 1 {
            let sgn = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            r += sgn * d[j] * yp / fact;
            scale += (d[j] * yp / fact).abs();
            rx += sgn * d[j + 1] * yp / fact;
            if j >= 3 {
                ry += sgn * d[j] * (j as f64 - 1.0) * y.powi(j as i32 - 2) / fact;
            }
        }
        yp *= y;
    }
    (r, rx, ry, scale)
}

impl RCurve<'_> {
    /// `x(y)` at ascending `ys` by predictor–corrector continuation from the
    /// center; returns positions and slopes `dx/dy`.
    fn follow(&self, ys: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut xs = Vec::with_capacity(ys.len());
        let mut slopes = Vec::with_capacity(ys.len());
        let (mut y0, mut x0, mut s0) = (0.0, self.xc, 0.0);
        let mut worst: f64 = 0.0;
        for &y in ys {
            let (x, s, res) = self.step(y0, x0, s0, y, 0)?;
            worst = worst.max(res);
            xs.push(x);
            slopes.push(s);
            (y0, x0, s0) = (y, x, s);
        }
        Ok((xs, slopes, worst))
    }

    fn step(&self, y0: f64, x0: f64, s0: f64, y1: f64, depth: u32) -> Result<(f64, f64, f64)> {
        if let Some(r) = self.correct(x0 + s0 * (y1 - y0), y1, (y1 - y0).abs()) {
            return Ok(r);
        }
        if depth > 40 {
            return Err(Error::BranchTracking(format!(
                "R-curve continuation failed near y = {y0:.6e}"
            )));
        }
        let ym = 0.5 * (y0 + y1);
        let (xm, sm, _) = self.step(y0, x0, s0, ym, depth + 1)?;
        self.step(ym, xm, sm, y1, depth + 1)
    }

    fn correct(&self, mut x: f64, y: f64, dy: f64) -> Option<(f64, f64, f64)> {
        let x_pred = x;
        for _ in 0..30 {
            let (r, rx, _, scale) = r_parts(self.ham, x, y);
            if rx == 0.0 {
                return None;
            }
            let dx = r / rx;
            x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) || r.abs() <= 1e-15 * scale {
                // Reject corrections that jump away from the predicted point.
                if (x - x_pred).abs() > 0.5 * dy.max(1e-12) + 1e-12 {
                    return None;
                }
                // Polish to rounding level: nodes next to β need x − Re β
                // to more digits than the stopping test guarantees.
                for _ in 0..2 {
                    let (r, rx, _, _) = r_parts(self.ham, x, y);
                    if rx == 0.0 {
                        break;
                    }
                    x -= r / rx;
                }
                let (r, rx, ry, _) = r_parts(self.ham, x, y);
                let slope = if y == 0.0 { 0.0 } else { -ry / rx };
                // Residual measured as the remaining Newton step in x.
                return Some((x, slope, (r / rx).abs() / (1.0 + x.abs())));
            }
        }
        None
    }
}

/// Upper member `β(h)` of the conjugate pair born at the center when `h`
/// drops below `h_c`, followed continuously from `h_c`.
pub fn upper_branch_point(fam: &OvalFamily, h: f64) -> Result<Complex64> {
    let hc = fam.sigma.0;
    let depth = hc - h;
    let start = hc - 1e-3 * depth;
    let mut t = RootTracker::new(fam.ham.p(), start.into())?;
    let mut near: Vec<usize> = (0..t.roots().len()).collect();
    near.sort_by(|&a, &b| {
        (t.roots()[a] - fam.anchor)
            .norm()
            .total_cmp(&(t.roots()[b] - fam.anchor).norm())
    });
    let pair = [near[0], near[1]];
    t.advance(h.into(), &pair, None)?;
    let (a, b) = (t.roots()[pair[0]], t.roots()[pair[1]]);
    let up = if a.im >= b.im { a } else { b };
    if up.im <= 0.0 {
        return Err(Error::BranchTracking(format!("no conjugate pair at h = {h}")));
    }
    Ok(up)
}

fn check_below(fam: &OvalFamily, h: f64) -> Result<()> {
    if h < fam.sigma.0 {
        Ok(())
    } else {
        Err(Error::EnergyOutOfRange {
            h,
            lo: f64::NEG_INFINITY,
            hi: fam.sigma.0,
        })
    }
}

/// Traces `x(y)` on `n` evenly spaced levels of `y ∈ (0, y_h]`.
pub fn trace_r_branch_family(fam: &OvalFamily, h: f64, n: usize) -> Result<RBranch> {
    check_below(fam, h)?;
    let beta = upper_branch_point(fam, h)?;
    let curve = RCurve {
        ham: &fam.ham,
        xc: fam.anchor,
    };
    let ys: Vec<f64> = (1..=n.max(1)).map(|j| beta.im * j as f64 / n.max(1) as f64).collect();
    let (xs, _, worst) = curve.follow(&ys)?;
    let end = *xs.last().unwrap();
    if (end - beta.re).abs() > 1e-6 * (1.0 + beta.norm()) {
        return Err(Error::BranchTracking(format!(
            "branch ends at x = {end}, expected Re beta = {}",
            beta.re
        )));
    }
    let mut samples = vec![(0.0, fam.anchor)];
    samples.extend(ys.into_iter().zip(xs));
    Ok(RBranch {
        samples,
        y_max: beta.im,
        x_end: beta.re,
        max_residual: worst,
    })
}

/// [`trace_r_branch_family`] for an annulus of the normal form.
pub fn trace_r_branch(m: &HamiltonianModel, a: &PeriodAnnulus, h: f64, n: usize) -> Result<RBranch> {
    trace_r_branch_family(&OvalFamily::from_annulus(m, a), h, n)
}

/// `I_k(h)` for `h < h_c` by integration along the `R`-curve. Near `y_h` the
/// substitution `y = y_h − u²` removes the inverse square root.
pub fn continued_integrals(
    fam: &OvalFamily,
    h: f64,
    ks: &[u32],
    opts: &QuadratureOptions,
) -> Result<Vec<IntegralSample>> {
    check_below(fam, h)?;
    let beta = upper_branch_point(fam, h)?;
    let p = fam.ham.p();
    let yh = beta.im;
    let umax = yh.sqrt();
    let curve = RCurve {
        ham: &fam.ham,
        xc: fam.anchor,
    };
    let eval = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let rule = gauss_legendre(n);
        // u ascending means y descending; follow the branch upwards in y.
        let us: Vec<f64> = rule.0.iter().rev().map(|t| 0.5 * umax * (t + 1.0)).collect();
        let ws: Vec<f64> = rule.1.iter().rev().map(|w| 0.5 * umax * w).collect();
        let mut ys: Vec<f64> = us.iter().map(|u| yh - u * u).collect();
        ys.push(yh);
        let (xs, slopes, worst) = curve.follow(&ys)?;
        if worst > 1e-10 {
            return Err(Error::BranchTracking(format!("R residual {worst:.3e} on the branch")));
        }
        // Expand P − h about the branch's own end point rather than the
        // root-finder's β: both carry the same rounding in x, so the offset
        // x − x_end stays accurate at nodes a few ulps below y_h.
        let x_end = xs[n];
        let taylor: Vec<Complex64> = p
            .derivatives_at(Complex64::new(x_end, yh), p.degree() + 1)
            .into_iter()
            .enumerate()
            .skip(1)
            .scan(1.0, |fact, (k, d)| {
                *fact *= k as f64;
                Some(d / *fact)
            })
            .collect();
        let mut sums = vec![0.0; ks.len()];
        let mut abs = vec![0.0; ks.len()];
        for j in 0..n {
            let z = Complex64::new(xs[j], ys[j]);
            let w = Complex64::new(xs[j] - x_end, -us[j] * us[j]);
            let q = (taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * w)).re;
            if !(q > 0.0) {
                return Err(Error::Degenerate(format!(
                    "Q - h = {q:.3e} is not positive at y = {}",
                    ys[j]
                )));
            }
            let base = 2.0 * us[j] / q.sqrt() * ws[j];
            let tilt = Complex64::new(1.0, -slopes[j]);
            for (i, &k) in ks.iter().enumerate() {
                let v = base * (z.powu(k) * tilt).re;
                sums[i] += v;
                abs[i] += v.abs();
            }
        }
        Ok((sums, abs))
    };
    let factor = 2.0 * fam.ham.cycle_factor();
    let mut n = opts.min_nodes.max(8);
    let (mut prev, _) = eval(n)?;
    loop {
        n *= 2;
        let (cur, abs) = eval(n)?;
        let errs: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).collect();
        let ok = errs.iter().zip(&abs).all(|(e, s)| *e <= opts.tol * s);
        if ok || n >= opts.max_nodes.min(1 << 12) {
            return Ok(ks
                .iter()
                .enumerate()
                .map(|(i, &k)| IntegralSample {
                    h: h.into(),
                    k,
                    value: Complex64::new(cur[i] * factor, 0.0),
                    error_estimate: errs[i] * factor,
                    method: Method::RCurve,
                    converged: ok,
                })
                .collect());
        }
        prev = cur;
    }
}

/// `I₀(h)` for `h < h_c` on annulus `a` of the normal form.
pub fn continued_integral(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    h: f64,
    opts: &QuadratureOptions,
) -> Result<IntegralSample> {
    Ok(continued_integrals(&OvalFamily::from_annulus(m, a), h, &[0], opts)?[0])
}

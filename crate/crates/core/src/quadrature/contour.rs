//! Cycle integrals around a pair of complex branch points, their analytic
//! continuation in `h`, and the determinant `Δ(h)` of the two
//! determinations `δ±` beyond the loop level.
//!
//! A cycle around the pair `ζ₁, ζ₂` is represented by the straight segment
//! `[ζ₁, ζ₂]` traversed on both sheets. On the segment
//! `h − P = (x − ζ₁)(ζ₂ − x) S(x)` and the integral reduces to a
//! Gauss–Chebyshev sum of `xᵏ/√S`. The branch of `√S` is the product of
//! principal roots rotated so that each factor is cut away from the segment.

use num_complex::Complex64;
use serde::Serialize;

use super::gauss::{chebyshev_nodes, gauss_legendre};
use super::real::OvalFamily;
use super::{IntegralSample, Method, QuadratureOptions};
use crate::bifurcation::PeriodAnnulus;
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianModel};
use crate::poly::Poly;

const MAX_HALVINGS: u32 = 40;

/// Continuous labelling of the roots of `P(x) = h` along a path in `h`.
#[derive(Debug, Clone)]
pub struct RootTracker {
    p: Poly,
    h: Complex64,
    roots: Vec<Complex64>,
}

impl RootTracker {
    pub fn new(p: &Poly, h: Complex64) -> Result<Self> {
        Ok(Self {
            p: p.clone(),
            h,
            roots: p.level_roots_c(h)?,
        })
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Index of the root nearest to `z`.
    pub fn nearest(&self, z: Complex64) -> usize {
        nearest_index(&self.roots, z)
    }

    /// Moves to `h_new` along the straight segment from the current level.
    /// Roots listed in `watched` must be matched unambiguously at every
    /// substep; if `segment` is given, no other root may cross the segment
    /// joining those two roots.
    pub fn advance(
        &mut self,
        h_new: Complex64,
        watched: &[usize],
        segment: Option<(usize, usize)>,
    ) -> Result<()> {
        self.advance_inner(h_new, watched, segment, 0)
    }

    fn advance_inner(
        &mut self,
        h_new: Complex64,
        watched: &[usize],
        segment: Option<(usize, usize)>,
        depth: u32,
    ) -> Result<()> {
        if let Some(next) = self.try_match(h_new, watched, segment)? {
            self.roots = next;
            self.h = h_new;
            return Ok(());
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::BranchTracking(format!(
                "root tracking stalled near h = {}",
                self.h
            )));
        }
        let mid = 0.5 * (self.h + h_new);
        self.advance_inner(mid, watched, segment, depth + 1)?;
        self.advance_inner(h_new, watched, segment, depth + 1)
    }

    fn try_match(
        &self,
        h_new: Complex64,
        watched: &[usize],
        segment: Option<(usize, usize)>,
    ) -> Result<Option<Vec<Complex64>>> {
        let new = self.p.level_roots_c(h_new)?;
        let n = new.len();
        let mut taken = vec![false; n];
        let mut out = vec![Complex64::new(f64::NAN, 0.0); n];
        for &i in watched {
            let z = self.roots[i];
            let spacing = self
                .roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            let mut d: Vec<(f64, usize)> = new.iter().enumerate().map(|(j, w)| ((w - z).norm(), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (d1, j1) = d[0];
            let d2 = d.get(1).map_or(f64::INFINITY, |v| v.0);
            if taken[j1] || d1 > 0.3 * d2 || d1 > 0.3 * spacing {
                return Ok(None);
            }
            taken[j1] = true;
            out[i] = new[j1];
        }
        let mut cand: Vec<(f64, usize, usize)> = Vec::new();
        for i in (0..n).filter(|i| !watched.contains(i)) {
            for j in (0..n).filter(|&j| !taken[j]) {
                cand.push(((new[j] - self.roots[i]).norm(), i, j));
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut done = vec![false; n];
        for &i in watched {
            done[i] = true;
        }
        for (_, i, j) in cand {
            if !done[i] && !taken[j] {
                done[i] = true;
                taken[j] = true;
                out[i] = new[j];
            }
        }
        if let Some((a, b)) = segment {
            for i in (0..n).filter(|&i| i != a && i != b) {
                if crosses(self.roots[a], self.roots[b], self.roots[i], out[a], out[b], out[i]) {
                    return Ok(None);
                }
            }
        }
        Ok(Some(out))
    }
}

fn nearest_index(roots: &[Complex64], z: Complex64) -> usize {
    roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// True if root `r` passes through the moving segment `[a, b]` between the
/// old and new positions.
fn crosses(
    a0: Complex64,
    b0: Complex64,
    r0: Complex64,
    a1: Complex64,
    b1: Complex64,
    r1: Complex64,
) -> bool {
    let t0 = (r0 - a0) / (b0 - a0);
    let t1 = (r1 - a1) / (b1 - a1);
    if t0.im.signum() == t1.im.signum() || t0.im == t1.im {
        return false;
    }
    let s = t0.im / (t0.im - t1.im);
    let re = t0.re + s * (t1.re - t0.re);
    re > 0.0 && re < 1.0
}

/// Integrals `∮ xᵏ dx/y` around the segment joining `roots[pair.0]` and
/// `roots[pair.1]` with the sign fixed so that `Re ∮ dx/y ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIntegrals {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub nodes: usize,
    pub converged: bool,
}

pub fn segment_integrals(
    ham: &Hamiltonian,
    roots: &[Complex64],
    pair: (usize, usize),
    ks: &[u32],
    opts: &QuadratureOptions,
) -> Result<SegmentIntegrals> {
    let (z1, z2) = (roots[pair.0], roots[pair.1]);
    if (z2 - z1).norm() == 0.0 {
        return Err(Error::Degenerate("branch points of the cycle coincide".into()));
    }
    let mid = 0.5 * (z1 + z2);
    let rad = 0.5 * (z2 - z1);
    let others: Vec<Complex64> = roots
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pair.0 && i != pair.1)
        .map(|(_, &z)| z)
        .collect();
    // Separation of the other roots from the segment, measured by the
    // Bernstein ellipse through them.
    let mut worst_rho = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for &r in &others {
        let w = (r - mid) / rad;
        let s = (w * w - 1.0).sqrt();
        let rho = (w + s).norm().max((w - s).norm());
        worst_rho = worst_rho.min(rho);
        let t = w.re.clamp(-1.0, 1.0);
        gap = gap.min((r - (mid + rad * t)).norm());
    }
    if worst_rho - 1.0 < 1e-9 {
        return Err(Error::ContourSeparation { gap });
    }
    let lead = Complex64::new(ham.p().leading(), 0.0);
    let mut pref = lead.sqrt();
    let mut rot = Vec::with_capacity(others.len());
    for &r in &others {
        let theta = (mid - r).arg();
        pref *= Complex64::from_polar(1.0, 0.5 * theta);
        rot.push((r, Complex64::from_polar(1.0, -theta)));
    }
    let sqrt_s = |x: Complex64| rot.iter().fold(pref, |acc, &(r, e)| acc * ((x - r) * e).sqrt());
    let mut all_ks: Vec<u32> = vec![0];
    all_ks.extend(ks.iter().copied().filter(|&k| k != 0));
    let eval = |n: usize| {
        let mut sums = vec![Complex64::new(0.0, 0.0); all_ks.len()];
        let mut abs = vec![0.0; all_ks.len()];
        for t in chebyshev_nodes(n) {
            let x = mid + rad * t;
            let w = sqrt_s(x).inv();
            let mut xp = Complex64::new(1.0, 0.0);
            let mut kp = 0;
            for (i, &k) in all_ks.iter().enumerate() {
                while kp < k {
                    xp *= x;
                    kp += 1;
                }
                if k < kp {
                    xp = x.powu(k);
                    kp = k;
                }
                let v = w * xp;
                sums[i] += v;
                abs[i] += v.norm();
            }
        }
        let sc = std::f64::consts::PI / n as f64;
        (
            sums.into_iter().map(|v| v * sc).collect::<Vec<_>>(),
            abs.into_iter().map(|v| v * sc).collect::<Vec<_>>(),
        )
    };
    let factor = ham.cycle_factor();
    let mut n = opts.min_nodes.max(4);
    let (mut prev, _) = eval(n);
    loop {
        n *= 2;
        let (cur, abs) = eval(n);
        let errs: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).collect();
        let ok = errs.iter().zip(&abs).all(|(e, s)| *e <= opts.tol * s);
        if ok || n >= opts.max_nodes {
            let sign = if cur[0].re < 0.0 { -1.0 } else { 1.0 };
            let pick = |k: u32| all_ks.iter().position(|&j| j == k).unwrap();
            return Ok(SegmentIntegrals {
                values: ks.iter().map(|&k| cur[pick(k)] * sign * factor).collect(),
                errors: ks.iter().map(|&k| errs[pick(k)] * factor).collect(),
                nodes: n,
                converged: ok,
            });
        }
        prev = cur;
    }
}

/// `∮ xᵏ dx/y` around the two designated branch points at level `h`.
///
/// Without continuation data the orientation is fixed by `Re ∮ dx/y ≥ 0`.
pub fn complex_cycle_integral(
    m: &HamiltonianModel,
    h: Complex64,
    pair: (Complex64, Complex64),
    k: u32,
    opts: &QuadratureOptions,
) -> Result<IntegralSample> {
    cycle_integral(m.hamiltonian(), h, pair, k, opts)
}

/// Same as [`complex_cycle_integral`] for an arbitrary Hamiltonian.
pub fn cycle_integral(
    ham: &Hamiltonian,
    h: Complex64,
    pair: (Complex64, Complex64),
    k: u32,
    opts: &QuadratureOptions,
) -> Result<IntegralSample> {
    let roots = ham.p().level_roots_c(h)?;
    let scale = 1.0 + pair.0.norm().max(pair.1.norm());
    let i = nearest_index(&roots, pair.0);
    let j = nearest_index(&roots, pair.1);
    let tol = 1e-6 * scale;
    if i == j || (roots[i] - pair.0).norm() > tol || (roots[j] - pair.1).norm() > tol {
        return Err(Error::InvalidInput(format!(
            "({}, {}) are not two distinct roots of P(x) = {h}",
            pair.0, pair.1
        )));
    }
    let r = segment_integrals(ham, &roots, (i, j), &[k], opts)?;
    Ok(IntegralSample {
        h,
        k,
        value: r.values[0],
        error_estimate: r.errors[0],
        method: Method::ComplexContour,
        converged: r.converged,
    })
}

/// A cycle continued along a path in the `h`-plane together with the
/// integrals over it.
#[derive(Debug, Clone)]
pub struct Determination {
    ham: Hamiltonian,
    tracker: RootTracker,
    pair: (usize, usize),
    ks: Vec<u32>,
    values: Vec<Complex64>,
    errors: Vec<f64>,
    opts: QuadratureOptions,
}

impl Determination {
    /// Starts on the real oval of `fam` at the real level `h`.
    pub fn from_oval(fam: &OvalFamily, h: f64, ks: &[u32], opts: &QuadratureOptions) -> Result<Self> {
        let (a, b) = fam.endpoints(h)?;
        let tracker = RootTracker::new(fam.ham.p(), h.into())?;
        let i = tracker.nearest(a.into());
        let j = tracker.nearest(b.into());
        Self::start(fam.ham.clone(), tracker, (i, j), ks, opts)
    }

    /// Starts at the level of `tracker` on the cycle around `pair`.
    pub fn start(
        ham: Hamiltonian,
        tracker: RootTracker,
        pair: (usize, usize),
        ks: &[u32],
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        let mut all = vec![0];
        all.extend(ks.iter().copied().filter(|&k| k != 0));
        let s = segment_integrals(&ham, tracker.roots(), pair, &all, opts)?;
        Ok(Self {
            ham,
            tracker,
            pair,
            ks: all,
            values: s.values,
            errors: s.errors,
            opts: *opts,
        })
    }

    pub fn h(&self) -> Complex64 {
        self.tracker.h()
    }

    pub fn pair_roots(&self) -> (Complex64, Complex64) {
        let r = self.tracker.roots();
        (r[self.pair.0], r[self.pair.1])
    }

    pub fn roots(&self) -> &[Complex64] {
        self.tracker.roots()
    }

    pub fn value(&self, k: u32) -> Complex64 {
        self.values[self.ks.iter().position(|&j| j == k).expect("k not tracked")]
    }

    pub fn error(&self, k: u32) -> f64 {
        self.errors[self.ks.iter().position(|&j| j == k).expect("k not tracked")]
    }

    /// Moves along the straight segment to `h_new`, calling `on_step` after
    /// every accepted substep with the new level and `I₀`.
    pub fn advance_with<F: FnMut(Complex64, &Determination)>(
        &mut self,
        h_new: Complex64,
        on_step: &mut F,
    ) -> Result<()> {
        self.advance_inner(h_new, on_step, 0)
    }

    pub fn advance(&mut self, h_new: Complex64) -> Result<()> {
        self.advance_with(h_new, &mut |_, _| {})
    }

    fn advance_inner<F: FnMut(Complex64, &Determination)>(
        &mut self,
        h_new: Complex64,
        on_step: &mut F,
        depth: u32,
    ) -> Result<()> {
        if self.try_step(h_new)? {
            on_step(h_new, self);
            return Ok(());
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::BranchTracking(format!(
                "cycle continuation stalled near h = {}",
                self.h()
            )));
        }
        let mid = 0.5 * (self.h() + h_new);
        self.advance_inner(mid, on_step, depth + 1)?;
        self.advance_inner(h_new, on_step, depth + 1)
    }

    fn try_step(&mut self, h_new: Complex64) -> Result<bool> {
        let mut tracker = self.tracker.clone();
        let watched = [self.pair.0, self.pair.1];
        tracker.advance(h_new, &watched, Some(self.pair))?;
        let s = segment_integrals(&self.ham, tracker.roots(), self.pair, &self.ks, &self.opts)?;
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let plus: Vec<Complex64> = s.values.iter().zip(&self.values).map(|(a, b)| a - b).collect();
        let minus: Vec<Complex64> = s.values.iter().zip(&self.values).map(|(a, b)| a + b).collect();
        let (dp, dm) = (norm(&plus), norm(&minus));
        let sign = if dp <= dm { 1.0 } else { -1.0 };
        let (near, far) = if dp <= dm { (dp, dm) } else { (dm, dp) };
        // Accept only steps where the orientation is unambiguous and the
        // integrals change by a small fraction.
        let scale = norm(&self.values);
        if near > 0.25 * far || near > 0.2 * scale {
            return Ok(false);
        }
        self.tracker = tracker;
        self.values = s.values.iter().map(|v| v * sign).collect();
        self.errors = s.errors;
        Ok(true)
    }

    /// Follows the arc `center + radius·e^{iθ}` from `theta0` to `theta1` in
    /// chords of at most `max_angle`.
    pub fn follow_arc_with<F: FnMut(Complex64, &Determination)>(
        &mut self,
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
        max_angle: f64,
        on_step: &mut F,
    ) -> Result<()> {
        let steps = ((theta1 - theta0).abs() / max_angle).ceil().max(1.0) as usize;
        for j in 1..=steps {
            let t = theta0 + (theta1 - theta0) * j as f64 / steps as f64;
            self.advance_with(center + Complex64::from_polar(radius, t), on_step)?;
        }
        Ok(())
    }

    pub fn follow_arc(&mut self, center: Complex64, radius: f64, theta0: f64, theta1: f64) -> Result<()> {
        self.follow_arc_with(center, radius, theta0, theta1, std::f64::consts::PI / 32.0, &mut |_, _| {})
    }
}

/// `Δ(h)` and `Im F(h)` at one level beyond the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaSample {
    pub h: f64,
    /// `[∮_{δ+} dx/y, ∮_{δ+} x dx/y]`.
    pub plus: [Complex64; 2],
    /// `[∮_{δ−} dx/y, ∮_{δ−} x dx/y]`.
    pub minus: [Complex64; 2],
    pub delta: Complex64,
    /// `Im F(h)` computed directly from `I₁⁺/I₀⁺`.
    pub im_f: f64,
    /// `Im F(h)` recovered as `Δ/(2i|I₀|²)`.
    pub im_f_from_delta: f64,
    pub error_estimate: f64,
}

/// Radius of the half-circle used to pass around `h_s`: small compared with
/// the distance to every other critical value and to the first target.
fn bypass_radius(m: &HamiltonianModel, a: &PeriodAnnulus, first: f64) -> f64 {
    let hs = a.h_s();
    let cv = m.critical_values();
    let mut r = 0.25 * a.width();
    for v in [cv.h0, cv.h_mu, cv.h_lambda, cv.h1] {
        let d = (v - hs).norm();
        if d > 1e-14 * (1.0 + hs.abs()) {
            r = r.min(0.5 * d);
        }
    }
    if first > hs {
        r = r.min(0.5 * (first - hs));
    }
    r
}

/// Continues the oval of `a` from below `h_s` through the upper half-plane
/// to `h_s + r`. The result is the determination `δ+`.
fn plus_determination(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    r: f64,
    ks: &[u32],
    opts: &QuadratureOptions,
) -> Result<Determination> {
    let fam = OvalFamily::from_annulus(m, a);
    let hs = a.h_s();
    let mut det = Determination::from_oval(&fam, hs - r, ks, opts)?;
    det.follow_arc(hs.into(), r, std::f64::consts::PI, 0.0)?;
    Ok(det)
}

fn delta_from(det: &Determination, h: f64, opts: &QuadratureOptions) -> Result<DeltaSample> {
    let i0p = det.value(0);
    let i1p = det.value(1);
    // δ− is the mirror image of δ+; integrate over the conjugate pair and
    // align its orientation with the reflection of δ+.
    let roots = det.roots();
    let (za, zb) = det.pair_roots();
    let ia = nearest_index(roots, za.conj());
    let ib = nearest_index(roots, zb.conj());
    let s = segment_integrals(&det.ham, roots, (ia, ib), &[0, 1], opts)?;
    let sign = if (s.values[0] - i0p.conj()).norm() <= (s.values[0] + i0p.conj()).norm() {
        1.0
    } else {
        -1.0
    };
    let i0m = s.values[0] * sign;
    let i1m = s.values[1] * sign;
    let delta = i1p * i0m - i0p * i1m;
    let im_f = (i1p / i0p).im;
    let im_f_from_delta = (delta / (Complex64::new(0.0, 2.0) * i0p.norm_sqr())).re;
    let err = det.error(0) + det.error(1) + s.errors[0] + s.errors[1];
    Ok(DeltaSample {
        h,
        plus: [i0p, i1p],
        minus: [i0m, i1m],
        delta,
        im_f,
        im_f_from_delta,
        error_estimate: err * (i0p.norm() + i1p.norm()),
    })
}

/// `Δ(h)` on an ascending grid of levels above `h_s` for an exceptional
/// annulus.
pub fn delta_grid(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    hs: &[f64],
    opts: &QuadratureOptions,
) -> Result<Vec<DeltaSample>> {
    if !a.exceptional {
        return Err(Error::InvalidInput(format!("annulus {:?} is not exceptional", a.kind)));
    }
    if hs.is_empty() {
        return Ok(vec![]);
    }
    if hs.windows(2).any(|w| w[1] <= w[0]) || hs[0] <= a.h_s() {
        return Err(Error::InvalidInput("levels must be ascending and above h_s".into()));
    }
    let r = bypass_radius(m, a, hs[0]);
    let mut det = plus_determination(m, a, r, &[0, 1], opts)?;
    let mut out = Vec::with_capacity(hs.len());
    for &h in hs {
        det.advance(h.into())?;
        out.push(delta_from(&det, h, opts)?);
    }
    Ok(out)
}

/// `Δ(h)` for one regular level `h > h_s`.
pub fn delta_determinant(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    h: f64,
    opts: &QuadratureOptions,
) -> Result<DeltaSample> {
    let cv = m.critical_values();
    for v in [cv.h0, cv.h_mu, cv.h_lambda, cv.h1] {
        if v.im == 0.0 && (v.re - h).abs() <= 1e-14 * (1.0 + h.abs()) {
            return Err(Error::InvalidInput(format!(
                "h = {h} is a critical value; use delta_at_critical"
            )));
        }
    }
    Ok(delta_grid(m, a, &[h], opts)?[0])
}

/// The two evaluations of `Δ` at a critical level `h₀ > h_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDelta {
    pub h: f64,
    pub x0: f64,
    pub contour: Complex64,
    pub residue: Complex64,
    /// `±1` such that `contour ≈ sign·residue`.
    pub sign: f64,
    pub relative_gap: f64,
}

/// `Δ(h₀)` at the first real critical level above `h_s`, by continuation of
/// the cycles and by the residue formula on the normalised elliptic curve
/// `w² = κ(x − x₁)(x − x₂)(x − x₃)`.
pub fn delta_at_critical(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    opts: &QuadratureOptions,
) -> Result<CriticalDelta> {
    if !a.exceptional {
        return Err(Error::InvalidInput(format!("annulus {:?} is not exceptional", a.kind)));
    }
    let hs = a.h_s();
    let cv = m.critical_values();
    let pts = m.critical_points();
    let vals = [cv.h0, cv.h_mu, cv.h_lambda, cv.h1];
    let (h0, x0) = vals
        .iter()
        .zip(pts)
        .filter(|(v, x)| v.im == 0.0 && x.im == 0.0 && v.re > hs + 1e-14 * (1.0 + hs.abs()))
        .map(|(v, x)| (v.re, x.re))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::InvalidInput("no real critical value above h_s".into()))?;

    let contour = delta_grid(m, a, &[h0], opts)?[0].delta;

    let p = m.p();
    let (cubic, _) = p.shifted(h0).divide_quadratic(x0, x0);
    let xs = cubic.level_roots(0.0)?;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if (xs[i] - xs[j]).norm() < 1e-8 || (xs[i] - x0).norm() < 1e-8 {
                return Err(Error::Degenerate("branch points of the elliptic curve coincide".into()));
            }
        }
    }
    let kappa = -p.leading() / m.y_factor();
    let w2 = |x: Complex64| xs.iter().fold(Complex64::new(kappa, 0.0), |acc, &r| acc * (x - r));
    let w0 = w2(x0.into()).sqrt();
    let residue_path = |dir: Complex64| -> Complex64 {
        // ∫ from x₀ to ∞ along x₀ + s·dir with s = 1/v² − 1, continuing w
        // from w₀ by nearest choice of sign.
        let x_at = |v: f64| Complex64::from(x0) + dir * (1.0 / (v * v) - 1.0);
        let mut n = 64;
        let mut prev: Option<Complex64> = None;
        loop {
            let rule = gauss_legendre(n);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut w_cur = w0;
            let mut v_prev = 1.0;
            for (t, wt) in rule.0.iter().zip(&rule.1).rev() {
                let v = 0.5 * (t + 1.0);
                for s in 1..=8 {
                    let vv = v_prev + (v - v_prev) * s as f64 / 8.0;
                    let cand = w2(x_at(vv)).sqrt();
                    w_cur = if (cand - w_cur).norm() <= (cand + w_cur).norm() { cand } else { -cand };
                }
                v_prev = v;
                sum += dir * (2.0 / (v * v * v)) / w_cur * (0.5 * wt);
            }
            if let Some(p) = prev {
                if (sum - p).norm() <= 1e-13 * sum.norm() || n >= 4096 {
                    return sum;
                }
            }
            prev = Some(sum);
            n *= 2;
        }
    };
    // ∫_{P−}^{P+} dx/w along x₀ → ∞ → x₀ equals −2∫_{x₀}^{∞} dx/w on the
    // sheet through P+.
    let dir = ray_direction(x0, &xs);
    let integral = -2.0 * residue_path(dir);
    let residue = Complex64::new(0.0, 2.0 * std::f64::consts::PI) / w0 * integral;
    let sign = if (contour - residue).norm() <= (contour + residue).norm() { 1.0 } else { -1.0 };
    let relative_gap = (contour - sign * residue).norm() / residue.norm();
    Ok(CriticalDelta {
        h: h0,
        x0,
        contour,
        residue,
        sign,
        relative_gap,
    })
}

/// Direction of a ray from `x0` to infinity that stays away from the branch
/// points; the negative real axis when it is free.
fn ray_direction(x0: f64, xs: &[Complex64]) -> Complex64 {
    let clearance = |d: Complex64| {
        xs.iter()
            .map(|&r| {
                let t = ((r - x0) * d.conj()).re.max(0.0);
                (r - (Complex64::from(x0) + d * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let neg = Complex64::new(-1.0, 0.0);
    if clearance(neg) > 1e-3 {
        return neg;
    }
    (0..64)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (1.0 + j as f64 / 32.0)))
        .max_by(|a, b| clearance(*a).total_cmp(&clearance(*b)))
        .unwrap_or(neg)
}

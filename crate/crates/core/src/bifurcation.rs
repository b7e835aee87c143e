//! Parameter-space classification for the quintic normal form: period
//! annuli, their maximal energy intervals, exceptionality and Dynkin data.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_normal_form, CriticalValues, ParameterCase, ParameterPoint};
use crate::quadrature::gauss::{chebyshev_nodes, legendre_adaptive};

/// Distance (in parameter units) below which a point counts as lying on a
/// bifurcation curve or on an edge of the triangle.
pub const CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnulusKind {
    O1,
    OMu,
    OE,
}

impl AnnulusKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "O1" | "o1" => Some(Self::O1),
            "OMu" | "omu" | "Omu" => Some(Self::OMu),
            "OE" | "oe" | "Oe" => Some(Self::OE),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::O1 => "O1",
            Self::OMu => "OMu",
            Self::OE => "OE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminator {
    SaddleLoop,
    HeteroclinicLoop,
    CuspidalLoop,
    EightLoopBoundary,
}

/// A maximal continuous family of ovals and its energy interval `(h_c, h_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodAnnulus {
    pub kind: AnnulusKind,
    /// Center surrounded by the ovals; `None` for the eight-loop family.
    pub center: Option<Complex64>,
    /// A real point strictly inside every oval: the center, or the inner
    /// saddle of the eight loop for `OE`.
    pub anchor: f64,
    /// Abscissa of the saddle (or cusp) on the boundary loop at `h_s`.
    pub saddle: f64,
    pub sigma: (f64, f64),
    pub terminator: Terminator,
    pub exceptional: bool,
}

impl PeriodAnnulus {
    pub fn h_c(&self) -> f64 {
        self.sigma.0
    }

    pub fn h_s(&self) -> f64 {
        self.sigma.1
    }

    pub fn width(&self) -> f64 {
        self.sigma.1 - self.sigma.0
    }

    pub fn contains(&self, h: f64) -> bool {
        self.sigma.0 < h && h < self.sigma.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    MuZero,
    MuEqualsLambda,
    LambdaOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveId {
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "Gamma")]
    Hyperbola,
    #[serde(rename = "gamma_c_real")]
    GammaCReal,
    #[serde(rename = "gamma_c_complex")]
    GammaCComplex,
    #[serde(rename = "gamma_s")]
    GammaS,
}

impl CurveId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gamma => "gamma",
            Self::Hyperbola => "Gamma",
            Self::GammaCReal => "gamma_c_real",
            Self::GammaCComplex => "gamma_c_complex",
            Self::GammaS => "gamma_s",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Gamma,
            Self::Hyperbola,
            Self::GammaCReal,
            Self::GammaCComplex,
            Self::GammaS,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    RealAboveGamma,
    RealBelowGamma,
    RealDegenerate(Boundary),
    ComplexLeftBranch,
    ComplexRightBranch,
    ComplexBetweenBranches,
    OnCurve(CurveId),
}

pub type DynkinMatrix = [[u8; 4]; 4];

/// Order of the vanishing cycles in [`DynkinMatrix`] rows and columns.
pub const DYNKIN_ORDER: [&str; 4] = ["delta_0", "delta_mu", "delta_lambda", "delta_1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: Region,
    pub annuli: Vec<PeriodAnnulus>,
    pub critical_ordering: String,
    pub critical_values: CriticalValues,
    pub dynkin: Option<DynkinMatrix>,
}

impl RegionReport {
    pub fn annulus(&self, kind: AnnulusKind) -> Option<&PeriodAnnulus> {
        self.annuli.iter().find(|a| a.kind == kind)
    }
}

/// `μ` on the curve `γ: h_λ = h₀` at a given `λ`.
pub fn gamma_mu(lambda: f64) -> f64 {
    (3.0 * lambda * lambda - 5.0 * lambda) / (5.0 * (lambda - 2.0))
}

/// `μ` on the real curve `γ_c` (where `P'''(μ) = 0`) at a given `λ`.
pub fn gamma_c_mu(lambda: f64) -> f64 {
    let b = 2.0 + 2.0 * lambda;
    (b - (b * b - 12.0 * lambda).max(0.0).sqrt()) / 6.0
}

/// Signed hyperbola function `b² − 5a(a − 1)` for `λ = a + ib`;
/// negative strictly inside either branch.
pub fn hyperbola_value(lambda: Complex64) -> f64 {
    lambda.im * lambda.im - 5.0 * lambda.re * (lambda.re - 1.0)
}

fn hyperbola_distance(lambda: Complex64) -> f64 {
    let g = hyperbola_value(lambda);
    let grad = Complex64::new(-10.0 * lambda.re + 5.0, 2.0 * lambda.im).norm();
    if grad == 0.0 {
        g.abs().sqrt()
    } else {
        g.abs() / grad
    }
}

fn ordering_tag(cv: &CriticalValues, case: ParameterCase) -> String {
    match case {
        ParameterCase::Real => {
            let mut v = [
                ("h0", cv.h0.re),
                ("hmu", cv.h_mu.re),
                ("hlambda", cv.h_lambda.re),
                ("h1", cv.h1.re),
            ];
            v.sort_by(|a, b| a.1.total_cmp(&b.1));
            let mut tag = String::from(v[0].0);
            for w in v.windows(2) {
                let scale = w[0].1.abs().max(w[1].1.abs()).max(1e-300);
                let sep = if (w[1].1 - w[0].1).abs() <= 1e-13 * scale { "=" } else { "<" };
                let _ = write!(tag, "{sep}{}", w[1].0);
            }
            tag
        }
        ParameterCase::Complex => "h1<h0;hlambda=conj(hmu)".to_string(),
    }
}

fn real_annulus(
    kind: AnnulusKind,
    center: Option<f64>,
    anchor: f64,
    saddle: f64,
    sigma: (f64, f64),
    terminator: Terminator,
) -> PeriodAnnulus {
    PeriodAnnulus {
        kind,
        center: center.map(Complex64::from),
        anchor,
        saddle,
        sigma,
        terminator,
        exceptional: kind == AnnulusKind::O1,
    }
}

/// Classifies a parameter point and lists its period annuli.
pub fn classify(p: ParameterPoint) -> RegionReport {
    let model = build_normal_form(p);
    let cv = model.critical_values();
    let critical_ordering = ordering_tag(&cv, p.case());
    let (region, annuli) = match p.case() {
        ParameterCase::Real => classify_real(p.lambda().re, p.mu().re, &cv),
        ParameterCase::Complex => classify_complex(p.lambda(), &cv),
    };
    let dynkin = dynkin(region, &cv).ok();
    RegionReport {
        region,
        annuli,
        critical_ordering,
        critical_values: cv,
        dynkin,
    }
}

fn classify_real(l: f64, m: f64, cv: &CriticalValues) -> (Region, Vec<PeriodAnnulus>) {
    use AnnulusKind::*;
    use Terminator::*;
    let (h0, hm, hl, h1) = (cv.h0.re, cv.h_mu.re, cv.h_lambda.re, cv.h1.re);
    let mu_zero = m <= CURVE_TOL;
    let mu_lambda = (l - m) <= CURVE_TOL;
    let lambda_one = 1.0 - l <= CURVE_TOL;

    if lambda_one && (mu_zero || mu_lambda) {
        // Corners (1,0) and (1,1).
        let region = Region::RealDegenerate(if mu_zero {
            Boundary::MuZero
        } else {
            Boundary::MuEqualsLambda
        });
        if mu_zero {
            return (region, vec![]);
        }
        return (region, vec![real_annulus(O1, Some(1.0), 1.0, 0.0, (h1, h0), SaddleLoop)]);
    }
    if mu_zero && mu_lambda {
        // Corner (0,0): degenerate saddle at the origin.
        return (
            Region::RealDegenerate(Boundary::MuZero),
            vec![real_annulus(O1, Some(1.0), 1.0, 0.0, (h1, h0), SaddleLoop)],
        );
    }
    if mu_zero {
        return (
            Region::RealDegenerate(Boundary::MuZero),
            vec![real_annulus(O1, Some(1.0), 1.0, l, (h1, hl), SaddleLoop)],
        );
    }
    if mu_lambda {
        return (
            Region::RealDegenerate(Boundary::MuEqualsLambda),
            vec![
                real_annulus(O1, Some(1.0), 1.0, l, (h1, hl), CuspidalLoop),
                real_annulus(OE, None, l, 0.0, (hl, h0), SaddleLoop),
            ],
        );
    }
    if lambda_one {
        let (top, saddle, term) = if h0 < h1 {
            (h0, 0.0, SaddleLoop)
        } else {
            (h1, 1.0, CuspidalLoop)
        };
        return (
            Region::RealDegenerate(Boundary::LambdaOne),
            vec![real_annulus(OMu, Some(m), m, saddle, (hm, top), term)],
        );
    }
    let gm = gamma_mu(l);
    if (m - gm).abs() <= CURVE_TOL {
        return (
            Region::OnCurve(CurveId::Gamma),
            vec![
                real_annulus(O1, Some(1.0), 1.0, l, (h1, hl), SaddleLoop),
                real_annulus(OMu, Some(m), m, l, (hm, h0.min(hl)), HeteroclinicLoop),
            ],
        );
    }
    if m > gm {
        // h_λ < h₀: the saddle at λ carries an eight loop.
        (
            Region::RealAboveGamma,
            vec![
                real_annulus(O1, Some(1.0), 1.0, l, (h1, hl), EightLoopBoundary),
                real_annulus(OMu, Some(m), m, l, (hm, hl), EightLoopBoundary),
                real_annulus(OE, None, l, 0.0, (hl, h0), SaddleLoop),
            ],
        )
    } else {
        (
            Region::RealBelowGamma,
            vec![
                real_annulus(O1, Some(1.0), 1.0, l, (h1, hl), SaddleLoop),
                real_annulus(OMu, Some(m), m, 0.0, (hm, h0), SaddleLoop),
            ],
        )
    }
}

fn classify_complex(lambda: Complex64, cv: &CriticalValues) -> (Region, Vec<PeriodAnnulus>) {
    let g = hyperbola_value(lambda);
    let region = if hyperbola_distance(lambda) <= CURVE_TOL {
        Region::OnCurve(CurveId::Hyperbola)
    } else if g > 0.0 {
        Region::ComplexBetweenBranches
    } else if lambda.re < 0.0 {
        Region::ComplexLeftBranch
    } else {
        Region::ComplexRightBranch
    };
    let annulus = PeriodAnnulus {
        kind: AnnulusKind::O1,
        center: Some(Complex64::new(1.0, 0.0)),
        anchor: 1.0,
        saddle: 0.0,
        sigma: (cv.h1.re, cv.h0.re),
        terminator: Terminator::SaddleLoop,
        exceptional: region == Region::ComplexLeftBranch,
    };
    (region, vec![annulus])
}

/// Exceptionality of an annulus returned by [`classify`] for `p`.
pub fn exceptional(p: ParameterPoint, a: &PeriodAnnulus) -> bool {
    if a.kind != AnnulusKind::O1 {
        return false;
    }
    match p.case() {
        ParameterCase::Real => true,
        ParameterCase::Complex => {
            let l = p.lambda();
            hyperbola_distance(l) > CURVE_TOL && hyperbola_value(l) < 0.0 && l.re < 0.0
        }
    }
}

/// Intersection-number magnitudes of the vanishing cycles, rows and columns
/// ordered as [`DYNKIN_ORDER`].
pub fn dynkin(region: Region, cv: &CriticalValues) -> Result<DynkinMatrix> {
    let vals = [cv.h0, cv.h_mu, cv.h_lambda, cv.h1];
    for i in 0..4 {
        for j in i + 1..4 {
            let scale = vals[i].norm().max(vals[j].norm()).max(1e-300);
            if (vals[i] - vals[j]).norm() <= 1e-13 * scale {
                return Err(Error::Degenerate(format!(
                    "critical values {} and {} coincide",
                    DYNKIN_ORDER[i], DYNKIN_ORDER[j]
                )));
            }
        }
    }
    const D0: usize = 0;
    const DM: usize = 1;
    const DL: usize = 2;
    const D1: usize = 3;
    let edges: &[(usize, usize)] = match region {
        Region::RealAboveGamma | Region::RealBelowGamma => &[(D1, DL), (DL, DM), (DM, D0)],
        Region::ComplexLeftBranch => &[(D1, D0), (D0, DL), (D0, DM), (DL, DM)],
        Region::ComplexRightBranch => &[(D0, D1), (D1, DL), (D1, DM), (DL, DM)],
        Region::ComplexBetweenBranches => &[(D0, DL), (DL, D1), (D1, DM), (DM, D0), (D0, D1)],
        Region::RealDegenerate(_) | Region::OnCurve(_) => {
            return Err(Error::Degenerate(format!("no Dynkin diagram on {region:?}")));
        }
    };
    let mut m = [[0u8; 4]; 4];
    for &(i, j) in edges {
        m[i][j] = 1;
        m[j][i] = 1;
    }
    Ok(m)
}

/// A point `(λ, μ)` on one of the bifurcation curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub curve: CurveId,
    pub lambda: Complex64,
    pub mu: Complex64,
}

impl CurvePoint {
    /// CSV row `curve,re_lambda,im_lambda,mu`; `mu` is left empty for
    /// complex points, where it is the conjugate of `λ`.
    pub fn csv_row(&self) -> String {
        let mu = if self.lambda.im == 0.0 && self.mu.im == 0.0 {
            format!("{}", self.mu.re + 0.0)
        } else {
            String::new()
        };
        format!(
            "{},{},{},{}",
            self.curve.name(),
            self.lambda.re + 0.0,
            self.lambda.im + 0.0,
            mu
        )
    }
}

pub const CURVE_CSV_HEADER: &str = "curve,re_lambda,im_lambda,mu";

fn real_point(curve: CurveId, l: f64, m: f64) -> CurvePoint {
    CurvePoint {
        curve,
        lambda: l.into(),
        mu: m.into(),
    }
}

fn complex_point(curve: CurveId, l: Complex64) -> CurvePoint {
    CurvePoint {
        curve,
        lambda: l,
        mu: l.conj(),
    }
}

/// `n` sample points of a bifurcation curve.
///
/// `Gamma` is sampled on the upper halves of both branches for
/// `Re λ ∈ [−2, 0]` and `[1, 3]`; `gamma_c_complex` on the full circle.
pub fn curve_samples(curve: CurveId, n: usize) -> Result<Vec<CurvePoint>> {
    if n < 2 {
        return Err(Error::InvalidInput("curve sampling needs n >= 2".into()));
    }
    let unit = |j: usize, n: usize| j as f64 / (n - 1) as f64;
    Ok(match curve {
        CurveId::Gamma => (0..n)
            .map(|j| {
                let l = unit(j, n);
                real_point(curve, l, gamma_mu(l))
            })
            .collect(),
        CurveId::GammaCReal => (0..n)
            .map(|j| {
                let l = unit(j, n);
                real_point(curve, l, gamma_c_mu(l))
            })
            .collect(),
        CurveId::GammaCComplex => (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                complex_point(curve, Complex64::new(2.0, 0.0) + Complex64::from_polar(1.0, t))
            })
            .collect(),
        CurveId::Hyperbola => {
            let left = n.div_ceil(2).max(2);
            let right = (n - n.div_ceil(2)).max(2);
            let mut out = Vec::with_capacity(left + right);
            for j in 0..left {
                let a = -2.0 * unit(j, left);
                out.push(complex_point(curve, Complex64::new(a, (5.0 * a * (a - 1.0)).sqrt())));
            }
            for j in 0..right {
                let a = 1.0 + 2.0 * unit(j, right);
                out.push(complex_point(curve, Complex64::new(a, (5.0 * a * (a - 1.0)).sqrt())));
            }
            out.truncate(n);
            out
        }
        CurveId::GammaS => {
            let pts: Vec<Result<CurvePoint>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let l = unit(j, n);
                    if j == 0 || j == n - 1 {
                        Ok(real_point(curve, l, l))
                    } else {
                        gamma_s_mu(l).map(|m| real_point(curve, l, m))
                    }
                })
                .collect();
            pts.into_iter().collect::<Result<Vec<_>>>()?
        }
    })
}

/// Roots `x₁ < x₂ ≤ x₃` of `(P(x) − h_λ)/(x − λ)²` for a real point above `γ`.
fn eight_loop_roots(lambda: f64, mu: f64) -> Result<[f64; 3]> {
    let model = build_normal_form(ParameterPoint::real(lambda, mu)?);
    let hl = model.critical_values().h_lambda.re;
    let (cubic, _) = model.p().shifted(hl).divide_quadratic(lambda, lambda);
    let roots = cubic.level_roots(0.0)?;
    if roots.iter().any(|z| z.im != 0.0) {
        return Err(Error::Bracketing(format!(
            "eight loop absent at (lambda, mu) = ({lambda}, {mu})"
        )));
    }
    Ok([roots[0].re, roots[1].re, roots[2].re])
}

/// `φ(h_λ) = I₁(h_λ) − λ I₀(h_λ)` for the eight-loop family, written as
/// `√10 (∫_λ^{x₃} − ∫_{x₂}^λ) dx/√p(x)` with `p = (x − x₁)(x − x₂)(x₃ − x)`.
pub fn gamma_s_phi(lambda: f64, mu: f64) -> Result<f64> {
    let [x1, x2, x3] = eight_loop_roots(lambda, mu)?;
    if !(x1 < x2 && x2 <= lambda + 1e-12 && lambda <= x3 + 1e-12) {
        return Err(Error::Bracketing(format!(
            "unexpected root order {x1}, {x2}, {x3} around lambda = {lambda}"
        )));
    }
    // Complete part ∫_{x₂}^{x₃} by Gauss–Chebyshev, weight 1/√((x−x₂)(x₃−x)).
    let (mid, rad) = (0.5 * (x2 + x3), 0.5 * (x3 - x2));
    let mut complete = f64::NAN;
    let mut prev = f64::NAN;
    let mut n = 32;
    while n <= 1 << 16 {
        let s: f64 = chebyshev_nodes(n).map(|t| 1.0 / (mid + rad * t - x1).sqrt()).sum::<f64>()
            * std::f64::consts::PI
            / n as f64;
        if (s - prev).abs() <= 1e-10 * s.abs() {
            complete = s;
            break;
        }
        prev = s;
        complete = s;
        n *= 2;
    }
    // Partial part ∫_{x₂}^{λ} with x = x₂ + u².
    let top = (lambda - x2).max(0.0).sqrt();
    let (partial, _, _) = legendre_adaptive(
        |u| {
            let x = x2 + u * u;
            2.0 / ((x - x1) * (x3 - x).max(0.0)).sqrt()
        },
        0.0,
        top,
        1e-10,
        16,
        1 << 14,
    );
    Ok(10f64.sqrt() * (complete - 2.0 * partial))
}

/// `μ` on `γ_s` at fixed `λ ∈ (0, 1)`, found by bisection between `γ` and
/// the diagonal.
pub fn gamma_s_mu(lambda: f64) -> Result<f64> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside (0, 1)")));
    }
    let span = lambda - gamma_mu(lambda);
    let mut lo = gamma_mu(lambda) + 1e-9 * span.max(1e-300);
    let mut hi = lambda - 1e-9 * span.max(1e-300);
    let f_lo = gamma_s_phi(lambda, lo)?;
    let f_hi = gamma_s_phi(lambda, hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracketing(format!(
            "gamma_s: no sign change of phi at lambda = {lambda} ({f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    let s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * lambda {
            break;
        }
        if gamma_s_phi(lambda, mid)?.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `γ_s` as a table of `(λ, μ)` with monotone piecewise-cubic interpolation.
#[derive(Debug, Clone)]
pub struct GammaSTable {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    slope: Vec<f64>,
}

impl GammaSTable {
    pub fn build(n: usize) -> Result<Self> {
        let pts = curve_samples(CurveId::GammaS, n.max(3))?;
        let lambda: Vec<f64> = pts.iter().map(|p| p.lambda.re).collect();
        let mu: Vec<f64> = pts.iter().map(|p| p.mu.re).collect();
        let slope = fritsch_carlson_slopes(&lambda, &mu);
        Ok(Self { lambda, mu, slope })
    }

    pub fn mu_at(&self, l: f64) -> f64 {
        let n = self.lambda.len();
        let l = l.clamp(self.lambda[0], self.lambda[n - 1]);
        let i = match self.lambda.partition_point(|&x| x <= l) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.lambda[i + 1] - self.lambda[i];
        let t = (l - self.lambda[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.mu[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope[i]
            + (-2.0 * t3 + 3.0 * t2) * self.mu[i + 1]
            + (t3 - t2) * h * self.slope[i + 1]
    }
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d[i];
        let b = m[i + 1] / d[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            m[i] = t * a * d[i];
            m[i + 1] = t * b * d[i];
        }
    }
    m
}

/// `P'''(μ)/(3P''(μ))`, the sign predictor for `F'(h_μ)` on `𝒪_μ`.
pub fn center_a1(lambda: f64, mu: f64) -> f64 {
    let p = build_normal_form(ParameterPoint::real(lambda, mu).expect("valid point"));
    let d = p.derivatives(mu.into());
    d.d3p.re / (3.0 * d.d2p.re)
}

/// True if a real point lies strictly between `γ_c` and `γ` (the region `Ω_μ`).
pub fn in_omega_mu(lambda: f64, mu: f64) -> bool {
    let (a, b) = (gamma_c_mu(lambda), gamma_mu(lambda));
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo + CURVE_TOL < mu && mu < hi - CURVE_TOL
}

/// True if `λ` lies inside the disk bounded by the complex `γ_c`.
pub fn in_omega_1(lambda: Complex64) -> bool {
    (lambda - 2.0).norm() < 1.0 - CURVE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(l: f64, m: f64) -> ParameterPoint {
        ParameterPoint::real(l, m).unwrap()
    }

    #[test]
    fn above_gamma_has_three_annuli() {
        assert!((gamma_mu(0.5) - 7.0 / 30.0).abs() < 1e-15);
        let r = classify(real(0.5, 0.25));
        assert_eq!(r.region, Region::RealAboveGamma);
        assert_eq!(r.annuli.len(), 3);
        let o1 = r.annulus(AnnulusKind::O1).unwrap();
        assert!((o1.h_c() + 1.0 / 120.0).abs() < 1e-16);
        assert!((o1.h_s() + 1.0 / 3840.0).abs() < 1e-17);
        assert!(o1.exceptional);
        assert!(!r.annulus(AnnulusKind::OMu).unwrap().exceptional);
        let oe = r.annulus(AnnulusKind::OE).unwrap();
        assert_eq!(oe.sigma, (r.critical_values.h_lambda.re, 0.0));
        assert_eq!(r.critical_ordering, "h1<hmu<hlambda<h0");
    }

    #[test]
    fn below_gamma_has_two_annuli() {
        let r = classify(real(0.6, 0.2585));
        assert_eq!(r.region, Region::RealBelowGamma);
        assert_eq!(r.annuli.len(), 2);
        assert!(in_omega_mu(0.6, 0.2585));
        assert!(center_a1(0.6, 0.2585) < 0.0);
    }

    #[test]
    fn complex_branches() {
        let left = ParameterPoint::complex(Complex64::new(-1.0, 0.5)).unwrap();
        let r = classify(left);
        assert_eq!(r.region, Region::ComplexLeftBranch);
        assert_eq!(r.annuli.len(), 1);
        assert!(r.annuli[0].exceptional);
        assert!(exceptional(left, &r.annuli[0]));

        let right = ParameterPoint::complex(Complex64::new(2.0, 0.1)).unwrap();
        let r = classify(right);
        assert_eq!(r.region, Region::ComplexRightBranch);
        assert!(!exceptional(right, &r.annuli[0]));

        let mid = ParameterPoint::complex(Complex64::new(0.5, 0.3)).unwrap();
        assert_eq!(classify(mid).region, Region::ComplexBetweenBranches);
    }

    #[test]
    fn dynkin_lookup() {
        let r = classify(real(0.5, 0.25));
        let d = r.dynkin.unwrap();
        let edges: usize = d.iter().flatten().map(|&v| v as usize).sum::<usize>() / 2;
        assert_eq!(edges, 3);
        assert_eq!(d[3][2], 1);
        assert_eq!(d[2][1], 1);
        assert_eq!(d[1][0], 1);

        let mid = classify(ParameterPoint::complex(Complex64::new(0.5, 0.3)).unwrap());
        let d = mid.dynkin.unwrap();
        assert_eq!(d.iter().flatten().map(|&v| v as usize).sum::<usize>() / 2, 5);
        assert_eq!(d[0][3], 1);

        let left = classify(ParameterPoint::complex(Complex64::new(-1.0, 0.5)).unwrap());
        let d = left.dynkin.unwrap();
        assert_eq!(d[3][2], 0);
        assert_eq!(d[3][1], 0);

        let degenerate = classify(real(0.4, 0.4));
        assert!(degenerate.dynkin.is_none());
    }

    #[test]
    fn curve_samples_closed_forms() {
        let g = curve_samples(CurveId::Gamma, 5).unwrap();
        assert!((g[4].mu.re - 0.4).abs() < 1e-15);
        for p in curve_samples(CurveId::GammaCComplex, 16).unwrap() {
            assert!(((p.lambda - 2.0).norm() - 1.0).abs() < 1e-14);
        }
        for p in curve_samples(CurveId::Hyperbola, 10).unwrap() {
            assert!(hyperbola_value(p.lambda).abs() < 1e-12);
        }
        for p in curve_samples(CurveId::GammaCReal, 7).unwrap() {
            let (l, m) = (p.lambda.re, p.mu.re);
            assert!((3.0 * m * m - 2.0 * m * (1.0 + l) + l).abs() < 1e-14);
        }
        assert!(curve_samples(CurveId::Gamma, 1).is_err());
    }

    #[test]
    fn gamma_s_lies_above_gamma() {
        for l in [0.2, 0.5, 0.8] {
            let m = gamma_s_mu(l).unwrap();
            assert!(m > gamma_mu(l) && m < l, "lambda {l}: mu {m}");
            assert!(gamma_s_phi(l, m).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn phi_diverges_towards_gamma() {
        let l = 0.5;
        let g = gamma_mu(l);
        let a = gamma_s_phi(l, g + 1e-4).unwrap();
        let b = gamma_s_phi(l, g + 1e-8).unwrap();
        assert!(b < a && a < 0.0);
    }

    #[test]
    fn csv_rows() {
        let p = real_point(CurveId::Gamma, 1.0, 0.4);
        assert_eq!(p.csv_row(), "gamma,1,0,0.4");
        let c = complex_point(CurveId::GammaCComplex, Complex64::new(2.0, 1.0));
        assert_eq!(c.csv_row(), "gamma_c_complex,2,1,");
    }
}

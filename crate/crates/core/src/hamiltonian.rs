//! Hyperelliptic Hamiltonians `H = f·y² + P(x)`.
//!
//! Two families are supported: the quintic normal form with critical points
//! at `0, μ, λ, 1` (`f = 1/2`), and the center family
//! `H = y² + x² + a₁x³ + … + a_{n−2}xⁿ` (`f = 1`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParameterCase {
    Real,
    Complex,
}

/// Position of the critical points `μ` and `λ` of the normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    lambda: Complex64,
    mu: Complex64,
    case: ParameterCase,
}

impl ParameterPoint {
    /// Real case, `0 ≤ μ ≤ λ ≤ 1`.
    pub fn real(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if !(0.0 <= mu && mu <= lambda && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "real parameters must satisfy 0 <= mu <= lambda <= 1 (lambda = {lambda}, mu = {mu})"
            )));
        }
        Ok(Self {
            lambda: lambda.into(),
            mu: mu.into(),
            case: ParameterCase::Real,
        })
    }

    /// Complex case, `μ = conj(λ)` with `Im λ ≠ 0`.
    pub fn complex(lambda: Complex64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if lambda.im == 0.0 {
            return Err(Error::InvalidParameter(
                "complex case requires Im(lambda) != 0".into(),
            ));
        }
        Ok(Self {
            lambda,
            mu: lambda.conj(),
            case: ParameterCase::Complex,
        })
    }

    /// Validates an arbitrary `(λ, μ)` pair against both cases.
    pub fn new(lambda: Complex64, mu: Complex64) -> Result<Self> {
        if lambda.im == 0.0 && mu.im == 0.0 {
            Self::real(lambda.re, mu.re)
        } else if mu == lambda.conj() {
            Self::complex(lambda)
        } else {
            Err(Error::InvalidParameter(format!(
                "complex parameters must be conjugate (lambda = {lambda}, mu = {mu})"
            )))
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn case(&self) -> ParameterCase {
        self.case
    }

    pub fn is_real(&self) -> bool {
        self.case == ParameterCase::Real
    }
}

/// `H = y_factor·y² + P(x)` with real polynomial `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    y_factor: f64,
    p: Poly,
}

/// Local type of a real critical point of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    /// Local minimum of `P`: a center of the Hamiltonian field.
    Center,
    /// Local maximum of `P`: a saddle.
    Saddle,
    /// `P'` does not change sign: a cusp.
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealCritical {
    pub x: f64,
    pub value: f64,
    pub kind: CriticalKind,
}

impl Hamiltonian {
    pub fn new(y_factor: f64, p: Poly) -> Result<Self> {
        if !(y_factor > 0.0 && y_factor.is_finite()) {
            return Err(Error::InvalidInput(format!("y factor must be positive, got {y_factor}")));
        }
        if p.degree() < 2 {
            return Err(Error::InvalidInput("P must have degree >= 2".into()));
        }
        Ok(Self { y_factor, p })
    }

    pub fn y_factor(&self) -> f64 {
        self.y_factor
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }

    /// Factor `2√f` converting `∫ xᵏ dx / √(h − P)` over `[α, β]` into the
    /// cycle integral `∮ xᵏ dx / y`.
    pub fn cycle_factor(&self) -> f64 {
        2.0 * self.y_factor.sqrt()
    }

    pub fn energy(&self, x: f64, y: f64) -> f64 {
        self.y_factor * y * y + self.p.eval(x)
    }

    /// Real critical points of `P` with their local type, ascending in `x`.
    ///
    /// Critical points closer than `cluster_tol` are merged; a merged cluster
    /// of even size becomes a cusp.
    pub fn real_critical_points(&self) -> Result<Vec<RealCritical>> {
        let dp = self.p.derivative();
        let roots = dp.level_roots(0.0)?;
        let reals: Vec<f64> = roots.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
        let cluster_tol = 1e-7;
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for x in reals {
            match groups.last_mut() {
                Some(g) if (x - g[g.len() - 1]).abs() < cluster_tol => g.push(x),
                _ => groups.push(vec![x]),
            }
        }
        let d2 = dp.derivative();
        Ok(groups
            .into_iter()
            .map(|g| {
                let x = g.iter().sum::<f64>() / g.len() as f64;
                let kind = if g.len() % 2 == 0 {
                    CriticalKind::Cusp
                } else if g.len() == 1 {
                    if d2.eval(x) > 0.0 {
                        CriticalKind::Center
                    } else {
                        CriticalKind::Saddle
                    }
                } else {
                    // Odd cluster: sign of P' changes like a simple root; use the
                    // sign of P' just right of the cluster.
                    let probe = x + 10.0 * cluster_tol;
                    if dp.eval(probe) > 0.0 {
                        CriticalKind::Center
                    } else {
                        CriticalKind::Saddle
                    }
                };
                RealCritical {
                    x,
                    value: self.p.eval(x),
                    kind,
                }
            })
            .collect())
    }
}

/// Critical levels of the normal form at the critical points `0, μ, λ, 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub h0: Complex64,
    pub h_mu: Complex64,
    pub h_lambda: Complex64,
    pub h1: Complex64,
}

impl CriticalValues {
    /// Closed forms in terms of `(λ, μ)`.
    pub fn closed_form(lambda: Complex64, mu: Complex64) -> Self {
        let l = lambda;
        let m = mu;
        let h1 = -(3.0 - 5.0 * l - 5.0 * m + 10.0 * l * m) / 60.0;
        let h_lambda = -(l * l * l / 60.0) * (3.0 * l * l - 5.0 * l * m - 5.0 * l + 10.0 * m);
        let h_mu = -(m * m * m / 60.0) * (3.0 * m * m - 5.0 * l * m - 5.0 * m + 10.0 * l);
        Self {
            h0: Complex64::new(0.0, 0.0),
            h_mu,
            h_lambda,
            h1,
        }
    }
}

/// The normal form `H = y²/2 + P(x)`, `P' = x(x − μ)(x − λ)(x − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    point: ParameterPoint,
    hamiltonian: Hamiltonian,
    critical_points: [Complex64; 4],
    critical_values: CriticalValues,
}

/// Value of `P` and its first four derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub p: Complex64,
    pub dp: Complex64,
    pub d2p: Complex64,
    pub d3p: Complex64,
    pub d4p: Complex64,
}

/// Ascending coefficients of the normal-form `P` for `(λ, μ)`.
pub fn normal_form_coeffs(lambda: Complex64, mu: Complex64) -> [Complex64; 6] {
    let zero = Complex64::new(0.0, 0.0);
    [
        zero,
        zero,
        -lambda * mu / 2.0,
        (lambda + mu + lambda * mu) / 3.0,
        -(1.0 + lambda + mu) / 4.0,
        Complex64::new(0.2, 0.0),
    ]
}

/// Builds the normal form for a validated parameter point.
pub fn build_normal_form(point: ParameterPoint) -> HamiltonianModel {
    let c = normal_form_coeffs(point.lambda, point.mu);
    // Coefficients are real in both cases (μ = conj λ in the complex case).
    let p = Poly::new(c.iter().map(|z| z.re).collect());
    let hamiltonian = Hamiltonian { y_factor: 0.5, p };
    let critical_points = [
        Complex64::new(0.0, 0.0),
        point.mu,
        point.lambda,
        Complex64::new(1.0, 0.0),
    ];
    let mut critical_values = CriticalValues::closed_form(point.lambda, point.mu);
    if point.is_real() {
        for v in [
            &mut critical_values.h_mu,
            &mut critical_values.h_lambda,
            &mut critical_values.h1,
        ] {
            v.im = 0.0;
        }
    }
    HamiltonianModel {
        point,
        hamiltonian,
        critical_points,
        critical_values,
    }
}

impl HamiltonianModel {
    pub fn point(&self) -> ParameterPoint {
        self.point
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn y_factor(&self) -> f64 {
        self.hamiltonian.y_factor
    }

    pub fn p(&self) -> &Poly {
        &self.hamiltonian.p
    }

    /// Coefficients of `P` as complex numbers, ascending.
    pub fn p_coeffs(&self) -> Vec<Complex64> {
        self.p().coeffs().iter().map(|&c| c.into()).collect()
    }

    /// Critical points in the order `0, μ, λ, 1`.
    pub fn critical_points(&self) -> [Complex64; 4] {
        self.critical_points
    }

    pub fn critical_values(&self) -> CriticalValues {
        self.critical_values
    }

    /// `P` and its derivatives up to order four at `x`.
    pub fn derivatives(&self, x: Complex64) -> Derivatives {
        let d = self.p().derivatives_at(x, 5);
        Derivatives {
            p: d[0],
            dp: d[1],
            d2p: d[2],
            d3p: d[3],
            d4p: d[4],
        }
    }

    /// The five roots of `P(x) = h`, sorted by real then imaginary part.
    pub fn solve_level(&self, h: Complex64) -> Result<Vec<Complex64>> {
        self.p().level_roots_c(h)
    }
}

/// Critical values by direct evaluation of `P` at the critical points.
pub fn critical_values(m: &HamiltonianModel) -> CriticalValues {
    let [c0, cm, cl, c1] = m.critical_points;
    let p = m.p();
    CriticalValues {
        h0: p.eval_c(c0),
        h_mu: p.eval_c(cm),
        h_lambda: p.eval_c(cl),
        h1: p.eval_c(c1),
    }
}

/// Center family `H = y² + x²(1 + a₁x + … + a_{n−2}x^{n−2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterFamilyModel {
    a: Vec<f64>,
}

impl CenterFamilyModel {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "center family needs degree n >= 5 (genus >= 2), got n = {}",
                a.len() + 2
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        if a[a.len() - 1] == 0.0 {
            return Err(Error::InvalidParameter("leading coefficient a_{n-2} must be nonzero".into()));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.a.len() + 2
    }

    pub fn genus(&self) -> usize {
        (self.degree() - 1) / 2
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        let mut c = vec![0.0, 0.0, 1.0];
        c.extend_from_slice(&self.a);
        Hamiltonian {
            y_factor: 1.0,
            p: Poly::new(c),
        }
    }

    /// Smallest positive critical value other than the center level `0`,
    /// i.e. the upper end of the period annulus around the origin
    /// (`+∞` if the annulus is unbounded).
    pub fn annulus_top(&self) -> Result<f64> {
        let h = self.hamiltonian();
        let crit = h.real_critical_points()?;
        let p = h.p();
        // Walk left and right from the origin to the first non-minimum critical point.
        let mut left = f64::INFINITY;
        let mut right = f64::INFINITY;
        for c in crit.iter().filter(|c| c.x.abs() > 1e-9) {
            if c.x > 0.0 && c.kind != CriticalKind::Center {
                right = right.min(c.x);
            }
            if c.x < 0.0 && c.kind != CriticalKind::Center {
                left = if left.is_finite() { left.max(c.x) } else { c.x };
            }
        }
        let value = |x: f64| if x.is_finite() { p.eval(x) } else { f64::INFINITY };
        // Unbounded side: P → −∞ there closes nothing off.
        let lv = if left.is_finite() {
            value(left)
        } else if p.eval(-1e6).is_sign_negative() {
            0.0
        } else {
            f64::INFINITY
        };
        let rv = if right.is_finite() {
            value(right)
        } else if p.eval(1e6).is_sign_negative() {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(lv.min(rv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real_model(l: f64, m: f64) -> HamiltonianModel {
        build_normal_form(ParameterPoint::real(l, m).unwrap())
    }

    #[test]
    fn normal_form_at_corner() {
        let m = real_model(1.0, 0.0);
        let c = m.p().coeffs();
        assert_eq!(c.len(), 6);
        assert_relative_eq!(c[3], 1.0 / 3.0);
        assert_relative_eq!(c[4], -0.5);
        assert_relative_eq!(c[5], 0.2);
        assert_relative_eq!(m.critical_values().h1.re, 1.0 / 30.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_critical_values() {
        let m = real_model(0.5, 0.25);
        assert_relative_eq!(m.critical_values().h_lambda.re, -1.0 / 3840.0, epsilon = 1e-17);
        assert_eq!(m.critical_values().h0.norm(), 0.0);
        let m = real_model(1.0, 1.0);
        assert_relative_eq!(m.critical_values().h1.re, -1.0 / 20.0, epsilon = 1e-16);
        let m = real_model(0.4, 0.4);
        let cv = m.critical_values();
        assert_relative_eq!(cv.h_lambda.re, cv.h_mu.re, epsilon = 1e-17);
    }

    #[test]
    fn closed_forms_match_direct_evaluation() {
        for (l, mu) in [(0.5, 0.25), (0.9, 0.1), (0.3, 0.3)] {
            let m = real_model(l, mu);
            let a = m.critical_values();
            let b = critical_values(&m);
            for (x, y) in [(a.h0, b.h0), (a.h_mu, b.h_mu), (a.h_lambda, b.h_lambda), (a.h1, b.h1)] {
                assert!((x - y).norm() < 1e-15);
            }
        }
        let m = build_normal_form(ParameterPoint::complex(Complex64::new(-1.0, 0.5)).unwrap());
        let a = m.critical_values();
        let b = critical_values(&m);
        assert!((a.h_lambda - b.h_lambda).norm() < 1e-14);
        assert!((a.h_mu - a.h_lambda.conj()).norm() < 1e-14);
        assert_eq!(a.h1.im, 0.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(ParameterPoint::real(0.3, 0.5).is_err());
        assert!(ParameterPoint::real(1.2, 0.5).is_err());
        assert!(ParameterPoint::real(0.5, -0.1).is_err());
        assert!(ParameterPoint::complex(Complex64::new(0.5, 0.0)).is_err());
        let bad = ParameterPoint::new(Complex64::new(0.5, 0.2), Complex64::new(0.5, 0.3));
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
        assert!(ParameterPoint::new(Complex64::new(0.5, 0.2), Complex64::new(0.5, -0.2)).is_ok());
    }

    #[test]
    fn derivative_examples() {
        let m = real_model(0.6, 0.2);
        let d = m.derivatives(Complex64::new(1.0, 0.0));
        assert_relative_eq!(d.d2p.re, 0.4 * 0.8, epsilon = 1e-14);
        assert!(m.derivatives(Complex64::new(0.0, 0.0)).dp.norm() < 1e-16);
        let x = Complex64::new(0.37, 0.0);
        assert_relative_eq!(m.derivatives(x).d4p.re, 24.0 * 0.37 - 6.0 * 1.8, epsilon = 1e-13);
    }

    #[test]
    fn level_roots_at_critical_levels() {
        let m = real_model(0.5, 0.25);
        let h1 = m.critical_values().h1;
        let r = m.solve_level(h1).unwrap();
        let near_one = r.iter().filter(|z| (*z - 1.0).norm() < 1e-6).count();
        assert!(near_one >= 2);

        let m = real_model(1.0, 0.0);
        let r = m.solve_level(Complex64::new(0.0, 0.0)).unwrap();
        let near_zero = r.iter().filter(|z| z.norm() < 1e-4).count();
        assert_eq!(near_zero, 3);
    }

    #[test]
    fn center_family_basics() {
        let cf = CenterFamilyModel::new(vec![0.1, 0.05, -0.2]).unwrap();
        assert_eq!(cf.degree(), 5);
        assert_eq!(cf.genus(), 2);
        assert!(CenterFamilyModel::new(vec![0.1, 0.0]).is_err());
        assert!(CenterFamilyModel::new(vec![0.1, 0.2, 0.0]).is_err());
        let top = cf.annulus_top().unwrap();
        assert!(top > 0.0 && top.is_finite());
        let cf7 = CenterFamilyModel::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(cf7.genus(), 3);
    }
}

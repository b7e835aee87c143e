//! Dense univariate polynomials with real coefficients.
//!
//! Coefficients are stored in ascending order. Root finding goes through the
//! eigenvalues of the companion matrix followed by a Newton polish, which keeps
//! clustered roots near critical levels well separated.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Relative distance under which two roots are treated as a conjugate pair.
pub const CONJUGATE_PAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c)
    }

    /// Sum of |c_i| |x|^i, the natural scale for rounding errors of [`Poly::eval`].
    pub fn abs_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Values of `p, p', p'', ...` (up to `count` entries) at `z`, by repeated
    /// synthetic division.
    pub fn derivatives_at(&self, z: Complex64, count: usize) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let mut work: Vec<Complex64> = self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let mut out = Vec::with_capacity(count);
        let mut factorial = 1.0;
        for k in 0..count {
            if k >= n {
                out.push(Complex64::zero());
                continue;
            }
            // Horner pass: work[k..] holds the Taylor coefficients being peeled off.
            for i in (k..n - 1).rev() {
                let carry = work[i + 1];
                work[i] += carry * z;
            }
            if k > 0 {
                factorial *= k as f64;
            }
            out.push(work[k] * factorial);
        }
        out
    }

    /// `p(x) - h` as a polynomial.
    pub fn shifted(&self, h: f64) -> Poly {
        let mut c = self.coeffs.clone();
        c[0] -= h;
        Poly::new(c)
    }

    /// Divide by the monic quadratic `(x - a)(x - b)`, returning the quotient
    /// and the two remainder coefficients `[r0, r1]`.
    pub fn divide_quadratic(&self, a: f64, b: f64) -> (Poly, [f64; 2]) {
        let n = self.degree();
        if n < 2 {
            return (Poly::new(vec![0.0]), [self.coeffs[0], *self.coeffs.get(1).unwrap_or(&0.0)]);
        }
        let s = a + b;
        let p = a * b;
        let mut q = vec![0.0; n - 1];
        let mut r = self.coeffs.clone();
        for k in (0..n - 1).rev() {
            let t = r[k + 2];
            q[k] = t;
            r[k + 1] += s * t;
            r[k] -= p * t;
            r[k + 2] = 0.0;
        }
        (Poly::new(q), [r[0], r[1]])
    }

    /// All complex roots of `p(x) = h`, sorted and conjugate-paired.
    pub fn level_roots(&self, h: f64) -> Result<Vec<Complex64>> {
        let coeffs: Vec<Complex64> = self.shifted(h).coeffs.iter().map(|&c| c.into()).collect();
        let mut roots = polish_roots(&coeffs, companion_roots(&coeffs)?)?;
        pair_conjugates(&mut roots);
        sort_roots(&mut roots);
        Ok(roots)
    }

    /// All complex roots of `p(x) = h` for complex `h`, sorted by (re, im).
    /// Conjugate pairing is applied only when `h` is real.
    pub fn level_roots_c(&self, h: Complex64) -> Result<Vec<Complex64>> {
        if h.im == 0.0 {
            return self.level_roots(h.re);
        }
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().map(|&c| c.into()).collect();
        coeffs[0] -= h;
        let mut roots = polish_roots(&coeffs, companion_roots(&coeffs)?)?;
        sort_roots(&mut roots);
        Ok(roots)
    }

    /// Real roots of `p`, ascending; roots whose imaginary part is below the
    /// pairing tolerance are reported as real.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        Ok(self
            .level_roots(0.0)?
            .into_iter()
            .filter(|z| z.im == 0.0)
            .map(|z| z.re)
            .collect())
    }
}

fn eval_complex(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    // Residual scale with |z| floored at 1: clustered roots near the origin
    // cannot be resolved beyond the absolute size of the coefficients.
    let mut scale = 0.0;
    let az = z.norm().max(1.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.norm();
    }
    (p, dp, scale)
}

/// Eigenvalues of the companion matrix of the polynomial with ascending
/// complex coefficients.
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1].is_zero() {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(m, 1e-15, 10_000).ok_or(Error::RootFinding {
        max_residual: f64::INFINITY,
    })?;
    let eig = schur.eigenvalues().ok_or(Error::RootFinding {
        max_residual: f64::INFINITY,
    })?;
    Ok(eig.iter().copied().collect())
}

/// Newton polish of approximate roots; a step is kept only when it lowers the
/// residual. Fails when some residual stays above `1e-8` of its natural scale.
pub fn polish_roots(coeffs: &[Complex64], roots: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let mut worst: f64 = 0.0;
    let out = roots
        .into_iter()
        .map(|mut z| {
            let (mut p, mut dp, mut scale) = eval_complex(coeffs, z);
            for _ in 0..4 {
                if dp.is_zero() || p.norm() <= f64::EPSILON * scale {
                    break;
                }
                let cand = z - p / dp;
                let (pc, dpc, sc) = eval_complex(coeffs, cand);
                if pc.norm() < p.norm() {
                    z = cand;
                    p = pc;
                    dp = dpc;
                    scale = sc;
                } else {
                    break;
                }
            }
            worst = worst.max(p.norm() / scale.max(f64::MIN_POSITIVE));
            z
        })
        .collect();
    if worst > 1e-8 || !worst.is_finite() {
        return Err(Error::RootFinding { max_residual: worst });
    }
    Ok(out)
}

/// Make conjugate pairs exactly conjugate and snap self-conjugate roots to
/// the real axis.
pub fn pair_conjugates(roots: &mut [Complex64]) {
    let n = roots.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let zi = roots[i];
        let tol = CONJUGATE_PAIR_TOL * (1.0 + zi.norm());
        if (zi - zi.conj()).norm() < tol {
            roots[i] = Complex64::new(zi.re, 0.0);
            done[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !done[j])
            .min_by(|&a, &b| {
                let da = (roots[a] - zi.conj()).norm();
                let db = (roots[b] - zi.conj()).norm();
                da.total_cmp(&db)
            });
        if let Some(j) = partner {
            if (roots[j] - zi.conj()).norm() < tol {
                let re = 0.5 * (zi.re + roots[j].re);
                let im = 0.5 * (zi.im.abs() + roots[j].im.abs());
                let sign = if zi.im >= 0.0 { 1.0 } else { -1.0 };
                roots[i] = Complex64::new(re, sign * im);
                roots[j] = Complex64::new(re, -sign * im);
                done[i] = true;
                done[j] = true;
            }
        }
    }
}

pub fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Safeguarded Newton iteration for a root of `p(x) = h` in `[lo, hi]`,
/// assuming `p - h` changes sign there.
pub fn bracketed_root(p: &Poly, h: f64, lo: f64, hi: f64) -> Result<f64> {
    let dp = p.derivative();
    let f = |x: f64| p.eval(x) - h;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change of p - h on [{lo}, {hi}] (h = {h})"
        )));
    }
    // Orient so that f(a) < 0 < f(b).
    if fa > 0.0 {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = dp.eval(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        let inside = newton.is_finite() && (newton - a) * (newton - b) < 0.0;
        let next = if inside { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || (a - b).abs() <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn horner_and_derivatives_agree() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        let p = Poly::new(vec![2.0, -3.0, 0.0, 1.0]);
        assert_eq!(p.eval(1.0), 0.0);
        let d = p.derivatives_at(Complex64::new(2.0, 0.0), 5);
        assert_relative_eq!(d[0].re, 4.0);
        assert_relative_eq!(d[1].re, 9.0);
        assert_relative_eq!(d[2].re, 12.0);
        assert_relative_eq!(d[3].re, 6.0);
        assert_eq!(d[4].re, 0.0);
    }

    #[test]
    fn quadratic_division_is_exact_on_roots() {
        let p = Poly::new(vec![2.0, -3.0, 0.0, 1.0]);
        let (q, r) = p.divide_quadratic(1.0, -2.0);
        assert_relative_eq!(q.coeffs()[0], -1.0, epsilon = 1e-14);
        assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14);
    }

    #[test]
    fn roots_of_cubic_with_double_root() {
        let p = Poly::new(vec![2.0, -3.0, 0.0, 1.0]);
        let r = p.level_roots(0.0).unwrap();
        assert_eq!(r.len(), 3);
        assert_relative_eq!(r[0].re, -2.0, epsilon = 1e-12);
        assert!((r[1].re - 1.0).abs() < 1e-7 && (r[2].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn conjugate_pairs_are_exact() {
        // x^2 + 1 shifted: roots ±i
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        let r = p.level_roots(0.0).unwrap();
        assert_eq!(r[0], r[1].conj());
        assert!(r[0].im < 0.0);
    }

    #[test]
    fn bracketed_root_finds_sqrt2() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        let x = bracketed_root(&p, 2.0, 0.0, 3.0).unwrap();
        assert_relative_eq!(x, 2f64.sqrt(), epsilon = 1e-15);
        assert!(bracketed_root(&p, 2.0, 2.0, 3.0).is_err());
    }
}

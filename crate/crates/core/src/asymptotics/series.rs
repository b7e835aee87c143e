//! Truncated power series, exact over rationals or approximate over `f64`,
//! and the center expansions of `I_k(t)` built from them.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive};

use crate::error::{Error, Result};
use crate::hamiltonian::CenterFamilyModel;

/// Largest order accepted by [`reverse_series`].
pub const MAX_REVERSION_ORDER: usize = 30;

pub trait Coefficient: Clone + Num + Neg<Output = Self> + Debug {
    fn from_ratio(n: i64, d: i64) -> Self;
    fn as_f64(&self) -> f64;
}

impl Coefficient for f64 {
    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Coefficient for BigRational {
    fn from_ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational value of a finite double.
pub fn to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite coefficient {x}")))
}

/// `Σ c_j X^j` for `j ≤ order`; products and compositions truncate at the
/// smaller order of their operands.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Coefficient> PowerSeries<T> {
    /// Coefficients in ascending powers; the order is `coeffs.len() − 1`.
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![T::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    /// The series `X`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `X^j`, zero beyond the order.
    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new((0..=order).map(|j| self.coeff(j)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|j| self.coeffs[j].clone() + other.coeffs[j].clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|j| self.coeffs[j].clone() - other.coeffs[j].clone()).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|v| v.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::one(self.order());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `self^(p/q)` for a series with constant term one.
    pub fn pow_ratio(&self, p: i64, q: i64) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::InvalidInput("fractional power needs constant term 1".into()));
        }
        let n = self.order();
        let alpha = T::from_ratio(p, q);
        let mut w = vec![T::zero(); n + 1];
        w[0] = T::one();
        // s·w' = α·s'·w, solved term by term.
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                let f = (alpha.clone() + T::one()) * T::from_ratio(k as i64, 1) - T::from_ratio(m as i64, 1);
                acc = acc + f * self.coeffs[k].clone() * w[m - k].clone();
            }
            w[m] = acc / T::from_ratio(m as i64, 1);
        }
        Ok(Self::new(w))
    }

    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::new(
            (1..=self.order())
                .map(|j| self.coeffs[j].clone() * T::from_ratio(j as i64, 1))
                .collect(),
        )
    }

    /// `self(inner(X))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::InvalidInput("inner series must vanish at 0".into()));
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut out = Self::zero(n);
        for c in self.coeffs.iter().take(n + 1).rev() {
            out = out.mul(&inner);
            out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> PowerSeries<f64> {
        PowerSeries::new(self.coeffs.iter().map(Coefficient::as_f64).collect())
    }
}

impl PowerSeries<f64> {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// `1 + a₁x + a₂x² + …` truncated at `order`.
fn one_plus<T: Coefficient>(a: &[T], order: usize) -> PowerSeries<T> {
    let mut c = vec![T::zero(); order + 1];
    c[0] = T::one();
    for (j, v) in a.iter().enumerate() {
        if j < order {
            c[j + 1] = v.clone();
        }
    }
    PowerSeries::new(c)
}

/// `X(x) = x·(1 + a₁x + … + a_{n−2}x^{n−2})^{1/2}`.
pub fn forward_map<T: Coefficient>(a: &[T], order: usize) -> Result<PowerSeries<T>> {
    if order == 0 {
        return Ok(PowerSeries::zero(0));
    }
    let root = one_plus(a, order - 1).pow_ratio(1, 2)?;
    let mut c = vec![T::zero()];
    c.extend(root.coeffs().iter().cloned());
    Ok(PowerSeries::new(c))
}

/// Inverse `x = φ(X)` of [`forward_map`] by Lagrange inversion:
/// `[X^j]φ = (1/j)[x^{j−1}] w^j` with `w = (1 + a₁x + …)^{−1/2}`.
fn reversion<T: Coefficient>(a: &[T], order: usize) -> Result<PowerSeries<T>> {
    let mut c = vec![T::zero(); order + 1];
    if order == 0 {
        return Ok(PowerSeries::new(c));
    }
    let w = one_plus(a, order - 1).pow_ratio(-1, 2)?;
    let mut pw = w.clone();
    for (j, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = pw.coeff(j - 1) / T::from_ratio(j as i64, 1);
        if j < order {
            pw = pw.mul(&w);
        }
    }
    Ok(PowerSeries::new(c))
}

/// `φ(X) = X + A₁X² + A₂X³ + …` through `X^order`, for `order ≤ 30`.
pub fn reverse_series<T: Coefficient>(a: &[T], order: usize) -> Result<PowerSeries<T>> {
    if order > MAX_REVERSION_ORDER {
        return Err(Error::SeriesOrder {
            order,
            max: MAX_REVERSION_ORDER,
        });
    }
    reversion(a, order)
}

/// `(2j − 1)!!/(2j)!!` for `j = 0..=order`.
fn double_factorial_ratios(order: usize) -> Vec<BigRational> {
    let mut r = vec![BigRational::one()];
    for j in 1..=order {
        let prev = r[j - 1].clone();
        r.push(prev * BigRational::from_ratio(2 * j as i64 - 1, 2 * j as i64));
    }
    r
}

/// `I_k(t)/(2π)` through `t^order` for `H = y² + x²(1 + a₁x + …)`.
///
/// On the circle `y² + X² = t`, `∮ X^{2j} dX/y = 2π t^j (2j−1)!!/(2j)!!` and
/// odd powers integrate to zero, so `I_k` reads off the even coefficients of
/// `φ^k φ' = (φ^{k+1})'/(k + 1)`.
pub fn center_expansion_exact(a: &[BigRational], k: u32, order: usize) -> Result<PowerSeries<BigRational>> {
    let top = 2 * order + 1;
    let phi = reversion(a, top)?;
    let pk = phi.powi(k + 1);
    let ratios = double_factorial_ratios(order);
    let kk = BigRational::from_ratio(k as i64 + 1, 1);
    let coeffs = (0..=order)
        .map(|j| pk.coeff(2 * j + 1) * BigRational::from_ratio(2 * j as i64 + 1, 1) / kk.clone() * ratios[j].clone())
        .collect();
    Ok(PowerSeries::new(coeffs))
}

/// Taylor coefficients of `I_k(t)` at the center of `cf`, through `t^order`.
pub fn center_expansion(cf: &CenterFamilyModel, k: u32, order: usize) -> Result<PowerSeries<f64>> {
    if k as usize + 1 >= cf.degree() {
        return Err(Error::InvalidInput(format!(
            "k = {k} needs k < n − 1 = {}",
            cf.degree() - 1
        )));
    }
    let a = cf.a().iter().map(|&v| to_rational(v)).collect::<Result<Vec<_>>>()?;
    let s = center_expansion_exact(&a, k, order)?;
    Ok(s.to_f64().scale(&(2.0 * std::f64::consts::PI)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn first_reversion_coefficients() {
        let (a1, a2, a3) = (q(3, 7), q(-2, 5), q(1, 3));
        let phi = reverse_series(&[a1.clone(), a2.clone(), a3.clone()], 6).unwrap();
        assert_eq!(phi.coeff(1), q(1, 1));
        assert_eq!(phi.coeff(2), -a1.clone() / q(2, 1));
        assert_eq!(phi.coeff(3), q(5, 8) * a1.clone() * a1.clone() - a2.clone() / q(2, 1));
        let a4 = -(a1.clone() * a1.clone() * a1.clone() - q(3, 2) * a1.clone() * a2.clone() + a3.clone() / q(2, 1));
        assert_eq!(phi.coeff(4), a4);
    }

    #[test]
    fn reversion_inverts_forward_map_exactly() {
        let a = vec![q(1, 2), q(-3, 4), q(2, 9), q(5, 11)];
        let n = 12;
        let phi = reverse_series(&a, n).unwrap();
        let fwd = forward_map(&a, n).unwrap();
        assert_eq!(fwd.compose(&phi).unwrap(), PowerSeries::variable(n));
        assert_eq!(phi.compose(&fwd).unwrap(), PowerSeries::variable(n));
    }

    #[test]
    fn order_limit() {
        assert!(matches!(
            reverse_series(&[q(1, 1)], 31),
            Err(Error::SeriesOrder { order: 31, max: 30 })
        ));
        assert!(reverse_series(&[q(1, 1)], 30).is_ok());
    }

    #[test]
    fn pow_ratio_squares_back() {
        let s = PowerSeries::new(vec![q(1, 1), q(2, 3), q(-1, 5), q(7, 2)]);
        let r = s.pow_ratio(1, 2).unwrap();
        assert_eq!(r.mul(&r), s);
    }

    #[test]
    fn lemma_leading_terms() {
        let a = vec![q(1, 10), q(1, 20), q(-1, 5)];
        let i0 = center_expansion_exact(&a, 0, 4).unwrap();
        assert_eq!(i0.coeff(0), q(1, 1));
        let i2 = center_expansion_exact(&a, 2, 4).unwrap();
        assert_eq!(i2.coeff(0), q(0, 1));
        // c₁ = π, in units of 2π.
        assert_eq!(i2.coeff(1), q(1, 2));
        let i1 = center_expansion_exact(&a, 1, 4).unwrap();
        assert_eq!(i1.coeff(0), q(0, 1));
        // −(3/2)π·a₁·t in units of 2π.
        assert_eq!(i1.coeff(1), q(-3, 40));
    }

    #[test]
    fn cyclicity_expansion_coefficients() {
        let (a1, a2, a3) = (q(1, 7), q(2, 3), q(-5, 4));
        let i1 = center_expansion_exact(&[a1.clone(), a2.clone(), a3.clone()], 1, 3).unwrap();
        // I₁/(2π) = −(3/4)a₁t − (15/16)(21/8·a₁³ − 7/2·a₁a₂ + a₃)t² + …
        assert_eq!(i1.coeff(1), -q(3, 4) * a1.clone());
        let c = q(21, 8) * a1.clone() * a1.clone() * a1.clone() - q(7, 2) * a1.clone() * a2.clone() + a3.clone();
        assert_eq!(i1.coeff(2), -q(15, 16) * c);
    }
}

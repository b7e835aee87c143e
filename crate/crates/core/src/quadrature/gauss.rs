//! Gauss–Legendre and Gauss–Chebyshev rules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn legendre_cache() -> &'static Mutex<HashMap<usize, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    if let Some(rule) = legendre_cache().lock().unwrap().get(&n) {
        return rule.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let rule = Arc::new((x, w));
    legendre_cache().lock().unwrap().insert(n, rule.clone());
    rule
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Nodes of the `n`-point Gauss–Chebyshev rule of the first kind; every
/// weight equals `π/n`.
pub fn chebyshev_nodes(n: usize) -> impl Iterator<Item = f64> {
    let nf = n as f64;
    (1..=n).map(move |j| ((2 * j - 1) as f64 * std::f64::consts::PI / (2.0 * nf)).cos())
}

/// Integrates `f` over `[a, b]` with Gauss–Legendre rules of doubling size
/// until two successive estimates agree to `tol` relative to the absolute
/// quadrature sum. Returns `(value, error estimate, converged)`.
pub fn legendre_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    min_nodes: usize,
    max_nodes: usize,
) -> (f64, f64, bool) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut eval = |n: usize| {
        let rule = gauss_legendre(n);
        let (xs, ws) = (&rule.0, &rule.1);
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            let v = w * f(mid + half * x);
            sum += v;
            abs += v.abs();
        }
        (sum * half, abs * half.abs())
    };
    let mut n = min_nodes.max(2);
    let (mut prev, _) = eval(n);
    loop {
        n *= 2;
        let (cur, scale) = eval(n);
        let err = (cur - prev).abs();
        if err <= tol * scale || n >= max_nodes {
            return (cur, err, err <= tol * scale);
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(7);
        let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let total: f64 = rule.1.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        assert!(rule.0.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn large_rule_is_accurate() {
        let rule = gauss_legendre(1024);
        let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert!((s - 2.0 * 3f64.sin() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_rule_on_weighted_monomial() {
        // ∫ x² / √(1 − x²) dx = π/2
        let n = 8;
        let s: f64 = chebyshev_nodes(n).map(|x| x * x).sum::<f64>() * std::f64::consts::PI / n as f64;
        assert!((s - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn adaptive_legendre_converges() {
        let (v, err, ok) = legendre_adaptive(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-13, 8, 1 << 12);
        assert!(ok && err < 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-13);
    }
}

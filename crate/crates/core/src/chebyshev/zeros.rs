//! Zeros of `Σ c_k I_k` on an interval of ovals, and extrema of `F = I₁/I₀`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bifurcation::PeriodAnnulus;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::quadrature::{OvalFamily, QuadratureOptions, RealIntegrals};

/// Default number of grid points on `Σ`.
pub const DEFAULT_GRID: usize = 2000;

/// Closest approach of the grid to either end of `Σ`, relative to `|Σ|`.
pub const GRID_END_GAP: f64 = 1e-8;

/// Bisection stops when the bracket is below this fraction of `|Σ|`.
pub const REFINE_TOL: f64 = 1e-12;

/// `n` levels inside `(lo, hi)`, half spaced geometrically away from each
/// end, from `GRID_END_GAP·|Σ|` up to the midpoint.
pub fn sigma_grid(sigma: (f64, f64), n: usize) -> Vec<f64> {
    let w = sigma.1 - sigma.0;
    let n = n.max(4);
    let lower = n / 2;
    let upper = n - lower;
    let geo = |j: usize, m: usize| {
        let t = j as f64 / m as f64;
        GRID_END_GAP * (0.5 / GRID_END_GAP).powf(t)
    };
    let mut hs: Vec<f64> = (0..lower).map(|j| sigma.0 + w * geo(j, lower)).collect();
    // The upper half stops one step short of the midpoint to avoid a repeat.
    hs.extend((1..=upper).rev().map(|j| sigma.1 - w * geo(upper - j, upper)));
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    hs
}

/// `I_k` for the requested `ks` on every grid level.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    pub ks: Vec<u32>,
    pub rows: Vec<RealIntegrals>,
}

impl IntegralTable {
    pub fn build(fam: &OvalFamily, hs: &[f64], ks: &[u32], opts: &QuadratureOptions) -> Result<Self> {
        let rows = hs
            .par_iter()
            .map(|&h| fam.integrals(h, ks, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ks: ks.to_vec(), rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Value and error bar of `Σ c_k I_k` on one row.
fn combine(row: &RealIntegrals, coeffs: &[f64]) -> (f64, f64) {
    let mut v = 0.0;
    let mut e = 0.0;
    let mut mag = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        v += c * row.values[i];
        e += c.abs() * row.errors[i];
        mag += (c * row.values[i]).abs();
    }
    (v, e + 64.0 * f64::EPSILON * mag)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub h: f64,
    pub multiplicity: u32,
    /// Multiplicity inferred from an extremum within error bars of zero.
    pub suspected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub zeros: Vec<Zero>,
    pub count: u32,
    pub grid_size: usize,
    pub refined: bool,
    /// Coefficients of `I_{ks[0]}, I_{ks[1]}, …`.
    pub alphas: Vec<f64>,
    /// Set when refinement found several zeros inside one grid cell.
    pub coarse: bool,
    /// Sign changes within error bars next to an end of `Σ`; not counted.
    pub endpoint_noise: bool,
}

/// Sign changes of `Σ c_k I_k` over the table, optionally refined by
/// trisection of each bracketing cell followed by bisection.
pub fn zeros_on_table(
    fam: &OvalFamily,
    table: &IntegralTable,
    coeffs: &[f64],
    refine: bool,
    opts: &QuadratureOptions,
) -> Result<ZeroReport> {
    if coeffs.len() != table.ks.len() {
        return Err(Error::InvalidInput("one coefficient per tabulated integral".into()));
    }
    if coeffs.iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidInput("all coefficients vanish".into()));
    }
    let vals: Vec<(f64, f64)> = table.rows.iter().map(|r| combine(r, coeffs)).collect();
    let hs: Vec<f64> = table.rows.iter().map(|r| r.h).collect();
    let g = |h: f64| -> Result<f64> { Ok(combine(&fam.integrals(h, &table.ks, opts)?, coeffs).0) };

    // Cells [i, i+1] with a strict sign change between values well outside
    // their error bars. A run of values within ten error bars of zero counts
    // by its sign changes and the signs of its neighbours: one crossing is
    // refined as usual, anything else becomes a single suspected zero.
    let n = vals.len();
    let near: Vec<bool> = vals.iter().map(|(v, e)| v.abs() < 10.0 * e).collect();
    let mut cells = Vec::new();
    let mut exact = Vec::new();
    let mut noisy = Vec::new();
    let mut endpoint_noise = false;
    let mut i = 0;
    while i < n {
        if !near[i] {
            if i + 1 < n && !near[i + 1] && vals[i].0 * vals[i + 1].0 < 0.0 {
                cells.push(i);
            }
            i += 1;
            continue;
        }
        let start = i;
        while i < n && near[i] {
            i += 1;
        }
        let lo = start.checked_sub(1);
        let hi = (i < n).then_some(i);
        let span = lo.unwrap_or(start)..=hi.unwrap_or(i - 1);
        let signs: Vec<f64> = span.clone().map(|j| vals[j].0).filter(|v| *v != 0.0).map(f64::signum).collect();
        let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
        let has_zero = span.clone().any(|j| vals[j].0 == 0.0);
        let (Some(l), Some(r)) = (lo, hi) else {
            endpoint_noise |= flips > 0 || has_zero;
            continue;
        };
        let opposite = vals[l].0 * vals[r].0 < 0.0;
        if opposite && flips == 1 {
            match (l..r).find(|&j| vals[j].0 * vals[j + 1].0 < 0.0) {
                Some(j) => cells.push(j),
                None => exact.extend((l..=r).filter(|&j| vals[j].0 == 0.0).map(|j| hs[j])),
            }
            continue;
        }
        // Same signs on both sides: the run is a dip toward zero.
        let deepest = (start..i).min_by(|&x, &y| vals[x].0.abs().total_cmp(&vals[y].0.abs())).unwrap_or(start);
        noisy.push(Zero {
            h: if opposite { 0.5 * (hs[l] + hs[r]) } else { hs[deepest] },
            multiplicity: if opposite { 1 } else { 2 },
            suspected: true,
        });
    }
    let tol = REFINE_TOL * fam.width();
    let per_cell: Vec<(Vec<f64>, bool)> = if refine {
        cells
            .par_iter()
            .map(|&i| -> Result<(Vec<f64>, bool)> {
                let (a, b) = (hs[i], hs[i + 1]);
                let pts = [a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b];
                let mut gv = [vals[i].0, g(pts[1])?, g(pts[2])?, vals[i + 1].0];
                let mut out = Vec::new();
                for j in 0..3 {
                    if gv[j] * gv[j + 1] < 0.0 {
                        out.push(bisect(&g, pts[j], pts[j + 1], gv[j], tol)?);
                    } else if gv[j + 1] == 0.0 && j < 2 {
                        out.push(pts[j + 1]);
                        gv[j + 1] = gv[j];
                    }
                }
                let many = out.len() > 1;
                Ok((out, many))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        cells.iter().map(|&i| (vec![0.5 * (hs[i] + hs[i + 1])], false)).collect()
    };
    let coarse = per_cell.iter().any(|(_, m)| *m);
    let mut zeros: Vec<Zero> = per_cell
        .into_iter()
        .flat_map(|(z, _)| z)
        .chain(exact)
        .map(|h| Zero {
            h,
            multiplicity: 1,
            suspected: false,
        })
        .chain(noisy)
        .collect();
    zeros.sort_by(|a, b| a.h.total_cmp(&b.h));
    Ok(ZeroReport {
        count: zeros.iter().map(|z| z.multiplicity).sum(),
        zeros,
        grid_size: vals.len(),
        refined: refine,
        alphas: coeffs.to_vec(),
        coarse,
        endpoint_noise,
    })
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> Result<f64> {
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    Ok(0.5 * (a + b))
}

/// `F(h) = I₁(h)/I₀(h)` with its propagated error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FSample {
    pub h: f64,
    pub f: f64,
    pub err: f64,
}

pub(super) fn f_of(row: &RealIntegrals) -> Result<FSample> {
    let (i0, i1) = (row.values[0], row.values[1]);
    let (e0, e1) = (row.errors[0], row.errors[1]);
    if !(i0.abs() > 10.0 * e0) {
        return Err(Error::Degenerate(format!("I0 = {i0:.3e} below its error floor at h = {}", row.h)));
    }
    let f = i1 / i0;
    let err = (e1 + f.abs() * e0) / i0.abs() + 4.0 * f64::EPSILON * f.abs().max(1.0);
    Ok(FSample { h: row.h, f, err })
}

pub fn eval_f_family(fam: &OvalFamily, hs: &[f64], opts: &QuadratureOptions) -> Result<Vec<FSample>> {
    let t = IntegralTable::build(fam, hs, &[0, 1], opts)?;
    t.rows.iter().map(f_of).collect()
}

/// `F(h) = I₁/I₀` on annulus `a` at the given levels.
pub fn eval_f(m: &HamiltonianModel, a: &PeriodAnnulus, hs: &[f64], opts: &QuadratureOptions) -> Result<Vec<FSample>> {
    eval_f_family(&OvalFamily::from_annulus(m, a), hs, opts)
}

/// Zeros of `α₀I₀ + α₁I₁` on annulus `a` over `grid`.
pub fn count_zeros(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    alpha: (f64, f64),
    grid: &[f64],
    refine: bool,
    opts: &QuadratureOptions,
) -> Result<ZeroReport> {
    let fam = OvalFamily::from_annulus(m, a);
    let table = IntegralTable::build(&fam, grid, &[0, 1], opts)?;
    zeros_on_table(&fam, &table, &[alpha.0, alpha.1], refine, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub h: f64,
    pub f: f64,
    pub is_max: bool,
    /// Neighboring increments of `F` are not both beyond the error floor.
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxZeroReport {
    /// Sharp maximum over `(α₀, α₁)` of the number of zeros on the grid.
    pub max_zeros: u32,
    pub extrema: Vec<Extremum>,
    pub grid_size: usize,
    pub f_range: (f64, f64),
}

/// Interior extrema of `F` on the table; each one adds a zero to the
/// best combination.
pub fn extrema_on_table(fam: &OvalFamily, table: &IntegralTable, opts: &QuadratureOptions) -> Result<MaxZeroReport> {
    let fs: Vec<FSample> = table.rows.iter().map(f_of).collect::<Result<_>>()?;
    // Signs of significant increments, with the index of their left end.
    let mut steps: Vec<(usize, f64, bool)> = Vec::new();
    for i in 0..fs.len().saturating_sub(1) {
        let d = fs[i + 1].f - fs[i].f;
        let significant = d.abs() > fs[i].err + fs[i + 1].err;
        if d != 0.0 {
            steps.push((i, d.signum(), significant));
        }
    }
    let sig: Vec<&(usize, f64, bool)> = steps.iter().filter(|s| s.2).collect();
    let mut turns = Vec::new();
    for w in sig.windows(2) {
        if w[0].1 != w[1].1 {
            // The turn lies between the two significant increments.
            let lo = w[0].0;
            let hi = w[1].0 + 1;
            let gap = steps.iter().any(|s| s.0 > w[0].0 && s.0 < w[1].0 && !s.2);
            turns.push((lo, hi, w[0].1 > 0.0, gap));
        }
    }
    let extrema = turns
        .par_iter()
        .map(|&(lo, hi, is_max, gap)| -> Result<Extremum> {
            let (h, f) = golden_extremum(fam, fs[lo].h, fs[hi].h, is_max, opts)?;
            Ok(Extremum {
                h,
                f,
                is_max,
                indeterminate: gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mn, mx) = fs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.f), b.max(s.f)));
    Ok(MaxZeroReport {
        max_zeros: 1 + extrema.len() as u32,
        extrema,
        grid_size: fs.len(),
        f_range: (mn, mx),
    })
}

fn golden_extremum(fam: &OvalFamily, mut lo: f64, mut hi: f64, is_max: bool, opts: &QuadratureOptions) -> Result<(f64, f64)> {
    let sgn = if is_max { -1.0 } else { 1.0 };
    let obj = |h: f64| -> Result<f64> {
        let r = fam.integrals(h, &[0, 1], opts)?;
        Ok(sgn * r.values[1] / r.values[0])
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (obj(x1)?, obj(x2)?);
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = obj(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = obj(x2)?;
        }
        if hi - lo <= 1e-9 * fam.width() {
            break;
        }
    }
    let h = 0.5 * (lo + hi);
    Ok((h, sgn * obj(h)?))
}

/// Largest number of zeros of `α₀I₀ + α₁I₁` on annulus `a`, read off the
/// extrema of `F` over `grid`.
pub fn max_zero_count(m: &HamiltonianModel, a: &PeriodAnnulus, grid: &[f64], opts: &QuadratureOptions) -> Result<MaxZeroReport> {
    let fam = OvalFamily::from_annulus(m, a);
    let table = IntegralTable::build(&fam, grid, &[0, 1], opts)?;
    extrema_on_table(&fam, &table, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ParameterPoint;

    #[test]
    fn grid_is_sorted_inside_and_clustered() {
        let g = sigma_grid((-1.0, 2.0), 100);
        assert_eq!(g.len(), 100);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g[0] > -1.0 && *g.last().unwrap() < 2.0);
        assert!((g[0] + 1.0) < 1e-7 && (2.0 - g[99]) < 1e-7);
    }

    fn exceptional() -> (HamiltonianModel, PeriodAnnulus) {
        let p = ParameterPoint::real(0.5, 0.25).unwrap();
        let a = *crate::bifurcation::classify(p).annulus(crate::bifurcation::AnnulusKind::O1).unwrap();
        (crate::hamiltonian::build_normal_form(p), a)
    }

    #[test]
    fn level_crossing_is_the_single_zero() {
        let (m, a) = exceptional();
        let opts = QuadratureOptions::default();
        let grid = sigma_grid(a.sigma, 300);
        let mz = max_zero_count(&m, &a, &grid, &opts).unwrap();
        assert_eq!(mz.max_zeros, 1);
        let c = 0.5 * (mz.f_range.0 + mz.f_range.1);
        let r = count_zeros(&m, &a, (-c, 1.0), &grid, true, &opts).unwrap();
        assert_eq!(r.count, 1);
        let f = eval_f(&m, &a, &[r.zeros[0].h], &opts).unwrap()[0].f;
        assert!((f - c).abs() < 1e-9, "F(zero) = {f}, level {c}");
    }

    #[test]
    fn level_outside_the_range_has_no_zero() {
        let (m, a) = exceptional();
        let opts = QuadratureOptions::default();
        let grid = sigma_grid(a.sigma, 200);
        let r = count_zeros(&m, &a, (-2.0, 1.0), &grid, true, &opts).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.zeros.is_empty());
    }

    #[test]
    fn f_error_bar_grows_toward_the_center() {
        let (m, a) = exceptional();
        let opts = QuadratureOptions::default();
        let w = a.width();
        let fs = eval_f(&m, &a, &[a.h_c() + 1e-10 * w, a.h_c() + 0.5 * w], &opts).unwrap();
        assert!(fs[0].err > fs[1].err, "{fs:?}");
        assert!(fs[1].err < 1e-10, "{fs:?}");
    }
}

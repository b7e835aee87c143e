//! Argument increments of `I₀` and `F = I₁/I₀` along the boundary of
//! `{r < |h − h_s|, |h| < 1/r}` cut along `[h_s, 1/r]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::contour::Determination;
use super::real::OvalFamily;
use super::QuadratureOptions;
use crate::bifurcation::PeriodAnnulus;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;

/// Argument increase along each boundary piece, in radians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ArgumentIncrements {
    /// Small circle, from `h_s − r` clockwise to the upper side of the cut.
    pub small_upper: f64,
    pub upper_cut: f64,
    /// Big circle `|h| = 1/r`, counter-clockwise.
    pub big_circle: f64,
    pub lower_cut: f64,
    /// Small circle, from the lower side of the cut back to `h_s − r`.
    pub small_lower: f64,
}

impl ArgumentIncrements {
    pub fn total(&self) -> f64 {
        self.small_upper + self.upper_cut + self.big_circle + self.lower_cut + self.small_lower
    }

    pub fn small_circle(&self) -> f64 {
        self.small_upper + self.small_lower
    }

    fn piece(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.small_upper,
            1 => &mut self.upper_cut,
            2 => &mut self.big_circle,
            3 => &mut self.lower_cut,
            _ => &mut self.small_lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingReport {
    pub r: f64,
    pub big_radius: f64,
    pub i0: ArgumentIncrements,
    pub f: ArgumentIncrements,
    pub i0_total: f64,
    pub f_total: f64,
    /// Relative mismatch of `(I₀, I₁)` after one turn around the boundary.
    pub closure_error: f64,
}

/// Levels for a walk along the real axis from `a` to `b` (both above `h_s`),
/// spaced geometrically in `h − h_s`.
fn cut_levels(hs: f64, a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let (da, db) = (a - hs, b - hs);
    let decades = (db / da).log10().abs();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (1..=n)
        .map(|j| hs + da * (db / da).powf(j as f64 / n as f64))
        .collect()
}

/// Walks the boundary once and records the argument increase of `I₀` and
/// of `F` on each piece.
pub fn winding(
    m: &HamiltonianModel,
    a: &PeriodAnnulus,
    r: f64,
    opts: &QuadratureOptions,
) -> Result<WindingReport> {
    if !a.exceptional {
        return Err(Error::InvalidInput(format!("annulus {:?} is not exceptional", a.kind)));
    }
    let hs = a.h_s();
    let cv = m.critical_values();
    for v in [cv.h0, cv.h_mu, cv.h_lambda, cv.h1] {
        let d = (v - hs).norm();
        if d > 1e-14 * (1.0 + hs.abs()) && d <= r {
            return Err(Error::InvalidInput(format!(
                "r = {r} reaches the critical value {v} (distance {d:.3e})"
            )));
        }
    }
    if r >= a.width() {
        return Err(Error::InvalidInput(format!("r = {r} exceeds the width of Sigma")));
    }
    let big = 1.0 / r;
    let fam = OvalFamily::from_annulus(m, a);
    let mut det = Determination::from_oval(&fam, hs - r, &[0, 1], opts)?;
    let start = (det.value(0), det.value(1));

    let mut i0 = ArgumentIncrements::default();
    let mut fa = ArgumentIncrements::default();
    let mut last = (det.value(0), det.value(1) / det.value(0));
    let mut piece = 0usize;
    let mut record = |_: Complex64, d: &Determination, piece: usize, i0: &mut ArgumentIncrements, fa: &mut ArgumentIncrements| {
        let cur = (d.value(0), d.value(1) / d.value(0));
        *i0.piece(piece) += (cur.0 / last.0).arg();
        *fa.piece(piece) += (cur.1 / last.1).arg();
        last = cur;
    };
    let max_angle = PI / 64.0;

    det.follow_arc_with(hs.into(), r, PI, 0.0, max_angle, &mut |h, d| record(h, d, piece, &mut i0, &mut fa))?;
    piece += 1;
    for h in cut_levels(hs, hs + r, big, 40) {
        det.advance_with(h.into(), &mut |h, d| record(h, d, piece, &mut i0, &mut fa))?;
    }
    piece += 1;
    det.follow_arc_with(Complex64::new(0.0, 0.0), big, 0.0, 2.0 * PI, max_angle, &mut |h, d| {
        record(h, d, piece, &mut i0, &mut fa)
    })?;
    piece += 1;
    for h in cut_levels(hs, big, hs + r, 40) {
        det.advance_with(h.into(), &mut |h, d| record(h, d, piece, &mut i0, &mut fa))?;
    }
    piece += 1;
    det.follow_arc_with(hs.into(), r, 0.0, -PI, max_angle, &mut |h, d| record(h, d, piece, &mut i0, &mut fa))?;

    let end = (det.value(0), det.value(1));
    let closure_error = ((end.0 - start.0).norm() + (end.1 - start.1).norm()) / (start.0.norm() + start.1.norm());
    Ok(WindingReport {
        r,
        big_radius: big,
        i0_total: i0.total(),
        f_total: fa.total(),
        i0,
        f: fa,
        closure_error,
    })
}

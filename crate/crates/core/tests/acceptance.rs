//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use abelint::asymptotics::{endpoint_fit, endpoint_samples, f_limits, infinity_exponent_fit, End, FitModel};
use abelint::bifurcation::{
    center_a1, classify, gamma_c_mu, gamma_mu, hyperbola_value, in_omega_mu, AnnulusKind, PeriodAnnulus,
};
use abelint::chebyshev::{
    count_zeros, cyclicity_experiment, eval_f, max_zero_count, nocheb_experiment, sigma_grid, zeros_on_table,
    CyclicityParams, IntegralTable,
};
use abelint::hamiltonian::{build_normal_form, CenterFamilyModel, HamiltonianModel, ParameterPoint};
use abelint::quadrature::{
    abelian_integral, complex_cycle_integral, continued_integrals, delta_at_critical, delta_grid,
    upper_branch_point, winding, OvalFamily, QuadratureOptions,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn opts() -> QuadratureOptions {
    QuadratureOptions::default()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn o1(p: ParameterPoint) -> Result<(HamiltonianModel, PeriodAnnulus), String> {
    annulus(p, AnnulusKind::O1)
}

fn annulus(p: ParameterPoint, kind: AnnulusKind) -> Result<(HamiltonianModel, PeriodAnnulus), String> {
    let a = *classify(p)
        .annulus(kind)
        .ok_or_else(|| format!("no {} annulus at {:?}", kind.name(), p))?;
    Ok((build_normal_form(p), a))
}

fn real(l: f64, m: f64) -> ParameterPoint {
    ParameterPoint::real(l, m).expect("valid real point")
}

fn complex(re: f64, im: f64) -> ParameterPoint {
    ParameterPoint::complex(Complex64::new(re, im)).expect("valid complex point")
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

/// `2π(2k−1)!!/(2k)!!`
fn lemma_constant(k: u32) -> f64 {
    (1..=k).fold(TAU, |c, j| c * (2 * j - 1) as f64 / (2 * j) as f64)
}

fn criterion_1() -> Check {
    let cf = CenterFamilyModel::new(vec![0.1, 0.05, -0.2]).map_err(e)?;
    let fam = OvalFamily::center_family(&cf).map_err(e)?;
    let mut worst: f64 = 0.0;
    for k in 0..3u32 {
        let v: Vec<f64> = [1e-4, 5e-5, 2.5e-5]
            .iter()
            .map(|&t| Ok(fam.integrals(t, &[2 * k], &opts())?.values[0] / t.powi(k as i32)))
            .collect::<abelint::Result<_>>()
            .map_err(e)?;
        // Error terms O(t) and O(t²) under halving of t.
        let r1 = [2.0 * v[1] - v[0], 2.0 * v[2] - v[1]];
        let limit = (4.0 * r1[1] - r1[0]) / 3.0;
        let c = lemma_constant(k);
        let rel = ((limit - c) / c).abs();
        ensure(rel < 1e-5, format!("k={k}: limit {limit} vs {c} (rel {rel:.2e})"))?;
        worst = worst.max(rel);
    }
    Ok(format!("worst relative error {worst:.1e}"))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let l: f64 = rng.random_range(0.02..0.98);
        let m: f64 = rng.random_range(0.01..0.99) * l;
        let (model, a) = o1(real(l, m))?;
        let h = a.h_c() + 1e-8 * a.width();
        let v = abelian_integral(&model, &a, h, 0, &opts()).map_err(e)?.value.re;
        let expected = TAU / ((1.0 - l) * (1.0 - m)).sqrt();
        let rel = ((v - expected) / expected).abs();
        ensure(rel < 1e-4, format!("({l}, {m}): {v} vs {expected}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("20 points, worst relative error {worst:.1e}"))
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points: Vec<ParameterPoint> = (0..10)
        .map(|_| {
            let l: f64 = rng.random_range(0.05..0.95);
            real(l, rng.random_range(0.05..0.95) * l)
        })
        .collect();
    let inside = [(-1.0, 0.5), (-0.5, 0.3), (-2.0, 1.5), (2.0, 0.1), (2.5, 0.5)];
    for (re, im) in inside {
        ensure(hyperbola_value(Complex64::new(re, im)) < 0.0, format!("{re}+{im}i is not inside Γ"))?;
        points.push(complex(re, im));
    }
    let mut worst_gap: f64 = 0.0;
    let mut min_i0 = f64::INFINITY;
    for p in points {
        let (m, a) = o1(p)?;
        let fam = OvalFamily::from_annulus(&m, &a);
        let lo = a.h_c() - 10.0 * a.width();
        for j in 1..=200 {
            let h = lo + (a.h_s() - lo) * j as f64 / 201.0;
            if (h - a.h_c()).abs() < 1e-12 * a.width() {
                continue;
            }
            let v = if h < a.h_c() {
                let s = continued_integrals(&fam, h, &[0], &opts())
                    .map_err(|err| format!("{err} at h = {h}, λ = {}, μ = {}", p.lambda(), p.mu()))?[0];
                if j % 20 == 0 {
                    let beta = upper_branch_point(&fam, h).map_err(e)?;
                    let c = complex_cycle_integral(&m, h.into(), (beta.conj(), beta), 0, &opts()).map_err(e)?;
                    worst_gap = worst_gap.max((c.value - s.value).norm() / s.value.norm());
                }
                s.value.re
            } else {
                fam.integrals(h, &[0], &opts()).map_err(e)?.values[0]
            };
            ensure(v > 0.0, format!("I0({h}) = {v} at {:?}", p.lambda()))?;
            min_i0 = min_i0.min(v);
        }
    }
    ensure(worst_gap < 1e-8, format!("R-curve vs contour gap {worst_gap:.2e}"))?;
    Ok(format!("15 points x 200 levels, min I0 {min_i0:.3}, method gap {worst_gap:.1e}"))
}

fn criterion_4() -> Check {
    let mut summary = Vec::new();
    for (name, p) in [("(0.5,0.25)", real(0.5, 0.25)), ("-1+0.5i", complex(-1.0, 0.5))] {
        let (m, a) = o1(p)?;
        ensure(a.exceptional, format!("{name}: O1 not exceptional"))?;
        let fam = OvalFamily::from_annulus(&m, &a);
        let grid = sigma_grid(a.sigma, 2000);
        let table = IntegralTable::build(&fam, &grid, &[0, 1], &opts()).map_err(e)?;
        let mut max = 0;
        for j in 0..360 {
            let th = TAU * j as f64 / 360.0;
            let z = zeros_on_table(&fam, &table, &[th.cos(), th.sin()], true, &opts()).map_err(e)?;
            max = max.max(z.count);
        }
        ensure(max == 1, format!("{name}: max count {max} over 360 directions"))?;
        let w = a.width();
        let hs: Vec<f64> = (0..50)
            .map(|j| a.h_s() + w * 0.01 * 1e4f64.powf(j as f64 / 49.0))
            .collect();
        let d = delta_grid(&m, &a, &hs, &opts()).map_err(e)?;
        ensure(d.iter().all(|s| s.delta.norm() > 0.0), format!("{name}: Δ vanishes"))?;
        let sign = d[0].im_f.signum();
        ensure(
            sign != 0.0 && d.iter().all(|s| s.im_f.signum() == sign),
            format!("{name}: Im F changes sign"),
        )?;
        let min_delta = d.iter().map(|s| s.delta.norm()).fold(f64::INFINITY, f64::min);
        summary.push(format!("{name}: max 1, min |Δ| {min_delta:.2e}"));
    }
    Ok(summary.join("; "))
}

fn criterion_5() -> Check {
    let p = CyclicityParams {
        a1: Some(0.05),
        a2: 0.0,
        a3: -1.0,
        alpha0: Some(1e-4),
        alpha1: 1.0,
    };
    let r = cyclicity_experiment(&p, &opts()).map_err(e)?;
    ensure(r.zeros.count == 2, format!("{} zeros in (0, {})", r.zeros.count, r.epsilon))?;
    ensure(
        r.zeros.zeros.iter().all(|z| z.multiplicity == 1 && z.h > 0.0 && z.h < r.epsilon),
        "zeros not simple or outside (0, ε)",
    )?;
    Ok(format!(
        "zeros at {:.6}, {:.6} in (0, {:.4})",
        r.zeros.zeros[0].h, r.zeros.zeros[1].h, r.epsilon
    ))
}

fn criterion_6() -> Check {
    let mut out = Vec::new();
    for n in [5usize, 7] {
        let mut a = vec![0.0; n - 3];
        a.push(-0.1);
        let cf = CenterFamilyModel::new(a).map_err(e)?;
        let r = nocheb_experiment(&cf, &opts()).map_err(e)?;
        let expected = (3 * r.genus / 2 - 1) as u32;
        ensure(
            r.success && r.zeros.count == expected && r.retries <= 6,
            format!("n={n}: {} zeros, expected {expected}, {} retries", r.zeros.count, r.retries),
        )?;
        out.push(format!("g={} {} zeros ({} retries)", r.genus, r.zeros.count, r.retries));
    }
    Ok(out.join(", "))
}

fn criterion_7() -> Check {
    let (m, a) = o1(real(0.5, 0.25))?;
    let hs: Vec<f64> = (0..31).map(|j| 10f64.powf(2.0 + 3.0 * j as f64 / 30.0)).collect();
    let d = delta_grid(&m, &a, &hs, &opts()).map_err(e)?;
    let mut slopes = [0.0; 2];
    for (k, expected) in [(0usize, -0.3), (1, -0.1)] {
        let s: Vec<(Complex64, Complex64)> = d.iter().map(|x| (x.h.into(), x.plus[k])).collect();
        let fit = infinity_exponent_fit(&s).map_err(e)?;
        ensure(
            (fit.exponent - expected).abs() <= 0.005,
            format!("I{k}: slope {} vs {expected}", fit.exponent),
        )?;
        slopes[k] = fit.exponent;
    }
    Ok(format!("slopes {:.5} and {:.5}", slopes[0], slopes[1]))
}

fn criterion_8() -> Check {
    // Generic saddle loop.
    let (m, a) = o1(real(0.5, 0.1))?;
    let fam = OvalFamily::from_annulus(&m, &a);
    let samples = endpoint_samples(&fam, End::Upper, 14, &opts()).map_err(e)?;
    let i0: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.values[0])).collect();
    let fit = endpoint_fit(&i0, a.h_s()).map_err(e)?;
    ensure(fit.model == FitModel::LogLoop, format!("saddle loop fitted as {:?}", fit.model))?;
    let lim = f_limits(&m, &a, &opts()).map_err(e)?;
    let x_s = a.saddle;
    let rel = ((lim.at_hs.value - x_s) / x_s).abs();
    ensure(rel < 0.01, format!("F(h_s) = {} vs x_s = {x_s}", lim.at_hs.value))?;

    // Cuspidal loop at λ = μ.
    let (m, a) = o1(real(0.4, 0.4))?;
    let fam = OvalFamily::from_annulus(&m, &a);
    let samples = endpoint_samples(&fam, End::Upper, 14, &opts()).map_err(e)?;
    let i0: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.values[0])).collect();
    let cusp = endpoint_fit(&i0, a.h_s()).map_err(e)?;
    let exponent = cusp.exponent.unwrap_or(f64::NAN);
    ensure(
        cusp.model == FitModel::CuspPower && (exponent + 1.0 / 6.0).abs() <= 0.01,
        format!("cusp fitted as {:?} with exponent {exponent}", cusp.model),
    )?;
    Ok(format!(
        "LogLoop with F(h_s) {:.6} vs {x_s}; CuspPower exponent {exponent:.5}",
        lim.at_hs.value
    ))
}

fn criterion_9() -> Check {
    let l = 0.6;
    let mu = 0.5 * (gamma_c_mu(l) + gamma_mu(l));
    ensure(in_omega_mu(l, mu), format!("μ = {mu} not in Ω_μ"))?;
    let (m, a) = annulus(real(l, mu), AnnulusKind::OMu)?;
    let a1 = center_a1(l, mu);
    let w = a.width();
    let f = eval_f(&m, &a, &[a.h_c() + 1e-4 * w, a.h_c() + 2e-4 * w], &opts()).map_err(e)?;
    let rising = f[1].f > f[0].f;
    ensure((a1 < 0.0) == rising, format!("a1 = {a1} but F rising = {rising}"))?;
    let grid = sigma_grid(a.sigma, 2000);
    let mz = max_zero_count(&m, &a, &grid, &opts()).map_err(e)?;
    ensure(mz.max_zeros >= 2, format!("max count {}", mz.max_zeros))?;
    let top = mz.extrema.iter().find(|x| x.is_max).ok_or("no interior maximum of F")?;
    let c = 0.5 * (mu + top.f);
    let z = count_zeros(&m, &a, (-c, 1.0), &grid, true, &opts()).map_err(e)?;
    ensure(z.count == 2, format!("{} zeros at level {c}", z.count))?;
    Ok(format!("μ = {mu:.4}, a1 = {a1:.4}, 2 zeros at level {c:.6}"))
}

fn criterion_10() -> Check {
    let (m, a) = o1(real(0.5, 0.25))?;
    let w = winding(&m, &a, 1e-4, &opts()).map_err(e)?;
    let decrease = -w.i0.big_circle;
    let target = 3.0 * PI / 5.0;
    ensure(
        ((decrease - target) / target).abs() < 0.05,
        format!("big-circle decrease {decrease} vs {target}"),
    )?;
    ensure(w.i0_total < TAU, format!("total increase {}", w.i0_total))?;
    Ok(format!("big circle {decrease:.4} vs {target:.4}, total {:.1e}", w.i0_total))
}

fn criterion_11() -> Check {
    let (m, a) = o1(real(0.5, 0.25))?;
    let d = delta_at_critical(&m, &a, &opts()).map_err(e)?;
    ensure(d.h > a.h_s(), "critical level not above h_s")?;
    ensure(d.residue.norm() > 0.0 && d.contour.norm() > 0.0, "Δ vanishes")?;
    ensure(d.relative_gap < 1e-6, format!("gap {:.2e}", d.relative_gap))?;
    Ok(format!("|Δ(h0)| = {:.4}, gap {:.1e}", d.residue.norm(), d.relative_gap))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Check, Duration); 11] = [
        (1, "center-family constants", criterion_1, Duration::from_secs(10)),
        (2, "harmonic limit", criterion_2, Duration::from_secs(30)),
        (3, "positivity below the center", criterion_3, Duration::from_secs(120)),
        (4, "exceptional families are Chebyshev", criterion_4, Duration::from_secs(300)),
        (5, "two small zeros near a center", criterion_5, Duration::from_secs(20)),
        (6, "non-Chebyshev center families", criterion_6, Duration::from_secs(60)),
        (7, "exponents at infinity", criterion_7, Duration::from_secs(60)),
        (8, "endpoint classification", criterion_8, Duration::from_secs(60)),
        (9, "two zeros in Omega_mu", criterion_9, Duration::from_secs(120)),
        (10, "argument on the big circle", criterion_10, Duration::from_secs(120)),
        (11, "determinant at a critical level", criterion_11, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (n, name, run, budget) in criteria {
        let t = Instant::now();
        let res = run();
        let dt = t.elapsed();
        let res = res.and_then(|msg| {
            if dt <= budget {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {dt:.1?}, budget {budget:?}"))
            }
        });
        match res {
            Ok(msg) => println!("criterion {n:>2} PASS [{dt:.2?}] {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL [{dt:.2?}] {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

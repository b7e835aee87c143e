use std::fmt::Write as _;
use std::str::FromStr;

use abelint::asymptotics::{
    center_expansion, center_expansion_exact, endpoint_fit, endpoint_samples, f_limits, infinity_exponent_fit,
    reverse_series, End, PowerSeries,
};
use abelint::bifurcation::{classify, curve_samples, AnnulusKind, CurveId, PeriodAnnulus, RegionReport, CURVE_CSV_HEADER};
use abelint::chebyshev::{
    count_zeros, cyclicity_experiment, max_zero_count, nocheb_experiment, region_scan, sigma_grid, CyclicityParams,
    RegionSpec, Zero,
};
use abelint::hamiltonian::{build_normal_form, CenterFamilyModel, HamiltonianModel, ParameterPoint};
use abelint::quadrature::{
    abelian_integral, continued_integrals, delta_at_critical, delta_grid, winding, IntegralSample, OvalFamily,
    QuadratureOptions,
};
use abelint::Error;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{AsymptoteKind, Command, Common, Energy, Family, Format, Point};

/// What a command produced: the JSON result, its CSV rendering when the
/// command has one, and whether an asserted bound failed.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    pub violation: bool,
}

impl Outcome {
    fn new(result: Value, csv: Option<String>) -> Self {
        Self {
            result,
            csv,
            violation: false,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn finite(name: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(input(format!("--{name} must be finite")))
    }
}

pub fn options(c: &Common) -> Result<QuadratureOptions, Error> {
    if !(c.tol > 0.0 && c.tol <= 1e-2) {
        return Err(input("--tol must lie in (0, 1e-2]"));
    }
    let o = QuadratureOptions {
        tol: c.tol,
        max_nodes: c.max_nodes,
        ..QuadratureOptions::default()
    };
    if o.max_nodes < o.min_nodes {
        return Err(input(format!("--max-nodes must be at least {}", o.min_nodes)));
    }
    Ok(o)
}

fn point(p: &Point) -> Result<ParameterPoint, Error> {
    let real = p.lambda.is_some() || p.mu.is_some();
    let complex = p.lambda_re.is_some() || p.lambda_im.is_some();
    match (real, complex) {
        (_, true) => {
            if p.lambda.is_some() {
                return Err(input("--lambda cannot be combined with --lambda-re/--lambda-im"));
            }
            if p.mu.is_some() {
                // μ is the conjugate of a non-real λ, so no real --mu can match it.
                return Err(input("μ is set to the conjugate of λ in complex mode; drop --mu"));
            }
            let (Some(re), Some(im)) = (p.lambda_re, p.lambda_im) else {
                return Err(input("complex mode needs both --lambda-re and --lambda-im"));
            };
            ParameterPoint::complex(Complex64::new(finite("lambda-re", re)?, finite("lambda-im", im)?))
        }
        (true, false) => {
            let (Some(l), Some(m)) = (p.lambda, p.mu) else {
                return Err(input("real mode needs both --lambda and --mu"));
            };
            ParameterPoint::real(finite("lambda", l)?, finite("mu", m)?)
        }
        (false, false) => Err(input("give --lambda and --mu, or --lambda-re and --lambda-im")),
    }
}

fn family(f: &Family) -> Result<(ParameterPoint, HamiltonianModel, PeriodAnnulus), Error> {
    let p = point(&f.point)?;
    let kind = AnnulusKind::parse(&f.annulus).ok_or_else(|| input(format!("unknown annulus {:?}", f.annulus)))?;
    let report = classify(p);
    let a = *report
        .annulus(kind)
        .ok_or_else(|| input(format!("annulus {} does not exist at this point", kind.name())))?;
    Ok((p, build_normal_form(p), a))
}

fn energy(e: &Energy, a: &PeriodAnnulus) -> Result<f64, Error> {
    let d = finite("offset", e.offset)? * a.width();
    let h = match e.h.as_str() {
        "hc+" => a.h_c() + d,
        "hc-" => a.h_c() - d,
        "hs-" => a.h_s() - d,
        "hs+" => a.h_s() + d,
        s => f64::from_str(s).map_err(|_| input(format!("--h {s:?} is neither a number nor hc±/hs±")))?,
    };
    finite("h", h)
}

fn sample_csv(samples: &[IntegralSample]) -> String {
    let mut s = String::from("h_re,h_im,k,val_re,val_im,err,method\n");
    for v in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:?}",
            v.h.re, v.h.im, v.k, v.value.re, v.value.im, v.error_estimate, v.method
        );
    }
    s
}

fn zeros_csv(zeros: &[Zero]) -> String {
    let mut s = String::from("h,multiplicity,suspected\n");
    for z in zeros {
        let _ = writeln!(s, "{},{},{}", z.h, z.multiplicity, z.suspected);
    }
    s
}

fn series_csv<T: std::fmt::Display>(coeffs: &[T]) -> String {
    let mut s = String::from("power,coefficient\n");
    for (i, c) in coeffs.iter().enumerate() {
        let _ = writeln!(s, "{i},{c}");
    }
    s
}

/// Exact rational value of a decimal literal such as `-0.05` or `3e-2`.
/// A decimal literal or a quotient `p/q` of two, read exactly.
fn parse_rational(s: &str) -> Result<num_rational::BigRational, Error> {
    if let Some((p, q)) = s.split_once('/') {
        let q = parse_decimal(q)?;
        if num_traits::Zero::is_zero(&q) {
            return Err(input(format!("{s:?} divides by zero")));
        }
        return Ok(parse_decimal(p)? / q);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<num_rational::BigRational, Error> {
    use num_bigint::BigInt;
    let bad = || input(format!("{s:?} is not a decimal number"));
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("0{int}{frac}")).map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    if scale.unsigned_abs() > 400 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        num_rational::BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        num_rational::BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn classify_result(r: &RegionReport) -> Value {
    to_value(r)
}

fn classify_csv(r: &RegionReport) -> String {
    let mut s = String::from("kind,h_c,h_s,center_re,center_im,anchor,saddle,terminator,exceptional\n");
    for a in &r.annuli {
        let (cre, cim) = a.center.map_or((String::new(), String::new()), |c| (c.re.to_string(), c.im.to_string()));
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:?},{}",
            a.kind.name(),
            a.h_c(),
            a.h_s(),
            cre,
            cim,
            a.anchor,
            a.saddle,
            a.terminator,
            a.exceptional
        );
    }
    s
}

pub fn execute(cmd: &Command, common: &Common) -> Result<Outcome, Error> {
    let opts = options(common)?;
    match cmd {
        Command::Classify { point: p } => {
            let r = classify(point(p)?);
            Ok(Outcome::new(classify_result(&r), Some(classify_csv(&r))))
        }
        Command::Curves { curve, n } => {
            let id = CurveId::parse(curve).ok_or_else(|| input(format!("unknown curve {curve:?}")))?;
            let pts = curve_samples(id, *n)?;
            let mut csv = format!("{CURVE_CSV_HEADER}\n");
            for p in &pts {
                csv.push_str(&p.csv_row());
                csv.push('\n');
            }
            Ok(Outcome::new(json!({ "curve": id.name(), "points": pts }), Some(csv)))
        }
        Command::Integrate { family: f, energy: e, k } => {
            let (_, m, a) = family(f)?;
            let h = energy(e, &a)?;
            let s = converged(abelian_integral(&m, &a, h, *k, &opts)?, &opts)?;
            Ok(Outcome::new(to_value(&s), Some(sample_csv(&[s]))))
        }
        Command::Continue { family: f, energy: e, k } => {
            let (_, m, a) = family(f)?;
            let h = energy(e, &a)?;
            let s = if h < a.h_c() {
                continued_integrals(&OvalFamily::from_annulus(&m, &a), h, &[*k], &opts)?[0]
            } else if h > a.h_s() {
                if *k > 1 {
                    return Err(input("beyond h_s only k = 0 and k = 1 are continued"));
                }
                let d = delta_grid(&m, &a, &[h], &opts)?[0];
                IntegralSample {
                    h: h.into(),
                    k: *k,
                    value: d.plus[*k as usize],
                    error_estimate: d.error_estimate,
                    method: abelint::quadrature::Method::ComplexContour,
                    converged: true,
                }
            } else {
                abelian_integral(&m, &a, h, *k, &opts)?
            };
            let s = converged(s, &opts)?;
            Ok(Outcome::new(to_value(&s), Some(sample_csv(&[s]))))
        }
        Command::Zeros {
            family: f,
            a0,
            a1,
            grid,
            no_refine,
        } => {
            let (_, m, a) = family(f)?;
            if *grid < 8 {
                return Err(input("--grid must be at least 8"));
            }
            let hs = sigma_grid(a.sigma, *grid);
            let r = count_zeros(&m, &a, (finite("a0", *a0)?, finite("a1", *a1)?), &hs, !no_refine, &opts)?;
            let csv = zeros_csv(&r.zeros);
            let mut out = Outcome::new(to_value(&r), Some(csv));
            out.violation = a.exceptional && r.count > 1;
            Ok(out)
        }
        Command::Maxzeros { family: f, grid } => {
            let (_, m, a) = family(f)?;
            if *grid < 8 {
                return Err(input("--grid must be at least 8"));
            }
            let r = max_zero_count(&m, &a, &sigma_grid(a.sigma, *grid), &opts)?;
            let mut csv = String::from("h,f,is_max,indeterminate\n");
            for e in &r.extrema {
                let _ = writeln!(csv, "{},{},{},{}", e.h, e.f, e.is_max, e.indeterminate);
            }
            let mut out = Outcome::new(to_value(&r), Some(csv));
            out.violation = a.exceptional && r.max_zeros > 1;
            Ok(out)
        }
        Command::Asymptote {
            kind,
            family: f,
            a,
            order,
            k,
            h_min,
            h_max,
            points,
        } => asymptote(*kind, f, a, *order, *k, (*h_min, *h_max, *points), &opts),
        Command::Delta { family: f, h, critical } => {
            let (_, m, a) = family(f)?;
            if *critical || h.is_none() {
                if h.is_some() {
                    return Err(input("--h and --critical are exclusive"));
                }
                let d = delta_at_critical(&m, &a, &opts)?;
                let csv = format!(
                    "h,x0,contour_re,contour_im,residue_re,residue_im,sign,relative_gap\n{},{},{},{},{},{},{},{}\n",
                    d.h, d.x0, d.contour.re, d.contour.im, d.residue.re, d.residue.im, d.sign, d.relative_gap
                );
                let mut v = to_value(&d);
                v["mode"] = json!("critical");
                return Ok(Outcome::new(v, Some(csv)));
            }
            let h = finite("h", h.unwrap_or_default())?;
            // A critical level is answered by both evaluations at once.
            let cv = m.critical_values();
            let at_critical = [cv.h0, cv.h_mu, cv.h_lambda, cv.h1]
                .iter()
                .any(|v| v.im == 0.0 && (v.re - h).abs() <= 1e-14 * (1.0 + h.abs()));
            if at_critical {
                let d = delta_at_critical(&m, &a, &opts)?;
                if (d.h - h).abs() <= 1e-14 * (1.0 + h.abs()) {
                    let mut v = to_value(&d);
                    v["mode"] = json!("critical");
                    return Ok(Outcome::new(v, None));
                }
            }
            let d = delta_grid(&m, &a, &[h], &opts)?[0];
            let csv = format!(
                "h,delta_re,delta_im,im_f,im_f_from_delta,err\n{},{},{},{},{},{}\n",
                d.h, d.delta.re, d.delta.im, d.im_f, d.im_f_from_delta, d.error_estimate
            );
            let mut v = to_value(&d);
            v["mode"] = json!("regular");
            Ok(Outcome::new(v, Some(csv)))
        }
        Command::Winding { family: f, r } => {
            let (_, m, a) = family(f)?;
            let w = winding(&m, &a, finite("r", *r)?, &opts)?;
            let mut csv = String::from("piece,i0,f\n");
            let pieces = [
                ("small_upper", w.i0.small_upper, w.f.small_upper),
                ("upper_cut", w.i0.upper_cut, w.f.upper_cut),
                ("big_circle", w.i0.big_circle, w.f.big_circle),
                ("lower_cut", w.i0.lower_cut, w.f.lower_cut),
                ("small_lower", w.i0.small_lower, w.f.small_lower),
                ("total", w.i0_total, w.f_total),
            ];
            for (name, i0, fv) in pieces {
                let _ = writeln!(csv, "{name},{i0},{fv}");
            }
            Ok(Outcome::new(to_value(&w), Some(csv)))
        }
        Command::Cyclicity {
            a1,
            a2,
            a3,
            alpha0,
            alpha1,
        } => {
            let p = CyclicityParams {
                a1: a1.map(|v| finite("a1", v)).transpose()?,
                a2: finite("a2", *a2)?,
                a3: finite("a3", *a3)?,
                alpha0: alpha0.map(|v| finite("alpha0", v)).transpose()?,
                alpha1: finite("alpha1", *alpha1)?,
            };
            let r = cyclicity_experiment(&p, &opts)?;
            let csv = zeros_csv(&r.zeros.zeros);
            let mut out = Outcome::new(to_value(&r), Some(csv));
            out.violation = r.zeros.count > 2;
            Ok(out)
        }
        Command::Nocheb { a } => {
            for v in a {
                finite("a", *v)?;
            }
            let cf = CenterFamilyModel::new(a.clone())?;
            let r = nocheb_experiment(&cf, &opts)?;
            let csv = zeros_csv(&r.zeros.zeros);
            Ok(Outcome::new(to_value(&r), Some(csv)))
        }
        Command::Scan {
            region,
            samples,
            seed,
            grid,
        } => {
            let spec = RegionSpec::parse(region).ok_or_else(|| input(format!("unknown region {region:?}")))?;
            if *samples == 0 || *grid < 8 {
                return Err(input("--samples must be positive and --grid at least 8"));
            }
            let r = region_scan(spec, *samples, *seed, *grid, &opts)?;
            let csv = r.to_csv();
            let mut out = Outcome::new(to_value(&r), Some(csv));
            out.violation = r.theorem_violations > 0;
            Ok(out)
        }
    }
}

fn series_value(s: &PowerSeries<f64>) -> Value {
    json!(s.coeffs())
}

fn asymptote(
    kind: AsymptoteKind,
    f: &Family,
    a: &[String],
    order: usize,
    k: u32,
    (h_min, h_max, points): (f64, f64, usize),
    opts: &QuadratureOptions,
) -> Result<Outcome, Error> {
    match kind {
        AsymptoteKind::Reverse | AsymptoteKind::Center => {
            if a.is_empty() {
                return Err(input("--a is required for reverse and center"));
            }
            let exact = a.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
            let floats: Vec<f64> = exact
                .iter()
                .map(|r| num_traits::ToPrimitive::to_f64(r).filter(|v| v.is_finite()).ok_or_else(|| input(format!("coefficient {r} overflows"))))
                .collect::<Result<_, _>>()?;
            let (name, series, approx) = if kind == AsymptoteKind::Reverse {
                let s = reverse_series(&exact, order)?;
                let approx = series_value(&reverse_series(&floats, order)?);
                ("reverse", s, approx)
            } else {
                let cf = CenterFamilyModel::new(floats)?;
                let s = center_expansion_exact(&exact, k, order)?;
                let approx = series_value(&center_expansion(&cf, k, order)?);
                ("center", s, approx)
            };
            let exact_str: Vec<String> = series.coeffs().iter().map(|c| c.to_string()).collect();
            let csv = series_csv(&exact_str);
            let units = if kind == AsymptoteKind::Center { "2pi" } else { "1" };
            Ok(Outcome::new(
                json!({ "kind": name, "order": order, "k": k, "exact_units": units, "exact": exact_str, "approx": approx }),
                Some(csv),
            ))
        }
        AsymptoteKind::Endpoint => {
            let (_, m, ann) = family(f)?;
            if k > 1 {
                return Err(input("endpoint fits are available for k = 0 and k = 1"));
            }
            let fam = OvalFamily::from_annulus(&m, &ann);
            let samples = endpoint_samples(&fam, End::Upper, abelint::asymptotics::LIMIT_SAMPLES, opts)?;
            let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.values[k as usize])).collect();
            let fit = endpoint_fit(&pts, ann.h_s())?;
            let mut v = to_value(&fit);
            v["k"] = json!(k);
            v["h_s"] = json!(ann.h_s());
            Ok(Outcome::new(v, None))
        }
        AsymptoteKind::Infinity => {
            let (_, m, ann) = family(f)?;
            if k > 1 {
                return Err(input("infinity fits are available for k = 0 and k = 1"));
            }
            if !(h_min > ann.h_s() && h_max > h_min && points >= 8) {
                return Err(input("need h_s < --h-min < --h-max and --points >= 8"));
            }
            let hs: Vec<f64> = (0..points)
                .map(|j| h_min * (h_max / h_min).powf(j as f64 / (points - 1) as f64))
                .collect();
            let d = delta_grid(&m, &ann, &hs, opts)?;
            let pts: Vec<(Complex64, Complex64)> = d.iter().map(|s| (s.h.into(), s.plus[k as usize])).collect();
            let fit = infinity_exponent_fit(&pts)?;
            let mut v = to_value(&fit);
            v["k"] = json!(k);
            v["expected"] = json!(if k == 0 { -0.3 } else { -0.1 });
            Ok(Outcome::new(v, None))
        }
        AsymptoteKind::Limits => {
            let (_, m, ann) = family(f)?;
            let l = f_limits(&m, &ann, opts)?;
            Ok(Outcome::new(to_value(&l), None))
        }
    }
}

fn converged(s: IntegralSample, opts: &QuadratureOptions) -> Result<IntegralSample, Error> {
    if s.converged {
        Ok(s)
    } else {
        Err(Error::Quadrature {
            tolerance: opts.tol,
            estimate: s.error_estimate,
            nodes: opts.max_nodes,
        })
    }
}

/// Prints `-0.0` as `0.0`.
fn positive_zeros(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = json!(0.0),
        Value::Array(items) => items.iter_mut().for_each(positive_zeros),
        Value::Object(map) => map.values_mut().for_each(positive_zeros),
        _ => {}
    }
}

pub fn render(cmd: &str, out: &Outcome, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => {
            let mut doc = json!({ "command": cmd, "result": out.result });
            positive_zeros(&mut doc);
            let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => out
            .csv
            .clone()
            .ok_or_else(|| input(format!("{cmd} has no CSV form; use --format json"))),
    }
}

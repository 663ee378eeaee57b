//! Selector strings for domains, weights, and families, plus complex
//! number and grid parsing. Selectors follow `name:key=value,key=value`.

use std::sync::Arc;

use num_complex::Complex64;

use super::CliError;
use crate::geometry::{DomainFamily, DomainSpec};
use crate::weights::{EntireRadialWeight, NegativeWeightFamily};

fn parse_err(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Parse {
        line: 0,
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Parse a complex literal: `0.3+0.2i`, `-0.5`, `0.7i`, `1e-3-2e-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(parse_err(s, "empty complex literal"));
    }
    if !t.ends_with('i') && !t.ends_with('I') {
        let re: f64 = t
            .parse()
            .map_err(|_| parse_err(s, "expected a real number"))?;
        return Ok(Complex64::new(re, 0.0));
    }
    let body = &t[..t.len() - 1];
    // split at the sign of the imaginary part: the last +/- that is not at
    // the start and not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    match split {
        None => {
            // purely imaginary: "0.7i", "i", "-i"
            let im: f64 = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other
                    .parse()
                    .map_err(|_| parse_err(s, "expected an imaginary part"))?,
            };
            Ok(Complex64::new(0.0, im))
        }
        Some(i) => {
            let re: f64 = body[..i]
                .parse()
                .map_err(|_| parse_err(s, "bad real part"))?;
            let im_str = &body[i..];
            let im: f64 = match im_str {
                "+" => 1.0,
                "-" => -1.0,
                other => other
                    .parse()
                    .map_err(|_| parse_err(s, "bad imaginary part"))?,
            };
            Ok(Complex64::new(re, im))
        }
    }
}

/// Semicolon-separated list of complex points.
pub fn parse_points(s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_complex)
        .collect()
}

/// Pairs `z,w` separated by semicolons.
pub fn parse_pairs(s: &str) -> Result<Vec<(Complex64, Complex64)>, CliError> {
    let mut pairs = Vec::new();
    for chunk in s.split(';').filter(|p| !p.trim().is_empty()) {
        let (a, b) = chunk
            .split_once(',')
            .ok_or_else(|| parse_err(chunk, "expected z,w"))?;
        pairs.push((parse_complex(a)?, parse_complex(b)?));
    }
    Ok(pairs)
}

/// A list of reals: either comma-separated values or the generators
/// `geom:lo=..,hi=..,n=..` (ratio-spaced) and `lin:lo=..,hi=..,n=..`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if let Some(rest) = s.strip_prefix("geom:") {
        let kv = parse_kv_args(rest)?;
        let lo = kv_f64(&kv, "lo", s)?;
        let hi = kv_f64(&kv, "hi", s)?;
        let n = kv_f64(&kv, "n", s)? as usize;
        if n < 2 || lo <= 0.0 || hi <= lo {
            return Err(parse_err(s, "geom grid needs 0 < lo < hi and n >= 2"));
        }
        let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
        return Ok((0..n).map(|k| lo * ratio.powi(k as i32)).collect());
    }
    if let Some(rest) = s.strip_prefix("lin:") {
        let kv = parse_kv_args(rest)?;
        let lo = kv_f64(&kv, "lo", s)?;
        let hi = kv_f64(&kv, "hi", s)?;
        let n = kv_f64(&kv, "n", s)? as usize;
        if n < 1 {
            return Err(parse_err(s, "lin grid needs n >= 1"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        return Ok((0..n).map(|k| lo + step * k as f64).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| parse_err(p, "expected a number"))
        })
        .collect()
}

fn parse_kv_args(s: &str) -> Result<Vec<(String, String)>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| parse_err(p, "expected key=value"))
        })
        .collect()
}

fn kv_f64(kv: &[(String, String)], key: &str, field: &str) -> Result<f64, CliError> {
    kv.iter()
        .rev()
        .find(|(k, _)| k == key)
        .ok_or_else(|| parse_err(field, format!("missing '{key}'")))?
        .1
        .parse()
        .map_err(|_| parse_err(field, format!("bad value for '{key}'")))
}

fn kv_f64_or(kv: &[(String, String)], key: &str, default: f64) -> f64 {
    kv.iter()
        .rev()
        .find(|(k, _)| k == key)
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(default)
}

fn split_selector(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((name, args)) => (name, args),
        None => (s, ""),
    }
}

/// Domain selectors: `unit-disc`, `disc:cx=..,cy=..,r=..`,
/// `ellipse:a=..,b=..`, `star:a0=..,c1=..,s1=..,...`.
pub fn parse_domain(s: &str) -> Result<DomainSpec, CliError> {
    let (name, args) = split_selector(s);
    match name {
        "unit-disc" => Ok(DomainSpec::UnitDisc),
        "disc" => {
            let kv = parse_kv_args(args)?;
            let cx = kv_f64_or(&kv, "cx", 0.0);
            let cy = kv_f64_or(&kv, "cy", 0.0);
            let r = kv_f64(&kv, "r", s)?;
            DomainSpec::disc(Complex64::new(cx, cy), r)
                .map_err(|e| parse_err(s, e.to_string()))
        }
        "ellipse" => {
            let kv = parse_kv_args(args)?;
            let a = kv_f64(&kv, "a", s)?;
            let b = kv_f64(&kv, "b", s)?;
            DomainSpec::ellipse(a, b).map_err(|e| parse_err(s, e.to_string()))
        }
        "star" => {
            let kv = parse_kv_args(args)?;
            let a0 = kv_f64(&kv, "a0", s)?;
            let mut cos = Vec::new();
            let mut sin = Vec::new();
            for (k, v) in &kv {
                let val: f64 = v
                    .parse()
                    .map_err(|_| parse_err(s, format!("bad value for '{k}'")))?;
                if let Some(idx) = k.strip_prefix('c').and_then(|i| i.parse::<usize>().ok()) {
                    if idx >= 1 {
                        if cos.len() < idx {
                            cos.resize(idx, 0.0);
                        }
                        cos[idx - 1] = val;
                    }
                } else if let Some(idx) = k.strip_prefix('s').and_then(|i| i.parse::<usize>().ok())
                {
                    if idx >= 1 {
                        if sin.len() < idx {
                            sin.resize(idx, 0.0);
                        }
                        sin[idx - 1] = val;
                    }
                }
            }
            DomainSpec::star_shaped(Complex64::new(0.0, 0.0), a0, cos, sin)
                .map_err(|e| parse_err(s, e.to_string()))
        }
        other => Err(parse_err(s, format!("unknown domain '{other}'"))),
    }
}

/// Pointwise weight exponents: `none`, `log-abs:c=..` (phi = c log|z|),
/// `power-log-zero:s=..` (phi at t = 0 of the power-log family),
/// `log-minus-sqrt` (log|z| - sqrt(-log|z|)).
pub fn parse_weight_exponent(
    s: &str,
) -> Result<Option<Arc<dyn Fn(Complex64) -> f64 + Send + Sync>>, CliError> {
    let (name, args) = split_selector(s);
    match name {
        "none" => Ok(None),
        "log-abs" => {
            let kv = parse_kv_args(args)?;
            let c = kv_f64_or(&kv, "c", 1.0);
            Ok(Some(Arc::new(move |z: Complex64| c * z.norm().ln())))
        }
        "power-log-zero" => {
            let kv = parse_kv_args(args)?;
            let s_exp = kv_f64_or(&kv, "s", 1.0);
            Ok(Some(Arc::new(move |z: Complex64| s_exp * z.norm().ln())))
        }
        "log-minus-sqrt" => Ok(Some(Arc::new(|z: Complex64| {
            let l = z.norm().ln();
            l - (-l).sqrt()
        }))),
        other => Err(parse_err(s, format!("unknown weight '{other}'"))),
    }
}

/// Negative weight families: `power-log:s=..`, `scaled-log`,
/// `constant-log:c=..`, `continuous-interp`.
pub fn parse_weight_family(s: &str) -> Result<NegativeWeightFamily, CliError> {
    let (name, args) = split_selector(s);
    match name {
        "power-log" => {
            let kv = parse_kv_args(args)?;
            let s_exp = kv_f64_or(&kv, "s", 1.0);
            if s_exp <= 0.0 {
                return Err(parse_err(s, "power-log needs s > 0"));
            }
            Ok(NegativeWeightFamily::power_log(s_exp))
        }
        "scaled-log" => Ok(NegativeWeightFamily::scaled_log(|z: Complex64| {
            z.norm().ln()
        })),
        "constant-log" => {
            let kv = parse_kv_args(args)?;
            let c = kv_f64_or(&kv, "c", 1.0);
            Ok(NegativeWeightFamily::constant(
                format!("constant-log:c={c}"),
                move |z: Complex64| c * z.norm().ln(),
            ))
        }
        "continuous-interp" => {
            // e^{psi_t} = |z|^2 + t^2, a jointly continuous blend
            Ok(NegativeWeightFamily::continuous_interp(
                |_t| 1.0,
                vec![
                    Arc::new(|_t, z: Complex64| z),
                    Arc::new(|t: f64, _z| Complex64::new(t, 0.0)),
                ],
            ))
        }
        other => Err(parse_err(s, format!("unknown weight family '{other}'"))),
    }
}

/// Entire radial weights: `log-one-plus-sq`, `gaussian`.
pub fn parse_entire_weight(s: &str) -> Result<EntireRadialWeight, CliError> {
    match s {
        "log-one-plus-sq" => Ok(EntireRadialWeight::log_one_plus_square()),
        "gaussian" => Ok(EntireRadialWeight::gaussian()),
        other => Err(parse_err(s, format!("unknown entire weight '{other}'"))),
    }
}

/// Domain families: `dilating-discs`, `disc-power:alpha=..`,
/// `constant-disc`, `sublevel-disc`.
pub fn parse_domain_family(s: &str) -> Result<DomainFamily, CliError> {
    let (name, args) = split_selector(s);
    match name {
        "dilating-discs" => Ok(DomainFamily::dilating_discs()),
        "disc-power" => {
            let kv = parse_kv_args(args)?;
            let alpha = kv_f64_or(&kv, "alpha", 1.0);
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(parse_err(s, "disc-power needs alpha in (0, 1]"));
            }
            Ok(DomainFamily::disc_radius_power(alpha))
        }
        "constant-disc" => Ok(DomainFamily::constant(DomainSpec::UnitDisc)),
        "sublevel-disc" => {
            DomainFamily::sublevel_discs().map_err(|e| parse_err(s, e.to_string()))
        }
        other => Err(parse_err(s, format!("unknown domain family '{other}'"))),
    }
}

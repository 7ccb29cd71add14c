//! Textual forms of measures, tail specs, grids and complex points, with
//! canonical JSON echoes for the run config.
//!
//! Measures: `twopoint`, `twopoint(p,x0,x1)`, `uniform`, `exponential(rate)`,
//! `pareto(shape)`, `pointmass(b)`, `discrete(x:w,...)`, or a JSON object
//! `{"family": ..., <params>, "truncate": T}`.
//! Tail specs: `pareto(a)`, `student_t(a)`, `slowly_varying`, `rademacher`,
//! `gaussian`, `uniform`, or `{"family": ..., "alpha": a}`.

use crate::CliError;
use heavyqf_core::measure::Measure;
use heavyqf_core::sampler::HeavyTailSpec;
use num_complex::Complex64;
use serde_json::{json, Value};

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")))
}

/// `name` or `name(args)`.
fn split_call(s: &str) -> Result<(String, Vec<String>), CliError> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_ascii_lowercase(), Vec::new())),
        Some(i) => {
            let rest = s[i + 1..].strip_suffix(')').ok_or_else(|| bad(format!("missing ')' in {s:?}")))?;
            let args = if rest.trim().is_empty() { Vec::new() } else { rest.split(',').map(|a| a.trim().to_string()).collect() };
            Ok((s[..i].trim().to_ascii_lowercase(), args))
        }
    }
}

fn nums(args: &[String]) -> Result<Vec<f64>, CliError> {
    args.iter().map(|a| parse_f64(a)).collect()
}

fn arity(name: &str, v: &[f64], allowed: &[usize]) -> Result<(), CliError> {
    if allowed.contains(&v.len()) {
        Ok(())
    } else {
        Err(bad(format!("{name} takes {allowed:?} parameters, got {}", v.len())))
    }
}

/// A measure together with its canonical JSON description.
#[derive(Debug, Clone)]
pub struct NuArg {
    pub measure: Measure,
    pub echo: Value,
}

fn family_measure(name: &str, v: &[f64]) -> Result<(Measure, Value), CliError> {
    let (m, echo) = match name {
        "twopoint" | "two_point" => {
            arity(name, v, &[0, 3])?;
            let (p, x0, x1) = if v.is_empty() { (0.5, 0.0, 1.0) } else { (v[0], v[1], v[2]) };
            (Measure::two_point(p, x0, x1), json!({"family": "twopoint", "p": p, "x0": x0, "x1": x1}))
        }
        "uniform" | "uniform_unit" => {
            arity(name, v, &[0])?;
            (Ok(Measure::uniform_unit()), json!({"family": "uniform"}))
        }
        "exponential" | "exp" => {
            arity(name, v, &[0, 1])?;
            let rate = v.first().copied().unwrap_or(1.0);
            (Measure::exponential(rate), json!({"family": "exponential", "rate": rate}))
        }
        "pareto" => {
            arity(name, v, &[1])?;
            (Measure::pareto(v[0]), json!({"family": "pareto", "shape": v[0]}))
        }
        "pointmass" | "point_mass" => {
            arity(name, v, &[1])?;
            (Measure::point_mass(v[0]), json!({"family": "pointmass", "b": v[0]}))
        }
        other => return Err(bad(format!("unknown measure {other:?}"))),
    };
    Ok((m.map_err(CliError::Core)?, echo))
}

pub fn parse_nu(s: &str) -> Result<NuArg, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        return parse_nu_json(&serde_json::from_str(s).map_err(|e| bad(format!("measure JSON: {e}")))?);
    }
    let (name, args) = split_call(s)?;
    if name == "discrete" {
        let mut atoms = Vec::new();
        for a in &args {
            let (x, w) = a.split_once(':').ok_or_else(|| bad(format!("discrete atom {a:?} must be x:w")))?;
            atoms.push((parse_f64(x)?, parse_f64(w)?));
        }
        return discrete(atoms);
    }
    let (measure, echo) = family_measure(&name, &nums(&args)?)?;
    Ok(NuArg { measure, echo })
}

fn discrete(atoms: Vec<(f64, f64)>) -> Result<NuArg, CliError> {
    let echo = json!({"family": "discrete", "atoms": atoms.iter().map(|(x, w)| vec![*x, *w]).collect::<Vec<_>>()});
    Ok(NuArg { measure: Measure::discrete(atoms).map_err(CliError::Core)?, echo })
}

fn pairs(v: &Value, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| bad(format!("missing array {key:?}")))?;
    arr.iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => match (a.as_f64(), b.as_f64()) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(bad("pair entries must be numbers")),
            },
            _ => Err(bad(format!("entries of {key:?} must be [x, value] pairs"))),
        })
        .collect()
}

fn parse_nu_json(v: &Value) -> Result<NuArg, CliError> {
    let fam = v.get("family").and_then(Value::as_str).ok_or_else(|| bad("measure JSON needs a \"family\" string"))?;
    let num = |k: &str| -> Result<Option<f64>, CliError> {
        match v.get(k) {
            None | Some(Value::Null) => Ok(None),
            Some(x) => x.as_f64().map(Some).ok_or_else(|| bad(format!("{k:?} must be a number"))),
        }
    };
    let mut out = match fam.to_ascii_lowercase().as_str() {
        "discrete" => discrete(pairs(v, "atoms")?)?,
        "table" => {
            let pts = pairs(v, "points")?;
            let echo = json!({"family": "table", "points": pts.iter().map(|(x, d)| vec![*x, *d]).collect::<Vec<_>>()});
            NuArg { measure: Measure::density_table(pts).map_err(CliError::Core)?, echo }
        }
        name => {
            let args: Vec<f64> = match name {
                "twopoint" | "two_point" => match (num("p")?, num("x0")?, num("x1")?) {
                    (None, None, None) => vec![],
                    (p, x0, x1) => vec![p.unwrap_or(0.5), x0.unwrap_or(0.0), x1.unwrap_or(1.0)],
                },
                "exponential" | "exp" => num("rate")?.into_iter().collect(),
                "pareto" => num("shape")?.into_iter().collect(),
                "pointmass" | "point_mass" => num("b")?.into_iter().collect(),
                _ => vec![],
            };
            let (measure, echo) = family_measure(name, &args)?;
            NuArg { measure, echo }
        }
    };
    if let Some(t) = num("truncate")? {
        out.measure = out.measure.truncate(t).map_err(CliError::Core)?;
        out.echo["truncate"] = json!(t);
    }
    Ok(out)
}

pub fn xi_echo(xi: &HeavyTailSpec) -> Value {
    json!({"family": xi.name(), "alpha": match xi {
        HeavyTailSpec::SymmetricPareto { alpha } | HeavyTailSpec::StudentT { alpha } => json!(alpha),
        _ => Value::Null,
    }})
}

fn xi_from(name: &str, alpha: Option<f64>) -> Result<HeavyTailSpec, CliError> {
    let need = |a: Option<f64>| a.ok_or_else(|| bad(format!("{name} needs alpha")));
    let spec = match name {
        "pareto" | "symmetric_pareto" => HeavyTailSpec::SymmetricPareto { alpha: need(alpha)? },
        "student_t" | "studentt" | "t" => HeavyTailSpec::StudentT { alpha: need(alpha)? },
        "slowly_varying" | "slowlyvarying" => HeavyTailSpec::SlowlyVarying,
        "rademacher" => HeavyTailSpec::Rademacher,
        "gaussian" | "standard_gaussian" | "normal" => HeavyTailSpec::StandardGaussian,
        "uniform" | "uniform_symmetric" => HeavyTailSpec::UniformSymmetric,
        other => return Err(bad(format!("unknown tail family {other:?}"))),
    };
    spec.validate().map_err(CliError::Core)?;
    Ok(spec)
}

pub fn parse_xi(s: &str) -> Result<HeavyTailSpec, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        let v: Value = serde_json::from_str(s).map_err(|e| bad(format!("tail spec JSON: {e}")))?;
        let fam = v.get("family").and_then(Value::as_str).ok_or_else(|| bad("tail spec JSON needs \"family\""))?;
        return xi_from(&fam.to_ascii_lowercase(), v.get("alpha").and_then(Value::as_f64));
    }
    let (name, args) = split_call(s)?;
    let v = nums(&args)?;
    if v.len() > 1 {
        return Err(bad(format!("{name} takes at most one parameter")));
    }
    xi_from(&name, v.first().copied())
}

/// `a:b:count`, inclusive and linear.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!("grid {s:?} must be a:b:count")));
    }
    let (a, b) = (parse_f64(parts[0])?, parse_f64(parts[1])?);
    let count: usize = parts[2].trim().parse().map_err(|_| bad(format!("grid count {:?} is not an integer", parts[2])))?;
    if count == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad(format!("grid {s:?} needs finite ends and count >= 1")));
    }
    if count == 1 {
        return Ok(vec![a]);
    }
    Ok((0..count).map(|i| if i == count - 1 { b } else { a + (b - a) * i as f64 / (count - 1) as f64 }).collect())
}

pub fn parse_list_f64(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_list_usize(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad(format!("not a positive integer: {x:?}")))).collect()
}

/// `re,im` or a bare real.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    match s.split_once(',') {
        Some((r, i)) => Ok(Complex64::new(parse_f64(r)?, parse_f64(i)?)),
        None => Ok(Complex64::new(parse_f64(s)?, 0.0)),
    }
}

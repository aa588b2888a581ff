//! Flag value parsers.

use flowcx_core::density::rational_from_f64;
use flowcx_core::flows::{Observable, TrigPoly};
use flowcx_core::polyfam::parse::{parse_rational, parse_real_constant};
use flowcx_core::polyfam::Rational;
use num_complex::Complex64;

use crate::error::CliError;

pub fn real(text: &str) -> Result<f64, CliError> {
    parse_real_constant(text.trim()).map_err(|e| CliError::Usage(format!("'{text}': {e}")))
}

/// Comma-separated constant expressions.
pub fn reals(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(real).collect()
}

/// An exact rational such as `0.05` or `1/20`, or a float snapped to a
/// nearby small fraction.
pub fn exact(text: &str, name: &str) -> Result<Rational, CliError> {
    let t = text.trim();
    parse_rational(t)
        .or_else(|| t.parse::<f64>().ok().and_then(rational_from_f64))
        .ok_or_else(|| CliError::Usage(format!("--{name}: not a number: '{text}'")))
}

/// `a:b` intervals separated by commas.
pub fn psi(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("--psi: expected 'a:b', found '{part}'")))?;
            Ok((real(a)?, real(b)?))
        })
        .collect()
}

fn shorthand(item: &str) -> Result<Observable, CliError> {
    let item = item.trim();
    let bad = || CliError::Usage(format!("unknown observable '{item}'"));
    let (kind, rest) = item.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "char" => {
            let freq = rest
                .split(',')
                .map(|v| v.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(TrigPoly::character(freq).into())
        }
        "const" => {
            let parts: Vec<&str> = rest.split(',').collect();
            let (m, c) = match parts.as_slice() {
                [c] => (1, real(c)?),
                [c, m] => (m.trim().parse::<usize>().map_err(|_| bad())?, real(c)?),
                _ => return Err(bad()),
            };
            Ok(TrigPoly::constant(m, Complex64::new(c, 0.0)).into())
        }
        _ => Err(bad()),
    }
}

/// A JSON array of observables, `@path` to such a file, or a `;`-separated
/// list of `char:n1,...,nm` and `const:c[,m]` items.
pub fn observables(text: &str) -> Result<Vec<Observable>, CliError> {
    let t = text.trim();
    let json = if let Some(path) = t.strip_prefix('@') {
        Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?,
        )
    } else if t.starts_with('[') {
        Some(t.to_string())
    } else {
        None
    };
    let obs: Vec<Observable> = match json {
        Some(j) => serde_json::from_str(&j).map_err(|e| CliError::Usage(format!("--observables: {e}")))?,
        None => t.split(';').filter(|s| !s.trim().is_empty()).map(shorthand).collect::<Result<_, _>>()?,
    };
    for o in &obs {
        o.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(reals("1, 1/2").unwrap(), vec![1.0, 0.5]);
        assert!((real("sqrt2").unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(psi("0:5,1:2").unwrap(), vec![(0.0, 5.0), (1.0, 2.0)]);
        assert!(psi("0-5").is_err());
        assert_eq!(exact("0.05", "delta").unwrap(), Rational::new(1.into(), 20.into()));
    }

    #[test]
    fn observable_forms() {
        let a = observables("char:1,0; const:0.5,2").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].dim(), 2);
        assert_eq!(a[1].constant_value(), Some(Complex64::new(0.5, 0.0)));
        let b = observables(r#"[{"type":"box","corner":[0.0],"widths":[0.5]}]"#).unwrap();
        assert_eq!(b[0].integral(), Complex64::new(0.5, 0.0));
        assert!(observables("wave:1").is_err());
        assert!(observables(r#"[{"type":"box","corner":[0.0],"widths":[1.5]}]"#).is_err());
    }
}

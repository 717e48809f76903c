//! JSON forms of series, polynomials, lattice elements and comparisons.
//!
//! A series is `{val, prec, coeffs}` with `coeffs[i]` the coefficient of
//! `u^(val + i)`; coefficients are integers over a prime field and
//! generator powers (`"g^j"`) over an extension.

use qmod::lattice::FilteredBasis;
use qmod::{Comparison, Field, LaurentSeries, QuadElem};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub fn series(s: &LaurentSeries) -> Value {
    let f = s.field();
    let coeffs: Vec<Value> = s
        .coeffs()
        .iter()
        .map(|&c| if f.is_prime_field() { json!(c) } else { json!(f.format_elem(c)) })
        .collect();
    json!({ "val": s.val(), "prec": s.prec(), "coeffs": coeffs })
}

pub fn parse_series(field: &Field, v: &Value) -> CliResult<LaurentSeries> {
    let bad = |m: &str| CliError::Instance(format!("series: {m}"));
    let val = v.get("val").and_then(Value::as_i64).ok_or_else(|| bad("missing val"))?;
    let prec = v.get("prec").and_then(Value::as_i64).ok_or_else(|| bad("missing prec"))?;
    let raw = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))?;
    let mut coeffs = Vec::with_capacity(raw.len());
    for c in raw {
        let e = match c {
            Value::Number(n) => field.parse_elem(&n.to_string())?,
            Value::String(s) => field.parse_elem(s)?,
            _ => return Err(bad("coefficient is neither a number nor a string")),
        };
        coeffs.push(e);
    }
    Ok(LaurentSeries::new(field, val, coeffs, prec))
}

pub fn elem(z: &QuadElem) -> Value {
    json!({ "x": z.x().to_string(), "y": z.y().to_string() })
}

pub fn comparison(c: &Comparison) -> Value {
    match *c {
        Comparison::Equal { prec } => json!({ "status": "equal", "prec": prec }),
        Comparison::DifferAt(k) => json!({ "status": "differ", "at": k }),
        Comparison::Undecidable { available } => json!({ "status": "undecidable", "available": available }),
    }
}

pub fn basis(fb: &FilteredBasis) -> Value {
    let rows: Vec<Value> = fb.rows().iter().map(|r| json!({ "degree": r.degree, "elem": elem(&r.elem) })).collect();
    json!({ "bound": fb.bound(), "rows": rows, "content_hash": fb.content_hash() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        for field in [Field::prime(3).unwrap(), Field::extension(2, &[1, 1, 1]).unwrap()] {
            let s = LaurentSeries::new(&field, -2, vec![1, 0, 2, 3 % field.q(), 1], 9);
            let v = series(&s);
            assert_eq!(parse_series(&field, &v).unwrap(), s);
            let text = serde_json::to_string(&v).unwrap();
            let back: Value = serde_json::from_str(&text).unwrap();
            assert_eq!(parse_series(&field, &back).unwrap(), s);
        }
        let z = LaurentSeries::zero(&Field::prime(2).unwrap(), 5);
        assert_eq!(series(&z), json!({"val": 5, "prec": 5, "coeffs": []}));
    }
}

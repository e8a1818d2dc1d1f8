//! Canonical JSON for reports, tuples and subspaces.
//!
//! Keys are sorted, floats print with 17 significant digits, and exact
//! rationals are strings like `"1/2"`. Equal values always give equal bytes.

use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::fp::FpMatrix;
use crate::graph::Rational;
use crate::linalg::{c, CMat};
use crate::matrix::Matrix;
use crate::subspace::{canonical_basis, Subspace};
use crate::tuple::{MatrixTuple, TupleMetadata};

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn ser_opt_rational<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    text.parse::<Rational>()
        .map_err(|e| Error::Parse(format!("'{text}' is not a rational: {e:?}")))
}

/// Serializes any value to canonical JSON bytes (UTF-8, trailing newline).
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_float(x: f64, out: &mut String) {
    if x == 0.0 {
        // one spelling for both signed zeros
        out.push_str("0.0");
    } else {
        out.push_str(&format!("{x:.16e}"));
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', 2 * k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                write_float(n.as_f64().expect("f64"), out);
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's default map is ordered by key
            out.push_str("{\n");
            let len = map.len();
            for (k, (key, x)) in map.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if k + 1 < len { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

pub fn field_to_json(f: &FieldSpec) -> Value {
    match f {
        FieldSpec::Complex { .. } => json!("complex"),
        FieldSpec::Prime(p) => json!({ "prime": p }),
    }
}

pub fn field_from_json(v: &Value) -> Result<FieldSpec> {
    match v {
        Value::String(s) if s == "complex" => Ok(FieldSpec::complex()),
        Value::Object(m) => {
            let p = m
                .get("prime")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("field object needs an integer \"prime\"".into()))?;
            FieldSpec::prime(p)
        }
        other => Err(Error::Parse(format!("unknown field {other}"))),
    }
}

/// Row-major nested arrays; complex entries as `[re, im]`.
pub fn matrix_to_json(m: &Matrix) -> Value {
    match m {
        Matrix::Complex(a) => Value::Array(
            (0..a.nrows())
                .map(|i| {
                    Value::Array(
                        (0..a.ncols())
                            .map(|j| json!([a[(i, j)].re, a[(i, j)].im]))
                            .collect(),
                    )
                })
                .collect(),
        ),
        Matrix::Prime(a) => Value::Array((0..a.rows()).map(|i| json!(a.row(i))).collect()),
    }
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn complex_entry(v: &Value) -> Result<num_complex::Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(c(x, 0.0));
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(c(re, im)),
            _ => Err(Error::Parse(format!("bad complex entry {v}"))),
        },
        _ => Err(Error::Parse(format!("complex entries are [re, im] pairs, got {v}"))),
    }
}

pub fn matrix_from_json(v: &Value, field: &FieldSpec) -> Result<Matrix> {
    let rows = as_array(v, "matrix")?;
    let nrows = rows.len();
    let ncols = match rows.first() {
        Some(r) => as_array(r, "matrix row")?.len(),
        None => 0,
    };
    for r in rows {
        if as_array(r, "matrix row")?.len() != ncols {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
    }
    match field {
        FieldSpec::Complex { .. } => {
            let mut m = CMat::zeros(nrows, ncols);
            for (i, r) in rows.iter().enumerate() {
                for (j, x) in as_array(r, "matrix row")?.iter().enumerate() {
                    m[(i, j)] = complex_entry(x)?;
                }
            }
            Ok(Matrix::Complex(m))
        }
        FieldSpec::Prime(p) => {
            let mut data = Vec::with_capacity(nrows);
            for r in rows {
                let row = as_array(r, "matrix row")?
                    .iter()
                    .map(|x| {
                        x.as_i64()
                            .ok_or_else(|| Error::Parse(format!("prime-field entries are integers, got {x}")))
                    })
                    .collect::<Result<Vec<i64>>>()?;
                data.push(row);
            }
            if nrows == 0 {
                return Ok(Matrix::Prime(FpMatrix::zeros(0, 0, *p)));
            }
            Ok(Matrix::Prime(FpMatrix::from_rows(&data, *p)?))
        }
    }
}

pub fn tuple_to_json(t: &MatrixTuple) -> Value {
    let mut m = Map::new();
    m.insert("field".into(), field_to_json(&t.field()));
    m.insert("n".into(), json!(t.n()));
    m.insert(
        "matrices".into(),
        Value::Array(t.matrices().iter().map(matrix_to_json).collect()),
    );
    if t.metadata != TupleMetadata::default() {
        m.insert(
            "metadata".into(),
            serde_json::to_value(&t.metadata).expect("metadata serializes"),
        );
    }
    Value::Object(m)
}

pub fn tuple_from_json(v: &Value) -> Result<MatrixTuple> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("tuple file must be a JSON object".into()))?;
    let field = field_from_json(obj.get("field").ok_or_else(|| Error::Parse("missing \"field\"".into()))?)?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("missing integer \"n\"".into()))? as usize;
    let mats = as_array(
        obj.get("matrices").ok_or_else(|| Error::Parse("missing \"matrices\"".into()))?,
        "matrices",
    )?
    .iter()
    .map(|m| matrix_from_json(m, &field))
    .collect::<Result<Vec<_>>>()?;
    if mats.iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(Error::Parse(format!("every matrix must be {n}x{n}")));
    }
    let mut t = MatrixTuple::from_matrices(mats, field).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(md) = obj.get("metadata") {
        t.metadata = serde_json::from_value(md.clone())
            .map_err(|e| Error::Parse(format!("metadata: {e}")))?;
    }
    Ok(t)
}

pub fn parse_tuple(text: &str) -> Result<MatrixTuple> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    tuple_from_json(&v)
}

pub fn subspace_to_json(s: &Subspace) -> Value {
    json!({
        "field": field_to_json(&s.field()),
        "n": s.ambient_n(),
        "dim": s.dim(),
        "basis": matrix_to_json(s.basis()),
    })
}

/// Reads a subspace and canonicalizes its basis.
pub fn subspace_from_json(v: &Value) -> Result<Subspace> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("subspace must be a JSON object".into()))?;
    let field = field_from_json(obj.get("field").ok_or_else(|| Error::Parse("missing \"field\"".into()))?)?;
    let basis = matrix_from_json(
        obj.get("basis").ok_or_else(|| Error::Parse("missing \"basis\"".into()))?,
        &field,
    )?;
    canonical_basis(&basis, field)
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        subspace_to_json(self).serialize(s)
    }
}

impl Serialize for MatrixTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        tuple_to_json(self).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_strings() {
        #[derive(Serialize)]
        struct R {
            #[serde(serialize_with = "ser_rational")]
            h: Rational,
            x: f64,
        }
        let s = to_canonical_json(&R {
            h: Rational::new(2, 4),
            x: 0.5,
        })
        .unwrap();
        assert_eq!(s, "{\n  \"h\": \"1/2\",\n  \"x\": 5.0000000000000000e-1\n}\n");
        assert_eq!(parse_rational("2/3").unwrap(), Rational::new(2, 3));
        assert_eq!(Rational::from_integer(1).to_string(), "1");
    }

    #[test]
    fn keys_sorted_and_floats_roundtrip() {
        let v = json!({"b": 1, "a": [0.1, -0.0], "c": {"z": 1e-300, "y": null}});
        let s = to_canonical_json(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0].as_f64().unwrap(), 0.1);
        assert_eq!(back["c"]["z"].as_f64().unwrap(), 1e-300);
    }

    #[test]
    fn tuple_roundtrip_is_idempotent() {
        let f = FpMatrix::from_rows(&[vec![0, 1], vec![0, 0]], 2).unwrap();
        let t = MatrixTuple::prime(vec![f.clone(), f.transpose()], 2).unwrap();
        let text = to_canonical_json(&t).unwrap();
        let back = parse_tuple(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(to_canonical_json(&back).unwrap(), text);

        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(0.3, -1.0 / 3.0);
        let t = MatrixTuple::complex(vec![m]).unwrap();
        let text = to_canonical_json(&t).unwrap();
        assert_eq!(parse_tuple(&text).unwrap(), t);
    }

    #[test]
    fn malformed_tuples() {
        assert!(parse_tuple("{").is_err());
        assert!(parse_tuple(r#"{"field":"complex","n":2,"matrices":[[[1]]]}"#).is_err());
        assert!(parse_tuple(r#"{"field":{"prime":4},"n":1,"matrices":[[[1]]]}"#).is_err());
        assert!(parse_tuple(r#"{"field":"real","n":1,"matrices":[[[1]]]}"#).is_err());
        let ok = parse_tuple(r#"{"field":{"prime":3},"n":1,"matrices":[[[5]]]}"#).unwrap();
        assert_eq!(ok.prime_matrices().unwrap()[0].get(0, 0), 2);
    }
}

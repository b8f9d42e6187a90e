//! JSON and TSV rendering. Integers beyond `2^53` become decimal strings and
//! rationals are always `"num/den"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{Map, Value};

const SAFE_INT: i64 = 1 << 53;

pub fn int(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) if v.abs() <= SAFE_INT => Value::from(v),
        _ => Value::String(n.to_string()),
    }
}

pub fn rational(q: &BigRational) -> Value {
    Value::String(format!("{}/{}", q.numer(), q.denom()))
}

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// A report with an optional table of rows, rendered as one JSON document
/// or as TSV (header plus rows, then `#`-prefixed summary fields).
pub struct Report {
    pub body: Value,
    /// Key in `body` holding an array of flat row objects, if any.
    pub table: Option<&'static str>,
}

impl Report {
    pub fn single<T: Serialize>(value: &T) -> Self {
        Report {
            body: serde_json::to_value(value).expect("report types serialize"),
            table: None,
        }
    }

    pub fn tabular<T: Serialize>(value: &T, key: &'static str) -> Self {
        Report {
            body: serde_json::to_value(value).expect("report types serialize"),
            table: Some(key),
        }
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.body).expect("report types serialize");
        s.push('\n');
        s
    }

    pub fn tsv(&self) -> String {
        let Value::Object(obj) = &self.body else {
            return format!("{}\n", cell(&self.body));
        };
        let mut out = String::new();
        match self.table.and_then(|k| obj.get(k).map(|rows| (k, rows))) {
            Some((key, Value::Array(rows))) => {
                if let Some(Value::Object(first)) = rows.first() {
                    out += &header(first);
                    for row in rows {
                        if let Value::Object(r) = row {
                            out += &line(r);
                        }
                    }
                }
                for (k, v) in obj.iter().filter(|(k, _)| k.as_str() != key) {
                    out += &format!("# {k}\t{}\n", cell(v));
                }
            }
            _ => {
                out += &header(obj);
                out += &line(obj);
            }
        }
        out
    }
}

fn header(obj: &Map<String, Value>) -> String {
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    format!("{}\n", keys.join("\t"))
}

fn line(obj: &Map<String, Value>) -> String {
    let cells: Vec<String> = obj.values().map(cell).collect();
    format!("{}\n", cells.join("\t"))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "NA".into(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_switch_to_strings_past_2_53() {
        assert_eq!(int(&BigInt::from(SAFE_INT)), Value::from(SAFE_INT));
        assert_eq!(int(&(BigInt::from(SAFE_INT) + 1)), Value::String("9007199254740993".into()));
        assert_eq!(int(&-BigInt::from(SAFE_INT + 1)), Value::String("-9007199254740993".into()));
    }

    #[test]
    fn rationals_keep_denominator() {
        let q = BigRational::new(3.into(), 1.into());
        assert_eq!(rational(&q), Value::String("3/1".into()));
    }

    #[test]
    fn tsv_table_layout() {
        #[derive(Serialize)]
        struct Row {
            m: i64,
            ok: bool,
        }
        #[derive(Serialize)]
        struct Doc {
            d: u64,
            rows: Vec<Row>,
        }
        let doc = Doc {
            d: 2,
            rows: vec![Row { m: -1, ok: true }, Row { m: 1, ok: false }],
        };
        let tsv = Report::tabular(&doc, "rows").tsv();
        assert_eq!(tsv, "m\tok\n-1\ttrue\n1\tfalse\n# d\t2\n");
    }
}

//! CSV and JSON rendering of command results.

use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Empty,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        match i64::try_from(x) {
            Ok(i) => Value::Int(i),
            Err(_) => Value::Float(x as f64),
        }
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Str(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Str(x)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Empty, Into::into)
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => fmt_g17(*x),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => csv_field(s),
            Value::Empty => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => json!(i),
            Value::Float(x) if x.is_finite() => json!(x),
            Value::Float(x) => Json::String(fmt_g17(*x)),
            Value::Bool(b) => json!(b),
            Value::Str(s) => json!(s),
            Value::Empty => Json::Null,
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `printf("%.17g")`: enough digits to round-trip any double. Infinities
/// print as `inf` / `-inf`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub type Fields = Vec<(&'static str, Value)>;

pub enum Payload {
    Rows {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Value>>,
    },
    Result(Fields),
}

pub struct OutputRecord {
    pub command: &'static str,
    pub inputs: Fields,
    pub payload: Payload,
}

impl OutputRecord {
    pub fn csv(&self) -> String {
        let mut out = String::new();
        let mut line = |cells: Vec<String>| {
            out.push_str(&cells.join(","));
            out.push('\n');
        };
        match &self.payload {
            Payload::Rows { columns, rows } => {
                line(columns.iter().map(|c| csv_field(c)).collect());
                for row in rows {
                    line(row.iter().map(Value::csv).collect());
                }
            }
            Payload::Result(fields) => {
                line(fields.iter().map(|(k, _)| csv_field(k)).collect());
                line(fields.iter().map(|(_, v)| v.csv()).collect());
            }
        }
        out
    }

    pub fn json(&self) -> String {
        let object = |fields: &Fields| {
            fields
                .iter()
                .map(|(k, v)| (k.to_string(), v.json()))
                .collect::<Map<_, _>>()
        };
        let mut doc = Map::new();
        doc.insert("schema_version".into(), json!(1));
        doc.insert("command".into(), json!(self.command));
        doc.insert("inputs".into(), Json::Object(object(&self.inputs)));
        match &self.payload {
            Payload::Rows { columns, rows } => {
                let rows = rows
                    .iter()
                    .map(|row| {
                        Json::Object(
                            columns
                                .iter()
                                .zip(row)
                                .map(|(k, v)| (k.to_string(), v.json()))
                                .collect(),
                        )
                    })
                    .collect();
                doc.insert("rows".into(), Json::Array(rows));
            }
            Payload::Result(fields) => {
                doc.insert("result".into(), Json::Object(object(fields)));
            }
        }
        let mut s = serde_json::to_string_pretty(&Json::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }
}

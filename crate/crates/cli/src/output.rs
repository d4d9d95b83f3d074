use serde::Serialize;
use serde_json::Value;

/// Rounds to 10 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("valid float literal")
}

pub fn float(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded; struct field order is kept.
pub fn json<T: Serialize>(report: &T) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// RFC 4180 table.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Two-column `field,value` table.
pub fn csv_fields(fields: &[(&str, String)]) -> String {
    csv(&["field", "value"], fields.iter().map(|(k, v)| vec![k.to_string(), v.clone()]))
}

pub fn text_fields(fields: &[(&str, String)]) -> String {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    fields.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(float(16.32993161855452), "16.32993162");
        assert_eq!(float(0.0), "0");
        assert_eq!(float(1.0), "1");
        assert_eq!(float(123456789012.0), "123456789000");
    }

    #[test]
    fn json_rounds_nested_floats() {
        let v = serde_json::json!({"a": [1.23456789012345, 2], "b": {"c": 0.1}});
        assert_eq!(json(&v), "{\n  \"a\": [\n    1.23456789,\n    2\n  ],\n  \"b\": {\n    \"c\": 0.1\n  }\n}\n");
    }

    #[test]
    fn csv_quotes_fields() {
        assert_eq!(csv(&["a", "b"], [vec!["x,y".to_string(), "1".into()]]), "a,b\r\n\"x,y\",1\r\n");
    }
}

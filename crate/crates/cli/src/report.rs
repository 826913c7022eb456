//! Deterministic report rendering: sorted keys, every float as `{:.16e}`.

use std::fmt::Write;

use serde_json::{Map, Value};

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(i) = n.as_i64() {
        write!(out, "{i}").unwrap();
    } else if let Some(u) = n.as_u64() {
        write!(out, "{u}").unwrap();
    } else {
        let f = n.as_f64().expect("finite json number");
        write!(out, "{f:.16e}").unwrap();
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.push_str(&"  ".repeat(n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => write!(out, "{b}").unwrap(),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so iteration is already key-sorted
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                write!(out, "{}: ", serde_json::to_string(k).unwrap()).unwrap();
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => {
            let mut s = String::new();
            write_number(&mut s, n);
            Some(s)
        }
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Header plus one row of the report's top-level scalar fields.
pub fn to_csv(v: &Value) -> String {
    let empty = Map::new();
    let map = v.as_object().unwrap_or(&empty);
    let (keys, vals): (Vec<&str>, Vec<String>) =
        map.iter().filter_map(|(k, x)| scalar(x).map(|s| (k.as_str(), s))).unzip();
    format!("{}\n{}\n", keys.join(","), vals.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let s = to_json(&json!({"b": 0.1, "a": [1, 2.5], "c": {"z": true, "y": null}}));
        assert_eq!(
            s,
            "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_takes_scalars() {
        assert_eq!(to_csv(&json!({"x": 1, "m": {"k": 1}, "n": "s"})), "n,x\ns,1\n");
    }
}

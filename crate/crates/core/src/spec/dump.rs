use serde_json::Value;

use super::model::XaiSpec;

/// Flattens every scalar field of `spec` into sorted `path = value` lines.
/// Values are JSON-encoded; the strategy tree is left out.
pub fn field_dump(spec: &XaiSpec) -> String {
    let mut value = serde_json::to_value(spec).expect("specs always serialize");
    if let Some(strategy) = value.get_mut("strategy").and_then(Value::as_object_mut) {
        strategy.remove("tree");
    }
    let mut lines = Vec::new();
    flatten(&value, String::new(), &mut lines);
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn flatten(value: &Value, path: String, out: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let child = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(v, child, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, format!("{path}[{i}]"), out);
            }
        }
        scalar => out.push(format!("{path} = {scalar}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_paths() {
        let v: Value = serde_json::json!({"a": {"b": [1, "x"]}, "c": true});
        let mut lines = Vec::new();
        flatten(&v, String::new(), &mut lines);
        assert_eq!(lines, ["a.b[0] = 1", "a.b[1] = \"x\"", "c = true"]);
    }
}

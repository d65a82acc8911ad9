mod common;

use common::{schema, validate_def};
use serde_json::{json, Value};

fn refs(node: &Value, out: &mut Vec<String>) {
    match node {
        Value::Object(m) => {
            if let Some(Value::String(r)) = m.get("$ref") {
                out.push(r.clone());
            }
            m.values().for_each(|v| refs(v, out));
        }
        Value::Array(a) => a.iter().for_each(|v| refs(v, out)),
        _ => {}
    }
}

#[test]
fn every_ref_and_route_resolves() {
    let s = schema();
    let mut found = Vec::new();
    refs(s, &mut found);
    assert!(found.len() > 30);
    for r in found {
        let name = r.strip_prefix("#/$defs/").unwrap();
        assert!(s["$defs"][name].is_object(), "{r}");
    }
    for (route, def) in s["x-routes"].as_object().unwrap() {
        assert!(s["$defs"][def.as_str().unwrap()].is_object(), "{route}");
    }
}

#[test]
fn validator_rejects_bad_documents() {
    let good = json!({"class_index": 1, "class_name": "b", "probabilities": [0.25, 0.75]});
    assert!(validate_def(&good, "Prediction").is_empty());
    for bad in [
        json!({"class_index": 1, "class_name": "b"}),
        json!({"class_index": -1, "class_name": "b", "probabilities": [0.25, 0.75]}),
        json!({"class_index": 1.5, "class_name": "b", "probabilities": [0.25, 0.75]}),
        json!({"class_index": 1, "class_name": "b", "probabilities": [1.5, 0.75]}),
        json!({"class_index": 1, "class_name": "b", "probabilities": [1.0]}),
        json!({"class_index": 1, "class_name": "b", "probabilities": [0.25, 0.75], "x": 1}),
        json!([1]),
    ] {
        assert!(!validate_def(&bad, "Prediction").is_empty(), "{bad}");
    }
    let text = json!({"type": "text", "content": "hi"});
    assert!(validate_def(&text, "ViewPayload").is_empty());
    assert!(!validate_def(&json!({"type": "chart", "content": "hi"}), "ViewPayload").is_empty());
    assert!(!validate_def(&json!({"error": {"message": "m"}}), "Error").is_empty());
}

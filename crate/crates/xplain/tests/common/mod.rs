#![allow(dead_code)]

use std::sync::OnceLock;

use serde_json::Value;
use xplain::cache::ResponseCache;
use xplain::config::SessionConfig;
use xplain::engine::Engine;
use xplain::service::{Response, Service};

pub const SCHEMA_TEXT: &str = include_str!("../../schema/api.schema.json");

pub fn schema() -> &'static Value {
    static SCHEMA: OnceLock<Value> = OnceLock::new();
    SCHEMA.get_or_init(|| serde_json::from_str(SCHEMA_TEXT).expect("schema parses"))
}

/// Engine over the bundled data with the default session settings.
pub fn engine() -> Engine {
    Engine::from_session(&SessionConfig::default()).expect("default engine")
}

pub fn service() -> Service {
    Service::new(engine(), ResponseCache::in_memory(1024), 0)
}

pub fn post(s: &Service, path: &str, body: &str) -> Response {
    s.handle_request("POST", path, None, body.as_bytes())
}

pub fn get(s: &Service, path: &str, query: Option<&str>) -> Response {
    s.handle_request("GET", path, query, b"")
}

/// Schema definition name for a successful response on `route`
/// (`"POST /api/predict"`), from the schema's route table.
pub fn def_for(route: &str) -> &'static str {
    schema()["x-routes"][route]
        .as_str()
        .unwrap_or_else(|| panic!("no schema route for {route}"))
}

/// Validates `resp` against the definition for `route`, or `Error` for
/// non-2xx statuses.
pub fn assert_valid(route: &str, resp: &Response) {
    let def = if resp.status < 300 { def_for(route) } else { "Error" };
    let errors = validate_def(&resp.body, def);
    assert!(errors.is_empty(), "{route} -> {def}: {errors:?}\n{}", resp.body);
}

pub fn validate_def(doc: &Value, def: &str) -> Vec<String> {
    let mut errors = Vec::new();
    let node = &schema()["$defs"][def];
    assert!(node.is_object(), "unknown definition {def}");
    check(doc, node, "$", &mut errors);
    errors
}

fn resolve(reference: &str) -> &'static Value {
    let name = reference
        .strip_prefix("#/$defs/")
        .unwrap_or_else(|| panic!("unsupported $ref {reference}"));
    let node = &schema()["$defs"][name];
    assert!(node.is_object(), "dangling $ref {reference}");
    node
}

fn type_matches(doc: &Value, ty: &str) -> bool {
    match ty {
        "object" => doc.is_object(),
        "array" => doc.is_array(),
        "string" => doc.is_string(),
        "boolean" => doc.is_boolean(),
        "null" => doc.is_null(),
        "number" => doc.is_number(),
        "integer" => doc.is_u64() || doc.is_i64(),
        other => panic!("unsupported type {other}"),
    }
}

/// Subset of JSON Schema used by the API schema file.
fn check(doc: &Value, schema: &Value, at: &str, errors: &mut Vec<String>) {
    const KNOWN: &[&str] = &[
        "$ref", "type", "properties", "required", "additionalProperties", "items", "enum",
        "const", "anyOf", "minimum", "maximum", "minItems", "maxItems", "minLength", "maxLength",
    ];
    let obj = schema.as_object().expect("schema nodes are objects");
    for k in obj.keys() {
        assert!(KNOWN.contains(&k.as_str()), "validator does not support `{k}`");
    }
    if let Some(r) = obj.get("$ref").and_then(Value::as_str) {
        check(doc, resolve(r), at, errors);
    }
    if let Some(ty) = obj.get("type").and_then(Value::as_str) {
        if !type_matches(doc, ty) {
            errors.push(format!("{at}: expected {ty}, got {doc}"));
            return;
        }
    }
    if let Some(options) = obj.get("enum").and_then(Value::as_array) {
        if !options.contains(doc) {
            errors.push(format!("{at}: {doc} not in {options:?}"));
        }
    }
    if let Some(c) = obj.get("const") {
        if c != doc {
            errors.push(format!("{at}: expected {c}, got {doc}"));
        }
    }
    if let Some(branches) = obj.get("anyOf").and_then(Value::as_array) {
        let ok = branches.iter().any(|b| {
            let mut e = Vec::new();
            check(doc, b, at, &mut e);
            e.is_empty()
        });
        if !ok {
            errors.push(format!("{at}: matches no anyOf branch"));
        }
    }
    if let Some(x) = doc.as_f64() {
        if let Some(min) = obj.get("minimum").and_then(Value::as_f64) {
            if x < min {
                errors.push(format!("{at}: {x} < {min}"));
            }
        }
        if let Some(max) = obj.get("maximum").and_then(Value::as_f64) {
            if x > max {
                errors.push(format!("{at}: {x} > {max}"));
            }
        }
    }
    if let Some(s) = doc.as_str() {
        let n = s.chars().count() as u64;
        if obj.get("minLength").and_then(Value::as_u64).is_some_and(|m| n < m)
            || obj.get("maxLength").and_then(Value::as_u64).is_some_and(|m| n > m)
        {
            errors.push(format!("{at}: length {n} out of bounds"));
        }
    }
    if let Some(items) = doc.as_array() {
        let n = items.len() as u64;
        if obj.get("minItems").and_then(Value::as_u64).is_some_and(|m| n < m)
            || obj.get("maxItems").and_then(Value::as_u64).is_some_and(|m| n > m)
        {
            errors.push(format!("{at}: {n} items out of bounds"));
        }
        if let Some(item_schema) = obj.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item, item_schema, &format!("{at}[{i}]"), errors);
            }
        }
    }
    if let Some(map) = doc.as_object() {
        let props = obj.get("properties").and_then(Value::as_object);
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for r in required {
                let r = r.as_str().expect("required names are strings");
                if !map.contains_key(r) {
                    errors.push(format!("{at}: missing `{r}`"));
                }
            }
        }
        for (k, v) in map {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check(v, s, &format!("{at}.{k}"), errors),
                None if obj.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{at}: unexpected `{k}`"))
                }
                None => {}
            }
        }
    }
}

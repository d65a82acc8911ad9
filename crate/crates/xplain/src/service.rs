//! Request handling for the JSON API, independent of the HTTP server.
//!
//! | route                              | body / query                                   |
//! |------------------------------------|------------------------------------------------|
//! | `GET  /api/dataset`                |                                                |
//! | `GET  /api/dataset/prototypes`     |                                                |
//! | `GET  /api/model`                  |                                                |
//! | `POST /api/predict`                | `{instance}`                                   |
//! | `POST /api/whatif`                 | `{instance, edits}`                            |
//! | `POST /api/explain/{method}`       | `{instance, target_class?, config?, seed?}`    |
//! | `GET  /api/explain/global`         | `?target_class=&seed=`                         |
//! | `GET  /api/audiences`              |                                                |
//! | `GET  /api/views`                  | `?audience=`                                   |
//! | `GET  /api/guide`                  |                                                |
//! | `GET  /api/render`                 | `?reference=&format=&instance=&...`            |
//! | `POST /api/render`                 | `{reference, format, instance, options?}`      |

use serde_json::{json, Map, Value};
use xplain_core::views::{guide_entries, list_reference_methods, recommended_views, AudienceId, FormatId, ReferenceId};
use xplain_core::Error as CoreError;

use crate::cache::{CacheKey, ResponseCache};
use crate::engine::{Engine, Method};
use crate::error::AppError;
use crate::json::canonical_json;

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub status: u16,
    pub body: Value,
}

impl Response {
    fn ok(body: Value) -> Self {
        Self { status: 200, body }
    }

    fn error(status: u16, code: &str, message: impl Into<String>, field: Option<String>) -> Self {
        let mut err = Map::new();
        err.insert("code".into(), code.into());
        err.insert("message".into(), Value::String(message.into()));
        if let Some(f) = field {
            err.insert("field".into(), f.into());
        }
        Self {
            status,
            body: json!({ "error": err }),
        }
    }

    /// Compact JSON bytes as sent on the wire.
    pub fn to_bytes(&self) -> Vec<u8> {
        canonical_json(&self.body).into_bytes()
    }
}

/// Maps an error to its HTTP status, error code and offending field.
pub fn error_response(err: &AppError) -> Response {
    let msg = err.to_string();
    match err {
        AppError::Invalid { field, .. } => Response::error(422, "invalid_request", msg, Some(field.clone())),
        AppError::Input(_) => Response::error(400, "bad_request", msg, None),
        AppError::Io { .. } => Response::error(500, "internal", msg, None),
        AppError::Engine(e) => match e {
            CoreError::Range { feature, .. } | CoreError::InvalidValue { feature, .. } => {
                Response::error(422, "invalid_value", msg, Some(format!("instance.{feature}")))
            }
            CoreError::Dimension { .. } => Response::error(422, "invalid_value", msg, Some("instance".into())),
            CoreError::Config(_) => Response::error(422, "invalid_config", msg, Some("config".into())),
            CoreError::UnsupportedFormat { .. } => {
                Response::error(422, "unsupported_format", msg, Some("format".into()))
            }
            CoreError::MissingExplanation(_) => {
                Response::error(422, "unavailable", msg, Some("reference".into()))
            }
            CoreError::UnknownAudience(_) => {
                Response::error(422, "invalid_value", msg, Some("audience".into()))
            }
            CoreError::SameClass { .. } => {
                Response::error(409, "same_class", msg, Some("target_class".into()))
            }
            _ => Response::error(500, "internal", msg, None),
        },
    }
}

fn invalid(field: &str, message: impl Into<String>) -> AppError {
    AppError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses a JSON body: syntax errors are 400, a non-object is 422.
fn parse_body(body: &[u8]) -> Result<Map<String, Value>, Response> {
    if body.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Response::error(400, "bad_request", "request body is empty", None));
    }
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Response::error(
            422,
            "invalid_request",
            "request body must be a JSON object",
            Some("body".into()),
        )),
        Err(e) => Err(Response::error(400, "bad_request", format!("malformed JSON: {e}"), None)),
    }
}

fn check_fields(map: &Map<String, Value>, allowed: &[&str]) -> Result<(), AppError> {
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    match keys.into_iter().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(k, "unknown field")),
        None => Ok(()),
    }
}

fn opt_u64(map: &Map<String, Value>, field: &str) -> Result<Option<u64>, AppError> {
    match map.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| invalid(field, "must be a non-negative integer")),
    }
}

fn opt_class(map: &Map<String, Value>, field: &str) -> Result<Option<usize>, AppError> {
    Ok(opt_u64(map, field)?.map(|v| v as usize))
}

fn parse_query(query: Option<&str>) -> Result<Map<String, Value>, AppError> {
    let pairs: Vec<(String, String)> = serde_urlencoded::from_str(query.unwrap_or(""))
        .map_err(|e| AppError::Input(format!("malformed query string: {e}")))?;
    let mut map = Map::new();
    for (k, v) in pairs {
        let value = if k == "instance" && !(v.starts_with('[') || v.starts_with('{')) {
            // comma-separated form
            Value::Array(
                v.split(',')
                    .map(|s| {
                        let s = s.trim();
                        s.parse::<f64>()
                            .ok()
                            .and_then(|f| serde_json::Number::from_f64(f).map(Value::Number))
                            .unwrap_or_else(|| Value::String(s.to_string()))
                    })
                    .collect(),
            )
        } else {
            match serde_json::from_str::<Value>(&v) {
                Ok(parsed) if !parsed.is_string() => parsed,
                _ => Value::String(v),
            }
        };
        map.insert(k, value);
    }
    Ok(map)
}

pub struct Service {
    engine: Engine,
    cache: ResponseCache,
    default_seed: u64,
}

impl Service {
    pub fn new(engine: Engine, cache: ResponseCache, default_seed: u64) -> Self {
        Self {
            engine,
            cache,
            default_seed,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    /// Dispatches one request. `path` excludes the query string.
    pub fn handle_request(&self, method: &str, path: &str, query: Option<&str>, body: &[u8]) -> Response {
        let path = path.trim_end_matches('/');
        let route: Option<(&str, &str)> = match path {
            "/api/dataset" => Some(("GET", "dataset")),
            "/api/dataset/prototypes" => Some(("GET", "prototypes")),
            "/api/model" => Some(("GET", "model")),
            "/api/predict" => Some(("POST", "predict")),
            "/api/whatif" => Some(("POST", "whatif")),
            "/api/explain/global" => Some(("GET", "global")),
            "/api/explain/lime" | "/api/explain/shap" | "/api/explain/anchors"
            | "/api/explain/counterfactuals" => Some(("POST", "explain")),
            "/api/audiences" => Some(("GET", "audiences")),
            "/api/views" => Some(("GET", "views")),
            "/api/guide" => Some(("GET", "guide")),
            "/api/render" => Some((if method == "POST" { "POST" } else { "GET" }, "render")),
            _ => None,
        };
        let Some((expected, name)) = route else {
            return Response::error(404, "not_found", format!("no route for {path}"), None);
        };
        if method != expected {
            return Response::error(405, "method_not_allowed", format!("{path} expects {expected}"), None);
        }
        let body_map = if expected == "POST" {
            match parse_body(body) {
                Ok(m) => m,
                Err(r) => return r,
            }
        } else {
            Map::new()
        };
        let query_map = match parse_query(query) {
            Ok(q) => q,
            Err(e) => return error_response(&e),
        };
        let outcome = match name {
            "dataset" => Ok(self.engine.dataset_info()),
            "prototypes" => self.engine.prototypes(),
            "model" => Ok(self.engine.model_info()),
            "predict" => self.predict(&body_map),
            "whatif" => self.what_if(&body_map),
            "explain" => {
                let method: Method = path.rsplit('/').next().unwrap().parse().expect("routed");
                self.explain(method, &body_map)
            }
            "global" => self.global(&query_map),
            "audiences" => Ok(json!({
                "audiences": AudienceId::ALL.iter().map(|a| a.profile()).collect::<Vec<_>>()
            })),
            "views" => self.views(&query_map),
            "guide" => Ok(json!({
                "entries": guide_entries(),
                "reference_methods": list_reference_methods(),
            })),
            "render" => {
                let m = if method == "POST" { &body_map } else { &query_map };
                self.render(m, method == "GET")
            }
            _ => unreachable!(),
        };
        match outcome {
            Ok(body) => Response::ok(body),
            Err(e) => error_response(&e),
        }
    }

    fn predict(&self, body: &Map<String, Value>) -> Result<Value, AppError> {
        check_fields(body, &["instance"])?;
        let x = self.engine.parse_instance(body.get("instance").unwrap_or(&Value::Null))?;
        Ok(serde_json::to_value(self.engine.predict(&x)?).expect("serializes"))
    }

    fn what_if(&self, body: &Map<String, Value>) -> Result<Value, AppError> {
        check_fields(body, &["instance", "edits"])?;
        let x = self.engine.parse_instance(body.get("instance").unwrap_or(&Value::Null))?;
        self.engine.what_if(&x, body.get("edits").unwrap_or(&Value::Null))
    }

    /// Serves from the cache or computes, stores and wraps the result.
    fn cached(
        &self,
        explainer: &str,
        instance: &Value,
        config: &Value,
        seed: u64,
        compute: impl FnOnce() -> Result<Value, AppError>,
    ) -> Result<Value, AppError> {
        let key = CacheKey::new(self.engine.model_fingerprint(), explainer, instance, config, seed);
        if let Some(text) = self.cache.get(&key) {
            if let Ok(result) = serde_json::from_str::<Value>(&text) {
                return Ok(json!({"result": result, "seed": seed, "method": explainer, "cache_hit": true}));
            }
        }
        let result = compute()?;
        self.cache.put(&key, &canonical_json(&result));
        Ok(json!({"result": result, "seed": seed, "method": explainer, "cache_hit": false}))
    }

    fn explain(&self, method: Method, body: &Map<String, Value>) -> Result<Value, AppError> {
        check_fields(body, &["instance", "target_class", "config", "seed"])?;
        let x = self.engine.parse_instance(body.get("instance").unwrap_or(&Value::Null))?;
        let target = opt_class(body, "target_class")?;
        let seed = opt_u64(body, "seed")?.unwrap_or(self.default_seed);
        let overrides = body.get("config").cloned().unwrap_or(Value::Null);
        let config = self.engine.resolve_config(method, &overrides)?;
        let key_config = json!({"config": config, "target_class": target});
        self.cached(method.as_str(), &json!(x), &key_config, seed, || {
            Ok(self.engine.explain(method, &x, target, &config, seed)?.result)
        })
    }

    fn global(&self, query: &Map<String, Value>) -> Result<Value, AppError> {
        check_fields(query, &["target_class", "seed"])?;
        let target = opt_class(query, "target_class")?;
        let seed = opt_u64(query, "seed")?.unwrap_or(self.default_seed);
        self.cached("global", &Value::Null, &json!({"target_class": target}), seed, || {
            self.engine.global(target, seed)
        })
    }

    fn views(&self, query: &Map<String, Value>) -> Result<Value, AppError> {
        check_fields(query, &["audience"])?;
        let audience = query
            .get("audience")
            .and_then(Value::as_str)
            .ok_or_else(|| invalid("audience", "is required"))?;
        Ok(serde_json::to_value(recommended_views(audience)?).expect("serializes"))
    }

    fn render(&self, params: &Map<String, Value>, from_query: bool) -> Result<Value, AppError> {
        let allowed: &[&str] = if from_query {
            &["reference", "format", "instance", "seed", "foil_class", "desired_class", "chart_kind", "attribution"]
        } else {
            &["reference", "format", "instance", "options"]
        };
        check_fields(params, allowed)?;
        let name = |field: &str| -> Result<String, AppError> {
            params
                .get(field)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| invalid(field, "is required"))
        };
        let reference = name("reference")?;
        let reference: ReferenceId = reference
            .parse()
            .map_err(|_: CoreError| invalid("reference", format!("unknown reference method `{reference}`")))?;
        let format = name("format")?;
        let format: FormatId = format
            .parse()
            .map_err(|_: CoreError| invalid("format", format!("unknown format method `{format}`")))?;
        let x = self.engine.parse_instance(params.get("instance").unwrap_or(&Value::Null))?;
        let options = if from_query {
            let mut o = Map::new();
            for k in ["seed", "foil_class", "desired_class", "chart_kind", "attribution"] {
                if let Some(v) = params.get(k) {
                    o.insert(k.into(), v.clone());
                }
            }
            Value::Object(o)
        } else {
            params.get("options").cloned().unwrap_or(Value::Null)
        };
        if !options.get("seed").is_some_and(|s| !s.is_null()) {
            let mut o = options.as_object().cloned().unwrap_or_default();
            o.insert("seed".into(), self.default_seed.into());
            return self.render_with(reference, format, &x, &Value::Object(o));
        }
        self.render_with(reference, format, &x, &options)
    }

    fn render_with(
        &self,
        reference: ReferenceId,
        format: FormatId,
        x: &xplain_core::Instance,
        options: &Value,
    ) -> Result<Value, AppError> {
        // resolve first so equivalent option spellings share a cache entry
        let resolved = serde_json::to_value(self.engine.view_options(options)?).expect("serializes");
        let seed = resolved["seed"].as_u64().unwrap_or(self.default_seed);
        let explainer = format!("render/{}/{}", reference.as_str(), format.as_str());
        let key_config = json!({ "options": resolved });
        let mut out = self.cached(&explainer, &json!(x), &key_config, seed, || {
            Ok(self.engine.render(reference, format, x, &resolved)?.0)
        })?;
        out["method"] = "render".into();
        Ok(out)
    }
}

mod common;

use std::sync::Arc;

use common::{assert_valid, get, post, service};
use serde_json::{json, Value};
use xplain::cache::ResponseCache;
use xplain::service::Service;

const VERSICOLOR: &str = "[6.1, 2.8, 4.7, 1.2]";

fn explain_body(extra: &str) -> String {
    format!("{{\"instance\": {VERSICOLOR}, \"seed\": 4{extra}}}")
}

#[test]
fn every_route_answers_with_a_schema_valid_body() {
    let s = service();
    let gets = [
        ("/api/dataset", None),
        ("/api/dataset/prototypes", None),
        ("/api/model", None),
        ("/api/explain/global", Some("target_class=2&seed=1")),
        ("/api/audiences", None),
        ("/api/views", Some("audience=regulatory_entity")),
        ("/api/guide", None),
        ("/api/render", Some("reference=why&format=chart&instance=6.1,2.8,4.7,1.2")),
    ];
    for (path, q) in gets {
        let r = get(&s, path, q);
        assert_eq!(r.status, 200, "{path}: {}", r.body);
        assert_valid(&format!("GET {path}"), &r);
    }
    let posts = [
        ("/api/predict", format!("{{\"instance\": {VERSICOLOR}}}")),
        ("/api/whatif", format!("{{\"instance\": {VERSICOLOR}, \"edits\": {{\"petal_length\": 1.4}}}}")),
        ("/api/explain/lime", explain_body("")),
        ("/api/explain/shap", explain_body("")),
        ("/api/explain/anchors", explain_body("")),
        ("/api/explain/counterfactuals", explain_body("")),
        (
            "/api/render",
            format!("{{\"reference\": \"when\", \"format\": \"table\", \"instance\": {VERSICOLOR}}}"),
        ),
    ];
    for (path, body) in posts {
        let r = post(&s, path, &body);
        assert_eq!(r.status, 200, "{path}: {}", r.body);
        assert_valid(&format!("POST {path}"), &r);
    }
}

#[test]
fn every_supported_view_renders_and_validates() {
    let s = service();
    let guide = get(&s, "/api/guide", None).body;
    for m in guide["reference_methods"].as_array().unwrap() {
        let reference = m["id"].as_str().unwrap();
        for format in ["text", "formal_expression", "table", "chart"] {
            let supported = m["supported_formats"].as_array().unwrap().contains(&json!(format));
            let q = format!("reference={reference}&format={format}&instance=5.9,3.0,5.1,1.8");
            let r = get(&s, "/api/render", Some(&q));
            assert_valid("GET /api/render", &r);
            if supported {
                assert_eq!(r.status, 200, "{reference}/{format}: {}", r.body);
                assert_eq!(r.body["result"]["payload"]["type"], format);
            } else {
                assert_eq!(r.status, 422);
                assert_eq!(r.body["error"]["field"], "format");
            }
        }
    }
}

#[test]
fn predict_probabilities_sum_to_one() {
    let s = service();
    let r = post(&s, "/api/predict", "{\"instance\": {\"sepal_length\": 5.1, \"sepal_width\": 3.5, \"petal_length\": 1.4, \"petal_width\": 0.2}}");
    assert_eq!(r.status, 200);
    let sum: f64 = r.body["probabilities"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert_eq!(r.body["class_name"], "setosa");
}

#[test]
fn shap_response_satisfies_efficiency() {
    let s = service();
    let r = post(&s, "/api/explain/shap", &explain_body(""));
    let a = &r.body["result"]["attribution"];
    let total = a["base_value"].as_f64().unwrap()
        + a["contributions"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum::<f64>();
    let t = a["target_class"].as_u64().unwrap() as usize;
    let p = r.body["result"]["prediction"]["probabilities"][t].as_f64().unwrap();
    assert!((total - p).abs() <= 1e-9);
}

#[test]
fn error_statuses_and_fields() {
    let s = service();
    let cases: Vec<(&str, &str, String, u16, Option<&str>)> = vec![
        ("POST", "/api/predict", "{\"instance\": [1,".into(), 400, None),
        ("POST", "/api/predict", "".into(), 400, None),
        ("GET", "/api/nothing", "".into(), 404, None),
        ("GET", "/api/predict", "".into(), 405, None),
        ("POST", "/api/explain/counterfactuals", explain_body(", \"target_class\": 1"), 409, Some("target_class")),
        ("POST", "/api/predict", "{\"instance\": [1, 2, 3]}".into(), 422, Some("instance")),
        ("POST", "/api/predict", "{\"instance\": [1, 2, 3, 4], \"extra\": 0}".into(), 422, Some("extra")),
        ("POST", "/api/predict", "{\"instance\": {\"sepal_length\": 5}}".into(), 422, Some("instance.sepal_width")),
        ("POST", "/api/predict", "{\"instance\": [1, 2, \"x\", 4]}".into(), 422, Some("instance.petal_length")),
        (
            "POST",
            "/api/whatif",
            format!("{{\"instance\": {VERSICOLOR}, \"edits\": {{\"petal_width\": 9}}}}"),
            422,
            Some("edits.petal_width"),
        ),
        ("POST", "/api/explain/lime", explain_body(", \"config\": {\"n_sample\": 4}"), 422, Some("config.n_sample")),
        ("POST", "/api/explain/anchors", explain_body(", \"config\": {\"tau\": 0}"), 422, Some("config")),
        ("POST", "/api/explain/shap", explain_body(", \"target_class\": 3"), 422, Some("target_class")),
        ("POST", "/api/explain/shap", explain_body(", \"seed\": -1"), 422, Some("seed")),
    ];
    for (method, path, body, status, field) in cases {
        let r = s.handle_request(method, path, None, body.as_bytes());
        assert_eq!(r.status, status, "{method} {path} {body}: {}", r.body);
        assert_valid(&format!("{method} {path}"), &r);
        assert_eq!(r.body["error"]["field"].as_str(), field, "{path} {body}");
    }
    let q = [
        ("/api/views", "audience=robots", "audience"),
        ("/api/views", "", "audience"),
        ("/api/render", "reference=why&format=movie&instance=1,2,3,4", "format"),
        ("/api/render", "reference=how&format=chart", "instance"),
        ("/api/render", "reference=why_not&format=chart&instance=6.1,2.8,4.7,1.2&foil_class=9", "foil_class"),
        ("/api/explain/global", "target_class=5", "target_class"),
    ];
    for (path, query, field) in q {
        let r = get(&s, path, Some(query));
        assert_eq!(r.status, 422, "{path}?{query}: {}", r.body);
        assert_eq!(r.body["error"]["field"], field);
    }
}

#[test]
fn repeated_requests_hit_the_cache_with_identical_results() {
    let s = service();
    let calls: Vec<(&str, &str, Option<&str>, String)> = vec![
        ("POST", "/api/explain/lime", None, explain_body("")),
        ("POST", "/api/explain/shap", None, explain_body("")),
        ("POST", "/api/explain/anchors", None, explain_body("")),
        ("POST", "/api/explain/counterfactuals", None, explain_body("")),
        ("GET", "/api/explain/global", Some("seed=3"), String::new()),
        ("GET", "/api/render", Some("reference=when&format=text&instance=6.1,2.8,4.7,1.2"), String::new()),
    ];
    for (method, path, q, body) in calls {
        let a = s.handle_request(method, path, q, body.as_bytes());
        let b = s.handle_request(method, path, q, body.as_bytes());
        assert_eq!(a.status, 200, "{path}: {}", a.body);
        assert_eq!(a.body["cache_hit"], false);
        assert_eq!(b.body["cache_hit"], true);
        let bytes = |v: &Value| serde_json::to_vec(&v["result"]).unwrap();
        assert_eq!(bytes(&a.body), bytes(&b.body), "{path}");
    }
}

#[test]
fn key_order_and_defaults_share_a_cache_entry() {
    let s = service();
    let a = post(&s, "/api/explain/shap", &format!("{{\"seed\": 0, \"instance\": {VERSICOLOR}}}"));
    let b = post(&s, "/api/explain/shap", &format!("{{\"instance\": {VERSICOLOR}, \"config\": {{\"background_size\": 100}}}}"));
    assert_eq!(a.body["cache_hit"], false);
    assert_eq!(b.body["cache_hit"], true);
    let c = post(&s, "/api/explain/shap", &format!("{{\"instance\": {VERSICOLOR}, \"seed\": 1}}"));
    assert_eq!(c.body["cache_hit"], false);
}

#[test]
fn persisted_cache_replays_a_hit_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    let body = explain_body("");
    let first = {
        let s = Service::new(common::engine(), ResponseCache::open(dir.path(), 16).unwrap(), 0);
        post(&s, "/api/explain/counterfactuals", &body)
    };
    let s = Service::new(common::engine(), ResponseCache::open(dir.path(), 16).unwrap(), 0);
    let second = post(&s, "/api/explain/counterfactuals", &body);
    assert_eq!(first.body["cache_hit"], false);
    assert_eq!(second.body["cache_hit"], true);
    assert_eq!(first.body["result"], second.body["result"]);
}

#[test]
fn concurrent_identical_requests_agree() {
    let s = Arc::new(service());
    let body = explain_body("");
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let (s, body) = (Arc::clone(&s), body.clone());
            std::thread::spawn(move || post(&s, "/api/explain/lime", &body))
        })
        .collect();
    let results: Vec<Vec<u8>> = handles
        .into_iter()
        .map(|h| serde_json::to_vec(&h.join().unwrap().body["result"]).unwrap())
        .collect();
    assert!(results.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(s.cache().len(), 1);
}

#[test]
fn requests_do_not_change_anything_but_the_cache() {
    let s = service();
    let before = (get(&s, "/api/dataset", None).body, get(&s, "/api/model", None).body);
    for _ in 0..2 {
        post(&s, "/api/explain/shap", &explain_body(""));
        post(&s, "/api/whatif", &format!("{{\"instance\": {VERSICOLOR}, \"edits\": {{\"sepal_width\": 3.9}}}}"));
    }
    let after = (get(&s, "/api/dataset", None).body, get(&s, "/api/model", None).body);
    assert_eq!(before, after);
    assert_eq!(s.cache().len(), 1);
}

#[test]
fn what_if_identity_edit_keeps_the_prediction() {
    let s = service();
    let r = post(&s, "/api/whatif", &format!("{{\"instance\": {VERSICOLOR}, \"edits\": {{\"petal_length\": 4.7}}}}"));
    assert_eq!(r.body["original"], r.body["edited"]);
}

#[test]
fn audience_views_use_supported_pairs() {
    let s = service();
    let guide = get(&s, "/api/guide", None).body;
    let audiences = get(&s, "/api/audiences", None).body;
    for a in audiences["audiences"].as_array().unwrap() {
        let id = a["id"].as_str().unwrap();
        let v = get(&s, "/api/views", Some(&format!("audience={id}")));
        assert_eq!(&v.body, a);
        for rec in a["recommended"].as_array().unwrap() {
            let m = guide["reference_methods"]
                .as_array()
                .unwrap()
                .iter()
                .find(|m| m["id"] == rec["reference"])
                .unwrap();
            assert!(m["supported_formats"].as_array().unwrap().contains(&rec["format"]));
        }
    }
}

//! One dataset plus one trained model, and every explanation operation on
//! them as JSON in, JSON out.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use xplain_core::anchors::{anchors_explain, render_rule, AnchorConfig};
use xplain_core::counterfactual::{generate_counterfactuals, what_if, CfConfig};
use xplain_core::lime::{lime_explain, LimeConfig};
use xplain_core::shap::{sample_background, shap_explain, shap_global_importance, ShapConfig};
use xplain_core::views::{
    build_view_context, render_view, runner_up, FormatId, ReferenceId, ViewOptions,
};
use xplain_core::{
    class_prototypes, Error as CoreError, predict, train_model, train_test_split, Dataset, Instance,
    Model, Prediction,
};

use crate::config::{SessionConfig, ShapSection};
use crate::error::AppError;
use crate::json::{canonical_json, unknown_key};
use crate::persist::{check_fingerprint, load_dataset_file, load_model, model_to_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lime,
    Shap,
    Anchors,
    Counterfactuals,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lime, Method::Shap, Method::Anchors, Method::Counterfactuals];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lime => "lime",
            Method::Shap => "shap",
            Method::Anchors => "anchors",
            Method::Counterfactuals => "counterfactuals",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lime" => Ok(Method::Lime),
            "shap" => Ok(Method::Shap),
            "anchors" => Ok(Method::Anchors),
            "counterfactuals" | "cf" => Ok(Method::Counterfactuals),
            other => Err(format!("unknown explanation method `{other}`")),
        }
    }
}

/// Explainer defaults a request's `config` object is overlaid on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExplainDefaults {
    pub lime: LimeConfig,
    pub shap: ShapSection,
    pub anchors: AnchorConfig,
    pub counterfactuals: CfConfig,
}

impl ExplainDefaults {
    pub fn from_session(cfg: &SessionConfig) -> Self {
        Self {
            lime: cfg.lime.clone(),
            shap: cfg.shap.clone(),
            anchors: cfg.anchors.clone(),
            counterfactuals: cfg.counterfactuals.clone(),
        }
    }
}

/// An explanation result with the fully resolved config that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Explained {
    pub result: Value,
    pub config: Value,
}

pub struct Engine {
    dataset: Dataset,
    model: Model,
    model_fingerprint: String,
    defaults: ExplainDefaults,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> AppError {
    AppError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// Overlays `overrides` (a JSON object) on the serialized default.
fn merge_config<T: Serialize + DeserializeOwned>(
    default: &T,
    overrides: &Value,
    field: &str,
) -> Result<T, AppError> {
    let mut base = serde_json::to_value(default).expect("configs serialize");
    match overrides {
        Value::Null => {}
        Value::Object(o) => {
            if let Some(key) = unknown_key(overrides, default, field) {
                return Err(invalid(key, "unknown key"));
            }
            let b = base.as_object_mut().expect("configs are objects");
            for (k, v) in o {
                b.insert(k.clone(), v.clone());
            }
        }
        _ => return Err(invalid(field, "must be an object")),
    }
    serde_json::from_value(base).map_err(|e| invalid(field, e.to_string()))
}

impl Engine {
    pub fn new(dataset: Dataset, model: Model, defaults: ExplainDefaults) -> Result<Self, AppError> {
        check_fingerprint(&model, &dataset)?;
        let doc: Value = serde_json::from_str(&model_to_json(&model)).expect("model JSON");
        let digest = Sha256::digest(canonical_json(&doc).as_bytes());
        let model_fingerprint = digest[..16].iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            dataset,
            model,
            model_fingerprint,
            defaults,
        })
    }

    /// Loads the configured dataset, then loads or trains the model (on the
    /// 80% split, seeded by `seeds.train`).
    pub fn from_session(cfg: &SessionConfig) -> Result<Self, AppError> {
        let dataset = load_dataset_file(cfg.dataset.path.as_deref())?;
        let model = match &cfg.model.path {
            Some(p) => load_model(p)?,
            None => train_on_split(&dataset, cfg.model.kind, &cfg.model.hyperparams(), cfg.seeds.train)?.0,
        };
        Self::new(dataset, model, ExplainDefaults::from_session(cfg))
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Hash of the canonical model document.
    pub fn model_fingerprint(&self) -> &str {
        &self.model_fingerprint
    }

    /// Accepts an array of values or an object keyed by feature name; values
    /// are numbers, or category names for categorical features.
    pub fn parse_instance(&self, raw: &Value) -> Result<Instance, AppError> {
        let features = self.dataset.features();
        let values: Vec<&Value> = match raw {
            Value::Array(items) => {
                if items.len() != features.len() {
                    return Err(invalid(
                        "instance",
                        format!("expected {} values, got {}", features.len(), items.len()),
                    ));
                }
                items.iter().collect()
            }
            Value::Object(map) => {
                if let Some(k) = map.keys().find(|k| !features.iter().any(|f| &f.name == *k)) {
                    return Err(invalid(format!("instance.{k}"), "unknown feature"));
                }
                features
                    .iter()
                    .map(|f| {
                        map.get(&f.name)
                            .ok_or_else(|| invalid(format!("instance.{}", f.name), "missing value"))
                    })
                    .collect::<Result<_, _>>()?
            }
            Value::Null => return Err(invalid("instance", "is required")),
            _ => return Err(invalid("instance", "must be an array or an object")),
        };
        let mut out = Vec::with_capacity(values.len());
        for (meta, v) in features.iter().zip(values) {
            let field = || format!("instance.{}", meta.name);
            let x = match (v, meta.categories()) {
                (Value::Number(n), _) => n.as_f64().ok_or_else(|| invalid(field(), "not a finite number"))?,
                (Value::String(s), Some(_)) => meta
                    .category_code(s)
                    .ok_or_else(|| invalid(field(), format!("unknown category `{s}`")))?
                    as f64,
                _ => return Err(invalid(field(), "must be a number")),
            };
            out.push(x);
        }
        let instance = Instance(out);
        instance.validate(features)?;
        Ok(instance)
    }

    fn check_class(&self, class: usize, field: &str) -> Result<usize, AppError> {
        if class >= self.dataset.n_classes() {
            return Err(invalid(
                field,
                format!("class {class} out of range for {} classes", self.dataset.n_classes()),
            ));
        }
        Ok(class)
    }

    pub fn predict(&self, instance: &Instance) -> Result<Prediction, AppError> {
        Ok(predict(&self.model, instance)?)
    }

    fn shap_config(&self, section: &ShapSection, seed: u64) -> ShapConfig {
        ShapConfig {
            background: sample_background(&self.dataset, section.background_size, seed),
            exact_max_features: section.exact_max_features,
            n_coalition_samples: section.n_coalition_samples,
        }
    }

    /// Resolves a request's config overrides for `method`.
    pub fn resolve_config(&self, method: Method, overrides: &Value) -> Result<Value, AppError> {
        let d = &self.defaults;
        let v = match method {
            Method::Lime => {
                let c: LimeConfig = merge_config(&d.lime, overrides, "config")?;
                c.validate().map_err(|e| invalid("config", e.to_string()))?;
                serde_json::to_value(c)
            }
            Method::Shap => {
                let c: ShapSection = merge_config(&d.shap, overrides, "config")?;
                if c.background_size == 0 || c.exact_max_features == 0 {
                    return Err(invalid("config", "background_size and exact_max_features must be positive"));
                }
                serde_json::to_value(c)
            }
            Method::Anchors => {
                let c: AnchorConfig = merge_config(&d.anchors, overrides, "config")?;
                c.validate().map_err(|e| invalid("config", e.to_string()))?;
                serde_json::to_value(c)
            }
            Method::Counterfactuals => {
                let c: CfConfig = merge_config(&d.counterfactuals, overrides, "config")?;
                c.validate(self.dataset.n_features())
                    .map_err(|e| invalid("config", e.to_string()))?;
                serde_json::to_value(c)
            }
        };
        Ok(v.expect("configs serialize"))
    }

    /// Runs one explainer. `target_class` is the explained class for LIME and
    /// SHAP (default: predicted), the desired class for counterfactuals
    /// (default: runner-up), and must equal the predicted class for anchors.
    pub fn explain(
        &self,
        method: Method,
        instance: &Instance,
        target_class: Option<usize>,
        config: &Value,
        seed: u64,
    ) -> Result<Explained, AppError> {
        let config = self.resolve_config(method, config)?;
        let prediction = self.predict(instance)?;
        let predicted = prediction.class_index;
        let feature_names = self.dataset.feature_names();
        let result = match method {
            Method::Lime => {
                let c: LimeConfig = serde_json::from_value(config.clone()).expect("resolved");
                let t = self.check_class(target_class.unwrap_or(predicted), "target_class")?;
                let a = lime_explain(&self.model, self.dataset.features(), instance, t, &c, seed)?;
                json!({"attribution": a, "prediction": prediction, "feature_names": feature_names})
            }
            Method::Shap => {
                let c: ShapSection = serde_json::from_value(config.clone()).expect("resolved");
                let t = self.check_class(target_class.unwrap_or(predicted), "target_class")?;
                let a = shap_explain(&self.model, instance, t, &self.shap_config(&c, seed), seed)?;
                json!({"attribution": a, "prediction": prediction, "feature_names": feature_names})
            }
            Method::Anchors => {
                let c: AnchorConfig = serde_json::from_value(config.clone()).expect("resolved");
                if let Some(t) = target_class {
                    if t != predicted {
                        return Err(invalid(
                            "target_class",
                            "anchors explain the predicted class only",
                        ));
                    }
                }
                let rule = anchors_explain(&self.model, instance, &self.dataset, &c, seed)?;
                let rendered = render_rule(&rule, self.dataset.features(), self.dataset.class_names(), c.tau);
                json!({"anchor": rule, "rendered": rendered, "prediction": prediction})
            }
            Method::Counterfactuals => {
                let c: CfConfig = serde_json::from_value(config.clone()).expect("resolved");
                let desired = match target_class {
                    Some(t) => self.check_class(t, "target_class")?,
                    None => runner_up(&prediction).ok_or_else(|| invalid("target_class", "no other class"))?,
                };
                let cfs = generate_counterfactuals(&self.model, instance, desired, &self.dataset, &c, seed)?;
                json!({"desired_class": desired, "counterfactuals": cfs, "prediction": prediction})
            }
        };
        Ok(Explained { result, config })
    }

    /// Mean |SHAP| per feature over the dataset, plus the tree's rules.
    pub fn global(&self, target_class: Option<usize>, seed: u64) -> Result<Value, AppError> {
        let target = self.check_class(target_class.unwrap_or(0), "target_class")?;
        let cfg = self.shap_config(&self.defaults.shap, seed);
        let g = shap_global_importance(&self.model, &self.dataset, target, &cfg)?;
        let rules = self.model.decision_rules().map(|_| {
            let ctx = build_view_context(
                &self.model,
                &self.dataset,
                &Instance(self.dataset.rows()[0].clone()),
                ReferenceId::How,
                FormatId::FormalExpression,
                &ViewOptions::default(),
            )
            .expect("tree rules");
            render_view(ReferenceId::How, FormatId::FormalExpression, &ctx).expect("supported pair")
        });
        Ok(json!({
            "importance": g,
            "feature_names": self.dataset.feature_names(),
            "class_name": self.dataset.class_names()[target],
            "rules": rules.map(|v| v.payload),
        }))
    }

    /// Applies `edits` (feature name → value) and re-predicts.
    pub fn what_if(&self, instance: &Instance, edits: &Value) -> Result<Value, AppError> {
        let features = self.dataset.features();
        let pairs: Vec<(usize, f64)> = match edits {
            Value::Null => Vec::new(),
            Value::Object(map) => {
                let mut names: Vec<&String> = map.keys().collect();
                names.sort();
                let mut out = Vec::new();
                for name in names {
                    let j = features
                        .iter()
                        .position(|f| &f.name == name)
                        .ok_or_else(|| invalid(format!("edits.{name}"), "unknown feature"))?;
                    let v = match (&map[name], features[j].categories()) {
                        (Value::Number(n), _) => n.as_f64().expect("finite"),
                        (Value::String(s), Some(_)) => features[j]
                            .category_code(s)
                            .ok_or_else(|| invalid(format!("edits.{name}"), format!("unknown category `{s}`")))?
                            as f64,
                        _ => return Err(invalid(format!("edits.{name}"), "must be a number")),
                    };
                    out.push((j, v));
                }
                out
            }
            _ => return Err(invalid("edits", "must be an object of feature name to value")),
        };
        let original = self.predict(instance)?;
        let (edited_instance, edited) =
            what_if(&self.model, features, self.dataset.class_names(), instance, &pairs).map_err(|e| match &e {
                CoreError::Range { feature, .. } | CoreError::InvalidValue { feature, .. } => {
                    invalid(format!("edits.{feature}"), e.to_string())
                }
                _ => e.into(),
            })?;
        Ok(json!({"original": original, "edited_instance": edited_instance, "edited": edited}))
    }

    pub fn prototypes(&self) -> Result<Value, AppError> {
        let protos = class_prototypes(&self.dataset)?;
        let items: Vec<Value> = protos
            .into_iter()
            .enumerate()
            .map(|(c, p)| {
                json!({"class_index": c, "class_name": self.dataset.class_names()[c], "instance": p})
            })
            .collect();
        Ok(json!({ "prototypes": items }))
    }

    pub fn dataset_info(&self) -> Value {
        let mut counts = vec![0usize; self.dataset.n_classes()];
        for &l in self.dataset.labels() {
            counts[l] += 1;
        }
        json!({
            "features": self.dataset.features(),
            "class_names": self.dataset.class_names(),
            "class_counts": counts,
            "n_rows": self.dataset.len(),
            "fingerprint": self.dataset.fingerprint(),
        })
    }

    pub fn model_info(&self) -> Value {
        json!({
            "kind": self.model.kind(),
            "train_seed": self.model.train_seed(),
            "dataset_fingerprint": self.model.dataset_fingerprint(),
            "model_fingerprint": self.model_fingerprint,
        })
    }

    /// Overlays `options` on the session's view defaults.
    pub fn view_options(&self, options: &Value) -> Result<ViewOptions, AppError> {
        let defaults = ViewOptions {
            lime: self.defaults.lime.clone(),
            anchors: self.defaults.anchors.clone(),
            counterfactuals: self.defaults.counterfactuals.clone(),
            background_size: self.defaults.shap.background_size,
            ..ViewOptions::default()
        };
        let opts: ViewOptions = merge_config(&defaults, options, "options")?;
        for (class, field) in [(opts.foil_class, "foil_class"), (opts.desired_class, "desired_class")] {
            if let Some(c) = class {
                self.check_class(c, field)?;
            }
        }
        Ok(opts)
    }

    /// Renders one view; `options` holds the `ViewOptions` fields to override.
    /// Returns the view and the resolved options.
    pub fn render(
        &self,
        reference: ReferenceId,
        format: FormatId,
        instance: &Instance,
        options: &Value,
    ) -> Result<(Value, Value), AppError> {
        let opts = self.view_options(options)?;
        let ctx = build_view_context(&self.model, &self.dataset, instance, reference, format, &opts)?;
        let view = render_view(reference, format, &ctx)?;
        Ok((
            serde_json::to_value(view).expect("views serialize"),
            serde_json::to_value(opts).expect("options serialize"),
        ))
    }
}

/// Trains on the 80% split and reports holdout accuracy on the rest.
pub fn train_on_split(
    dataset: &Dataset,
    kind: xplain_core::ModelKind,
    hyperparams: &xplain_core::Hyperparams,
    seed: u64,
) -> Result<(Model, f64, usize, usize), AppError> {
    let (train, test) = train_test_split(dataset, seed);
    let model = train_model(&train, kind, hyperparams, seed)?;
    // the stored fingerprint names the full dataset the split came from
    let model = Model::from_parts(
        model.kind(),
        model.parameters().clone(),
        seed,
        dataset.fingerprint(),
    )?;
    let accuracy = model.accuracy(&test);
    Ok((model, accuracy, train.len(), test.len()))
}

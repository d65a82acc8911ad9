use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{contrastive_why_not, ChartKind, FormatId, ReferenceId, ViewContext, WhatIfOutcome};
use crate::anchors::{anchors_explain, AnchorConfig};
use crate::attribution::AttributionMethod;
use crate::counterfactual::{generate_counterfactuals, what_if, CfConfig};
use crate::dataset::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::lime::{lime_explain, LimeConfig};
use crate::model::{predict, Model, Prediction};
use crate::shap::{shap_explain, shap_global_importance, ShapConfig};

/// Inputs for computing the explanations behind one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewOptions {
    pub seed: u64,
    /// Contrast class for `why_not`; defaults to the runner-up class.
    pub foil_class: Option<usize>,
    /// Target class for `when`; defaults to the runner-up class.
    pub desired_class: Option<usize>,
    /// `(feature index, new value)` pairs for `what_if`.
    pub edits: Vec<(usize, f64)>,
    /// Attribution behind `why` text and table views.
    pub attribution: AttributionMethod,
    pub chart_kind: Option<ChartKind>,
    pub background_size: usize,
    pub lime: LimeConfig,
    pub anchors: AnchorConfig,
    pub counterfactuals: CfConfig,
}

impl Default for ViewOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            foil_class: None,
            desired_class: None,
            edits: Vec::new(),
            attribution: AttributionMethod::Shap,
            chart_kind: None,
            background_size: crate::shap::DEFAULT_BACKGROUND_SIZE,
            lime: LimeConfig::default(),
            anchors: AnchorConfig::default(),
            counterfactuals: CfConfig::default(),
        }
    }
}

/// Most probable class other than the predicted one, lowest index on ties.
pub fn runner_up(prediction: &Prediction) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (c, &p) in prediction.probabilities.iter().enumerate() {
        if c != prediction.class_index && best.is_none_or(|b| p > prediction.probabilities[b]) {
            best = Some(c);
        }
    }
    best
}

/// Computes exactly the explanations the `(reference, format)` view needs.
pub fn build_view_context(
    model: &Model,
    dataset: &Dataset,
    instance: &Instance,
    reference: ReferenceId,
    format: FormatId,
    options: &ViewOptions,
) -> Result<ViewContext> {
    if !reference.supports(format) {
        return Err(Error::UnsupportedFormat {
            reference: reference.as_str().into(),
            format: format.as_str().into(),
        });
    }
    instance.validate(dataset.features())?;
    let prediction = predict(model, instance)?;
    let shap_config = || ShapConfig::new(crate::shap::sample_background(
        dataset,
        options.background_size,
        options.seed,
    ));
    let mut ctx = ViewContext {
        features: dataset.features().to_vec(),
        class_names: dataset.class_names().to_vec(),
        dataset: Some(dataset.clone()),
        instance: Some(instance.clone()),
        prediction: Some(prediction.clone()),
        anchor_tau: options.anchors.tau,
        chart_kind: options.chart_kind,
        ..ViewContext::default()
    };
    let target = prediction.class_index;
    match (reference, format) {
        (ReferenceId::How, FormatId::FormalExpression) => {
            ctx.decision_rules = Some(model.decision_rules().ok_or_else(|| {
                Error::MissingExplanation(
                    "rules are only available for decision tree models".into(),
                )
            })?);
        }
        (ReferenceId::How, _) => {
            ctx.global = Some(shap_global_importance(model, dataset, target, &shap_config())?);
        }
        (ReferenceId::Why, FormatId::FormalExpression) => {
            ctx.anchor = Some(anchors_explain(
                model,
                instance,
                dataset,
                &options.anchors,
                options.seed,
            )?);
        }
        (ReferenceId::Why, _) => {
            let waterfall = format == FormatId::Chart
                && options.chart_kind.is_none_or(|k| k == ChartKind::Waterfall);
            if options.attribution == AttributionMethod::Lime && !waterfall {
                ctx.lime = Some(lime_explain(
                    model,
                    dataset.features(),
                    instance,
                    target,
                    &options.lime,
                    options.seed,
                )?);
            } else {
                ctx.shap = Some(shap_explain(model, instance, target, &shap_config(), options.seed)?);
            }
        }
        (ReferenceId::WhyNot, _) => {
            let foil = match options.foil_class {
                Some(f) => f,
                None => runner_up(&prediction)
                    .ok_or_else(|| Error::MissingExplanation("no alternative class".into()))?,
            };
            let mut c = contrastive_why_not(model, instance, foil, &shap_config())?;
            c.seed = options.seed;
            ctx.contrastive = Some(c);
        }
        (ReferenceId::WhatIf, _) => {
            let (edited_instance, edited) = what_if(
                model,
                dataset.features(),
                dataset.class_names(),
                instance,
                &options.edits,
            )?;
            ctx.what_if = Some(WhatIfOutcome {
                original: prediction.clone(),
                edited_instance,
                edited,
            });
        }
        (ReferenceId::When, _) => {
            let desired = match options.desired_class {
                Some(d) => d,
                None => runner_up(&prediction)
                    .ok_or_else(|| Error::MissingExplanation("no alternative class".into()))?,
            };
            ctx.counterfactuals = Some(generate_counterfactuals(
                model,
                instance,
                desired,
                dataset,
                &options.counterfactuals,
                options.seed,
            )?);
        }
        _ => {}
    }
    Ok(ctx)
}

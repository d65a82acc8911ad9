//! Explanation organization: which questions (reference methods) can be
//! answered in which presentation formats, how each pair is rendered, and
//! which views each audience sees first.

mod audience;
mod context;
mod guide;
mod render;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use audience::{recommended_views, AudienceId, AudienceProfile, RecommendedView};
pub use context::{build_view_context, runner_up, ViewOptions};
pub use guide::{guide_entries, GuideEntry};
pub use render::{
    render_view, ChartKind, ChartSpec, Series, TableSpec, ViewContext, ViewPayload, ViewSpec,
    WhatIfOutcome,
};

use crate::attribution::Attribution;
use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::model::Predictor;
use crate::shap::{shap_exact, ShapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceId {
    Inputs,
    WhatOutput,
    Certainty,
    How,
    Why,
    WhyNot,
    WhatIf,
    When,
}

impl ReferenceId {
    pub const ALL: [ReferenceId; 8] = [
        ReferenceId::Inputs,
        ReferenceId::WhatOutput,
        ReferenceId::Certainty,
        ReferenceId::How,
        ReferenceId::Why,
        ReferenceId::WhyNot,
        ReferenceId::WhatIf,
        ReferenceId::When,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceId::Inputs => "inputs",
            ReferenceId::WhatOutput => "what_output",
            ReferenceId::Certainty => "certainty",
            ReferenceId::How => "how",
            ReferenceId::Why => "why",
            ReferenceId::WhyNot => "why_not",
            ReferenceId::WhatIf => "what_if",
            ReferenceId::When => "when",
        }
    }

    pub fn method(self) -> ReferenceMethod {
        use FormatId::*;
        let (description, formats, locality): (&str, &[FormatId], Locality) = match self {
            ReferenceId::Inputs => (
                "Overview of all applied inputs",
                &[Text, Table, Chart],
                Locality::Data,
            ),
            ReferenceId::WhatOutput => (
                "Overview of the current and all other possible outputs",
                &[Text, Table],
                Locality::Data,
            ),
            ReferenceId::Certainty => (
                "Information about how confident the system is in the current output",
                &[Text, Table, Chart],
                Locality::Local,
            ),
            ReferenceId::How => (
                "Information about the ML model's inner logic",
                &[Text, FormalExpression, Table, Chart],
                Locality::Global,
            ),
            ReferenceId::Why => (
                "Information about why the system derived the current output from the given inputs",
                &[Text, FormalExpression, Table, Chart],
                Locality::Local,
            ),
            ReferenceId::WhyNot => (
                "Information about why another possible outcome was not derived w.r.t. the derived one and the applied inputs",
                &[Text, Table, Chart],
                Locality::Local,
            ),
            ReferenceId::WhatIf => (
                "Display of a simulated output based on altered inputs",
                &[Text, Table, Chart],
                Locality::Local,
            ),
            ReferenceId::When => (
                "Overview of simulated inputs based on a desired output",
                &[Text, Table],
                Locality::Local,
            ),
        };
        ReferenceMethod {
            id: self,
            description: description.into(),
            supported_formats: formats.to_vec(),
            locality,
        }
    }

    pub fn supports(self, format: FormatId) -> bool {
        self.method().supported_formats.contains(&format)
    }
}

impl fmt::Display for ReferenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ReferenceId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown reference method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatId {
    Text,
    FormalExpression,
    Table,
    Chart,
}

impl FormatId {
    pub const ALL: [FormatId; 4] = [
        FormatId::Text,
        FormatId::FormalExpression,
        FormatId::Table,
        FormatId::Chart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormatId::Text => "text",
            FormatId::FormalExpression => "formal_expression",
            FormatId::Table => "table",
            FormatId::Chart => "chart",
        }
    }
}

impl fmt::Display for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormatId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormatId::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown format method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    Global,
    Local,
    Data,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceMethod {
    pub id: ReferenceId,
    pub description: String,
    pub supported_formats: Vec<FormatId>,
    pub locality: Locality,
}

/// The eight reference methods in display order.
pub fn list_reference_methods() -> Vec<ReferenceMethod> {
    ReferenceId::ALL.iter().map(|r| r.method()).collect()
}

/// Contrastive attribution: Shapley values of the predicted class minus those
/// of `foil_class`, both computed exactly.
pub fn contrastive_why_not<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    foil_class: usize,
    config: &ShapConfig,
) -> Result<Attribution> {
    let predicted = model.predict_class(instance.values());
    if foil_class == predicted {
        return Err(Error::SameClass { class: foil_class });
    }
    if foil_class >= model.n_classes() {
        return Err(Error::Config(format!(
            "foil class {foil_class} out of range for {} classes",
            model.n_classes()
        )));
    }
    let exact = ShapConfig {
        exact_max_features: config.exact_max_features.max(instance.len()),
        ..config.clone()
    };
    let pred = shap_exact(model, instance, predicted, &exact)?;
    let foil = shap_exact(model, instance, foil_class, &exact)?;
    Ok(Attribution {
        target_class: predicted,
        foil_class: Some(foil_class),
        base_value: pred.base_value - foil.base_value,
        contributions: pred
            .contributions
            .iter()
            .zip(&foil.contributions)
            .map(|(a, b)| a - b)
            .collect(),
        method: pred.method,
        seed: 0,
        sample_count: pred.sample_count + foil.sample_count,
    })
}

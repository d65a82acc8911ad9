use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{FormatId, ReferenceId};
use crate::anchors::{render_rule, AnchorRule};
use crate::attribution::{Attribution, AttributionMethod};
use crate::counterfactual::{Counterfactual, MAD_FLOOR};
use crate::dataset::{format_number, Dataset, FeatureMeta, Instance};
use crate::error::{Error, Result};
use crate::model::{DecisionRule, Prediction, SplitTest};
use crate::shap::{waterfall_series, GlobalImportance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Bar,
    Waterfall,
    Histogram,
    Scatter,
}

/// One labeled numeric sequence; `labels` and `values` have equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl Series {
    fn new(name: impl Into<String>, labels: Vec<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), values.len());
        Self {
            name: name.into(),
            labels,
            values,
        }
    }
}

/// Chart data only; colors and layout belong to the client.
///
/// Waterfall charts carry a `delta` and a `cumulative` series plus `baseline`
/// (the start value) and `total` (the end value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub series: Vec<Series>,
    pub x_label: String,
    pub y_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "content", rename_all = "snake_case")]
pub enum ViewPayload {
    Text(String),
    FormalExpression(String),
    Table(TableSpec),
    Chart(ChartSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub reference: ReferenceId,
    pub format: FormatId,
    pub payload: ViewPayload,
}

/// Result of a user edit: the prediction before and after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfOutcome {
    pub original: Prediction,
    pub edited_instance: Instance,
    pub edited: Prediction,
}

/// Upstream explanation results a view may draw on. Only the fields the
/// requested view needs have to be present.
#[derive(Debug, Clone, Default)]
pub struct ViewContext {
    pub features: Vec<FeatureMeta>,
    pub class_names: Vec<String>,
    pub dataset: Option<Dataset>,
    pub instance: Option<Instance>,
    pub prediction: Option<Prediction>,
    pub shap: Option<Attribution>,
    pub lime: Option<Attribution>,
    pub anchor: Option<AnchorRule>,
    /// Precision threshold the anchor was searched with.
    pub anchor_tau: f64,
    pub contrastive: Option<Attribution>,
    pub global: Option<GlobalImportance>,
    pub decision_rules: Option<Vec<DecisionRule>>,
    pub what_if: Option<WhatIfOutcome>,
    pub counterfactuals: Option<Vec<Counterfactual>>,
    /// Preferred chart for `why` (bar or waterfall).
    pub chart_kind: Option<ChartKind>,
}

fn need<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::MissingExplanation(what.to_string()))
}

fn pct(p: f64) -> String {
    format!("{:.1}", p * 100.0)
}

fn join_names(names: &[String]) -> String {
    match names.len() {
        0 => String::new(),
        1 => names[0].clone(),
        n => format!("{} and {}", names[..n - 1].join(", "), names[n - 1]),
    }
}

fn feature_name(features: &[FeatureMeta], j: usize) -> String {
    features
        .get(j)
        .map(|f| f.name.clone())
        .unwrap_or_else(|| format!("x{}", j + 1))
}

fn class_name(names: &[String], c: usize) -> String {
    names.get(c).cloned().unwrap_or_else(|| format!("class {c}"))
}

fn display(features: &[FeatureMeta], j: usize, v: f64) -> String {
    features
        .get(j)
        .map(|f| f.display_value(v))
        .unwrap_or_else(|| format_number(v))
}

fn condition_text(features: &[FeatureMeta], feature: usize, test: SplitTest, holds: bool) -> String {
    let name = feature_name(features, feature);
    match (test, holds) {
        (SplitTest::LessOrEqual(t), true) => format!("{name} <= {}", format_number(t)),
        (SplitTest::LessOrEqual(t), false) => format!("{name} > {}", format_number(t)),
        (SplitTest::Equals(c), true) => format!("{name} = {}", display(features, feature, c)),
        (SplitTest::Equals(c), false) => format!("{name} != {}", display(features, feature, c)),
    }
}

/// Renders one (reference, format) view from the context.
pub fn render_view(reference: ReferenceId, format: FormatId, ctx: &ViewContext) -> Result<ViewSpec> {
    if !reference.supports(format) {
        return Err(Error::UnsupportedFormat {
            reference: reference.as_str().into(),
            format: format.as_str().into(),
        });
    }
    let payload = match reference {
        ReferenceId::Inputs => inputs(format, ctx)?,
        ReferenceId::WhatOutput => what_output(format, ctx)?,
        ReferenceId::Certainty => certainty(format, ctx)?,
        ReferenceId::How => how(format, ctx)?,
        ReferenceId::Why => why(format, ctx)?,
        ReferenceId::WhyNot => why_not(format, ctx)?,
        ReferenceId::WhatIf => what_if(format, ctx)?,
        ReferenceId::When => when(format, ctx)?,
    };
    Ok(ViewSpec {
        reference,
        format,
        payload,
    })
}

fn inputs(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let features = &ctx.features;
    if features.is_empty() {
        return Err(Error::MissingExplanation("feature metadata".into()));
    }
    Ok(match format {
        FormatId::Text => {
            let parts: Vec<String> = features
                .iter()
                .map(|f| match f.categories() {
                    Some(c) => format!("{} (one of {})", f.name, c.join(", ")),
                    None => format!(
                        "{} (from {} to {})",
                        f.name,
                        format_number(f.min()),
                        format_number(f.max())
                    ),
                })
                .collect();
            ViewPayload::Text(format!(
                "The system uses {} inputs: {}.",
                features.len(),
                join_names(&parts)
            ))
        }
        FormatId::Table => {
            let columns = ["feature", "kind", "min", "q1", "median", "q3", "max", "mean", "mad"];
            let rows = features
                .iter()
                .map(|f| match f.categories() {
                    Some(c) => {
                        let mut row = vec![f.name.clone(), "categorical".into(), c.join(" | ")];
                        row.resize(columns.len(), String::new());
                        row
                    }
                    None => {
                        let q = f.quartiles.unwrap_or([f.mean; 3]);
                        vec![
                            f.name.clone(),
                            "continuous".into(),
                            format_number(f.min()),
                            format_number(q[0]),
                            format_number(q[1]),
                            format_number(q[2]),
                            format_number(f.max()),
                            format_number(f.mean),
                            format_number(f.mad.unwrap_or(0.0)),
                        ]
                    }
                })
                .collect();
            ViewPayload::Table(TableSpec {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            })
        }
        FormatId::Chart => {
            let dataset = need(&ctx.dataset, "dataset")?;
            let series = features
                .iter()
                .enumerate()
                .map(|(j, f)| histogram(dataset, f, j))
                .collect();
            ViewPayload::Chart(ChartSpec {
                kind: ChartKind::Histogram,
                series,
                x_label: "value".into(),
                y_label: "rows".into(),
                baseline: None,
                total: None,
            })
        }
        FormatId::FormalExpression => unreachable!("checked against the registry"),
    })
}

const HISTOGRAM_BINS: usize = 10;

fn histogram(dataset: &Dataset, meta: &FeatureMeta, j: usize) -> Series {
    match meta.categories() {
        Some(c) => {
            let mut counts = vec![0.0; c.len()];
            for row in dataset.rows() {
                counts[row[j] as usize] += 1.0;
            }
            Series::new(meta.name.clone(), c.to_vec(), counts)
        }
        None => {
            let (lo, hi) = (meta.min(), meta.max());
            let width = (hi - lo) / HISTOGRAM_BINS as f64;
            let mut counts = vec![0.0; HISTOGRAM_BINS];
            for row in dataset.rows() {
                let b = if width > 0.0 {
                    (((row[j] - lo) / width) as usize).min(HISTOGRAM_BINS - 1)
                } else {
                    0
                };
                counts[b] += 1.0;
            }
            let labels = (0..HISTOGRAM_BINS)
                .map(|b| {
                    format!(
                        "{}-{}",
                        format_number(lo + b as f64 * width),
                        format_number(lo + (b + 1) as f64 * width)
                    )
                })
                .collect();
            Series::new(meta.name.clone(), labels, counts)
        }
    }
}

fn what_output(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    if ctx.class_names.is_empty() {
        return Err(Error::MissingExplanation("class names".into()));
    }
    Ok(match format {
        FormatId::Text => {
            let mut s = format!(
                "The possible outcomes are {}.",
                join_names(&ctx.class_names)
            );
            if let Some(p) = &ctx.prediction {
                s.push_str(&format!(" The current output is {}.", p.class_name));
            }
            ViewPayload::Text(s)
        }
        FormatId::Table => {
            let counts: Option<Vec<usize>> = ctx.dataset.as_ref().map(|d| {
                let mut c = vec![0; ctx.class_names.len()];
                for &l in d.labels() {
                    c[l] += 1;
                }
                c
            });
            let rows = ctx
                .class_names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    vec![
                        name.clone(),
                        counts
                            .as_ref()
                            .map_or_else(String::new, |c| c[i].to_string()),
                        match &ctx.prediction {
                            Some(p) if p.class_index == i => "yes".into(),
                            Some(_) => "no".into(),
                            None => String::new(),
                        },
                    ]
                })
                .collect();
            ViewPayload::Table(TableSpec {
                columns: vec!["outcome".into(), "training rows".into(), "current".into()],
                rows,
            })
        }
        _ => unreachable!("checked against the registry"),
    })
}

fn certainty(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let p = need(&ctx.prediction, "prediction")?;
    let labels: Vec<String> = (0..p.probabilities.len())
        .map(|c| class_name(&ctx.class_names, c))
        .collect();
    Ok(match format {
        FormatId::Text => ViewPayload::Text(format!(
            "The system predicts {} with {}% confidence.",
            p.class_name,
            pct(p.probabilities[p.class_index])
        )),
        FormatId::Table => ViewPayload::Table(TableSpec {
            columns: vec!["outcome".into(), "probability".into()],
            rows: labels
                .iter()
                .zip(&p.probabilities)
                .map(|(l, v)| vec![l.clone(), format_number(*v)])
                .collect(),
        }),
        FormatId::Chart => ViewPayload::Chart(ChartSpec {
            kind: ChartKind::Bar,
            series: vec![Series::new("probability", labels, p.probabilities.clone())],
            x_label: "outcome".into(),
            y_label: "probability".into(),
            baseline: None,
            total: None,
        }),
        FormatId::FormalExpression => unreachable!("checked against the registry"),
    })
}

fn how(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let features = &ctx.features;
    Ok(match format {
        FormatId::FormalExpression => {
            let rules = need(&ctx.decision_rules, "decision tree rules")?;
            let lines: Vec<String> = rules
                .iter()
                .map(|r| {
                    let cond = if r.conditions.is_empty() {
                        "TRUE".to_string()
                    } else {
                        r.conditions
                            .iter()
                            .map(|c| condition_text(features, c.feature, c.test, c.holds))
                            .collect::<Vec<_>>()
                            .join(" AND ")
                    };
                    format!(
                        "IF {cond} THEN class = {}",
                        class_name(&ctx.class_names, r.class_index)
                    )
                })
                .collect();
            ViewPayload::FormalExpression(lines.join("\n"))
        }
        _ => {
            let g = need(&ctx.global, "global importance")?;
            let names: Vec<String> = g.ranking.iter().map(|&j| feature_name(features, j)).collect();
            let values: Vec<f64> = g.ranking.iter().map(|&j| g.importances[j]).collect();
            match format {
                FormatId::Text => {
                    let mut s = format!(
                        "Overall, {} has the largest influence on the predictions for {}",
                        names[0],
                        class_name(&ctx.class_names, g.target_class)
                    );
                    if names.len() > 1 {
                        s.push_str(&format!(", followed by {}", join_names(&names[1..])));
                    }
                    s.push('.');
                    ViewPayload::Text(s)
                }
                FormatId::Table => ViewPayload::Table(TableSpec {
                    columns: vec!["feature".into(), "mean |contribution|".into()],
                    rows: names
                        .iter()
                        .zip(&values)
                        .map(|(n, v)| vec![n.clone(), format_number(*v)])
                        .collect(),
                }),
                _ => ViewPayload::Chart(ChartSpec {
                    kind: ChartKind::Bar,
                    series: vec![Series::new("mean |contribution|", names, values)],
                    x_label: "feature".into(),
                    y_label: "mean absolute contribution".into(),
                    baseline: None,
                    total: None,
                }),
            }
        }
    })
}

fn attribution_for_why(ctx: &ViewContext) -> Result<&Attribution> {
    ctx.shap
        .as_ref()
        .or(ctx.lime.as_ref())
        .ok_or_else(|| Error::MissingExplanation("attribution (shap or lime)".into()))
}

fn attribution_table(ctx: &ViewContext, a: &Attribution, header: &str) -> TableSpec {
    let instance = ctx.instance.as_ref();
    TableSpec {
        columns: vec!["feature".into(), "value".into(), header.into()],
        rows: a
            .ranking()
            .into_iter()
            .map(|j| {
                vec![
                    feature_name(&ctx.features, j),
                    instance.map_or_else(String::new, |x| display(&ctx.features, j, x.values()[j])),
                    format_number(a.contributions[j]),
                ]
            })
            .collect(),
    }
}

fn bar_chart(ctx: &ViewContext, a: &Attribution, name: &str) -> ChartSpec {
    let order = a.ranking();
    ChartSpec {
        kind: ChartKind::Bar,
        series: vec![Series::new(
            name,
            order.iter().map(|&j| feature_name(&ctx.features, j)).collect(),
            order.iter().map(|&j| a.contributions[j]).collect(),
        )],
        x_label: "feature".into(),
        y_label: "contribution".into(),
        baseline: Some(a.base_value),
        total: None,
    }
}

fn why(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    Ok(match format {
        FormatId::FormalExpression => {
            let rule = need(&ctx.anchor, "anchor rule")?;
            ViewPayload::FormalExpression(render_rule(
                rule,
                &ctx.features,
                &ctx.class_names,
                ctx.anchor_tau,
            ))
        }
        FormatId::Text => {
            let a = attribution_for_why(ctx)?;
            let x = need(&ctx.instance, "instance")?;
            let j = a
                .top_feature()
                .ok_or_else(|| Error::MissingExplanation("non-empty attribution".into()))?;
            let direction = if a.contributions[j] >= 0.0 { "toward" } else { "against" };
            ViewPayload::Text(format!(
                "The value of {} ({}) contributed most {} this prediction.",
                feature_name(&ctx.features, j),
                display(&ctx.features, j, x.values()[j]),
                direction
            ))
        }
        FormatId::Table => {
            let a = attribution_for_why(ctx)?;
            ViewPayload::Table(attribution_table(ctx, a, "contribution"))
        }
        FormatId::Chart => {
            let a = attribution_for_why(ctx)?;
            let kind = ctx.chart_kind.unwrap_or(if a.method == AttributionMethod::Shap {
                ChartKind::Waterfall
            } else {
                ChartKind::Bar
            });
            match kind {
                ChartKind::Waterfall => {
                    let shap = need(&ctx.shap, "shap attribution")?;
                    let p = need(&ctx.prediction, "prediction")?;
                    let names: Vec<String> = ctx.features.iter().map(|f| f.name.clone()).collect();
                    let w = waterfall_series(shap, p.probabilities[shap.target_class], &names)?;
                    let labels: Vec<String> = w.steps.iter().map(|s| s.label.clone()).collect();
                    ViewPayload::Chart(ChartSpec {
                        kind: ChartKind::Waterfall,
                        series: vec![
                            Series::new(
                                "delta",
                                labels.clone(),
                                w.steps.iter().map(|s| s.delta).collect(),
                            ),
                            Series::new(
                                "cumulative",
                                labels,
                                w.steps.iter().map(|s| s.cumulative_after).collect(),
                            ),
                        ],
                        x_label: "feature".into(),
                        y_label: format!(
                            "probability of {}",
                            class_name(&ctx.class_names, shap.target_class)
                        ),
                        baseline: Some(w.start),
                        total: Some(w.end),
                    })
                }
                ChartKind::Bar => ViewPayload::Chart(bar_chart(ctx, a, "contribution")),
                other => {
                    return Err(Error::UnsupportedFormat {
                        reference: "why".into(),
                        format: format!("chart/{other:?}").to_lowercase(),
                    })
                }
            }
        }
    })
}

fn why_not(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let c = need(&ctx.contrastive, "contrastive attribution")?;
    let foil = c
        .foil_class
        .ok_or_else(|| Error::MissingExplanation("foil class".into()))?;
    Ok(match format {
        FormatId::Text => {
            let j = c
                .top_feature()
                .ok_or_else(|| Error::MissingExplanation("non-empty attribution".into()))?;
            ViewPayload::Text(format!(
                "Compared to {}, the decisive difference is {}.",
                class_name(&ctx.class_names, foil),
                feature_name(&ctx.features, j)
            ))
        }
        FormatId::Table => ViewPayload::Table(attribution_table(ctx, c, "contrast")),
        FormatId::Chart => {
            let mut chart = bar_chart(ctx, c, "contrast");
            chart.y_label = format!(
                "contribution to {} minus contribution to {}",
                class_name(&ctx.class_names, c.target_class),
                class_name(&ctx.class_names, foil)
            );
            ViewPayload::Chart(chart)
        }
        FormatId::FormalExpression => unreachable!("checked against the registry"),
    })
}

fn what_if(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let w = need(&ctx.what_if, "what-if result")?;
    let labels: Vec<String> = (0..w.edited.probabilities.len())
        .map(|c| class_name(&ctx.class_names, c))
        .collect();
    Ok(match format {
        FormatId::Text => ViewPayload::Text(format!(
            "With the changed inputs, the system predicts {} with {}% confidence (before: {} with {}%).",
            w.edited.class_name,
            pct(w.edited.probabilities[w.edited.class_index]),
            w.original.class_name,
            pct(w.original.probabilities[w.original.class_index])
        )),
        FormatId::Table => ViewPayload::Table(TableSpec {
            columns: vec!["outcome".into(), "before".into(), "after".into()],
            rows: labels
                .iter()
                .enumerate()
                .map(|(c, l)| {
                    vec![
                        l.clone(),
                        format_number(w.original.probabilities[c]),
                        format_number(w.edited.probabilities[c]),
                    ]
                })
                .collect(),
        }),
        FormatId::Chart => ViewPayload::Chart(ChartSpec {
            kind: ChartKind::Bar,
            series: vec![
                Series::new("before", labels.clone(), w.original.probabilities.clone()),
                Series::new("after", labels, w.edited.probabilities.clone()),
            ],
            x_label: "outcome".into(),
            y_label: "probability".into(),
            baseline: None,
            total: None,
        }),
        FormatId::FormalExpression => unreachable!("checked against the registry"),
    })
}

fn when(format: FormatId, ctx: &ViewContext) -> Result<ViewPayload> {
    let cfs = need(&ctx.counterfactuals, "counterfactuals")?;
    let x = need(&ctx.instance, "instance")?;
    let features = &ctx.features;
    Ok(match format {
        FormatId::Text => {
            let mut sentences: Vec<String> = cfs
                .iter()
                .filter(|c| c.valid)
                .filter_map(|c| {
                    // the largest MAD-normalized change names the counterfactual
                    let j = (0..features.len())
                        .filter(|&j| c.instance.values()[j] != x.values()[j])
                        .max_by(|&a, &b| {
                            let score = |j: usize| {
                                let d = (c.instance.values()[j] - x.values()[j]).abs();
                                if features[j].is_categorical() {
                                    1.0
                                } else {
                                    d / features[j].mad_floored(MAD_FLOOR)
                                }
                            };
                            score(a).total_cmp(&score(b)).then(b.cmp(&a))
                        })?;
                    Some(format!(
                        "If {} were {} instead of {}, the system would predict {}.",
                        feature_name(features, j),
                        display(features, j, c.instance.values()[j]),
                        display(features, j, x.values()[j]),
                        class_name(&ctx.class_names, c.desired_class)
                    ))
                })
                .collect();
            let mut seen = alloc::collections::BTreeSet::new();
            sentences.retain(|s| seen.insert(s.clone()));
            if sentences.is_empty() {
                ViewPayload::Text(format!(
                    "No change within the allowed ranges was found that makes the system predict {}.",
                    cfs.first()
                        .map(|c| class_name(&ctx.class_names, c.desired_class))
                        .unwrap_or_else(|| "another outcome".into())
                ))
            } else {
                ViewPayload::Text(sentences.join(" "))
            }
        }
        FormatId::Table => {
            let mut columns: Vec<String> = vec!["#".into()];
            columns.extend(features.iter().map(|f| f.name.clone()));
            columns.extend(["predicted".into(), "valid".into(), "proximity".into(), "changed".into()]);
            let mut rows = vec![{
                let mut r = vec!["original".to_string()];
                r.extend((0..features.len()).map(|j| display(features, j, x.values()[j])));
                r.extend([
                    ctx.prediction
                        .as_ref()
                        .map_or_else(String::new, |p| p.class_name.clone()),
                    String::new(),
                    "0".into(),
                    "0".into(),
                ]);
                r
            }];
            for (i, c) in cfs.iter().enumerate() {
                let mut r = vec![(i + 1).to_string()];
                r.extend((0..features.len()).map(|j| display(features, j, c.instance.values()[j])));
                let predicted = crate::math::argmax(&c.probabilities);
                r.extend([
                    class_name(&ctx.class_names, predicted),
                    if c.valid { "yes".into() } else { "no".into() },
                    format_number(c.proximity),
                    c.sparsity.to_string(),
                ]);
                rows.push(r);
            }
            ViewPayload::Table(TableSpec { columns, rows })
        }
        _ => unreachable!("checked against the registry"),
    })
}

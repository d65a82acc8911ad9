//! Self-check that the explanation layer offers every design feature the
//! interface promises, exercised against a real model and dataset.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{class_prototypes, feature_stats, Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::views::{
    build_view_context, guide_entries, list_reference_methods, render_view, AudienceId, FormatId,
    ReferenceId, ViewOptions, ViewPayload, ViewSpec,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfCheck {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

struct Harness<'a> {
    model: &'a Model,
    dataset: &'a Dataset,
    instance: Instance,
    options: ViewOptions,
}

impl Harness<'_> {
    fn render(&self, reference: ReferenceId, format: FormatId) -> Result<ViewSpec> {
        let ctx = build_view_context(
            self.model,
            self.dataset,
            &self.instance,
            reference,
            format,
            &self.options,
        )?;
        render_view(reference, format, &ctx)
    }
}

fn check(id: &str, description: &str, outcome: core::result::Result<String, String>) -> DfCheck {
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    DfCheck {
        id: id.to_string(),
        description: description.to_string(),
        passed,
        detail,
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Runs the nine design-feature checks DF1..DF9 on `instance` (default: the
/// first dataset row). `model` must be a decision tree for the formal
/// expression of `how` to exist.
pub fn run_conformance(
    model: &Model,
    dataset: &Dataset,
    instance: Option<Instance>,
    seed: u64,
) -> Vec<DfCheck> {
    let instance = instance.unwrap_or_else(|| Instance(dataset.rows()[0].clone()));
    let h = Harness {
        model,
        dataset,
        instance,
        options: ViewOptions {
            seed,
            ..ViewOptions::default()
        },
    };
    let mut out = Vec::with_capacity(9);

    out.push(check(
        "DF1",
        "inputs and their ranges are listed",
        (|| {
            let stats = feature_stats(dataset);
            if stats.len() != dataset.n_features() {
                return Err("feature_stats length mismatch".into());
            }
            for (j, f) in stats.iter().enumerate() {
                if !f.is_categorical() {
                    let col = dataset.rows().iter().map(|r| r[j]);
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                        (a.min(v), b.max(v))
                    });
                    if f.min() != lo || f.max() != hi {
                        return Err(format!("range of {} does not match the data", f.name));
                    }
                }
            }
            let text = h.render(ReferenceId::Inputs, FormatId::Text).map_err(err)?;
            let ViewPayload::Text(t) = text.payload else {
                return Err("inputs text view is not text".into());
            };
            if let Some(f) = stats.iter().find(|f| !t.contains(f.name.as_str())) {
                return Err(format!("inputs view omits {}", f.name));
            }
            let table = h.render(ReferenceId::Inputs, FormatId::Table).map_err(err)?;
            let ViewPayload::Table(t) = table.payload else {
                return Err("inputs table view is not a table".into());
            };
            if t.rows.len() != stats.len() {
                return Err("inputs table row count mismatch".into());
            }
            Ok(format!("{} features with ranges", stats.len()))
        })(),
    ));

    out.push(check(
        "DF2",
        "possible outputs are listed",
        (|| {
            let v = h.render(ReferenceId::WhatOutput, FormatId::Text).map_err(err)?;
            let ViewPayload::Text(t) = v.payload else {
                return Err("what_output text view is not text".into());
            };
            if let Some(c) = dataset.class_names().iter().find(|c| !t.contains(c.as_str())) {
                return Err(format!("output view omits {c}"));
            }
            Ok(format!("{} outcomes", dataset.n_classes()))
        })(),
    ));

    out.push(check(
        "DF3",
        "a prototypical input exists for each outcome",
        (|| {
            let protos = class_prototypes(dataset).map_err(err)?;
            if protos.len() != dataset.n_classes() {
                return Err("one prototype per class expected".into());
            }
            for (c, p) in protos.iter().enumerate() {
                let found = dataset
                    .rows()
                    .iter()
                    .zip(dataset.labels())
                    .any(|(r, &l)| l == c && r.as_slice() == p.values());
                if !found {
                    return Err(format!("prototype {c} is not a member row"));
                }
            }
            Ok(format!("{} prototypes", protos.len()))
        })(),
    ));

    out.push(check(
        "DF4",
        "certainty, why, why not, what if and when are provided",
        (|| {
            let listed: BTreeSet<ReferenceId> =
                list_reference_methods().iter().map(|m| m.id).collect();
            for r in [
                ReferenceId::Certainty,
                ReferenceId::Why,
                ReferenceId::WhyNot,
                ReferenceId::WhatIf,
                ReferenceId::When,
            ] {
                if !listed.contains(&r) {
                    return Err(format!("{r} is not registered"));
                }
                h.render(r, FormatId::Text)
                    .map_err(|e| format!("{r}: {e}"))?;
            }
            Ok("5/5 rendered".into())
        })(),
    ));

    out.push(check(
        "DF5",
        "every reference method can be switched to",
        (|| {
            for r in ReferenceId::ALL {
                let f = r.method().supported_formats[0];
                let v = h.render(r, f).map_err(|e| format!("{r}/{f}: {e}"))?;
                if v.reference != r {
                    return Err(format!("{r} rendered as {}", v.reference));
                }
            }
            Ok(format!("{}/8 reference methods", ReferenceId::ALL.len()))
        })(),
    ));

    out.push(check(
        "DF6",
        "a guide covers every reference method",
        {
            let entries = guide_entries();
            let covered: BTreeSet<ReferenceId> = entries.iter().map(|e| e.reference).collect();
            match ReferenceId::ALL.iter().find(|r| !covered.contains(r)) {
                Some(r) => Err(format!("guide misses {r}")),
                None if entries.len() < 8 => Err("guide has fewer than 8 entries".into()),
                None => Ok(format!("{} entries, 8/8 methods", entries.len())),
            }
        },
    ));

    out.push(check(
        "DF7",
        "text, formal expression, table and chart are provided",
        (|| {
            for f in FormatId::ALL {
                let reachable = ReferenceId::ALL
                    .iter()
                    .filter(|r| r.supports(f))
                    .any(|&r| h.render(r, f).is_ok());
                if !reachable {
                    return Err(format!("no view renders as {f}"));
                }
            }
            Ok("4/4 formats".into())
        })(),
    ));

    out.push(check(
        "DF8",
        "every supported format switch renders and unsupported ones are refused",
        (|| {
            let mut n = 0;
            for r in ReferenceId::ALL {
                for f in FormatId::ALL {
                    let result = h.render(r, f);
                    match (r.supports(f), result) {
                        (true, Ok(v)) => {
                            if v.format != f {
                                return Err(format!("{r}/{f} rendered as {}", v.format));
                            }
                            n += 1;
                        }
                        (true, Err(e)) => return Err(format!("{r}/{f}: {e}")),
                        (false, Err(Error::UnsupportedFormat { .. })) => {}
                        (false, _) => return Err(format!("{r}/{f} should be refused")),
                    }
                }
            }
            Ok(format!("{n} supported pairs"))
        })(),
    ));

    out.push(check(
        "DF9",
        "each audience has recommended views",
        (|| {
            for a in AudienceId::ALL {
                let profile = a.profile();
                if profile.recommended.is_empty() {
                    return Err(format!("{} has no views", a.as_str()));
                }
                for v in &profile.recommended {
                    h.render(v.reference, v.format)
                        .map_err(|e| format!("{}: {}/{}: {e}", a.as_str(), v.reference, v.format))?;
                }
            }
            Ok(format!("{} audiences", AudienceId::ALL.len()))
        })(),
    ));

    out
}

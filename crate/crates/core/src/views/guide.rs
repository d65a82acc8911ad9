use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ReferenceId;

/// A plain-language question pointing at the reference method that answers it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideEntry {
    pub question: String,
    pub reference: ReferenceId,
    pub note: String,
}

const ENTRIES: &[(&str, ReferenceId, &str)] = &[
    (
        "Which information does the system use?",
        ReferenceId::Inputs,
        "Lists every input feature with its range and distribution.",
    ),
    (
        "Which results can the system produce?",
        ReferenceId::WhatOutput,
        "Shows all possible outcomes and which one is currently predicted.",
    ),
    (
        "How sure is the system about this result?",
        ReferenceId::Certainty,
        "Shows the predicted probability of every outcome.",
    ),
    (
        "How does the system decide in general?",
        ReferenceId::How,
        "Summarizes which inputs matter most across all data and the model's decision rules.",
    ),
    (
        "Why did the system decide this?",
        ReferenceId::Why,
        "Shows how much each input pushed this particular prediction up or down.",
    ),
    (
        "Which simple rule guarantees this result?",
        ReferenceId::Why,
        "Gives an if-then rule under which the prediction almost never changes.",
    ),
    (
        "Why did the system not choose another result?",
        ReferenceId::WhyNot,
        "Contrasts the predicted outcome with an alternative one input by input.",
    ),
    (
        "What happens if I change an input?",
        ReferenceId::WhatIf,
        "Re-runs the prediction on inputs you edit yourself.",
    ),
    (
        "What would need to change to get a different result?",
        ReferenceId::When,
        "Searches for small input changes that lead to the outcome you want.",
    ),
];

pub fn guide_entries() -> Vec<GuideEntry> {
    ENTRIES
        .iter()
        .map(|&(question, reference, note)| GuideEntry {
            question: question.into(),
            reference,
            note: note.into(),
        })
        .collect()
}

use alloc::string::ToString;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FormatId, ReferenceId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudienceId {
    Developer,
    User,
    BusinessEntity,
    RegulatoryEntity,
    AffectedParty,
}

impl AudienceId {
    pub const ALL: [AudienceId; 5] = [
        AudienceId::Developer,
        AudienceId::User,
        AudienceId::BusinessEntity,
        AudienceId::RegulatoryEntity,
        AudienceId::AffectedParty,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AudienceId::Developer => "developer",
            AudienceId::User => "user",
            AudienceId::BusinessEntity => "business_entity",
            AudienceId::RegulatoryEntity => "regulatory_entity",
            AudienceId::AffectedParty => "affected_party",
        }
    }

    /// Static view mapping. Lay audiences get local views first; developers
    /// and regulators also get global ones and the data tab.
    pub fn profile(self) -> AudienceProfile {
        use FormatId::*;
        use ReferenceId::*;
        let (views, show_data_tab): (&[(ReferenceId, FormatId)], bool) = match self {
            AudienceId::Developer => (
                &[
                    (Inputs, Chart),
                    (WhatOutput, Table),
                    (Certainty, Chart),
                    (How, Chart),
                    (Why, Chart),
                    (WhyNot, Chart),
                    (WhatIf, Table),
                    (When, Table),
                ],
                true,
            ),
            AudienceId::User => (&[(Certainty, Text), (Why, Chart), (WhatIf, Table)], false),
            AudienceId::BusinessEntity => {
                (&[(How, Chart), (Certainty, Chart), (WhatOutput, Table)], false)
            }
            AudienceId::RegulatoryEntity => (
                &[(Inputs, Table), (How, Chart), (Why, FormalExpression)],
                true,
            ),
            AudienceId::AffectedParty => (&[(Why, Text), (WhyNot, Text), (When, Table)], false),
        };
        AudienceProfile {
            id: self,
            recommended: views
                .iter()
                .map(|&(reference, format)| RecommendedView { reference, format })
                .collect(),
            show_data_tab,
        }
    }
}

impl FromStr for AudienceId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AudienceId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownAudience(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendedView {
    pub reference: ReferenceId,
    pub format: FormatId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudienceProfile {
    pub id: AudienceId,
    /// First entry is the view opened on selection.
    pub recommended: Vec<RecommendedView>,
    pub show_data_tab: bool,
}

/// Profile for an audience id such as `"affected_party"`.
pub fn recommended_views(audience: &str) -> Result<AudienceProfile> {
    audience
        .parse::<AudienceId>()
        .map(AudienceId::profile)
        .map_err(|_| Error::UnknownAudience(audience.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::views::Locality;

    #[test]
    fn affected_party_is_local_and_starts_with_why_text() {
        let p = recommended_views("affected_party").unwrap();
        assert_eq!(
            p.recommended[0],
            RecommendedView {
                reference: ReferenceId::Why,
                format: FormatId::Text
            }
        );
        assert!(p
            .recommended
            .iter()
            .all(|v| v.reference.method().locality == Locality::Local));
    }

    #[test]
    fn developer_sees_everything() {
        let p = recommended_views("developer").unwrap();
        assert!(p.show_data_tab);
        assert!(p.recommended.contains(&RecommendedView {
            reference: ReferenceId::How,
            format: FormatId::Chart
        }));
        assert_eq!(p.recommended.len(), ReferenceId::ALL.len());
    }

    #[test]
    fn all_recommendations_are_supported() {
        for a in AudienceId::ALL {
            let p = a.profile();
            assert!(!p.recommended.is_empty());
            for v in &p.recommended {
                assert!(v.reference.supports(v.format), "{:?} {:?}", a, v);
            }
        }
    }

    #[test]
    fn unknown_audience() {
        assert_eq!(
            recommended_views("auditor"),
            Err(Error::UnknownAudience("auditor".into()))
        );
    }
}

//! Cross-record compliance queries.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::batch::Execution;
use crate::model::{RecordId, RopaRecord};
use crate::registry::{ConceptRegistry, JurisdictionId};
use crate::validate::{gap_matrix, validate_article30};

pub const THIRD_COUNTRIES: &str = "third-countries-that-personal-data-are-transferred-to";
pub const TRANSFER_SAFEGUARDS: &str = "appropriate-safeguards-for-third-country-transfers-technology-used";
pub const SPECIAL_CATEGORY: &str = "special-category-personal-data";
pub const LEGAL_BASIS: &str = "legal-basis-for-processing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleId {
    MissingMandatory,
    TransferWithoutSafeguards,
    SpecialCategoryWithoutBasis,
    JurisdictionReadiness,
}

impl RuleId {
    pub const ALL: [RuleId; 4] = [
        RuleId::MissingMandatory,
        RuleId::TransferWithoutSafeguards,
        RuleId::SpecialCategoryWithoutBasis,
        RuleId::JurisdictionReadiness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::MissingMandatory => "MISSING_MANDATORY",
            RuleId::TransferWithoutSafeguards => "TRANSFER_WITHOUT_SAFEGUARDS",
            RuleId::SpecialCategoryWithoutBasis => "SPECIAL_CATEGORY_WITHOUT_BASIS",
            RuleId::JurisdictionReadiness => "JURISDICTION_READINESS",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            RuleId::MissingMandatory => "mandatory Article 30 concept not recorded",
            RuleId::TransferWithoutSafeguards => {
                "third-country transfer recorded without safeguards (artifact-defined rule)"
            }
            RuleId::SpecialCategoryWithoutBasis => {
                "special category data recorded without a legal basis (artifact-defined rule)"
            }
            RuleId::JurisdictionReadiness => "record not ready for a jurisdiction's template",
        }
    }
}

impl FromStr for RuleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryRule {
    pub id: RuleId,
    /// Only meaningful for [`RuleId::JurisdictionReadiness`].
    pub jurisdiction: Option<JurisdictionId>,
}

impl QueryRule {
    pub fn new(id: RuleId) -> Self {
        QueryRule { id, jurisdiction: None }
    }

    pub fn readiness(jurisdiction: Option<JurisdictionId>) -> Self {
        QueryRule {
            id: RuleId::JurisdictionReadiness,
            jurisdiction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct QueryHit {
    pub record_id: RecordId,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub rule: RuleId,
    /// Ordered by record id, then detail.
    pub hits: Vec<QueryHit>,
}

fn record_hits(rule: QueryRule, record: &RopaRecord, registry: &ConceptRegistry) -> Vec<String> {
    match rule.id {
        RuleId::MissingMandatory => validate_article30(record, registry)
            .findings
            .into_iter()
            .map(|f| format!("missing {}", f.concept))
            .collect(),
        RuleId::TransferWithoutSafeguards => {
            if record.is_populated(THIRD_COUNTRIES) && !record.is_populated(TRANSFER_SAFEGUARDS) {
                let countries: Vec<String> = record
                    .get(THIRD_COUNTRIES)
                    .unwrap_or_default()
                    .iter()
                    .map(|v| v.lexical())
                    .collect();
                vec![format!("transfers to {} without {TRANSFER_SAFEGUARDS}", countries.join(","))]
            } else {
                Vec::new()
            }
        }
        RuleId::SpecialCategoryWithoutBasis => {
            if record.is_populated(SPECIAL_CATEGORY) && !record.is_populated(LEGAL_BASIS) {
                vec![format!("{SPECIAL_CATEGORY} recorded without {LEGAL_BASIS}")]
            } else {
                Vec::new()
            }
        }
        RuleId::JurisdictionReadiness => gap_matrix(record, registry)
            .into_iter()
            .filter(|(j, r)| !r.ready && rule.jurisdiction.is_none_or(|only| only == *j))
            .map(|(j, r)| format!("{j} not ready: {} errors, {} warnings", r.errors, r.warnings))
            .collect(),
    }
}

pub fn run_query(
    rule: QueryRule,
    records: &[RopaRecord],
    registry: &ConceptRegistry,
    execution: Execution,
) -> QueryResult {
    let per_record = execution.map(records, |r| (r.record_id().clone(), record_hits(rule, r, registry)));
    let mut hits: Vec<QueryHit> = per_record
        .into_iter()
        .flat_map(|(record_id, details)| {
            details
                .into_iter()
                .map(move |detail| QueryHit {
                    record_id: record_id.clone(),
                    detail,
                })
        })
        .collect();
    hits.sort();
    QueryResult { rule: rule.id, hits }
}

//! Article 30 and jurisdiction-profile validation.
//!
//! Validators are total: every problem becomes a finding and no input makes
//! them fail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{check_value, FieldValue, ModelError, RopaRecord};
use crate::registry::{ConceptId, ConceptRegistry, JurisdictionId, JurisdictionProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Finding codes, in reporting order within a concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    MissingMandatory,
    MissingProfileField,
    TypeMismatch,
    UnknownTerm,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::MissingMandatory => "MISSING_MANDATORY",
            FindingCode::MissingProfileField => "MISSING_PROFILE_FIELD",
            FindingCode::TypeMismatch => "TYPE_MISMATCH",
            FindingCode::UnknownTerm => "UNKNOWN_TERM",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingCode::MissingMandatory | FindingCode::TypeMismatch => Severity::Error,
            FindingCode::MissingProfileField | FindingCode::UnknownTerm => Severity::Warning,
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ValidationFinding {
    pub concept: ConceptId,
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
}

impl ValidationFinding {
    fn new(concept: ConceptId, code: FindingCode, message: String) -> Self {
        ValidationFinding {
            concept,
            severity: code.severity(),
            code,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<ValidationFinding>,
    pub compliant: bool,
}

impl ValidationReport {
    /// Sorts findings into table order then code, and derives `compliant`.
    pub fn from_findings(registry: &ConceptRegistry, mut findings: Vec<ValidationFinding>) -> Self {
        findings.sort_by(|a, b| {
            let pos = |f: &ValidationFinding| registry.index_of(f.concept.as_str()).unwrap_or(usize::MAX);
            pos(a)
                .cmp(&pos(b))
                .then(a.code.cmp(&b.code))
                .then_with(|| a.message.cmp(&b.message))
        });
        let compliant = findings.iter().all(|f| f.severity != Severity::Error);
        ValidationReport {
            findings,
            compliant,
        }
    }

    pub fn errors(&self) -> usize {
        self.count(Severity::Error)
    }

    pub fn warnings(&self) -> usize {
        self.count(Severity::Warning)
    }

    fn count(&self, severity: Severity) -> usize {
        self.findings.iter().filter(|f| f.severity == severity).count()
    }

    /// Appends another report's findings, keeping the ordering contract.
    pub fn merged(self, registry: &ConceptRegistry, other: ValidationReport) -> Self {
        let mut findings = self.findings;
        findings.extend(other.findings);
        ValidationReport::from_findings(registry, findings)
    }
}

fn missing_mandatory(record: &RopaRecord, registry: &ConceptRegistry) -> Vec<ValidationFinding> {
    registry
        .concepts()
        .iter()
        .filter(|c| c.mandatory && !record.is_populated(c.id.as_str()))
        .map(|c| {
            ValidationFinding::new(
                c.id.clone(),
                FindingCode::MissingMandatory,
                format!("Article 30 requires `{}` ({})", c.id, c.article),
            )
        })
        .collect()
}

/// One MISSING_MANDATORY error per mandatory concept the record lacks.
pub fn validate_article30(record: &RopaRecord, registry: &ConceptRegistry) -> ValidationReport {
    ValidationReport::from_findings(registry, missing_mandatory(record, registry))
}

/// Article 30 findings plus a warning for every profile concept the record
/// lacks that is not already reported as mandatory.
pub fn validate_against_profile(
    record: &RopaRecord,
    profile: &JurisdictionProfile,
    registry: &ConceptRegistry,
) -> ValidationReport {
    let mut findings = missing_mandatory(record, registry);
    let flagged: BTreeSet<ConceptId> = findings.iter().map(|f| f.concept.clone()).collect();
    for id in &profile.concepts {
        if !record.is_populated(id.as_str()) && !flagged.contains(id) {
            findings.push(ValidationFinding::new(
                id.clone(),
                FindingCode::MissingProfileField,
                format!("{} template asks for `{id}`", profile.jurisdiction),
            ));
        }
    }
    ValidationReport::from_findings(registry, findings)
}

/// Re-checks held values: schema conformance (TYPE_MISMATCH) and membership
/// in closed vocabularies (UNKNOWN_TERM).
pub fn validate_values(record: &RopaRecord, registry: &ConceptRegistry) -> ValidationReport {
    let mut findings = Vec::new();
    for (id, values) in record.fields() {
        let Ok(descriptor) = registry.record_concept(id.as_str()) else {
            findings.push(ValidationFinding::new(
                id.clone(),
                FindingCode::TypeMismatch,
                format!("`{id}` is not a record concept"),
            ));
            continue;
        };
        if descriptor.value_schema.multiplicity() == crate::model::Multiplicity::One && values.len() > 1 {
            let e = ModelError::MultiplicityViolation {
                concept: id.clone(),
                got: values.len(),
            };
            findings.push(ValidationFinding::new(id.clone(), FindingCode::TypeMismatch, e.to_string()));
        }
        for value in values {
            if let Err(e) = check_value(descriptor, value) {
                findings.push(ValidationFinding::new(id.clone(), FindingCode::TypeMismatch, e.to_string()));
                continue;
            }
            if let (FieldValue::Term(term), Some(vocab_name)) =
                (value, descriptor.value_schema.vocabulary.as_deref())
            {
                let known = registry.vocabulary(vocab_name).is_some_and(|v| v.knows(term));
                if !known {
                    findings.push(ValidationFinding::new(
                        id.clone(),
                        FindingCode::UnknownTerm,
                        format!("`{term}` is not in vocabulary `{vocab_name}`"),
                    ));
                }
            }
        }
    }
    ValidationReport::from_findings(registry, findings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Readiness {
    pub errors: usize,
    pub warnings: usize,
    pub ready: bool,
}

/// Profile validation against all six jurisdictions.
pub fn gap_matrix(record: &RopaRecord, registry: &ConceptRegistry) -> BTreeMap<JurisdictionId, Readiness> {
    JurisdictionId::ALL
        .into_iter()
        .map(|j| {
            let report = validate_against_profile(record, registry.jurisdiction_profile(j), registry);
            let errors = report.errors();
            let warnings = report.warnings();
            (
                j,
                Readiness {
                    errors,
                    warnings,
                    ready: errors == 0 && warnings == 0,
                },
            )
        })
        .collect()
}

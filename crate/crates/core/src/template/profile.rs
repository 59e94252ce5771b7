use std::collections::{BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::{csv_error, csv_reader, csv_writer, escape_cell_value, split_cell, unescape_cell, TemplateError};
use crate::model::{FieldValue, Multiplicity, RecordId, RopaRecord, ScalarKind};
use crate::registry::{ConceptId, ConceptRegistry, JurisdictionId};

pub const CONFIG_HEADER: [&str; 2] = ["external_header", "concept_id"];
pub const META_RECORD_ID: &str = "_meta:record_id";
const META_CONTROLLER: &str = super::META_CONTROLLER;
const META_CREATED: &str = super::META_CREATED;
const UNSPECIFIED_CONTROLLER: &str = "unspecified";

const DEFAULT_CONFIGS: [(JurisdictionId, &str); 6] = [
    (JurisdictionId::BE, include_str!("../../data/profiles/BE.csv")),
    (JurisdictionId::CY, include_str!("../../data/profiles/CY.csv")),
    (JurisdictionId::DK, include_str!("../../data/profiles/DK.csv")),
    (JurisdictionId::FI, include_str!("../../data/profiles/FI.csv")),
    (JurisdictionId::LU, include_str!("../../data/profiles/LU.csv")),
    (JurisdictionId::UK, include_str!("../../data/profiles/UK.csv")),
];

/// Column layout of one regulator's template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateProfileConfig {
    jurisdiction: JurisdictionId,
    column_map: Vec<(String, ConceptId)>,
}

impl TemplateProfileConfig {
    pub fn new(
        jurisdiction: JurisdictionId,
        column_map: Vec<(String, ConceptId)>,
        registry: &ConceptRegistry,
    ) -> Result<Self, TemplateError> {
        let profile = registry.jurisdiction_profile(jurisdiction);
        let mut headers = HashSet::new();
        let mut concepts = HashSet::new();
        for (header, concept) in &column_map {
            if header.is_empty() {
                return Err(TemplateError::InvalidConfig("empty external header".into()));
            }
            if header.starts_with("_meta:") {
                return Err(TemplateError::InvalidConfig(format!("header `{header}` is reserved")));
            }
            if !headers.insert(header.as_str()) {
                return Err(TemplateError::InvalidConfig(format!("duplicate header `{header}`")));
            }
            if registry.record_concept(concept.as_str()).is_err() {
                return Err(TemplateError::InvalidConfig(format!("unknown concept `{concept}`")));
            }
            if !profile.contains(concept) {
                return Err(TemplateError::InvalidConfig(format!(
                    "`{concept}` is not part of the {jurisdiction} profile"
                )));
            }
            if !concepts.insert(concept) {
                return Err(TemplateError::InvalidConfig(format!("`{concept}` mapped twice")));
            }
        }
        Ok(TemplateProfileConfig {
            jurisdiction,
            column_map,
        })
    }

    /// Every profile concept, headed by its display name (concept id when
    /// the name is blank), in table order.
    pub fn derived_default(jurisdiction: JurisdictionId, registry: &ConceptRegistry) -> Self {
        let profile = registry.jurisdiction_profile(jurisdiction);
        let column_map = registry
            .concepts()
            .iter()
            .filter(|c| profile.contains(&c.id))
            .map(|c| {
                let header = if c.display_name.is_empty() {
                    c.id.to_string()
                } else {
                    c.display_name.clone()
                };
                (header, c.id.clone())
            })
            .collect();
        TemplateProfileConfig {
            jurisdiction,
            column_map,
        }
    }

    /// The config shipped for `jurisdiction`.
    pub fn shipped(jurisdiction: JurisdictionId, registry: &ConceptRegistry) -> Self {
        let (_, data) = DEFAULT_CONFIGS
            .iter()
            .find(|(j, _)| *j == jurisdiction)
            .expect("every jurisdiction ships a config");
        Self::from_csv(data.as_bytes(), jurisdiction, registry).expect("shipped config is valid")
    }

    pub fn from_csv(
        input: &[u8],
        jurisdiction: JurisdictionId,
        registry: &ConceptRegistry,
    ) -> Result<Self, TemplateError> {
        let mut rdr = csv_reader(input)?;
        let header = rdr.headers().map_err(|e| csv_error(&e))?;
        if header.iter().ne(CONFIG_HEADER) {
            return Err(TemplateError::MalformedCsv {
                line: 1,
                reason: format!("expected header `{}`", CONFIG_HEADER.join(",")),
            });
        }
        let mut column_map = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| csv_error(&e))?;
            let concept = ConceptId::new(&row[1])
                .map_err(|e| TemplateError::InvalidConfig(e.to_string()))?;
            column_map.push((row[0].to_string(), concept));
        }
        Self::new(jurisdiction, column_map, registry)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        w.write_record(CONFIG_HEADER).expect("write to Vec cannot fail");
        for (header, concept) in &self.column_map {
            w.write_record([header.as_str(), concept.as_str()])
                .expect("write to Vec cannot fail");
        }
        w.into_inner().expect("flush to Vec cannot fail")
    }

    pub fn jurisdiction(&self) -> JurisdictionId {
        self.jurisdiction
    }

    pub fn column_map(&self) -> &[(String, ConceptId)] {
        &self.column_map
    }

    pub fn concepts(&self) -> BTreeSet<&ConceptId> {
        self.column_map.iter().map(|(_, c)| c).collect()
    }

    pub fn maps(&self, concept: &ConceptId) -> bool {
        self.column_map.iter().any(|(_, c)| c == concept)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LossReason {
    NotInTargetProfile,
    UnrepresentableValue,
}

impl LossReason {
    pub fn as_str(self) -> &'static str {
        match self {
            LossReason::NotInTargetProfile => "NOT_IN_TARGET_PROFILE",
            LossReason::UnrepresentableValue => "UNREPRESENTABLE_VALUE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LostConcept {
    pub concept: ConceptId,
    pub reason: LossReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConversionLossReport {
    pub record_id: RecordId,
    /// In table order.
    pub lost: Vec<LostConcept>,
    pub retained_count: usize,
    /// Populated concepts the source template does not carry; only set by
    /// [`convert`].
    pub not_in_source: Vec<ConceptId>,
}

impl ConversionLossReport {
    pub fn is_lossless(&self) -> bool {
        self.lost.is_empty()
    }
}

/// Template cells trim list items, so padded or empty values cannot survive.
fn representable(value: &FieldValue) -> bool {
    let lexical = value.lexical();
    !lexical.is_empty() && lexical.trim() == lexical
}

/// Splits `record`'s populated concepts against a target config.
fn project(
    record: &RopaRecord,
    target: &TemplateProfileConfig,
    registry: &ConceptRegistry,
) -> (Vec<ConceptId>, Vec<LostConcept>) {
    let mut kept = Vec::new();
    let mut lost = Vec::new();
    for id in registry.table_order(record.populated()) {
        let values = record.get(id.as_str()).unwrap_or_default();
        if !target.maps(id) {
            lost.push(LostConcept {
                concept: id.clone(),
                reason: LossReason::NotInTargetProfile,
            });
        } else if !values.iter().all(representable) {
            lost.push(LostConcept {
                concept: id.clone(),
                reason: LossReason::UnrepresentableValue,
            });
        } else {
            kept.push(id.clone());
        }
    }
    (kept, lost)
}

fn format_cell(values: &[FieldValue]) -> String {
    values
        .iter()
        .map(|v| escape_cell_value(&v.lexical()))
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes one record in a template's shape: a header row plus one data row.
pub fn export_template(
    record: &RopaRecord,
    config: &TemplateProfileConfig,
    registry: &ConceptRegistry,
) -> (Vec<u8>, ConversionLossReport) {
    let (bytes, mut reports) = export_template_rows(std::slice::from_ref(record), config, registry);
    (bytes, reports.remove(0))
}

/// Writes many records under one header row, one data row each.
pub fn export_template_rows(
    records: &[RopaRecord],
    config: &TemplateProfileConfig,
    registry: &ConceptRegistry,
) -> (Vec<u8>, Vec<ConversionLossReport>) {
    let mut w = csv_writer();
    w.write_record(config.column_map.iter().map(|(h, _)| h.as_str()))
        .expect("write to Vec cannot fail");
    let mut reports = Vec::with_capacity(records.len());
    for record in records {
        let (kept, lost) = project(record, config, registry);
        let row: Vec<String> = config
            .column_map
            .iter()
            .map(|(_, concept)| {
                if kept.contains(concept) {
                    format_cell(record.get(concept.as_str()).unwrap_or_default())
                } else {
                    String::new()
                }
            })
            .collect();
        w.write_record(&row).expect("write to Vec cannot fail");
        reports.push(ConversionLossReport {
            record_id: record.record_id().clone(),
            lost,
            retained_count: kept.len(),
            not_in_source: Vec::new(),
        });
    }
    (w.into_inner().expect("flush to Vec cannot fail"), reports)
}

fn parse_boolean_cell(cell: &str) -> Option<&'static str> {
    match cell.to_ascii_lowercase().as_str() {
        "true" | "yes" | "y" => Some("true"),
        "false" | "no" | "n" => Some("false"),
        _ => None,
    }
}

/// Reads a template-shaped CSV, one processing activity per data row.
pub fn import_template(
    input: &[u8],
    config: &TemplateProfileConfig,
    registry: &ConceptRegistry,
) -> Result<(Vec<RopaRecord>, Vec<String>), TemplateError> {
    let mut rdr = csv_reader(input)?;
    let headers = rdr.headers().map_err(|e| csv_error(&e))?.clone();
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if positions.insert(h, i).is_some() {
            return Err(TemplateError::MalformedCsv {
                line: 1,
                reason: format!("duplicate header `{h}`"),
            });
        }
    }

    let missing: Vec<String> = config
        .column_map
        .iter()
        .filter(|(h, _)| !positions.contains_key(h.as_str()))
        .map(|(h, _)| h.clone())
        .collect();
    if missing.len() * 2 > config.column_map.len() {
        return Err(TemplateError::HeaderMismatch { missing });
    }

    let mut warnings: Vec<String> = missing
        .iter()
        .map(|h| format!("{} template column `{h}` is missing", config.jurisdiction))
        .collect();
    let reserved = [META_RECORD_ID, META_CONTROLLER, META_CREATED];
    for h in headers.iter() {
        if !reserved.contains(&h) && !config.column_map.iter().any(|(m, _)| m == h) {
            warnings.push(format!("column `{h}` is not mapped for {}; ignored", config.jurisdiction));
        }
    }

    let mapped: Vec<(usize, &ConceptId)> = config
        .column_map
        .iter()
        .filter_map(|(h, c)| positions.get(h.as_str()).map(|&i| (i, c)))
        .collect();
    let cell = |row: &csv::StringRecord, name: &str| {
        positions
            .get(name)
            .and_then(|&i| row.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
    };
    let concept_cell = |row: &csv::StringRecord, concept: &str| {
        config
            .column_map
            .iter()
            .find(|(_, c)| c == concept)
            .and_then(|(h, _)| cell(row, h))
            .map(|v| unescape_cell(&v))
    };

    let mut records = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let fallback_id = format!("row-{}", n + 1);
        let record_id = match cell(&row, META_RECORD_ID) {
            Some(id) if RecordId::new(id.as_str()).is_ok() => id,
            Some(id) => {
                warnings.push(format!("line {line}: record id `{id}` is not IRI-safe; using `{fallback_id}`"));
                fallback_id
            }
            None => fallback_id,
        };
        let controller = cell(&row, META_CONTROLLER)
            .or_else(|| concept_cell(&row, "data-controller"))
            .or_else(|| concept_cell(&row, "controller-name-and-contact-details"))
            .unwrap_or_else(|| UNSPECIFIED_CONTROLLER.to_string());
        let created = match cell(&row, META_CREATED) {
            Some(raw) => match DateTime::parse_from_rfc3339(&raw) {
                Ok(d) => d.with_timezone(&Utc),
                Err(_) => {
                    warnings.push(format!("line {line}: created `{raw}` is not RFC 3339; using epoch"));
                    DateTime::UNIX_EPOCH
                }
            },
            None => DateTime::UNIX_EPOCH,
        };
        let mut record = RopaRecord::new(&record_id, &controller, created)
            .expect("record id and controller checked above");

        for &(col, concept) in &mapped {
            let raw = row.get(col).unwrap_or_default().trim();
            if raw.is_empty() {
                continue;
            }
            let descriptor = registry
                .record_concept(concept.as_str())
                .expect("config concepts are validated");
            let schema = &descriptor.value_schema;
            let pieces = match schema.multiplicity() {
                Multiplicity::Many => split_cell(raw),
                Multiplicity::One => vec![unescape_cell(raw)],
            };
            let mut values = Vec::new();
            for piece in pieces {
                let lexical = if schema.kind.scalar() == ScalarKind::Boolean {
                    parse_boolean_cell(&piece).unwrap_or(piece.as_str()).to_string()
                } else {
                    piece
                };
                match FieldValue::parse(schema.kind.scalar(), &lexical) {
                    Ok(v) if values.contains(&v) => warnings.push(format!(
                        "line {line}: `{concept}` repeats value `{lexical}`; duplicate dropped"
                    )),
                    Ok(v) => values.push(v),
                    Err(reason) => warnings.push(format!(
                        "line {line}: `{concept}` value `{lexical}` rejected ({reason}); value dropped"
                    )),
                }
            }
            record.insert_unchecked(concept.clone(), values);
        }
        records.push(record);
    }
    Ok((records, warnings))
}

/// Moves a record from one template shape to another.
///
/// The source is the record as the `from` template carries it; concepts
/// outside `from` are listed in `not_in_source`. Source concepts the target
/// cannot hold are reported in `lost`.
pub fn convert(
    record: &RopaRecord,
    from: &TemplateProfileConfig,
    to: &TemplateProfileConfig,
    registry: &ConceptRegistry,
) -> (RopaRecord, ConversionLossReport) {
    let not_in_source: Vec<ConceptId> = registry
        .table_order(record.populated())
        .into_iter()
        .filter(|id| !from.maps(id))
        .cloned()
        .collect();
    let source = record.restricted_to(|id| from.maps(id));
    let (kept, lost) = project(&source, to, registry);
    let converted = source.restricted_to(|id| kept.contains(id));
    let report = ConversionLossReport {
        record_id: record.record_id().clone(),
        lost,
        retained_count: kept.len(),
        not_in_source,
    };
    (converted, report)
}

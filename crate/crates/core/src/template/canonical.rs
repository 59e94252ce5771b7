use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Utc};

use super::{csv_error, csv_reader, csv_writer, TemplateError};
use crate::model::{FieldValue, Multiplicity, RecordId, RopaRecord};
use crate::registry::ConceptRegistry;

pub const CANONICAL_HEADER: [&str; 5] = ["record_id", "concept_id", "value_index", "value_kind", "value"];
pub const META_CONTROLLER: &str = "_meta:controller_name";
pub const META_CREATED: &str = "_meta:created";
const META_KIND: &str = "TEXT";

struct Cell {
    line: u64,
    kind: String,
    value: String,
}

struct Group {
    record_id: String,
    first_line: u64,
    meta: HashMap<&'static str, Cell>,
    // concept -> value_index -> cell; concepts kept in file order
    concepts: Vec<(String, BTreeMap<usize, Cell>)>,
}

impl Group {
    fn concept_cells(&mut self, concept: &str) -> &mut BTreeMap<usize, Cell> {
        let pos = match self.concepts.iter().position(|(c, _)| c == concept) {
            Some(p) => p,
            None => {
                self.concepts.push((concept.to_string(), BTreeMap::new()));
                self.concepts.len() - 1
            }
        };
        &mut self.concepts[pos].1
    }
}

/// Reads a canonical interchange file.
///
/// Structural problems are errors. Values that do not fit their concept's
/// schema are dropped with a warning naming the line and concept.
pub fn parse_canonical(
    input: &[u8],
    registry: &ConceptRegistry,
) -> Result<(Vec<RopaRecord>, Vec<String>), TemplateError> {
    let mut rdr = csv_reader(input)?;
    let header = rdr.headers().map_err(|e| csv_error(&e))?;
    if header.iter().ne(CANONICAL_HEADER) {
        return Err(TemplateError::MalformedCsv {
            line: 1,
            reason: format!("expected header `{}`", CANONICAL_HEADER.join(",")),
        });
    }

    let mut groups: Vec<Group> = Vec::new();
    let mut group_index: HashMap<String, usize> = HashMap::new();
    let mut seen: HashSet<(String, String, usize)> = HashSet::new();

    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let (record_id, concept_id, index_raw, kind, value) = (&row[0], &row[1], &row[2], &row[3], &row[4]);
        let value_index: usize = index_raw.parse().map_err(|_| TemplateError::MalformedCsv {
            line,
            reason: format!("value_index `{index_raw}` is not a non-negative integer"),
        })?;
        if !seen.insert((record_id.to_string(), concept_id.to_string(), value_index)) {
            return Err(TemplateError::DuplicateCell {
                line,
                record_id: record_id.to_string(),
                concept_id: concept_id.to_string(),
                value_index,
            });
        }
        let gi = *group_index.entry(record_id.to_string()).or_insert_with(|| {
            groups.push(Group {
                record_id: record_id.to_string(),
                first_line: line,
                meta: HashMap::new(),
                concepts: Vec::new(),
            });
            groups.len() - 1
        });
        let group = &mut groups[gi];
        let cell = Cell {
            line,
            kind: kind.to_string(),
            value: value.to_string(),
        };
        let meta_key = match concept_id {
            META_CONTROLLER => Some(META_CONTROLLER),
            META_CREATED => Some(META_CREATED),
            _ => None,
        };
        match meta_key {
            Some(key) => {
                if value_index != 0 {
                    return Err(TemplateError::MalformedCsv {
                        line,
                        reason: format!("metadata `{key}` must use value_index 0"),
                    });
                }
                group.meta.insert(key, cell);
            }
            None => {
                group.concept_cells(concept_id).insert(value_index, cell);
            }
        }
    }

    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(groups.len());
    for group in groups {
        records.push(build_record(group, registry, &mut warnings)?);
    }
    Ok((records, warnings))
}

fn build_record(
    group: Group,
    registry: &ConceptRegistry,
    warnings: &mut Vec<String>,
) -> Result<RopaRecord, TemplateError> {
    let record_id = RecordId::new(group.record_id.as_str()).map_err(|e| TemplateError::MalformedCsv {
        line: group.first_line,
        reason: e.to_string(),
    })?;
    let meta = |key: &str| {
        group.meta.get(key).ok_or_else(|| TemplateError::MissingMetadata {
            record_id: record_id.to_string(),
            field: key.to_string(),
        })
    };
    let controller = meta(META_CONTROLLER)?;
    let created_cell = meta(META_CREATED)?;
    let created: DateTime<Utc> = DateTime::parse_from_rfc3339(&created_cell.value)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| TemplateError::MalformedCsv {
            line: created_cell.line,
            reason: format!("created `{}`: {e}", created_cell.value),
        })?;
    let mut record = RopaRecord::new(record_id.as_str(), &controller.value, created).map_err(|e| {
        TemplateError::MalformedCsv {
            line: controller.line,
            reason: e.to_string(),
        }
    })?;

    for (concept, cells) in group.concepts {
        // value_index must run 0..n without gaps
        if let Some((expected, (_, cell))) = cells.iter().enumerate().find(|(i, (idx, _))| *i != **idx) {
            return Err(TemplateError::MalformedCsv {
                line: cell.line,
                reason: format!("`{concept}` value_index not contiguous: expected {expected}"),
            });
        }
        let descriptor = match registry.record_concept(&concept) {
            Ok(d) => d,
            Err(_) => {
                for cell in cells.values() {
                    warnings.push(format!("line {}: unknown concept `{concept}`; value dropped", cell.line));
                }
                continue;
            }
        };
        let schema = &descriptor.value_schema;
        let mut values: Vec<FieldValue> = Vec::new();
        for cell in cells.values() {
            if cell.kind != schema.kind.as_str() {
                warnings.push(format!(
                    "line {}: `{concept}` expects kind {} but row says `{}`; value dropped",
                    cell.line, schema.kind, cell.kind
                ));
                continue;
            }
            match FieldValue::parse(schema.kind.scalar(), &cell.value) {
                Ok(v) if schema.multiplicity() == Multiplicity::One && !values.is_empty() => {
                    warnings.push(format!(
                        "line {}: `{concept}` holds a single value; extra value `{v}` dropped",
                        cell.line
                    ));
                }
                Ok(v) if values.contains(&v) => warnings.push(format!(
                    "line {}: `{concept}` repeats value `{v}`; duplicate dropped",
                    cell.line
                )),
                Ok(v) => values.push(v),
                Err(reason) => warnings.push(format!(
                    "line {}: `{concept}` value `{}` rejected ({reason}); value dropped",
                    cell.line, cell.value
                )),
            }
        }
        record.insert_unchecked(descriptor.id.clone(), values);
    }
    Ok(record)
}

/// Writes records in canonical form: input record order, concepts in table
/// order, values in index order.
pub fn write_canonical(records: &[RopaRecord], registry: &ConceptRegistry) -> Vec<u8> {
    let mut w = csv_writer();
    let mut write = |row: [&str; 5]| w.write_record(row).expect("write to Vec cannot fail");
    write(CANONICAL_HEADER);
    for record in records {
        let id = record.record_id().as_str();
        write([id, META_CONTROLLER, "0", META_KIND, record.controller_name()]);
        write([id, META_CREATED, "0", META_KIND, &record.created_lexical()]);
        for concept in registry.table_order(record.populated()) {
            let kind = registry
                .record_concept(concept.as_str())
                .map(|d| d.value_schema.kind.as_str())
                .unwrap_or(META_KIND);
            let values = record.get(concept.as_str()).unwrap_or_default();
            for (i, v) in values.iter().enumerate() {
                write([id, concept.as_str(), &i.to_string(), kind, &v.lexical()]);
            }
        }
    }
    w.into_inner().expect("flush to Vec cannot fail")
}

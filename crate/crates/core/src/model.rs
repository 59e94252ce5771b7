//! Typed ROPA records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use regex::Regex;
use serde::Serialize;

use crate::registry::{ConceptDescriptor, ConceptId, ConceptRegistry, RegistryError};

/// Prefix allowing a free-text policy where a duration is expected.
pub const POLICY_TEXT_PREFIX: &str = "policy-text:";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("invalid record id `{0}`: must match [A-Za-z0-9._~-]+")]
    InvalidRecordId(String),
    #[error("controller name must not be empty")]
    EmptyControllerName,
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("`{concept}` expects {expected} values, got {got}")]
    SchemaViolation {
        concept: ConceptId,
        expected: ValueKind,
        got: ScalarKind,
    },
    #[error("`{concept}` holds a single value, got {got}")]
    MultiplicityViolation { concept: ConceptId, got: usize },
    #[error("`{concept}` lists value `{value}` more than once")]
    DuplicateValue { concept: ConceptId, value: String },
    #[error("`{concept}`: invalid {kind} value `{value}`: {reason}")]
    InvalidValue {
        concept: ConceptId,
        kind: ScalarKind,
        value: String,
        reason: String,
    },
}

impl From<RegistryError> for ModelError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownConcept(id) | RegistryError::InvalidConceptId(id) => {
                ModelError::UnknownConcept(id)
            }
            other => ModelError::UnknownConcept(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Multiplicity {
    One,
    Many,
}

/// Schema kind of a concept's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValueKind {
    Text,
    TextList,
    Term,
    TermList,
    Duration,
    CountryList,
    Boolean,
    Uri,
    Date,
}

impl ValueKind {
    pub const ALL: [ValueKind; 9] = [
        ValueKind::Text,
        ValueKind::TextList,
        ValueKind::Term,
        ValueKind::TermList,
        ValueKind::Duration,
        ValueKind::CountryList,
        ValueKind::Boolean,
        ValueKind::Uri,
        ValueKind::Date,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Text => "TEXT",
            ValueKind::TextList => "TEXT_LIST",
            ValueKind::Term => "TERM",
            ValueKind::TermList => "TERM_LIST",
            ValueKind::Duration => "DURATION",
            ValueKind::CountryList => "COUNTRY_LIST",
            ValueKind::Boolean => "BOOLEAN",
            ValueKind::Uri => "URI",
            ValueKind::Date => "DATE",
        }
    }

    pub fn multiplicity(self) -> Multiplicity {
        match self {
            ValueKind::TextList | ValueKind::TermList | ValueKind::CountryList => Multiplicity::Many,
            _ => Multiplicity::One,
        }
    }

    /// Kind of each individual value.
    pub fn scalar(self) -> ScalarKind {
        match self {
            ValueKind::Text | ValueKind::TextList => ScalarKind::Text,
            ValueKind::Term | ValueKind::TermList => ScalarKind::Term,
            ValueKind::Duration => ScalarKind::Duration,
            ValueKind::CountryList => ScalarKind::Country,
            ValueKind::Boolean => ScalarKind::Boolean,
            ValueKind::Uri => ScalarKind::Uri,
            ValueKind::Date => ScalarKind::Date,
        }
    }

    pub fn is_term(self) -> bool {
        self.scalar() == ScalarKind::Term
    }
}

impl FromStr for ValueKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ValueKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown value kind `{s}`"))
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScalarKind {
    Text,
    Term,
    Duration,
    Country,
    Boolean,
    Uri,
    Date,
}

impl ScalarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalarKind::Text => "TEXT",
            ScalarKind::Term => "TERM",
            ScalarKind::Duration => "DURATION",
            ScalarKind::Country => "COUNTRY",
            ScalarKind::Boolean => "BOOLEAN",
            ScalarKind::Uri => "URI",
            ScalarKind::Date => "DATE",
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ValueSchema {
    pub kind: ValueKind,
    /// Controlled vocabulary for TERM kinds.
    pub vocabulary: Option<String>,
}

impl ValueSchema {
    pub fn multiplicity(&self) -> Multiplicity {
        self.kind.multiplicity()
    }

    /// Placeholder schema for the register row, which never holds values.
    pub(crate) fn container() -> Self {
        ValueSchema {
            kind: ValueKind::Text,
            vocabulary: None,
        }
    }
}

/// A single value held by a concept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldValue {
    Text(String),
    Term(String),
    /// ISO-8601 duration, or `policy-text:<text>`.
    Duration(String),
    /// ISO-3166-1 alpha-2 code.
    Country(String),
    Boolean(bool),
    Uri(String),
    /// ISO-8601 calendar date.
    Date(String),
}

impl FieldValue {
    pub fn text(s: impl Into<String>) -> Self {
        FieldValue::Text(s.into())
    }

    pub fn term(s: impl Into<String>) -> Self {
        FieldValue::Term(s.into())
    }

    pub fn duration(s: impl Into<String>) -> Self {
        FieldValue::Duration(s.into())
    }

    pub fn country(s: impl Into<String>) -> Self {
        FieldValue::Country(s.into())
    }

    pub fn uri(s: impl Into<String>) -> Self {
        FieldValue::Uri(s.into())
    }

    pub fn date(s: impl Into<String>) -> Self {
        FieldValue::Date(s.into())
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            FieldValue::Text(_) => ScalarKind::Text,
            FieldValue::Term(_) => ScalarKind::Term,
            FieldValue::Duration(_) => ScalarKind::Duration,
            FieldValue::Country(_) => ScalarKind::Country,
            FieldValue::Boolean(_) => ScalarKind::Boolean,
            FieldValue::Uri(_) => ScalarKind::Uri,
            FieldValue::Date(_) => ScalarKind::Date,
        }
    }

    /// Lexical form used in files.
    pub fn lexical(&self) -> String {
        match self {
            FieldValue::Boolean(b) => b.to_string(),
            FieldValue::Text(s)
            | FieldValue::Term(s)
            | FieldValue::Duration(s)
            | FieldValue::Country(s)
            | FieldValue::Uri(s)
            | FieldValue::Date(s) => s.clone(),
        }
    }

    /// Parses a lexical form as a value of `kind` and checks it.
    pub fn parse(kind: ScalarKind, lexical: &str) -> Result<Self, String> {
        let value = match kind {
            ScalarKind::Text => FieldValue::Text(lexical.to_string()),
            ScalarKind::Term => FieldValue::Term(lexical.to_string()),
            ScalarKind::Duration => FieldValue::Duration(lexical.to_string()),
            ScalarKind::Country => FieldValue::Country(lexical.to_string()),
            ScalarKind::Uri => FieldValue::Uri(lexical.to_string()),
            ScalarKind::Date => FieldValue::Date(lexical.to_string()),
            ScalarKind::Boolean => match lexical {
                "true" => FieldValue::Boolean(true),
                "false" => FieldValue::Boolean(false),
                other => return Err(format!("`{other}` is not true or false")),
            },
        };
        value.check()?;
        Ok(value)
    }

    /// Checks the lexical constraints of the value's own kind.
    pub fn check(&self) -> Result<(), String> {
        match self {
            FieldValue::Text(s) | FieldValue::Term(s) => {
                if s.is_empty() {
                    return Err("empty value".into());
                }
            }
            FieldValue::Duration(s) => {
                if let Some(text) = s.strip_prefix(POLICY_TEXT_PREFIX) {
                    if text.trim().is_empty() {
                        return Err("empty policy text".into());
                    }
                } else if !is_iso8601_duration(s) {
                    return Err("not an ISO-8601 duration".into());
                }
            }
            FieldValue::Country(s) => {
                if !(s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase())) {
                    return Err("country codes are two uppercase letters".into());
                }
            }
            FieldValue::Uri(s) => {
                if !is_absolute_iri(s) {
                    return Err("not an absolute IRI".into());
                }
                if has_reserved_scheme(s) {
                    return Err("scheme collides with an export prefix".into());
                }
            }
            FieldValue::Date(s) => {
                if NaiveDate::parse_from_str(s, "%Y-%m-%d").is_err() {
                    return Err("not an ISO-8601 date (YYYY-MM-DD)".into());
                }
            }
            FieldValue::Boolean(_) => {}
        }
        Ok(())
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical())
    }
}

fn duration_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^P(?:(\d+)Y)?(?:(\d+)M)?(?:(\d+)W)?(?:(\d+)D)?(?:T(?:(\d+)H)?(?:(\d+)M)?(?:(\d+(?:[.,]\d+)?)S)?)?$",
        )
        .expect("duration regex")
    })
}

pub fn is_iso8601_duration(s: &str) -> bool {
    let Some(caps) = duration_regex().captures(s) else {
        return false;
    };
    let has_component = (1..=7).any(|i| caps.get(i).is_some());
    let dangling_t = s.ends_with('T');
    has_component && !dangling_t
}

/// Absolute IRI check, conservative enough for Turtle's IRIREF production.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let scheme_ok = scheme.starts_with(|c: char| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !rest.is_empty()
        && !s.chars().any(|c| {
            c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        })
}

/// Prefixes declared by the RDF exports. An IRI such as `dpv:x` would read
/// as a compact IRI in JSON-LD, so these schemes are not accepted.
pub const RESERVED_SCHEMES: [&str; 4] = ["dpv", "ropaex", "rdf", "xsd"];

pub fn has_reserved_scheme(iri: &str) -> bool {
    iri.split_once(':')
        .is_some_and(|(scheme, _)| RESERVED_SCHEMES.contains(&scheme))
}

/// IRI-safe record identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct RecordId(String);

impl RecordId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        let ok = !id.is_empty()
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'~' | b'-'));
        if ok {
            Ok(RecordId(id))
        } else {
            Err(ModelError::InvalidRecordId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One processing activity.
///
/// Records are values: every update returns a new record and leaves the
/// original untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RopaRecord {
    record_id: RecordId,
    controller_name: String,
    created: DateTime<Utc>,
    fields: BTreeMap<ConceptId, Vec<FieldValue>>,
}

impl RopaRecord {
    pub fn new(
        record_id: &str,
        controller_name: &str,
        created: DateTime<Utc>,
    ) -> Result<Self, ModelError> {
        let record_id = RecordId::new(record_id)?;
        if controller_name.trim().is_empty() {
            return Err(ModelError::EmptyControllerName);
        }
        Ok(RopaRecord {
            record_id,
            controller_name: controller_name.to_string(),
            created,
            fields: BTreeMap::new(),
        })
    }

    pub fn record_id(&self) -> &RecordId {
        &self.record_id
    }

    pub fn controller_name(&self) -> &str {
        &self.controller_name
    }

    pub fn created(&self) -> DateTime<Utc> {
        self.created
    }

    /// RFC 3339 form of `created`, as written to files.
    pub fn created_lexical(&self) -> String {
        self.created.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }

    pub fn get(&self, id: &str) -> Option<&[FieldValue]> {
        ConceptId::new(id)
            .ok()
            .and_then(|k| self.fields.get(&k))
            .map(Vec::as_slice)
    }

    pub fn is_populated(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    /// Populated concepts, keyed by id (not table order).
    pub fn fields(&self) -> &BTreeMap<ConceptId, Vec<FieldValue>> {
        &self.fields
    }

    pub fn populated(&self) -> impl Iterator<Item = &ConceptId> {
        self.fields.keys()
    }

    pub fn populated_count(&self) -> usize {
        self.fields.len()
    }

    /// Returns a copy with `id` set to `values`; an empty list clears it.
    pub fn with_field(
        &self,
        registry: &ConceptRegistry,
        id: &str,
        values: Vec<FieldValue>,
    ) -> Result<RopaRecord, ModelError> {
        let descriptor = registry.record_concept(id)?;
        check_values(descriptor, &values)?;
        let mut next = self.clone();
        if values.is_empty() {
            next.fields.remove(&descriptor.id);
        } else {
            next.fields.insert(descriptor.id.clone(), values);
        }
        Ok(next)
    }

    /// Copy keeping only the concepts accepted by `keep`.
    pub fn restricted_to(&self, mut keep: impl FnMut(&ConceptId) -> bool) -> RopaRecord {
        let mut next = self.clone();
        next.fields.retain(|k, _| keep(k));
        next
    }

    /// Inserts values without schema checks, for loaders that have already
    /// checked them value by value.
    pub(crate) fn insert_unchecked(&mut self, id: ConceptId, values: Vec<FieldValue>) {
        if values.is_empty() {
            self.fields.remove(&id);
        } else {
            self.fields.insert(id, values);
        }
    }
}

/// Checks a value list against a concept's schema.
pub fn check_values(descriptor: &ConceptDescriptor, values: &[FieldValue]) -> Result<(), ModelError> {
    let schema = &descriptor.value_schema;
    if schema.multiplicity() == Multiplicity::One && values.len() > 1 {
        return Err(ModelError::MultiplicityViolation {
            concept: descriptor.id.clone(),
            got: values.len(),
        });
    }
    for (i, v) in values.iter().enumerate() {
        check_value(descriptor, v)?;
        if values[..i].contains(v) {
            return Err(ModelError::DuplicateValue {
                concept: descriptor.id.clone(),
                value: v.lexical(),
            });
        }
    }
    Ok(())
}

pub fn check_value(descriptor: &ConceptDescriptor, value: &FieldValue) -> Result<(), ModelError> {
    let kind = descriptor.value_schema.kind;
    if value.kind() != kind.scalar() {
        return Err(ModelError::SchemaViolation {
            concept: descriptor.id.clone(),
            expected: kind,
            got: value.kind(),
        });
    }
    value.check().map_err(|reason| ModelError::InvalidValue {
        concept: descriptor.id.clone(),
        kind: value.kind(),
        value: value.lexical(),
        reason,
    })
}

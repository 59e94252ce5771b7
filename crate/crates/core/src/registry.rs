//! Embedded registry of the 43 ROPA concepts harvested from six regulator
//! templates, together with their DPV alignment and jurisdiction presence.
//!
//! The dataset is a CSV transcription kept under `data/` so it can be
//! audited line by line. It is compiled into the binary and checked against
//! an embedded SHA-256 manifest on load.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{ValueKind, ValueSchema};

const TABLE_CSV: &str = include_str!("../data/table1.csv");
const SCHEMA_CSV: &str = include_str!("../data/value_schemas.csv");
const VOCABULARY_CSV: &str = include_str!("../data/vocabularies.csv");
const CHECKSUMS: &str = include_str!("../data/SHA256SUMS");

pub const TABLE_HEADER: [&str; 10] = [
    "concept_id",
    "display_name",
    "gdpr_article",
    "mandatory",
    "dpv_terms",
    "mapping_outcome",
    "coverage_template",
    "coverage_dpv",
    "jurisdictions",
    "note",
];

/// Id of the row describing the register itself.
pub const CONTAINER_ID: &str = "register-of-processing-activities";

/// Number of concept rows, container excluded.
pub const CONCEPT_COUNT: usize = 43;

/// Outcome totals stated in prose alongside the table (exact, partial,
/// complex, none).
pub const STATED_OUTCOMES: OutcomeCounts = OutcomeCounts {
    exact: 14,
    partial: 15,
    complex: 3,
    none: 11,
    total: 43,
};

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("embedded dataset corrupt: {0}")]
    EmbeddedDataCorrupt(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("invalid concept id `{0}`: expected [a-z0-9-]+")]
    InvalidConceptId(String),
    #[error("unknown jurisdiction `{0}`: expected one of BE, CY, DK, FI, LU, UK")]
    UnknownJurisdiction(String),
}

fn corrupt(msg: impl Into<String>) -> RegistryError {
    RegistryError::EmbeddedDataCorrupt(msg.into())
}

/// Lowercase hyphenated slug naming a concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self, RegistryError> {
        let id = id.into();
        let valid = !id.is_empty()
            && id
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-');
        if valid {
            Ok(ConceptId(id))
        } else {
            Err(RegistryError::InvalidConceptId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `purposes-of-processing` -> `purposesOfProcessing`.
    pub fn camel_case(&self) -> String {
        let mut out = String::with_capacity(self.0.len());
        let mut upper = false;
        for c in self.0.chars() {
            if c == '-' {
                upper = true;
            } else if upper {
                out.push(c.to_ascii_uppercase());
                upper = false;
            } else {
                out.push(c);
            }
        }
        out
    }
}

impl TryFrom<String> for ConceptId {
    type Error = RegistryError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        ConceptId::new(value)
    }
}

impl From<ConceptId> for String {
    fn from(id: ConceptId) -> String {
        id.0
    }
}

impl FromStr for ConceptId {
    type Err = RegistryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConceptId::new(s)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for ConceptId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ConceptId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// GDPR article reference exactly as printed (`"30.1(b)"`, `"44-47"`, `"-"`,
/// or empty where the cell is blank).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ArticleRef(String);

impl ArticleRef {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArticleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MappingOutcome {
    Exact,
    Partial,
    /// Printed "Complex, Partial"; a complex correspondence.
    Complex,
    None,
}

impl MappingOutcome {
    pub const ALL: [MappingOutcome; 4] = [
        MappingOutcome::Exact,
        MappingOutcome::Partial,
        MappingOutcome::Complex,
        MappingOutcome::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MappingOutcome::Exact => "EXACT",
            MappingOutcome::Partial => "PARTIAL",
            MappingOutcome::Complex => "COMPLEX",
            MappingOutcome::None => "NONE",
        }
    }
}

impl FromStr for MappingOutcome {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MappingOutcome::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown mapping outcome `{s}`"))
    }
}

impl fmt::Display for MappingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DpvPrefix {
    #[serde(rename = "dpv")]
    Dpv,
    #[serde(rename = "ropaex")]
    Ropaex,
}

impl DpvPrefix {
    pub fn as_str(self) -> &'static str {
        match self {
            DpvPrefix::Dpv => "dpv",
            DpvPrefix::Ropaex => "ropaex",
        }
    }
}

/// A `prefix:LocalName` term from DPV or the extension namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DpvTerm {
    prefix: DpvPrefix,
    local: String,
}

impl DpvTerm {
    pub fn parse(qname: &str) -> Result<Self, String> {
        let (prefix, local) = qname
            .split_once(':')
            .ok_or_else(|| format!("`{qname}` is not a prefixed name"))?;
        let prefix = match prefix {
            "dpv" => DpvPrefix::Dpv,
            "ropaex" => DpvPrefix::Ropaex,
            other => return Err(format!("unsupported prefix `{other}` in `{qname}`")),
        };
        let valid_local = !local.is_empty()
            && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid_local {
            return Err(format!("bad local name in `{qname}`"));
        }
        Ok(DpvTerm {
            prefix,
            local: local.to_string(),
        })
    }

    pub fn prefix(&self) -> DpvPrefix {
        self.prefix
    }

    pub fn local_name(&self) -> &str {
        &self.local
    }

    pub fn qname(&self) -> String {
        format!("{}:{}", self.prefix.as_str(), self.local)
    }
}

impl fmt::Display for DpvTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix.as_str(), self.local)
    }
}

impl Serialize for DpvTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Number of field values the templates specify vs. the number DPV offers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CoveragePair {
    pub template_values: u32,
    pub dpv_values: u32,
}

impl CoveragePair {
    pub fn is_sufficient(&self) -> bool {
        self.dpv_values >= self.template_values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JurisdictionId {
    BE,
    CY,
    DK,
    FI,
    LU,
    UK,
}

impl JurisdictionId {
    pub const ALL: [JurisdictionId; 6] = [
        JurisdictionId::BE,
        JurisdictionId::CY,
        JurisdictionId::DK,
        JurisdictionId::FI,
        JurisdictionId::LU,
        JurisdictionId::UK,
    ];

    pub fn code(self) -> &'static str {
        match self {
            JurisdictionId::BE => "BE",
            JurisdictionId::CY => "CY",
            JurisdictionId::DK => "DK",
            JurisdictionId::FI => "FI",
            JurisdictionId::LU => "LU",
            JurisdictionId::UK => "UK",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JurisdictionId::BE => "Belgium",
            JurisdictionId::CY => "Cyprus",
            JurisdictionId::DK => "Denmark",
            JurisdictionId::FI => "Finland",
            JurisdictionId::LU => "Luxembourg",
            JurisdictionId::UK => "UK",
        }
    }

    /// Field count printed in the template column header.
    pub fn declared_field_count(self) -> u32 {
        match self {
            JurisdictionId::BE => 34,
            JurisdictionId::CY => 12,
            JurisdictionId::DK => 12,
            JurisdictionId::FI => 13,
            JurisdictionId::LU => 14,
            JurisdictionId::UK => 33,
        }
    }
}

impl FromStr for JurisdictionId {
    type Err = RegistryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JurisdictionId::ALL
            .into_iter()
            .find(|j| j.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| RegistryError::UnknownJurisdiction(s.to_string()))
    }
}

impl fmt::Display for JurisdictionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One row of the mapping table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptDescriptor {
    pub id: ConceptId,
    pub display_name: String,
    pub article: ArticleRef,
    pub mandatory: bool,
    pub dpv_terms: Vec<DpvTerm>,
    pub outcome: MappingOutcome,
    pub coverage: Option<CoveragePair>,
    pub jurisdictions: BTreeSet<JurisdictionId>,
    pub value_schema: ValueSchema,
    pub note: Option<String>,
    /// Row position in the table, container = 0.
    pub position: usize,
}

impl ConceptDescriptor {
    pub fn is_container(&self) -> bool {
        self.id.as_str() == CONTAINER_ID
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JurisdictionProfile {
    pub jurisdiction: JurisdictionId,
    pub declared_field_count: u32,
    pub concepts: BTreeSet<ConceptId>,
}

impl JurisdictionProfile {
    pub fn contains(&self, id: &ConceptId) -> bool {
        self.concepts.contains(id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub exact: u32,
    pub partial: u32,
    pub complex: u32,
    pub none: u32,
    pub total: u32,
}

impl OutcomeCounts {
    pub fn get(&self, outcome: MappingOutcome) -> u32 {
        match outcome {
            MappingOutcome::Exact => self.exact,
            MappingOutcome::Partial => self.partial,
            MappingOutcome::Complex => self.complex,
            MappingOutcome::None => self.none,
        }
    }
}

/// Encoded count minus stated count, per class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeDelta {
    pub exact: i64,
    pub partial: i64,
    pub complex: i64,
    pub none: i64,
}

impl OutcomeDelta {
    pub fn is_zero(&self) -> bool {
        *self == OutcomeDelta::default()
    }

    pub fn net(&self) -> i64 {
        self.exact + self.partial + self.complex + self.none
    }

    pub fn max_abs(&self) -> i64 {
        [self.exact, self.partial, self.complex, self.none]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingSummary {
    pub counts: OutcomeCounts,
    pub stated: OutcomeCounts,
    pub delta: OutcomeDelta,
    pub matches_stated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEntry {
    pub concept: ConceptId,
    pub coverage: CoveragePair,
    pub sufficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MandatoryGap {
    pub jurisdiction: JurisdictionId,
    pub missing: Vec<ConceptId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCountDelta {
    pub jurisdiction: JurisdictionId,
    pub declared: u32,
    pub marked: u32,
    pub delta: i64,
}

/// Internal consistency findings for the embedded table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub outcome_delta: OutcomeDelta,
    pub mandatory_gaps: Vec<MandatoryGap>,
    pub field_count_deltas: Vec<FieldCountDelta>,
}

impl SelfCheckReport {
    pub fn field_count_delta(&self, j: JurisdictionId) -> i64 {
        self.field_count_deltas
            .iter()
            .find(|d| d.jurisdiction == j)
            .map(|d| d.delta)
            .unwrap_or(0)
    }

    pub fn gaps_for(&self, j: JurisdictionId) -> &[ConceptId] {
        self.mandatory_gaps
            .iter()
            .find(|g| g.jurisdiction == j)
            .map(|g| g.missing.as_slice())
            .unwrap_or(&[])
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let d = &self.outcome_delta;
        out.push_str("outcome delta vs stated totals (encoded - stated):\n");
        out.push_str(&format!(
            "  exact {:+}  partial {:+}  complex {:+}  none {:+}\n",
            d.exact, d.partial, d.complex, d.none
        ));
        out.push_str("mandatory concepts missing per jurisdiction:\n");
        for gap in &self.mandatory_gaps {
            if gap.missing.is_empty() {
                out.push_str(&format!("  {}: none\n", gap.jurisdiction));
            } else {
                let ids: Vec<&str> = gap.missing.iter().map(ConceptId::as_str).collect();
                out.push_str(&format!("  {}: {}\n", gap.jurisdiction, ids.join(", ")));
            }
        }
        out.push_str("declared field count vs marked concepts:\n");
        for fc in &self.field_count_deltas {
            out.push_str(&format!(
                "  {}: declared {} marked {} delta {:+}\n",
                fc.jurisdiction, fc.declared, fc.marked, fc.delta
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub name: String,
    /// Closed vocabularies flag unknown terms; open ones accept anything.
    pub closed: bool,
    pub terms: BTreeSet<String>,
}

impl Vocabulary {
    pub fn knows(&self, term: &str) -> bool {
        !self.closed || self.terms.contains(term)
    }
}

/// Immutable view over the embedded mapping table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptRegistry {
    container: ConceptDescriptor,
    concepts: Vec<ConceptDescriptor>,
    by_id: HashMap<ConceptId, usize>,
    by_article: BTreeMap<String, Vec<usize>>,
    profiles: Vec<JurisdictionProfile>,
    vocabularies: BTreeMap<String, Vocabulary>,
}

/// Parses and checks the embedded dataset.
pub fn load_registry() -> Result<ConceptRegistry, RegistryError> {
    verify_checksums(&[
        ("table1.csv", TABLE_CSV),
        ("value_schemas.csv", SCHEMA_CSV),
        ("vocabularies.csv", VOCABULARY_CSV),
    ])?;
    let schemas = parse_schemas(SCHEMA_CSV)?;
    let vocabularies = parse_vocabularies(VOCABULARY_CSV)?;
    ConceptRegistry::from_parts(TABLE_CSV, schemas, vocabularies)
}

/// Process-wide registry, loaded once.
///
/// Panics if the embedded data is corrupt, which is a packaging defect.
pub fn registry() -> &'static ConceptRegistry {
    static REGISTRY: OnceLock<ConceptRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| load_registry().expect("embedded registry"))
}

fn sha256_hex(data: &str) -> String {
    Sha256::digest(data.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn verify_checksums(files: &[(&str, &str)]) -> Result<(), RegistryError> {
    let manifest: HashMap<&str, &str> = CHECKSUMS
        .lines()
        .filter_map(|line| {
            let (hash, name) = line.split_once(char::is_whitespace)?;
            Some((name.trim_start_matches([' ', '*']), hash))
        })
        .collect();
    for (name, data) in files {
        let expected = manifest
            .get(name)
            .ok_or_else(|| corrupt(format!("no checksum for {name}")))?;
        let actual = sha256_hex(data);
        if actual != *expected {
            return Err(corrupt(format!(
                "{name}: checksum {actual} does not match {expected}"
            )));
        }
    }
    Ok(())
}

fn reader(data: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(data.as_bytes())
}

fn split_list(cell: &str) -> impl Iterator<Item = &str> {
    cell.split(';').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_schemas(data: &str) -> Result<HashMap<String, ValueSchema>, RegistryError> {
    let mut rdr = reader(data);
    let mut out = HashMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| corrupt(format!("value_schemas.csv: {e}")))?;
        let id = row.get(0).unwrap_or_default().to_string();
        let kind: ValueKind = row
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e| corrupt(format!("value_schemas.csv row {}: {e}", i + 2)))?;
        let vocabulary = row.get(2).filter(|v| !v.is_empty()).map(str::to_string);
        if kind.is_term() != vocabulary.is_some() {
            return Err(corrupt(format!(
                "value_schemas.csv row {}: term kinds need a vocabulary and only they may have one",
                i + 2
            )));
        }
        if out.insert(id.clone(), ValueSchema { kind, vocabulary }).is_some() {
            return Err(corrupt(format!("value_schemas.csv: duplicate `{id}`")));
        }
    }
    Ok(out)
}

fn parse_vocabularies(data: &str) -> Result<BTreeMap<String, Vocabulary>, RegistryError> {
    let mut rdr = reader(data);
    let mut out: BTreeMap<String, Vocabulary> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| corrupt(format!("vocabularies.csv: {e}")))?;
        let name = row.get(0).unwrap_or_default();
        let closed = parse_flag(row.get(1).unwrap_or_default())
            .map_err(|e| corrupt(format!("vocabularies.csv: {e}")))?;
        let vocab = out.entry(name.to_string()).or_insert_with(|| Vocabulary {
            name: name.to_string(),
            closed,
            terms: BTreeSet::new(),
        });
        if vocab.closed != closed {
            return Err(corrupt(format!("vocabularies.csv: `{name}` mixes closed flags")));
        }
        if let Some(term) = row.get(2).filter(|t| !t.is_empty()) {
            vocab.terms.insert(term.to_string());
        }
    }
    Ok(out)
}

fn parse_flag(cell: &str) -> Result<bool, String> {
    match cell {
        "Y" => Ok(true),
        "N" => Ok(false),
        other => Err(format!("expected Y or N, got `{other}`")),
    }
}

fn parse_count(cell: &str) -> Result<Option<u32>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|_| format!("bad coverage count `{cell}`"))
}

impl ConceptRegistry {
    fn from_parts(
        table: &str,
        mut schemas: HashMap<String, ValueSchema>,
        vocabularies: BTreeMap<String, Vocabulary>,
    ) -> Result<Self, RegistryError> {
        let mut rdr = reader(table);
        let header = rdr
            .headers()
            .map_err(|e| corrupt(format!("table1.csv: {e}")))?
            .clone();
        if header.iter().ne(TABLE_HEADER) {
            return Err(corrupt("table1.csv: unexpected header"));
        }

        let mut rows = Vec::new();
        for (position, row) in rdr.records().enumerate() {
            let line = position + 2;
            let row = row.map_err(|e| corrupt(format!("table1.csv: {e}")))?;
            let ctx = |e: String| corrupt(format!("table1.csv line {line}: {e}"));
            let id = ConceptId::new(&row[0]).map_err(|e| ctx(e.to_string()))?;
            let dpv_terms = split_list(&row[4])
                .map(DpvTerm::parse)
                .collect::<Result<Vec<_>, _>>()
                .map_err(ctx)?;
            let outcome: MappingOutcome = row[5].parse().map_err(ctx)?;
            let coverage = match (parse_count(&row[6]).map_err(ctx)?, parse_count(&row[7]).map_err(ctx)?) {
                (Some(t), Some(d)) => Some(CoveragePair {
                    template_values: t,
                    dpv_values: d,
                }),
                (None, None) => None,
                _ => return Err(ctx("coverage pair half empty".into())),
            };
            let jurisdictions = split_list(&row[8])
                .map(|c| c.parse::<JurisdictionId>().map_err(|e| ctx(e.to_string())))
                .collect::<Result<BTreeSet<_>, _>>()?;
            let value_schema = if id.as_str() == CONTAINER_ID {
                ValueSchema::container()
            } else {
                schemas
                    .remove(id.as_str())
                    .ok_or_else(|| ctx(format!("no value schema for `{id}`")))?
            };
            if outcome != MappingOutcome::None && dpv_terms.is_empty() {
                return Err(ctx(format!("`{id}` is mapped but lists no DPV term")));
            }
            rows.push(ConceptDescriptor {
                id,
                display_name: row[1].to_string(),
                article: ArticleRef(row[2].to_string()),
                mandatory: parse_flag(&row[3]).map_err(ctx)?,
                dpv_terms,
                outcome,
                coverage,
                jurisdictions,
                value_schema,
                note: Some(row[9].to_string()).filter(|n| !n.is_empty()),
                position,
            });
        }
        if let Some(extra) = schemas.keys().next() {
            return Err(corrupt(format!("value schema for unknown concept `{extra}`")));
        }
        for row in &rows {
            if let Some(v) = &row.value_schema.vocabulary {
                if !vocabularies.contains_key(v) {
                    return Err(corrupt(format!("`{}` names unknown vocabulary `{v}`", row.id)));
                }
            }
        }

        if rows.first().map(|r| r.id.as_str()) != Some(CONTAINER_ID) {
            return Err(corrupt("first row must be the register container"));
        }
        let container = rows.remove(0);
        let concepts = rows;
        if concepts.len() != CONCEPT_COUNT {
            return Err(corrupt(format!(
                "expected {CONCEPT_COUNT} concept rows, found {}",
                concepts.len()
            )));
        }

        let mut by_id = HashMap::new();
        let mut by_article: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, c) in concepts.iter().enumerate() {
            if by_id.insert(c.id.clone(), i).is_some() || c.id == container.id {
                return Err(corrupt(format!("duplicate concept id `{}`", c.id)));
            }
            by_article
                .entry(c.article.as_str().to_string())
                .or_default()
                .push(i);
        }

        let profiles = JurisdictionId::ALL
            .into_iter()
            .map(|j| JurisdictionProfile {
                jurisdiction: j,
                declared_field_count: j.declared_field_count(),
                concepts: concepts
                    .iter()
                    .filter(|c| c.jurisdictions.contains(&j))
                    .map(|c| c.id.clone())
                    .collect(),
            })
            .collect();

        Ok(ConceptRegistry {
            container,
            concepts,
            by_id,
            by_article,
            profiles,
            vocabularies,
        })
    }

    /// The 43 concept rows in table order, container excluded.
    pub fn concepts(&self) -> &[ConceptDescriptor] {
        &self.concepts
    }

    pub fn container(&self) -> &ConceptDescriptor {
        &self.container
    }

    /// Looks up a concept row; the container row is also addressable.
    pub fn concept(&self, id: &str) -> Result<&ConceptDescriptor, RegistryError> {
        if id == CONTAINER_ID {
            return Ok(&self.container);
        }
        self.record_concept(id)
    }

    /// Like [`concept`](Self::concept) but only for rows a record may hold.
    pub fn record_concept(&self, id: &str) -> Result<&ConceptDescriptor, RegistryError> {
        self.index_of(id)
            .map(|i| &self.concepts[i])
            .ok_or_else(|| RegistryError::UnknownConcept(id.to_string()))
    }

    /// Table position among the 43 concepts.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        // HashMap<ConceptId, _> cannot be probed by &str without a borrow impl
        // that would bypass slug validation, so build the key.
        ConceptId::new(id).ok().and_then(|k| self.by_id.get(&k).copied())
    }

    pub fn by_article(&self, article: &str) -> Vec<&ConceptDescriptor> {
        self.by_article
            .get(article)
            .map(|idx| idx.iter().map(|&i| &self.concepts[i]).collect())
            .unwrap_or_default()
    }

    pub fn mandatory_concepts(&self) -> Vec<ConceptId> {
        self.concepts
            .iter()
            .filter(|c| c.mandatory)
            .map(|c| c.id.clone())
            .collect()
    }

    pub fn mapping_summary(&self) -> MappingSummary {
        let mut counts = OutcomeCounts::default();
        for c in &self.concepts {
            match c.outcome {
                MappingOutcome::Exact => counts.exact += 1,
                MappingOutcome::Partial => counts.partial += 1,
                MappingOutcome::Complex => counts.complex += 1,
                MappingOutcome::None => counts.none += 1,
            }
            counts.total += 1;
        }
        let stated = STATED_OUTCOMES;
        let diff = |o| i64::from(counts.get(o)) - i64::from(stated.get(o));
        let delta = OutcomeDelta {
            exact: diff(MappingOutcome::Exact),
            partial: diff(MappingOutcome::Partial),
            complex: diff(MappingOutcome::Complex),
            none: diff(MappingOutcome::None),
        };
        MappingSummary {
            counts,
            stated,
            delta,
            matches_stated: delta.is_zero(),
        }
    }

    pub fn coverage_stats(&self) -> Vec<CoverageEntry> {
        self.concepts
            .iter()
            .filter_map(|c| {
                c.coverage.map(|coverage| CoverageEntry {
                    concept: c.id.clone(),
                    coverage,
                    sufficient: coverage.is_sufficient(),
                })
            })
            .collect()
    }

    pub fn jurisdiction_profile(&self, j: JurisdictionId) -> &JurisdictionProfile {
        &self.profiles[j as usize]
    }

    pub fn profiles(&self) -> &[JurisdictionProfile] {
        &self.profiles
    }

    pub fn vocabulary(&self, name: &str) -> Option<&Vocabulary> {
        self.vocabularies.get(name)
    }

    pub fn vocabularies(&self) -> impl Iterator<Item = &Vocabulary> {
        self.vocabularies.values()
    }

    pub fn self_check(&self) -> SelfCheckReport {
        let mandatory = self.mandatory_concepts();
        let mandatory_gaps = self
            .profiles
            .iter()
            .map(|p| MandatoryGap {
                jurisdiction: p.jurisdiction,
                missing: mandatory
                    .iter()
                    .filter(|id| !p.concepts.contains(*id))
                    .cloned()
                    .collect(),
            })
            .collect();
        let field_count_deltas = self
            .profiles
            .iter()
            .map(|p| FieldCountDelta {
                jurisdiction: p.jurisdiction,
                declared: p.declared_field_count,
                marked: p.concepts.len() as u32,
                delta: p.concepts.len() as i64 - i64::from(p.declared_field_count),
            })
            .collect();
        SelfCheckReport {
            outcome_delta: self.mapping_summary().delta,
            mandatory_gaps,
            field_count_deltas,
        }
    }

    /// Sorts concept ids into table order; unknown ids go last, by name.
    pub fn table_order<'a>(&self, ids: impl IntoIterator<Item = &'a ConceptId>) -> Vec<&'a ConceptId> {
        let mut v: Vec<&ConceptId> = ids.into_iter().collect();
        v.sort_by_key(|id| (self.index_of(id.as_str()).unwrap_or(usize::MAX), id.as_str().to_string()));
        v
    }
}

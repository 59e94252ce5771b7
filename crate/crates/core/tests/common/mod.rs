//! Shared test support: oracles computed straight from the embedded CSV
//! (never through the registry loader) and proptest generators.
#![allow(dead_code)]

pub mod rdf_oracle;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::subsequence;

use ropa_core::model::ScalarKind;
use ropa_core::{registry, ConceptRegistry, FieldValue, JurisdictionId, RopaRecord};

pub const TABLE_CSV: &str = include_str!("../../data/table1.csv");
pub const CONTAINER: &str = "register-of-processing-activities";

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub id: String,
    pub mandatory: bool,
    pub outcome: String,
    pub coverage: Option<(u32, u32)>,
    pub jurisdictions: BTreeSet<String>,
}

/// Every row of the embedded table, container included, in file order.
pub fn oracle_rows() -> Vec<OracleRow> {
    let mut rdr = csv::Reader::from_reader(TABLE_CSV.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (id, m, out, ct, cd, j) = (
        col("concept_id"),
        col("mandatory"),
        col("mapping_outcome"),
        col("coverage_template"),
        col("coverage_dpv"),
        col("jurisdictions"),
    );
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let coverage = match (r[ct].trim(), r[cd].trim()) {
                ("", "") => None,
                (a, b) => Some((a.parse().unwrap(), b.parse().unwrap())),
            };
            OracleRow {
                id: r[id].to_string(),
                mandatory: r[m].trim() == "Y",
                outcome: r[out].trim().to_string(),
                coverage,
                jurisdictions: r[j].split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            }
        })
        .collect()
}

/// Record-level rows: everything except the container.
pub fn oracle_concepts() -> Vec<OracleRow> {
    oracle_rows().into_iter().filter(|r| r.id != CONTAINER).collect()
}

pub fn oracle_mandatory() -> BTreeSet<String> {
    oracle_concepts().into_iter().filter(|r| r.mandatory).map(|r| r.id).collect()
}

pub fn oracle_profile(j: JurisdictionId) -> BTreeSet<String> {
    oracle_concepts()
        .into_iter()
        .filter(|r| r.jurisdictions.contains(j.code()))
        .map(|r| r.id)
        .collect()
}

pub fn oracle_outcome_counts() -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for r in oracle_concepts() {
        *counts.entry(r.outcome).or_insert(0) += 1;
    }
    counts
}

/// A valid value for `kind`, indexed so callers can make distinct values.
pub fn sample_value(kind: ScalarKind, i: usize) -> FieldValue {
    match kind {
        ScalarKind::Text => FieldValue::text(format!("value {i}")),
        ScalarKind::Term => FieldValue::term(format!("term-{i}")),
        ScalarKind::Duration => FieldValue::duration(format!("P{}Y", i + 1)),
        ScalarKind::Country => FieldValue::country(["US", "CH", "IN", "BR"][i % 4]),
        ScalarKind::Boolean => FieldValue::Boolean(i.is_multiple_of(2)),
        ScalarKind::Uri => FieldValue::uri(format!("https://example.com/doc/{i}")),
        ScalarKind::Date => FieldValue::date("2024-01-31"),
    }
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap()
}

/// A record populating exactly `concepts` with one sample value each.
pub fn record_with(id: &str, concepts: &BTreeSet<String>) -> RopaRecord {
    let reg = registry();
    let mut r = RopaRecord::new(id, "Acme GmbH", t0()).unwrap();
    for c in concepts {
        let kind = reg.concept(c).unwrap().value_schema.kind.scalar();
        r = r.with_field(reg, c, vec![sample_value(kind, 0)]).unwrap();
    }
    r
}

/// The two records behind the golden Turtle and JSON-LD files.
pub fn sample_records() -> Vec<RopaRecord> {
    let reg = registry();
    let a = record_with("pa-001", &oracle_mandatory())
        .with_field(reg, "legal-basis-for-processing", vec![FieldValue::term("consent"), FieldValue::term("contract")])
        .unwrap()
        .with_field(reg, "retention-deletion-periods", vec![FieldValue::duration("P6Y")])
        .unwrap()
        .with_field(reg, "data-protection-impact-assessment", vec![FieldValue::Boolean(true)])
        .unwrap()
        .with_field(reg, "privacy-notice", vec![FieldValue::uri("https://acme.example/privacy")])
        .unwrap()
        .with_field(reg, "data-combination", vec![FieldValue::Boolean(false)])
        .unwrap()
        .with_field(reg, "location-of-personal-data", vec![FieldValue::country("IE")])
        .unwrap()
        .with_field(reg, "controller-name-and-contact-details", vec![FieldValue::text("Acme \"Labs\"\nDublin")])
        .unwrap();
    let b = RopaRecord::new("pa-002", "Beta Ltd", t0())
        .unwrap()
        .with_field(reg, "purposes-of-processing", vec![FieldValue::term("direct marketing")])
        .unwrap()
        .with_field(reg, "retention-and-erasure-policy", vec![FieldValue::duration("policy-text:until consent is withdrawn")])
        .unwrap();
    vec![a, b]
}

// ---- generators ----

fn arb_text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[A-Za-z0-9][A-Za-z0-9 .,@/-]{0,14}",
        1 => "[ -~]{1,12}",
        1 => "[a-z;\\\\\"',\n\r\t éü€]{1,10}",
    ]
}

fn arb_term() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[a-z][a-z-]{0,12}",
        1 => "[a-zé /%#;]{1,8}",
    ]
}

fn arb_scalar(kind: ScalarKind, vocab_terms: Vec<String>) -> BoxedStrategy<FieldValue> {
    match kind {
        ScalarKind::Text => arb_text().prop_map(FieldValue::Text).boxed(),
        ScalarKind::Term if !vocab_terms.is_empty() => prop_oneof![
            4 => proptest::sample::select(vocab_terms).prop_map(FieldValue::Term),
            1 => arb_term().prop_map(FieldValue::Term),
        ]
        .boxed(),
        ScalarKind::Term => arb_term().prop_map(FieldValue::Term).boxed(),
        ScalarKind::Duration => prop_oneof![
            3 => (0u32..50, 0u32..12, 0u32..30).prop_map(|(y, m, d)| {
                let mut s = String::from("P");
                if y > 0 || (m == 0 && d == 0) { s += &format!("{y}Y"); }
                if m > 0 { s += &format!("{m}M"); }
                if d > 0 { s += &format!("{d}D"); }
                FieldValue::Duration(s)
            }),
            1 => "[A-Za-z][A-Za-z ]{0,20}".prop_map(|t| FieldValue::Duration(format!("policy-text:{t}"))),
        ]
        .boxed(),
        ScalarKind::Country => "[A-Z]{2}".prop_map(FieldValue::Country).boxed(),
        ScalarKind::Boolean => any::<bool>().prop_map(FieldValue::Boolean).boxed(),
        ScalarKind::Uri => "(https://example\\.(com|org)/[a-z0-9/]{0,10}|urn:x-[a-z]{1,6}:[a-z0-9]{1,6})"
            .prop_map(FieldValue::Uri)
            .boxed(),
        ScalarKind::Date => (2000i32..2030, 1u32..13, 1u32..29)
            .prop_map(|(y, m, d)| FieldValue::Date(format!("{y:04}-{m:02}-{d:02}")))
            .boxed(),
    }
}

/// Values for one concept: distinct, non-empty, within its multiplicity.
fn arb_values(reg: &'static ConceptRegistry, concept: &str) -> BoxedStrategy<Vec<FieldValue>> {
    let d = reg.concept(concept).unwrap();
    let schema = &d.value_schema;
    let terms: Vec<String> = schema
        .vocabulary
        .as_deref()
        .and_then(|v| reg.vocabulary(v))
        .map(|v| v.terms.iter().cloned().collect())
        .unwrap_or_default();
    let max = match schema.multiplicity() {
        ropa_core::model::Multiplicity::One => 1,
        ropa_core::model::Multiplicity::Many => 4,
    };
    vec(arb_scalar(schema.kind.scalar(), terms), 1..=max)
        .prop_map(|mut vs| {
            let mut seen = Vec::new();
            vs.retain(|v| {
                let fresh = !seen.contains(v);
                if fresh {
                    seen.push(v.clone());
                }
                fresh
            });
            vs
        })
        .boxed()
}

pub fn arb_record_id() -> impl Strategy<Value = String> {
    "[A-Za-z0-9._~-]{1,10}"
}

pub fn arb_created() -> impl Strategy<Value = DateTime<Utc>> {
    (0i64..4_000_000_000, prop_oneof![3 => Just(0u32), 1 => 0u32..1_000_000_000])
        .prop_map(|(s, ns)| Utc.timestamp_opt(s, ns).unwrap())
}

/// Records over an arbitrary subset of concepts.
pub fn arb_record_with_id(id: BoxedStrategy<String>) -> impl Strategy<Value = RopaRecord> {
    let reg = registry();
    let ids: Vec<String> = reg.concepts().iter().map(|c| c.id.as_str().to_string()).collect();
    let n = ids.len();
    (id, "[A-Za-z][A-Za-z0-9 &.,-]{0,15}", arb_created(), subsequence(ids, 0..=n)).prop_flat_map(
        move |(id, controller, created, concepts)| {
            let fields: Vec<_> = concepts
                .iter()
                .map(|c| (Just(c.clone()), arb_values(reg, c)))
                .collect();
            (Just(id), Just(controller), Just(created), fields).prop_map(|(id, controller, created, fields)| {
                let mut r = RopaRecord::new(&id, &controller, created).unwrap();
                for (c, values) in fields {
                    r = r.with_field(reg, &c, values).unwrap();
                }
                r
            })
        },
    )
}

pub fn arb_record() -> impl Strategy<Value = RopaRecord> {
    arb_record_with_id(arb_record_id().boxed())
}

/// Several records with distinct ids.
pub fn arb_records(max: usize) -> impl Strategy<Value = Vec<RopaRecord>> {
    vec(arb_record(), 0..=max).prop_map(|rs| {
        let mut seen = BTreeSet::new();
        rs.into_iter()
            .filter(|r| seen.insert(r.record_id().as_str().to_string()))
            .collect()
    })
}

pub fn arb_jurisdiction() -> impl Strategy<Value = JurisdictionId> {
    proptest::sample::select(JurisdictionId::ALL.to_vec())
}

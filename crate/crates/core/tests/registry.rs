mod common;

use std::collections::BTreeSet;

use common::*;
use ropa_core::registry::{OutcomeCounts, CONCEPT_COUNT};
use ropa_core::{load_registry, registry, JurisdictionId, MappingOutcome};

#[test]
fn cardinality_matches_csv_rows() {
    let reg = load_registry().unwrap();
    let rows = oracle_rows();
    assert_eq!(rows.len(), 44);
    assert_eq!(rows[0].id, CONTAINER);
    assert_eq!(reg.concepts().len(), 43);
    assert_eq!(CONCEPT_COUNT, 43);
    assert_eq!(reg.container().id.as_str(), CONTAINER);
    let ids: Vec<&str> = reg.concepts().iter().map(|c| c.id.as_str()).collect();
    let oracle: Vec<String> = oracle_concepts().into_iter().map(|r| r.id).collect();
    assert_eq!(ids, oracle);
}

#[test]
fn outcome_counts_golden() {
    let summary = registry().mapping_summary();
    let oracle = oracle_outcome_counts();
    assert_eq!(summary.counts.exact, oracle["EXACT"]);
    assert_eq!(summary.counts.partial, oracle["PARTIAL"]);
    assert_eq!(summary.counts.complex, oracle["COMPLEX"]);
    assert_eq!(summary.counts.none, oracle["NONE"]);
    // frozen encoded counts
    assert_eq!(
        summary.counts,
        OutcomeCounts { exact: 15, partial: 15, complex: 3, none: 10, total: 43 }
    );
    assert_eq!(
        summary.stated,
        OutcomeCounts { exact: 14, partial: 15, complex: 3, none: 11, total: 43 }
    );
    assert!(!summary.matches_stated);
    assert_eq!(summary.delta.exact, 1);
    assert_eq!(summary.delta.none, -1);
    assert_eq!(summary.delta.net(), 0);
    assert!(summary.delta.max_abs() <= 1);
}

#[test]
fn self_check_surfaces_outcome_delta() {
    let check = registry().self_check();
    assert!(!check.outcome_delta.is_zero());
    let text = check.render_text();
    assert!(text.contains("exact +1"), "{text}");
    assert!(text.contains("none -1"), "{text}");
}

#[test]
fn coverage_pairs_in_table_order() {
    let stats = registry().coverage_stats();
    let pairs: Vec<(u32, u32)> = stats
        .iter()
        .map(|e| (e.coverage.template_values, e.coverage.dpv_values))
        .collect();
    assert_eq!(pairs, vec![(65, 33), (6, 6), (9, 33), (80, 163), (8, 8), (0, 5), (12, 3)]);
    let oracle: Vec<(u32, u32)> = oracle_concepts().iter().filter_map(|r| r.coverage).collect();
    assert_eq!(pairs, oracle);
    assert!(!stats[0].sufficient);
    let insufficient: Vec<&str> = stats.iter().filter(|e| !e.sufficient).map(|e| e.concept.as_str()).collect();
    assert_eq!(
        insufficient,
        ["purposes-of-processing", "categories-of-recipients-of-transfer-data"]
    );
}

#[test]
fn declared_field_counts() {
    let counts: Vec<u32> = JurisdictionId::ALL.iter().map(|j| j.declared_field_count()).collect();
    assert_eq!(counts, [34, 12, 12, 13, 14, 33]);
}

#[test]
fn profiles_match_jurisdiction_column() {
    let reg = registry();
    for j in JurisdictionId::ALL {
        let got: BTreeSet<String> = reg
            .jurisdiction_profile(j)
            .concepts
            .iter()
            .map(|c| c.as_str().to_string())
            .collect();
        assert_eq!(got, oracle_profile(j), "{j}");
        assert_eq!(reg.jurisdiction_profile(j).declared_field_count, j.declared_field_count());
    }
    let sizes: Vec<usize> = JurisdictionId::ALL.iter().map(|j| oracle_profile(*j).len()).collect();
    assert_eq!(sizes, [31, 18, 16, 14, 14, 27]);
}

#[test]
fn field_count_deltas_reported() {
    let check = registry().self_check();
    let deltas: Vec<i64> = JurisdictionId::ALL.iter().map(|j| check.field_count_delta(*j)).collect();
    assert_eq!(deltas, [-3, 6, 4, 1, 0, -6]);
}

#[test]
fn mandatory_set_golden() {
    let reg = registry();
    let got: BTreeSet<String> = reg.mandatory_concepts().iter().map(|c| c.as_str().to_string()).collect();
    assert_eq!(got, oracle_mandatory());
    assert_eq!(got.len(), 13);
}

#[test]
fn mandatory_gaps_by_brute_force() {
    let reg = registry();
    let check = reg.self_check();
    let mandatory = oracle_mandatory();
    for j in JurisdictionId::ALL {
        let profile = oracle_profile(j);
        let expected: BTreeSet<String> = mandatory.difference(&profile).cloned().collect();
        let got: BTreeSet<String> = check.gaps_for(j).iter().map(|c| c.as_str().to_string()).collect();
        assert_eq!(got, expected, "{j}");
    }
}

#[test]
fn lookups() {
    let reg = registry();
    let purpose = reg.concept("purposes-of-processing").unwrap();
    assert_eq!(purpose.outcome, MappingOutcome::Exact);
    assert!(purpose.mandatory);
    assert_eq!(purpose.dpv_terms[0].qname(), "dpv:Purpose");
    assert!(reg.concept("no-such-concept").is_err());
    assert!(reg.concept("Bad Id").is_err());
    assert!(reg.record_concept(CONTAINER).is_err());
    assert!(reg.concept(CONTAINER).is_ok());
    for d in reg.concepts() {
        assert_eq!(reg.concept(d.id.as_str()).unwrap(), d);
    }
    assert!("uk".parse::<JurisdictionId>().is_ok());
    assert!("XX".parse::<JurisdictionId>().is_err());
}

#[test]
fn every_outcome_has_terms_unless_none() {
    for d in registry().concepts() {
        if d.outcome == MappingOutcome::None {
            continue;
        }
        assert!(!d.dpv_terms.is_empty(), "{}", d.id);
    }
}

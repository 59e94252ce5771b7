mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use ropa_core::template::{
    convert, export_template, import_template, parse_canonical, write_canonical, LossReason, TemplateProfileConfig,
};
use ropa_core::validate::{validate_against_profile, validate_article30, FindingCode, Severity};
use ropa_core::{registry, ConceptId, RopaRecord};

fn populated(r: &RopaRecord) -> BTreeSet<ConceptId> {
    r.populated().cloned().collect()
}

fn config(j: ropa_core::JurisdictionId) -> TemplateProfileConfig {
    TemplateProfileConfig::shipped(j, registry())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_parse_write_identity(records in arb_records(3)) {
        let reg = registry();
        let bytes = write_canonical(&records, reg);
        let (parsed, warnings) = parse_canonical(&bytes, reg).unwrap();
        prop_assert!(warnings.is_empty(), "{warnings:?}");
        prop_assert_eq!(&parsed, &records);
        prop_assert_eq!(write_canonical(&parsed, reg), bytes);
    }

    #[test]
    fn convert_never_invents(record in arb_record(), a in arb_jurisdiction(), b in arb_jurisdiction()) {
        let reg = registry();
        let (out, _) = convert(&record, &config(a), &config(b), reg);
        for id in out.populated() {
            prop_assert_eq!(out.get(id.as_str()), record.get(id.as_str()));
        }
        prop_assert!(populated(&out).is_subset(&populated(&record)));
        prop_assert_eq!(out.record_id(), record.record_id());
    }

    #[test]
    fn lost_and_retained_partition_source(record in arb_record(), a in arb_jurisdiction(), b in arb_jurisdiction()) {
        let reg = registry();
        let (from, to) = (config(a), config(b));
        let (out, report) = convert(&record, &from, &to, reg);
        let source: BTreeSet<ConceptId> = record.populated().filter(|c| from.maps(c)).cloned().collect();
        let lost: BTreeSet<ConceptId> = report.lost.iter().map(|l| l.concept.clone()).collect();
        let kept = populated(&out);
        prop_assert!(lost.is_disjoint(&kept));
        prop_assert_eq!(lost.union(&kept).cloned().collect::<BTreeSet<_>>(), source.clone());
        prop_assert_eq!(report.retained_count, kept.len());
        prop_assert_eq!(report.lost.len(), lost.len());
        let outside: BTreeSet<ConceptId> = record.populated().filter(|c| !from.maps(c)).cloned().collect();
        prop_assert_eq!(report.not_in_source.iter().cloned().collect::<BTreeSet<_>>(), outside);
        for l in &report.lost {
            match l.reason {
                LossReason::NotInTargetProfile => prop_assert!(!to.maps(&l.concept)),
                LossReason::UnrepresentableValue => prop_assert!(to.maps(&l.concept)),
            }
        }
    }

    #[test]
    fn conversion_is_idempotent(record in arb_record(), a in arb_jurisdiction(), b in arb_jurisdiction()) {
        let reg = registry();
        let (from, to) = (config(a), config(b));
        let (once, _) = convert(&record, &from, &to, reg);
        let (twice, report) = convert(&once, &from, &to, reg);
        prop_assert_eq!(&twice, &once);
        prop_assert!(report.lost.is_empty());
        prop_assert!(report.not_in_source.is_empty());
        let (same, report) = convert(&once, &to, &to, reg);
        prop_assert_eq!(&same, &once);
        prop_assert!(report.is_lossless());
    }

    #[test]
    fn template_round_trip_keeps_retained_values(record in arb_record(), j in arb_jurisdiction()) {
        let reg = registry();
        let cfg = config(j);
        let (bytes, report) = export_template(&record, &cfg, reg);
        let (imported, warnings) = import_template(&bytes, &cfg, reg).unwrap();
        prop_assert!(warnings.is_empty(), "{warnings:?}");
        prop_assert_eq!(imported.len(), 1);
        let lost: BTreeSet<ConceptId> = report.lost.iter().map(|l| l.concept.clone()).collect();
        let expected = record.restricted_to(|c| cfg.maps(c) && !lost.contains(c));
        prop_assert_eq!(imported[0].fields(), expected.fields());
    }

    #[test]
    fn validation_is_monotone_under_field_addition(
        base in arb_record(),
        extra in arb_record(),
        j in arb_jurisdiction(),
    ) {
        let reg = registry();
        let mut grown = base.clone();
        for id in extra.populated() {
            if !grown.is_populated(id.as_str()) {
                grown = grown.with_field(reg, id.as_str(), extra.get(id.as_str()).unwrap().to_vec()).unwrap();
            }
        }
        let profile = reg.jurisdiction_profile(j);
        for (before, after) in [
            (validate_article30(&base, reg), validate_article30(&grown, reg)),
            (validate_against_profile(&base, profile, reg), validate_against_profile(&grown, profile, reg)),
        ] {
            prop_assert!(after.errors() <= before.errors());
            prop_assert!(after.findings.len() <= before.findings.len());
            for f in &after.findings {
                prop_assert!(before.findings.contains(f));
            }
        }
    }

    #[test]
    fn article30_findings_are_the_missing_mandatory_set(record in arb_record()) {
        let reg = registry();
        let report = validate_article30(&record, reg);
        let expected: BTreeSet<String> = oracle_mandatory()
            .into_iter()
            .filter(|c| !record.is_populated(c))
            .collect();
        let got: BTreeSet<String> = report.findings.iter().map(|f| f.concept.as_str().to_string()).collect();
        prop_assert_eq!(&got, &expected);
        prop_assert_eq!(report.findings.len(), expected.len());
        prop_assert!(report.findings.iter().all(|f| f.code == FindingCode::MissingMandatory && f.severity == Severity::Error));
        prop_assert_eq!(report.compliant, expected.is_empty());
    }
}

#[test]
fn empty_record_has_one_error_per_mandatory_row() {
    let reg = registry();
    let r = record_with("pa-empty", &BTreeSet::new());
    let report = validate_article30(&r, reg);
    assert_eq!(report.errors(), oracle_mandatory().len());
    assert_eq!(report.errors(), 13);
    assert!(!report.compliant);
}

#[test]
fn fully_mandatory_record_has_no_findings() {
    let reg = registry();
    let r = record_with("pa-full", &oracle_mandatory());
    let report = validate_article30(&r, reg);
    assert!(report.findings.is_empty(), "{:?}", report.findings);
    assert!(report.compliant);
}

#[test]
fn profile_validation_by_set_arithmetic() {
    let reg = registry();
    let mandatory = oracle_mandatory();
    for j in ropa_core::JurisdictionId::ALL {
        let profile = reg.jurisdiction_profile(j);
        let covering: BTreeSet<String> = oracle_profile(j).union(&mandatory).cloned().collect();
        let full = validate_against_profile(&record_with("pa-1", &covering), profile, reg);
        assert!(full.findings.is_empty(), "{j}: {:?}", full.findings);

        let empty = validate_against_profile(&record_with("pa-2", &BTreeSet::new()), profile, reg);
        assert_eq!(empty.errors(), mandatory.len(), "{j}");
        assert_eq!(empty.warnings(), oracle_profile(j).difference(&mandatory).count(), "{j}");
    }
}

#[test]
fn gap_matrix_ready_everywhere_for_full_record() {
    let all: BTreeSet<String> = oracle_concepts().into_iter().map(|r| r.id).collect();
    let matrix = ropa_core::gap_matrix(&record_with("pa-1", &all), registry());
    assert_eq!(matrix.len(), 6);
    assert!(matrix.values().all(|r| r.ready && r.errors == 0 && r.warnings == 0));
}

use std::collections::HashMap;

use super::{Namespaces, Node, Triple, TripleGraph, DPV_NS, RDF_TYPE, XSD_NS};
use crate::model::{has_reserved_scheme, is_absolute_iri, FieldValue, RopaRecord, POLICY_TEXT_PREFIX};
use crate::registry::{ConceptDescriptor, ConceptRegistry, DpvPrefix, DpvTerm, MappingOutcome};

/// DPV terms naming a processing operation rather than a class of thing.
const PROCESSING_VERBS: [&str; 2] = ["Combine", "Transfer"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportOptions {
    /// Records are named `{base}/record/{record_id}`.
    pub base: String,
    pub namespaces: Namespaces,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            base: super::DEFAULT_BASE.to_string(),
            namespaces: Namespaces::default(),
        }
    }
}

impl ExportOptions {
    pub fn new(base: &str, ropaex: &str) -> Result<Self, super::GraphError> {
        Node::iri(base)?;
        if has_reserved_scheme(base) {
            return Err(super::GraphError::InvalidNamespace(base.to_string()));
        }
        if !is_absolute_iri(ropaex) || has_reserved_scheme(ropaex) || !ropaex.ends_with(['#', '/']) {
            return Err(super::GraphError::InvalidNamespace(ropaex.to_string()));
        }
        Ok(ExportOptions {
            base: base.trim_end_matches('/').to_string(),
            namespaces: Namespaces {
                ropaex: ropaex.to_string(),
            },
        })
    }

    fn ropaex(&self, local: &str) -> Node {
        Node::Iri(format!("{}{local}", self.namespaces.ropaex))
    }

    fn term_iri(&self, term: &DpvTerm) -> Node {
        match term.prefix() {
            DpvPrefix::Dpv => Node::Iri(format!("{DPV_NS}{}", term.local_name())),
            DpvPrefix::Ropaex => self.ropaex(term.local_name()),
        }
    }
}

fn xsd(local: &str) -> String {
    format!("{XSD_NS}{local}")
}

/// How a concept's values attach to the record node.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Predicate {
    /// `dpv:has{Class}` derived from the first DPV term.
    Dpv(String),
    /// `ropaex:{camelId}`.
    Extension,
}

fn is_class_term(term: &DpvTerm) -> bool {
    term.local_name().starts_with(|c: char| c.is_ascii_uppercase())
        && !PROCESSING_VERBS.contains(&term.local_name())
}

fn outcome_rank(o: MappingOutcome) -> u8 {
    match o {
        MappingOutcome::Exact => 0,
        MappingOutcome::Partial => 1,
        MappingOutcome::Complex => 2,
        MappingOutcome::None => 3,
    }
}

/// Assigns each concept its data predicate.
///
/// A derived `dpv:hasX` predicate belongs to one concept only: the best
/// outcome, then earliest row, among concepts whose first term is `dpv:X`.
/// The others use their extension predicate so values from distinct concepts
/// never collapse into the same triple.
fn predicate_table(registry: &ConceptRegistry) -> Vec<Predicate> {
    let mut owner: HashMap<String, (u8, usize)> = HashMap::new();
    for (i, c) in registry.concepts().iter().enumerate() {
        if c.outcome == MappingOutcome::None {
            continue;
        }
        if let Some(first) = c.dpv_terms.first().filter(|t| is_class_term(t) && t.prefix() == DpvPrefix::Dpv) {
            let key = (outcome_rank(c.outcome), i);
            owner
                .entry(first.local_name().to_string())
                .and_modify(|cur| *cur = (*cur).min(key))
                .or_insert(key);
        }
    }
    registry
        .concepts()
        .iter()
        .enumerate()
        .map(|(i, c)| match c.dpv_terms.first() {
            Some(first)
                if c.outcome != MappingOutcome::None
                    && owner.get(first.local_name()).map(|&(_, idx)| idx) == Some(i) =>
            {
                Predicate::Dpv(format!("has{}", first.local_name()))
            }
            _ => Predicate::Extension,
        })
        .collect()
}

/// The predicate IRI carrying `concept`'s values.
pub fn data_predicate(concept: &ConceptDescriptor, registry: &ConceptRegistry, options: &ExportOptions) -> String {
    predicate_iri(&predicate_table(registry), concept, registry, options)
}

fn predicate_iri(
    table: &[Predicate],
    concept: &ConceptDescriptor,
    registry: &ConceptRegistry,
    options: &ExportOptions,
) -> String {
    let idx = registry
        .index_of(concept.id.as_str())
        .expect("record concepts are registry rows");
    match &table[idx] {
        Predicate::Dpv(local) => format!("{DPV_NS}{local}"),
        Predicate::Extension => format!("{}{}", options.namespaces.ropaex, concept.id.camel_case()),
    }
}

fn pct_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn pascal_case(camel: &str) -> String {
    let mut chars = camel.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn value_node(value: &FieldValue, concept: &ConceptDescriptor, options: &ExportOptions) -> Node {
    let typed = |lex: &str, dt: &str| Node::typed(lex, xsd(dt)).expect("xsd datatype IRI");
    match value {
        FieldValue::Text(s) | FieldValue::Country(s) => Node::plain(s.clone()),
        FieldValue::Term(term) => {
            let vocab = concept.value_schema.vocabulary.as_deref().unwrap_or("term");
            Node::Iri(format!(
                "{}vocab/{}/{}",
                options.namespaces.ropaex,
                pct_encode(vocab),
                pct_encode(term)
            ))
        }
        FieldValue::Duration(d) => match d.strip_prefix(POLICY_TEXT_PREFIX) {
            Some(policy) => Node::plain(policy.to_string()),
            None => typed(d, "duration"),
        },
        FieldValue::Boolean(b) => typed(&b.to_string(), "boolean"),
        FieldValue::Uri(u) => Node::Iri(u.clone()),
        FieldValue::Date(d) => typed(d, "date"),
    }
}

/// Number of blank nodes `to_graph` allocates for `record`.
fn blank_count(record: &RopaRecord) -> usize {
    record.populated_count()
}

/// Builds the graph for one record, labelling blank nodes `c0, c1, ...`.
pub fn to_graph(record: &RopaRecord, registry: &ConceptRegistry, options: &ExportOptions) -> TripleGraph {
    let mut graph = TripleGraph::new(options.namespaces.clone());
    for t in record_triples(record, registry, options, 0) {
        graph.insert(t);
    }
    graph
}

/// Merges several records into one graph; blank node labels continue
/// across records in input order.
pub fn records_to_graph(
    records: &[RopaRecord],
    registry: &ConceptRegistry,
    options: &ExportOptions,
    execution: crate::batch::Execution,
) -> TripleGraph {
    let mut offsets = Vec::with_capacity(records.len());
    let mut next = 0;
    for r in records {
        offsets.push(next);
        next += blank_count(r);
    }
    let jobs: Vec<(&RopaRecord, usize)> = records.iter().zip(offsets).collect();
    let parts = execution.map(&jobs, |(record, offset)| record_triples(record, registry, options, *offset));
    let mut graph = TripleGraph::new(options.namespaces.clone());
    for t in parts.into_iter().flatten() {
        graph.insert(t);
    }
    graph
}

fn record_triples(
    record: &RopaRecord,
    registry: &ConceptRegistry,
    options: &ExportOptions,
    blank_offset: usize,
) -> Vec<Triple> {
    let mut out = Vec::new();
    let mut push = |s: &Node, p: Node, o: Node| {
        out.push(Triple::new(s.clone(), p, o).expect("builder emits well-formed triples"));
    };
    let table = predicate_table(registry);
    let root = Node::Iri(format!("{}/record/{}", options.base, record.record_id()));
    let rdf_type = || Node::Iri(RDF_TYPE.to_string());

    push(&root, rdf_type(), Node::Iri(format!("{DPV_NS}PersonalDataHandling")));
    push(&root, options.ropaex("recordId"), Node::plain(record.record_id().as_str()));
    push(&root, options.ropaex("controllerName"), Node::plain(record.controller_name()));
    push(
        &root,
        options.ropaex("created"),
        Node::typed(record.created_lexical(), xsd("dateTime")).expect("xsd datatype IRI"),
    );

    for (n, id) in registry.table_order(record.populated()).into_iter().enumerate() {
        let Ok(concept) = registry.record_concept(id.as_str()) else {
            continue;
        };
        let predicate = Node::Iri(predicate_iri(&table, concept, registry, options));
        for value in record.get(id.as_str()).unwrap_or_default() {
            push(&root, predicate.clone(), value_node(value, concept, options));
        }

        let usage = Node::Blank(format!("c{}", blank_offset + n));
        push(&root, options.ropaex("hasConceptUsage"), usage.clone());
        push(&usage, rdf_type(), options.ropaex("ConceptUsage"));
        push(
            &usage,
            options.ropaex("concept"),
            options.ropaex(&pascal_case(&concept.id.camel_case())),
        );
        push(&usage, options.ropaex("mappingOutcome"), Node::plain(concept.outcome.as_str()));
        if concept.outcome != MappingOutcome::None {
            let mut terms = concept.dpv_terms.iter();
            if let Some(first) = terms.next() {
                push(&usage, options.ropaex("mapsTo"), options.term_iri(first));
                if !is_class_term(first) {
                    push(&usage, options.ropaex("usesProcessing"), options.term_iri(first));
                }
            }
            for other in terms {
                push(&usage, options.ropaex("alsoMapsTo"), options.term_iri(other));
            }
        }
    }
    out
}

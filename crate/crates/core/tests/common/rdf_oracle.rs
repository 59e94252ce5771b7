//! Compares our graphs with what independent Turtle and JSON-LD parsers
//! read back from the serializations.

use std::collections::{BTreeMap, BTreeSet};

use ropa_core::rdf::{Node, TripleGraph, XSD_NS};

/// Parser-neutral term: (kind, value, datatype-or-language).
pub type Term = (u8, String, String);
pub type Tri = (Term, Term, Term);

pub fn ours(node: &Node) -> Term {
    match node {
        Node::Iri(i) => (0, i.clone(), String::new()),
        Node::Blank(b) => (1, b.clone(), String::new()),
        Node::Literal(l) => match (&l.language, &l.datatype) {
            (Some(lang), _) => (2, l.lexical.clone(), format!("@{lang}")),
            (None, Some(dt)) => (2, l.lexical.clone(), dt.clone()),
            (None, None) => (2, l.lexical.clone(), format!("{XSD_NS}string")),
        },
    }
}

pub fn theirs(term: oxrdf::Term) -> Term {
    match term {
        oxrdf::Term::NamedNode(n) => (0, n.as_str().to_string(), String::new()),
        oxrdf::Term::BlankNode(b) => (1, b.as_str().to_string(), String::new()),
        oxrdf::Term::Literal(l) => match l.language() {
            Some(lang) => (2, l.value().to_string(), format!("@{lang}")),
            None => (2, l.value().to_string(), l.datatype().as_str().to_string()),
        },
        #[allow(unreachable_patterns)]
        other => panic!("unexpected term {other}"),
    }
}

fn subject(s: oxrdf::NamedOrBlankNode) -> Term {
    match s {
        oxrdf::NamedOrBlankNode::NamedNode(n) => theirs(n.into()),
        oxrdf::NamedOrBlankNode::BlankNode(b) => theirs(b.into()),
    }
}

/// Renames every blank node after the (record, concept) pair it describes,
/// which is unique per graph, so parsers are free to relabel.
pub fn canonical(triples: Vec<Tri>, ropaex: &str) -> BTreeSet<Tri> {
    let has_usage = format!("{ropaex}hasConceptUsage");
    let concept = format!("{ropaex}concept");
    let mut owner = BTreeMap::new();
    let mut of_concept = BTreeMap::new();
    for (s, p, o) in &triples {
        if p.1 == has_usage && o.0 == 1 {
            owner.insert(o.1.clone(), s.1.clone());
        }
        if p.1 == concept && s.0 == 1 {
            of_concept.insert(s.1.clone(), o.1.clone());
        }
    }
    let rename = |t: Term| -> Term {
        if t.0 == 1 {
            let key = format!("{}|{}", owner[&t.1], of_concept[&t.1]);
            (1, key, String::new())
        } else {
            t
        }
    };
    triples
        .into_iter()
        .map(|(s, p, o)| (rename(s), p, rename(o)))
        .collect()
}

pub fn graph_triples(g: &TripleGraph) -> Vec<Tri> {
    g.triples()
        .map(|t| (ours(&t.subject), ours(&t.predicate), ours(&t.object)))
        .collect()
}

pub fn parse_turtle(text: &str) -> Vec<Tri> {
    oxttl::TurtleParser::new()
        .for_slice(text.as_bytes())
        .map(|t| {
            let t = t.expect("turtle parses");
            (subject(t.subject), theirs(t.predicate.into()), theirs(t.object))
        })
        .collect()
}

pub fn parse_jsonld(text: &str) -> Vec<Tri> {
    oxjsonld::JsonLdParser::new()
        .for_slice(text.as_bytes())
        .map(|q| {
            let q = q.expect("json-ld parses");
            assert!(q.graph_name.is_default_graph());
            (subject(q.subject), theirs(q.predicate.into()), theirs(q.object))
        })
        .collect()
}

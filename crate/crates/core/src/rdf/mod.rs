//! RDF export: records become triple graphs using DPV terms where the
//! mapping table provides one and the `ropaex:` extension namespace where it
//! does not.

mod build;
mod jsonld;
mod turtle;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

pub use build::{data_predicate, records_to_graph, to_graph, ExportOptions};
pub use jsonld::serialize_jsonld;
pub use turtle::serialize_turtle;

use crate::model::is_absolute_iri;

pub const DPV_NS: &str = "https://w3id.org/dpv#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const DEFAULT_ROPAEX_NS: &str = "https://example.org/ropaex#";
pub const DEFAULT_BASE: &str = "https://example.org/ropa";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("`{0}` is not an absolute IRI")]
    InvalidIri(String),
    #[error("`{0}` must be an absolute IRI ending in `#` or `/` with no reserved scheme")]
    InvalidNamespace(String),
    #[error("`{0}` is not a valid blank node label")]
    InvalidBlankLabel(String),
    #[error("literal cannot carry both a datatype and a language")]
    DatatypeAndLanguage,
    #[error("subject must be an IRI or blank node")]
    LiteralSubject,
    #[error("predicate must be an IRI")]
    NonIriPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Iri(String),
    /// Label without the `_:` prefix.
    Blank(String),
    Literal(Literal),
}

impl Node {
    pub fn iri(iri: impl Into<String>) -> Result<Node, GraphError> {
        let iri = iri.into();
        if is_absolute_iri(&iri) {
            Ok(Node::Iri(iri))
        } else {
            Err(GraphError::InvalidIri(iri))
        }
    }

    pub fn blank(label: impl Into<String>) -> Result<Node, GraphError> {
        let label = label.into();
        if !label.is_empty() && label.bytes().all(|b| b.is_ascii_alphanumeric()) {
            Ok(Node::Blank(label))
        } else {
            Err(GraphError::InvalidBlankLabel(label))
        }
    }

    pub fn plain(lexical: impl Into<String>) -> Node {
        Node::Literal(Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        })
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Node, GraphError> {
        let datatype = datatype.into();
        if !is_absolute_iri(&datatype) {
            return Err(GraphError::InvalidIri(datatype));
        }
        Ok(Node::Literal(Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            language: None,
        }))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Node::Literal(_))
    }

    /// Canonical N-Triples form, used for ordering.
    pub fn to_ntriples(&self) -> String {
        match self {
            Node::Iri(iri) => format!("<{iri}>"),
            Node::Blank(label) => format!("_:{label}"),
            Node::Literal(lit) => {
                let mut out = format!("\"{}\"", escape_literal(&lit.lexical));
                if let Some(lang) = &lit.language {
                    out.push('@');
                    out.push_str(lang);
                } else if let Some(dt) = &lit.datatype {
                    out.push_str("^^<");
                    out.push_str(dt);
                    out.push('>');
                }
                out
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Node,
    pub predicate: Node,
    pub object: Node,
}

impl Triple {
    pub fn new(subject: Node, predicate: Node, object: Node) -> Result<Triple, GraphError> {
        if subject.is_literal() {
            return Err(GraphError::LiteralSubject);
        }
        if !matches!(predicate, Node::Iri(_)) {
            return Err(GraphError::NonIriPredicate);
        }
        if let Node::Literal(lit) = &object {
            if lit.datatype.is_some() && lit.language.is_some() {
                return Err(GraphError::DatatypeAndLanguage);
            }
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    fn sort_key(&self) -> (String, String, String) {
        (
            self.subject.to_ntriples(),
            self.predicate.to_ntriples(),
            self.object.to_ntriples(),
        )
    }

    pub fn to_ntriples(&self) -> String {
        let (s, p, o) = self.sort_key();
        format!("{s} {p} {o} .")
    }
}

/// The four fixed prefixes; only `ropaex` is configurable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Namespaces {
    pub ropaex: String,
}

impl Default for Namespaces {
    fn default() -> Self {
        Namespaces {
            ropaex: DEFAULT_ROPAEX_NS.to_string(),
        }
    }
}

impl Namespaces {
    /// Prefix table in serialization order.
    pub fn table(&self) -> [(&'static str, &str); 4] {
        [
            ("dpv", DPV_NS),
            ("ropaex", self.ropaex.as_str()),
            ("rdf", RDF_NS),
            ("xsd", XSD_NS),
        ]
    }

    /// `prefix:local` if the IRI falls under a known namespace with a plain
    /// local name.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.table()
            .into_iter()
            .filter_map(|(prefix, ns)| iri.strip_prefix(ns).map(|local| (prefix, ns.len(), local)))
            .filter(|(_, _, local)| is_plain_local(local))
            .max_by_key(|(_, len, _)| *len)
            .map(|(prefix, _, local)| format!("{prefix}:{local}"))
    }
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleGraph {
    triples: BTreeSet<Triple>,
    namespaces: Namespaces,
}

impl TripleGraph {
    pub fn new(namespaces: Namespaces) -> Self {
        TripleGraph {
            triples: BTreeSet::new(),
            namespaces,
        }
    }

    /// Returns false if the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn namespaces(&self) -> &Namespaces {
        &self.namespaces
    }

    /// Triples in (subject, predicate, object) N-Triples order.
    pub fn sorted(&self) -> Vec<&Triple> {
        let mut v: Vec<(_, &Triple)> = self.triples.iter().map(|t| (t.sort_key(), t)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, t)| t).collect()
    }

    pub fn to_ntriples(&self) -> String {
        self.sorted()
            .into_iter()
            .map(|t| t.to_ntriples() + "\n")
            .collect()
    }
}

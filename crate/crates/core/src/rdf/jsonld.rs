use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{Node, TripleGraph, RDF_TYPE};

/// Builds an object with keys inserted in sorted order, so output is sorted
/// whether or not serde_json preserves insertion order.
fn object(entries: BTreeMap<String, Value>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k, v);
    }
    Value::Object(map)
}

fn node_id(node: &Node) -> String {
    match node {
        Node::Iri(iri) => iri.clone(),
        Node::Blank(label) => format!("_:{label}"),
        Node::Literal(_) => unreachable!("subjects are never literals"),
    }
}

fn value_object(node: &Node) -> Value {
    let mut entries = BTreeMap::new();
    match node {
        Node::Iri(_) | Node::Blank(_) => {
            entries.insert("@id".to_string(), Value::String(node_id(node)));
        }
        Node::Literal(lit) => {
            entries.insert("@value".to_string(), Value::String(lit.lexical.clone()));
            if let Some(lang) = &lit.language {
                entries.insert("@language".to_string(), Value::String(lang.clone()));
            } else if let Some(dt) = &lit.datatype {
                entries.insert("@type".to_string(), Value::String(dt.clone()));
            }
        }
    }
    object(entries)
}

/// JSON-LD with a fixed `@context` for the four prefixes and one node object
/// per subject, sorted by id. Property values are arrays in N-Triples order.
pub fn serialize_jsonld(graph: &TripleGraph) -> String {
    let ns = graph.namespaces();
    let context: BTreeMap<String, Value> = ns
        .table()
        .into_iter()
        .map(|(p, iri)| (p.to_string(), Value::String(iri.to_string())))
        .collect();

    // subject id -> key -> values; `sorted()` already yields values in order
    let mut nodes: BTreeMap<String, BTreeMap<String, Vec<Value>>> = BTreeMap::new();
    for triple in graph.sorted() {
        let props = nodes.entry(node_id(&triple.subject)).or_default();
        let Node::Iri(predicate) = &triple.predicate else {
            unreachable!("predicates are IRIs")
        };
        match (predicate.as_str(), &triple.object) {
            (RDF_TYPE, Node::Iri(class)) => props
                .entry("@type".to_string())
                .or_default()
                .push(Value::String(ns.compact(class).unwrap_or_else(|| class.clone()))),
            _ => props
                .entry(ns.compact(predicate).unwrap_or_else(|| predicate.clone()))
                .or_default()
                .push(value_object(&triple.object)),
        }
    }

    let graph_nodes: Vec<Value> = nodes
        .into_iter()
        .map(|(id, props)| {
            let mut entries: BTreeMap<String, Value> =
                props.into_iter().map(|(k, v)| (k, Value::Array(v))).collect();
            entries.insert("@id".to_string(), Value::String(id));
            object(entries)
        })
        .collect();

    let mut doc = BTreeMap::new();
    doc.insert("@context".to_string(), object(context));
    doc.insert("@graph".to_string(), Value::Array(graph_nodes));
    let mut text = serde_json::to_string_pretty(&object(doc)).expect("JSON values always serialize");
    text.push('\n');
    text
}

use super::{Namespaces, Node, TripleGraph, RDF_TYPE};

fn term(node: &Node, ns: &Namespaces) -> String {
    match node {
        Node::Iri(iri) => ns.compact(iri).unwrap_or_else(|| format!("<{iri}>")),
        Node::Blank(label) => format!("_:{label}"),
        Node::Literal(lit) => {
            let mut out = format!("\"{}\"", super::escape_literal(&lit.lexical));
            if let Some(lang) = &lit.language {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = &lit.datatype {
                out.push_str("^^");
                out.push_str(&ns.compact(dt).unwrap_or_else(|| format!("<{dt}>")));
            }
            out
        }
    }
}

/// Turtle with a fixed prefix block followed by one block per subject.
/// Triples are ordered by their N-Triples rendering.
pub fn serialize_turtle(graph: &TripleGraph) -> String {
    let ns = graph.namespaces();
    let mut out = String::new();
    for (prefix, iri) in ns.table() {
        out.push_str(&format!("@prefix {prefix}: <{iri}> .\n"));
    }

    let mut current: Option<&Node> = None;
    for triple in graph.sorted() {
        let predicate = match &triple.predicate {
            Node::Iri(iri) if iri == RDF_TYPE => "a".to_string(),
            other => term(other, ns),
        };
        let object = term(&triple.object, ns);
        if current == Some(&triple.subject) {
            out.push_str(&format!(" ;\n    {predicate} {object}"));
        } else {
            if current.is_some() {
                out.push_str(" .\n");
            }
            out.push_str(&format!("\n{} {predicate} {object}", term(&triple.subject, ns)));
            current = Some(&triple.subject);
        }
    }
    if current.is_some() {
        out.push_str(" .\n");
    }
    out
}

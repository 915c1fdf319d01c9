//! Semantic checks of a built document against the taxonomy and the
//! notation's edge-legality table.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::document::{Document, EdgeKind, Role};
use crate::patterns::{builtin_patterns, detect};
use crate::taxonomy::{ConceptRef, NodeKind, Taxonomy, TaxonomyError};

/// Allowed `(from kind, edge kind, to kind)` triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalityTable {
    allowed: BTreeSet<(NodeKind, EdgeKind, NodeKind)>,
}

impl LegalityTable {
    /// Flow between processes and their inputs/outputs, roles from actors to
    /// processes, influence from processes to models, messages between actors.
    pub fn standard() -> LegalityTable {
        use NodeKind::*;
        let allowed = [
            (Instance, EdgeKind::Flow, Process),
            (Model, EdgeKind::Flow, Process),
            (Process, EdgeKind::Flow, Instance),
            (Process, EdgeKind::Flow, Model),
            (Actor, EdgeKind::Role(Role::Initiates), Process),
            (Actor, EdgeKind::Role(Role::Supports), Process),
            (Process, EdgeKind::Influence, Model),
            (Actor, EdgeKind::Message, Actor),
        ]
        .into_iter()
        .collect();
        LegalityTable { allowed }
    }

    pub fn allows(&self, from: NodeKind, kind: EdgeKind, to: NodeKind) -> bool {
        self.allowed.contains(&(from, kind, to))
    }

    pub fn triples(&self) -> impl Iterator<Item = &(NodeKind, EdgeKind, NodeKind)> {
        self.allowed.iter()
    }
}

pub fn edge_legal(table: &LegalityTable, from: NodeKind, kind: EdgeKind, to: NodeKind) -> bool {
    table.allows(from, kind, to)
}

fn concept_diagnostic(
    error: &TaxonomyError,
    element: &str,
    label: &str,
    what: &str,
) -> Diagnostic {
    match error {
        TaxonomyError::NotADescendant {
            ancestor,
            descendant,
        } => Diagnostic::new(
            Code::E003,
            element,
            format!("{what} `{label}`: `{descendant}` is not a subconcept of `{ancestor}`"),
        ),
        other => Diagnostic::new(Code::E001, element, format!("{what} `{label}`: {other}")),
    }
}

/// All findings for `doc`, sorted by (severity, code, element id). An empty
/// list means the document is well formed.
///
/// Follow-up findings are not reported: edges touching a node with a kind
/// mismatch (E002) are not checked for legality, and pattern frames with a
/// member involved in an error get no W002.
pub fn validate(doc: &Document, tax: &Taxonomy) -> Vec<Diagnostic> {
    let table = LegalityTable::standard();
    let mut out = Vec::new();

    let mut concepts: BTreeMap<&str, ConceptRef> = BTreeMap::new();
    // Nodes or edge endpoints that already carry an error. Follow-up checks
    // that would only restate the same mistake skip them.
    let mut faulty: BTreeSet<&str> = BTreeSet::new();
    let mut kind_mismatch: BTreeSet<&str> = BTreeSet::new();
    for node in doc.nodes() {
        match tax.resolve_path(&node.concept) {
            Ok(c) => {
                concepts.insert(&node.id, c);
                if c.kind() != node.kind {
                    faulty.insert(&node.id);
                    kind_mismatch.insert(&node.id);
                    out.push(
                        Diagnostic::new(
                            Code::E002,
                            &node.id,
                            format!(
                                "node `{}` is declared as {} but `{}` is a {} concept",
                                node.id,
                                node.kind,
                                node.concept,
                                c.kind()
                            ),
                        )
                        .with_span(node.span),
                    );
                }
            }
            Err(e) => {
                faulty.insert(&node.id);
                out.push(concept_diagnostic(&e, &node.id, &node.concept, "concept label").with_span(node.span));
            }
        }
    }

    let symbol = tax.lookup("symbol").expect("builtin concept");
    for edge in doc.edges() {
        let element = edge.element_id();
        let from = doc.node(&edge.from).expect("built document");
        let to = doc.node(&edge.to).expect("built document");
        let before = out.len();
        let kinds_trusted = !kind_mismatch.contains(from.id.as_str()) && !kind_mismatch.contains(to.id.as_str());
        if kinds_trusted && !table.allows(from.kind, edge.kind, to.kind) {
            out.push(
                Diagnostic::new(
                    Code::E004,
                    &element,
                    format!(
                        "{} edge from {} `{}` to {} `{}` is not allowed",
                        edge.kind, from.kind, from.id, to.kind, to.id
                    ),
                )
                .with_span(edge.span),
            );
        }
        match (&edge.label, edge.kind) {
            (None, EdgeKind::Message) => out.push(
                Diagnostic::new(Code::E005, &element, "message edge has no symbol label")
                    .with_span(edge.span),
            ),
            (None, _) => {}
            (Some(label), kind) => match tax.resolve_path(label) {
                Err(e) => out.push(concept_diagnostic(&e, &element, label, "edge label").with_span(edge.span)),
                Ok(c) if kind == EdgeKind::Message => {
                    if !tax.is_subconcept(c, symbol).expect("same taxonomy") {
                        out.push(
                            Diagnostic::new(
                                Code::E005,
                                &element,
                                format!("message label `{label}` is not a symbol concept"),
                            )
                            .with_span(edge.span),
                        );
                    }
                }
                Ok(_) => {}
            },
        }
        if out.len() > before {
            faulty.insert(&edge.from);
            faulty.insert(&edge.to);
        }
    }

    let team = tax.lookup("team").expect("builtin concept");
    for frame in doc.frames() {
        let Some(badge) = frame.badge() else { continue };
        let Some(&badge_concept) = concepts.get(badge) else { continue };
        let badge_node = doc.node(badge).expect("built document");
        if badge_node.kind != NodeKind::Actor
            || badge_concept.kind() != NodeKind::Actor
            || tax.is_subconcept(badge_concept, team).expect("same taxonomy")
        {
            continue;
        }
        let contents = doc.frame_contents(&frame.id).expect("frame exists");
        let actors: Vec<&str> = contents
            .iter()
            .filter(|id| doc.node(id).is_some_and(|n| n.kind == NodeKind::Actor))
            .map(String::as_str)
            .collect();
        if !actors.is_empty() {
            out.push(
                Diagnostic::new(
                    Code::E007,
                    &frame.id,
                    format!(
                        "zoom frame of individual actor `{badge}` contains actor member(s) {}; only teams may hold actors",
                        actors.join(", ")
                    ),
                )
                .with_span(frame.span),
            );
        }
    }

    let mut touched: BTreeSet<&str> = BTreeSet::new();
    for e in doc.edges() {
        touched.insert(&e.from);
        touched.insert(&e.to);
    }
    for f in doc.frames() {
        touched.extend(f.badge());
    }
    for node in doc.nodes() {
        if !touched.contains(node.id.as_str()) {
            out.push(
                Diagnostic::new(Code::W001, &node.id, format!("node `{}` is isolated", node.id))
                    .with_span(node.span),
            );
        }
    }

    let pattern_frames: Vec<_> = doc.frames().iter().filter(|f| !f.is_zoom()).collect();
    if !pattern_frames.is_empty() {
        let occurrences: BTreeSet<BTreeSet<String>> = builtin_patterns()
            .iter()
            .flat_map(|p| detect(doc, p, tax))
            .map(|m| m.nodes().map(str::to_string).collect())
            .collect();
        for frame in pattern_frames {
            let judged = frame.members.iter().all(|m| !faulty.contains(m.as_str()));
            if judged && !occurrences.contains(&frame.members) {
                out.push(
                    Diagnostic::new(
                        Code::W002,
                        &frame.id,
                        format!(
                            "pattern frame \"{}\" does not enclose an occurrence of any built-in pattern",
                            frame.pattern_name().unwrap_or_default()
                        ),
                    )
                    .with_span(frame.span),
                );
            }
        }
    }

    sort_diagnostics(&mut out);
    out
}

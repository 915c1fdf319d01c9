//! The diagram graph: typed boxes, typed arrows and frames.
//!
//! A [`Document`] is only ever obtained through [`Document::build`] (or the
//! parser / JSON reader, which call it), so every reference inside it
//! resolves. Frames reference their members by id; a zoom frame nests inside
//! another frame when its badge is one of that frame's members.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::SourceSpan;
use crate::taxonomy::{builtin_taxonomy, NodeKind, Taxonomy, TaxonomyError};

/// Words that cannot be used as node ids.
pub const KEYWORDS: &[&str] = &[
    "diagram", "instance", "model", "process", "actor", "team", "zoom", "pattern", "as",
];

/// `[A-Za-z][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Concept label as written, e.g. `infer:deduce`.
    pub concept: String,
    pub display_name: Option<String>,
    pub span: Option<SourceSpan>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind, concept: impl Into<String>) -> Node {
        Node {
            id: id.into(),
            kind,
            concept: concept.into(),
            display_name: None,
            span: None,
        }
    }

    pub fn named(mut self, display_name: impl Into<String>) -> Node {
        self.display_name = Some(display_name.into());
        self
    }

    /// Last segment of the concept label.
    pub fn concept_name(&self) -> &str {
        self.concept.rsplit(':').next().unwrap_or(&self.concept)
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        (&self.id, self.kind, &self.concept, &self.display_name)
            == (&other.id, other.kind, &other.concept, &other.display_name)
    }
}

impl Eq for Node {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Initiates,
    Supports,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Initiates => "initiates",
            Role::Supports => "supports",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Flow,
    Role(Role),
    Influence,
    Message,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Flow => "flow",
            EdgeKind::Role(_) => "role",
            EdgeKind::Influence => "influence",
            EdgeKind::Message => "message",
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            EdgeKind::Flow => "->",
            EdgeKind::Role(Role::Initiates) => "-initiates->",
            EdgeKind::Role(Role::Supports) => "-supports->",
            EdgeKind::Influence => "~>",
            EdgeKind::Message => "=>",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Role(r) => write!(f, "role:{}", r.as_str()),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    /// Concept label; required for message edges.
    pub label: Option<String>,
    pub span: Option<SourceSpan>,
}

impl Edge {
    pub fn new(from: impl Into<String>, kind: EdgeKind, to: impl Into<String>) -> Edge {
        Edge {
            from: from.into(),
            to: to.into(),
            kind,
            label: None,
            span: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Edge {
        self.label = Some(label.into());
        self
    }

    /// Readable identifier such as `a=>b[cfp]`.
    pub fn element_id(&self) -> String {
        match &self.label {
            Some(l) => format!("{}{}{}[{}]", self.from, self.kind.arrow(), self.to, l),
            None => format!("{}{}{}", self.from, self.kind.arrow(), self.to),
        }
    }

    fn key(&self) -> (&str, &str, EdgeKind, Option<&str>) {
        (&self.from, &self.to, self.kind, self.label.as_deref())
    }
}

impl PartialEq for Edge {
    fn eq(&self, other: &Edge) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Edge {}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameKind {
    /// Solid, light-grey frame detailing the badged element.
    Zoom { badge: String },
    /// Dashed, dark-grey annotation of a pattern occurrence.
    Pattern { name: String },
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub id: String,
    pub kind: FrameKind,
    pub members: BTreeSet<String>,
    pub span: Option<SourceSpan>,
}

impl Frame {
    /// Zoom frame with the conventional id `zoom:<badge>`.
    pub fn zoom<I, S>(badge: impl Into<String>, members: I) -> Frame
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let badge = badge.into();
        Frame {
            id: format!("zoom:{badge}"),
            kind: FrameKind::Zoom { badge },
            members: members.into_iter().map(Into::into).collect(),
            span: None,
        }
    }

    /// Pattern frame with the conventional id `pattern:<name>:<m1,m2,...>`.
    pub fn pattern<I, S>(name: impl Into<String>, members: I) -> Frame
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let members: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        let joined = members.iter().cloned().collect::<Vec<_>>().join(",");
        Frame {
            id: format!("pattern:{name}:{joined}"),
            kind: FrameKind::Pattern { name },
            members,
            span: None,
        }
    }

    pub fn badge(&self) -> Option<&str> {
        match &self.kind {
            FrameKind::Zoom { badge } => Some(badge),
            FrameKind::Pattern { .. } => None,
        }
    }

    pub fn pattern_name(&self) -> Option<&str> {
        match &self.kind {
            FrameKind::Pattern { name } => Some(name),
            FrameKind::Zoom { .. } => None,
        }
    }

    pub fn is_zoom(&self) -> bool {
        matches!(self.kind, FrameKind::Zoom { .. })
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Frame) -> bool {
        (&self.id, &self.kind, &self.members) == (&other.id, &other.kind, &other.members)
    }
}

impl Eq for Frame {}

/// Referential-integrity failures reported by [`Document::build`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{0}` is not a valid node id")]
    InvalidId(String),
    #[error("`{owner}` refers to undeclared node `{id}`")]
    DanglingRef { owner: String, id: String },
    #[error("zoom frame `{frame}` is badged by undeclared node `{badge}`")]
    DanglingBadge { frame: String, badge: String },
    #[error("node `{badge}` badges more than one zoom frame")]
    DuplicateBadge { badge: String },
    #[error("zoom frames `{first}` and `{second}` partially overlap")]
    FrameOverlap { first: String, second: String },
    #[error("zoom frame `{0}` is nested inside itself")]
    FrameCycle(String),
}

impl BuildError {
    /// The offending id, used to order error lists.
    pub fn subject(&self) -> &str {
        match self {
            BuildError::DuplicateId(id) | BuildError::InvalidId(id) | BuildError::FrameCycle(id) => id,
            BuildError::DanglingRef { owner, .. } => owner,
            BuildError::DanglingBadge { frame, .. } => frame,
            BuildError::DuplicateBadge { badge } => badge,
            BuildError::FrameOverlap { first, .. } => first,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("malformed document JSON: {0}")]
    MalformedJson(String),
    #[error("`{element}`: {error}")]
    Concept { element: String, error: TaxonomyError },
    #[error("{}", join_errors(.0))]
    Integrity(Vec<BuildError>),
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
}

fn join_errors(errors: &[BuildError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated diagram graph. Elements are kept sorted: nodes and frames by
/// id, edges by (from, to, kind, label). Equality ignores source spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    frames: Vec<Frame>,
    node_index: BTreeMap<String, usize>,
}

impl Document {
    /// Assemble a document, returning every integrity error found.
    pub fn build(
        name: impl Into<String>,
        mut nodes: Vec<Node>,
        mut edges: Vec<Edge>,
        mut frames: Vec<Frame>,
    ) -> Result<Document, Vec<BuildError>> {
        let mut errors = Vec::new();
        // Stable sorts keep the later duplicate after the first.
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        frames.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.key().cmp(&b.key()));

        let mut seen = BTreeSet::new();
        for id in nodes.iter().map(|n| &n.id).chain(frames.iter().map(|f| &f.id)) {
            if !seen.insert(id.as_str()) {
                errors.push(BuildError::DuplicateId(id.clone()));
            }
        }
        for n in &nodes {
            if !is_identifier(&n.id) || is_keyword(&n.id) {
                errors.push(BuildError::InvalidId(n.id.clone()));
            }
        }
        let node_ids: BTreeSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !node_ids.contains(end.as_str()) {
                    errors.push(BuildError::DanglingRef {
                        owner: e.element_id(),
                        id: end.clone(),
                    });
                }
            }
        }
        let mut badges = BTreeMap::new();
        for f in &frames {
            for m in &f.members {
                if !node_ids.contains(m.as_str()) {
                    errors.push(BuildError::DanglingRef {
                        owner: f.id.clone(),
                        id: m.clone(),
                    });
                }
            }
            if let Some(badge) = f.badge() {
                if !node_ids.contains(badge) {
                    errors.push(BuildError::DanglingBadge {
                        frame: f.id.clone(),
                        badge: badge.to_string(),
                    });
                }
                *badges.entry(badge).or_insert(0usize) += 1;
            }
        }
        for (badge, count) in badges {
            if count > 1 {
                errors.push(BuildError::DuplicateBadge {
                    badge: badge.to_string(),
                });
            }
        }
        if errors.is_empty() {
            errors.extend(check_frame_structure(&frames));
        }
        if !errors.is_empty() {
            errors.sort_by(|a, b| {
                (a.subject(), a.to_string()).cmp(&(b.subject(), b.to_string()))
            });
            errors.dedup();
            return Err(errors);
        }
        let node_index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        Ok(Document {
            name: name.into(),
            nodes,
            edges,
            frames,
            node_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn node_position(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn frame(&self, id: &str) -> Option<&Frame> {
        self.frames
            .binary_search_by(|f| f.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.frames[i])
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Transitive membership of a frame, following zoom frames whose badge is
    /// a member. A zoom frame's own badge is never part of its contents.
    pub fn frame_contents(&self, frame_id: &str) -> Result<BTreeSet<String>, DocumentError> {
        let frame = self
            .frame(frame_id)
            .ok_or_else(|| DocumentError::UnknownFrame(frame_id.to_string()))?;
        Ok(closure(&self.frames, frame))
    }

    /// Split into owned parts, e.g. to edit and rebuild.
    pub fn into_parts(self) -> (String, Vec<Node>, Vec<Edge>, Vec<Frame>) {
        (self.name, self.nodes, self.edges, self.frames)
    }

    /// Serialize to the canonical JSON form: sorted elements, sorted keys,
    /// two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let json = DocumentJson {
            edges: self.edges.iter().map(EdgeJson::from).collect(),
            frames: self.frames.iter().map(FrameJson::from).collect(),
            name: self.name.clone(),
            nodes: self.nodes.iter().map(NodeJson::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&json).expect("document serializes");
        text.push('\n');
        text
    }

    /// Read a document from JSON, resolving concept labels against the
    /// built-in taxonomy.
    pub fn from_json(text: &str) -> Result<Document, DocumentError> {
        Document::from_json_with(text, builtin_taxonomy())
    }

    pub fn from_json_with(text: &str, tax: &Taxonomy) -> Result<Document, DocumentError> {
        let raw: DocumentJson =
            serde_json::from_str(text).map_err(|e| DocumentError::MalformedJson(e.to_string()))?;
        let nodes = raw
            .nodes
            .into_iter()
            .map(NodeJson::into_node)
            .collect::<Result<Vec<_>, _>>()?;
        let edges = raw
            .edges
            .into_iter()
            .map(EdgeJson::into_edge)
            .collect::<Result<Vec<_>, _>>()?;
        let frames = raw
            .frames
            .into_iter()
            .map(FrameJson::into_frame)
            .collect::<Result<Vec<_>, _>>()?;
        for n in &nodes {
            tax.resolve_path(&n.concept).map_err(|error| DocumentError::Concept {
                element: n.id.clone(),
                error,
            })?;
        }
        for e in &edges {
            if let Some(label) = &e.label {
                tax.resolve_path(label).map_err(|error| DocumentError::Concept {
                    element: e.element_id(),
                    error,
                })?;
            }
        }
        Document::build(raw.name, nodes, edges, frames).map_err(DocumentError::Integrity)
    }
}

fn closure(frames: &[Frame], frame: &Frame) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut visited = BTreeSet::new();
    collect(frames, frame, &mut out, &mut visited);
    if let Some(badge) = frame.badge() {
        out.remove(badge);
    }
    out
}

fn collect<'a>(
    frames: &'a [Frame],
    frame: &'a Frame,
    out: &mut BTreeSet<String>,
    visited: &mut BTreeSet<&'a str>,
) {
    if !visited.insert(frame.id.as_str()) {
        return;
    }
    for m in &frame.members {
        out.insert(m.clone());
        for child in frames.iter().filter(|f| f.badge() == Some(m.as_str())) {
            collect(frames, child, out, visited);
        }
    }
}

/// Zoom frames must form a forest: no frame contains its own badge through
/// nesting, and any two zoom frames are disjoint or nested.
fn check_frame_structure(frames: &[Frame]) -> Vec<BuildError> {
    let mut errors = Vec::new();
    let zooms: Vec<&Frame> = frames.iter().filter(|f| f.is_zoom()).collect();
    let closures: Vec<BTreeSet<String>> = zooms
        .iter()
        .map(|f| {
            let mut out = BTreeSet::new();
            let mut visited = BTreeSet::new();
            collect(frames, f, &mut out, &mut visited);
            out
        })
        .collect();
    for (f, c) in zooms.iter().zip(&closures) {
        if c.contains(f.badge().expect("zoom")) {
            errors.push(BuildError::FrameCycle(f.id.clone()));
        }
    }
    if !errors.is_empty() {
        return errors;
    }
    for i in 0..zooms.len() {
        for j in i + 1..zooms.len() {
            let (a, b) = (&closures[i], &closures[j]);
            if a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a) {
                continue;
            }
            errors.push(BuildError::FrameOverlap {
                first: zooms[i].id.clone(),
                second: zooms[j].id.clone(),
            });
        }
    }
    errors
}

// Field order is alphabetical so serde emits sorted keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentJson {
    edges: Vec<EdgeJson>,
    frames: Vec<FrameJson>,
    name: String,
    nodes: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    concept: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    display_name: Option<String>,
    id: String,
    kind: NodeKind,
}

impl From<&Node> for NodeJson {
    fn from(n: &Node) -> NodeJson {
        NodeJson {
            concept: n.concept.clone(),
            display_name: n.display_name.clone(),
            id: n.id.clone(),
            kind: n.kind,
        }
    }
}

impl NodeJson {
    fn into_node(self) -> Result<Node, DocumentError> {
        Ok(Node {
            id: self.id,
            kind: self.kind,
            concept: self.concept,
            display_name: self.display_name,
            span: None,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    from: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<Role>,
    to: String,
}

impl From<&Edge> for EdgeJson {
    fn from(e: &Edge) -> EdgeJson {
        EdgeJson {
            from: e.from.clone(),
            kind: e.kind.as_str().to_string(),
            label: e.label.clone(),
            role: match e.kind {
                EdgeKind::Role(r) => Some(r),
                _ => None,
            },
            to: e.to.clone(),
        }
    }
}

impl EdgeJson {
    fn into_edge(self) -> Result<Edge, DocumentError> {
        let kind = match (self.kind.as_str(), self.role) {
            ("flow", None) => EdgeKind::Flow,
            ("influence", None) => EdgeKind::Influence,
            ("message", None) => EdgeKind::Message,
            ("role", Some(r)) => EdgeKind::Role(r),
            ("role", None) => {
                return Err(DocumentError::MalformedJson(format!(
                    "role edge {}->{} has no `role`",
                    self.from, self.to
                )))
            }
            (k, _) => {
                return Err(DocumentError::MalformedJson(format!(
                    "edge {}->{}: unexpected kind `{k}` or stray `role`",
                    self.from, self.to
                )))
            }
        };
        Ok(Edge {
            from: self.from,
            to: self.to,
            kind,
            label: self.label,
            span: None,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    badge: Option<String>,
    id: String,
    kind: String,
    members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pattern_name: Option<String>,
}

impl From<&Frame> for FrameJson {
    fn from(f: &Frame) -> FrameJson {
        let (kind, badge, pattern_name) = match &f.kind {
            FrameKind::Zoom { badge } => ("zoom", Some(badge.clone()), None),
            FrameKind::Pattern { name } => ("pattern", None, Some(name.clone())),
        };
        FrameJson {
            badge,
            id: f.id.clone(),
            kind: kind.to_string(),
            members: f.members.iter().cloned().collect(),
            pattern_name,
        }
    }
}

impl FrameJson {
    fn into_frame(self) -> Result<Frame, DocumentError> {
        let kind = match (self.kind.as_str(), self.badge, self.pattern_name) {
            ("zoom", Some(badge), None) => FrameKind::Zoom { badge },
            ("pattern", None, Some(name)) => FrameKind::Pattern { name },
            (k, _, _) => {
                return Err(DocumentError::MalformedJson(format!(
                    "frame `{}`: kind `{k}` needs exactly one of `badge` (zoom) or `pattern_name` (pattern)",
                    self.id
                )))
            }
        };
        Ok(Frame {
            id: self.id,
            kind,
            members: self.members.into_iter().collect(),
            span: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(id: &str, kind: NodeKind, concept: &str) -> Node {
        Node::new(id, kind, concept)
    }

    #[test]
    fn single_node_builds() {
        let doc = Document::build("t", vec![n("d", NodeKind::Instance, "data")], vec![], vec![]).unwrap();
        assert_eq!(doc.nodes().len(), 1);
        assert!(doc.node("d").is_some());
    }

    #[test]
    fn dangling_edge() {
        let err = Document::build(
            "t",
            vec![n("p", NodeKind::Process, "infer")],
            vec![Edge::new("x", EdgeKind::Flow, "p")],
            vec![],
        )
        .unwrap_err();
        assert_eq!(
            err,
            vec![BuildError::DanglingRef {
                owner: "x->p".into(),
                id: "x".into()
            }]
        );
    }

    #[test]
    fn duplicate_ids_all_reported_sorted() {
        let err = Document::build(
            "t",
            vec![
                n("d1", NodeKind::Instance, "data"),
                n("d1", NodeKind::Instance, "data"),
                n("a", NodeKind::Instance, "data"),
                n("a", NodeKind::Instance, "data"),
            ],
            vec![Edge::new("zz", EdgeKind::Flow, "d1")],
            vec![],
        )
        .unwrap_err();
        assert_eq!(
            err,
            vec![
                BuildError::DuplicateId("a".into()),
                BuildError::DuplicateId("d1".into()),
                BuildError::DanglingRef {
                    owner: "zz->d1".into(),
                    id: "zz".into()
                },
            ]
        );
    }

    #[test]
    fn keyword_ids_rejected() {
        let err = Document::build("t", vec![n("team", NodeKind::Actor, "team")], vec![], vec![])
            .unwrap_err();
        assert_eq!(err, vec![BuildError::InvalidId("team".into())]);
    }

    fn nested() -> Document {
        Document::build(
            "t",
            vec![
                n("t1", NodeKind::Actor, "team"),
                n("t2", NodeKind::Actor, "team"),
                n("a", NodeKind::Actor, "agent"),
                n("b", NodeKind::Actor, "agent"),
                n("c", NodeKind::Actor, "agent"),
            ],
            vec![],
            vec![
                Frame::zoom("t1", ["a", "b", "t2"]),
                Frame::zoom("t2", ["c"]),
                Frame::zoom("a", Vec::<String>::new()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn frame_closure_follows_badges() {
        let doc = nested();
        let all: BTreeSet<String> = ["a", "b", "c", "t2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(doc.frame_contents("zoom:t1").unwrap(), all);
        assert_eq!(
            doc.frame_contents("zoom:t2").unwrap(),
            BTreeSet::from(["c".to_string()])
        );
        assert!(doc.frame_contents("zoom:a").unwrap().is_empty());
        assert_eq!(
            doc.frame_contents("nope"),
            Err(DocumentError::UnknownFrame("nope".into()))
        );
    }

    #[test]
    fn partial_overlap_rejected() {
        let err = Document::build(
            "t",
            vec![
                n("t1", NodeKind::Actor, "team"),
                n("t2", NodeKind::Actor, "team"),
                n("a", NodeKind::Actor, "agent"),
                n("b", NodeKind::Actor, "agent"),
            ],
            vec![],
            vec![Frame::zoom("t1", ["a", "b"]), Frame::zoom("t2", ["b"]), Frame::zoom("a", ["t2"])],
        );
        // zoom:t2 ⊂ zoom:a ⊂ zoom:t1
        assert!(err.is_ok());
        let err = Document::build(
            "t",
            vec![
                n("t1", NodeKind::Actor, "team"),
                n("t2", NodeKind::Actor, "team"),
                n("a", NodeKind::Actor, "agent"),
                n("b", NodeKind::Actor, "agent"),
                n("c", NodeKind::Actor, "agent"),
            ],
            vec![],
            vec![Frame::zoom("t1", ["a", "b"]), Frame::zoom("t2", ["b", "c"])],
        )
        .unwrap_err();
        assert_eq!(
            err,
            vec![BuildError::FrameOverlap {
                first: "zoom:t1".into(),
                second: "zoom:t2".into()
            }]
        );
    }

    #[test]
    fn pattern_frames_may_overlap() {
        Document::build(
            "t",
            vec![
                n("t1", NodeKind::Actor, "team"),
                n("a", NodeKind::Actor, "agent"),
                n("b", NodeKind::Actor, "agent"),
            ],
            vec![],
            vec![Frame::zoom("t1", ["a"]), Frame::pattern("x", ["a", "b"])],
        )
        .unwrap();
    }

    #[test]
    fn nesting_cycle_rejected() {
        let err = Document::build(
            "t",
            vec![n("a", NodeKind::Actor, "team"), n("b", NodeKind::Actor, "team")],
            vec![],
            vec![Frame::zoom("a", ["b"]), Frame::zoom("b", ["a"])],
        )
        .unwrap_err();
        assert_eq!(
            err,
            vec![
                BuildError::FrameCycle("zoom:a".into()),
                BuildError::FrameCycle("zoom:b".into())
            ]
        );
    }

    #[test]
    fn badge_problems() {
        let err = Document::build(
            "t",
            vec![n("a", NodeKind::Actor, "team")],
            vec![],
            vec![Frame::zoom("ghost", ["a"])],
        )
        .unwrap_err();
        assert_eq!(
            err,
            vec![BuildError::DanglingBadge {
                frame: "zoom:ghost".into(),
                badge: "ghost".into()
            }]
        );
        let mut second = Frame::zoom("a", Vec::<String>::new());
        second.id = "other".into();
        let err = Document::build(
            "t",
            vec![n("a", NodeKind::Actor, "team")],
            vec![],
            vec![Frame::zoom("a", Vec::<String>::new()), second],
        )
        .unwrap_err();
        assert_eq!(err, vec![BuildError::DuplicateBadge { badge: "a".into() }]);
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let doc = Document::build(
            "demo",
            vec![
                n("p", NodeKind::Process, "infer:induce"),
                n("d", NodeKind::Instance, "data").named("Data"),
                n("a", NodeKind::Actor, "agent:software"),
                n("t", NodeKind::Actor, "team"),
            ],
            vec![
                Edge::new("d", EdgeKind::Flow, "p"),
                Edge::new("a", EdgeKind::Role(Role::Supports), "p"),
                Edge::new("a", EdgeKind::Message, "t").labeled("cfp"),
                Edge::new("t", EdgeKind::Message, "a").labeled("proposal"),
            ],
            vec![Frame::zoom("t", ["a"]), Frame::pattern("x", ["d", "p"])],
        )
        .unwrap();
        let json = doc.to_canonical_json();
        assert_eq!(json, doc.to_canonical_json());
        let back = Document::from_json(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_canonical_json(), json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["edges", "frames", "name", "nodes"]);
        assert_eq!(v["edges"][0]["role"], "supports");
        assert_eq!(v["frames"][1]["badge"], "t");
    }

    #[test]
    fn json_errors() {
        assert!(matches!(Document::from_json("{}"), Err(DocumentError::MalformedJson(_))));
        assert!(matches!(Document::from_json("not json"), Err(DocumentError::MalformedJson(_))));
        let unknown = r#"{"name":"t","nodes":[{"id":"a","kind":"model","concept":"model:wizardry"}],"edges":[],"frames":[]}"#;
        assert_eq!(
            Document::from_json(unknown),
            Err(DocumentError::Concept {
                element: "a".into(),
                error: TaxonomyError::UnknownConcept("wizardry".into())
            })
        );
        let role = r#"{"name":"t","nodes":[],"edges":[{"from":"a","to":"b","kind":"role"}],"frames":[]}"#;
        assert!(matches!(Document::from_json(role), Err(DocumentError::MalformedJson(_))));
        let dangling = r#"{"name":"t","nodes":[],"edges":[{"from":"a","to":"b","kind":"flow"}],"frames":[]}"#;
        assert!(matches!(Document::from_json(dangling), Err(DocumentError::Integrity(v)) if v.len() == 2));
    }
}

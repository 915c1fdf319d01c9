//! The built-in concept hierarchy and subsumption queries.
//!
//! The hierarchy is a forest with exactly four roots (`instance`, `model`,
//! `process`, `actor`). Concept names live in one flat namespace, so a short
//! label such as `deduce` is unambiguous. Labels written in diagrams are
//! colon-separated paths (`infer:deduce`) where each later segment must be a
//! strict descendant of the one before it; intermediate levels may be skipped.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of parent links between any concept and its root.
pub const MAX_DEPTH: usize = 6;

/// Top-level category of a concept; fixes the shape a node is drawn with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Instance,
    Model,
    Process,
    Actor,
}

impl NodeKind {
    pub const ALL: [NodeKind; 4] = [
        NodeKind::Instance,
        NodeKind::Model,
        NodeKind::Process,
        NodeKind::Actor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Instance => "instance",
            NodeKind::Model => "model",
            NodeKind::Process => "process",
            NodeKind::Actor => "actor",
        }
    }

    pub fn from_keyword(word: &str) -> Option<NodeKind> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == word)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index of a concept inside its taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(u16);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A handle to one concept of a [`Taxonomy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptRef {
    id: ConceptId,
    name: &'static str,
    kind: NodeKind,
}

impl ConceptRef {
    pub fn id(&self) -> ConceptId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }
}

impl fmt::Display for ConceptRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("`{descendant}` is not a descendant of `{ancestor}`")]
    NotADescendant { ancestor: String, descendant: String },
    #[error("concept `{0}` does not belong to this taxonomy")]
    ForeignConcept(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    name: &'static str,
    kind: NodeKind,
    parent: Option<ConceptId>,
}

/// An immutable concept forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    entries: Vec<Entry>,
    by_name: HashMap<&'static str, ConceptId>,
}

// (name, parent name); parents precede their children. Roots have no parent.
const BUILTIN: &[(&str, Option<&str>)] = &[
    ("instance", None),
    ("model", None),
    ("process", None),
    ("actor", None),
    // instances
    ("data", Some("instance")),
    ("number", Some("data")),
    ("text", Some("data")),
    ("tensor", Some("data")),
    ("stream", Some("data")),
    ("symbol", Some("instance")),
    ("label", Some("symbol")),
    ("relation", Some("symbol")),
    ("trace", Some("symbol")),
    ("request", Some("symbol")),
    ("reply", Some("symbol")),
    ("cfp", Some("symbol")),
    ("proposal", Some("symbol")),
    ("assignment", Some("symbol")),
    ("result", Some("symbol")),
    ("workorder", Some("symbol")),
    ("job", Some("symbol")),
    // models
    ("statistical", Some("model")),
    ("neuralnet", Some("statistical")),
    ("bayesnet", Some("statistical")),
    ("markov", Some("statistical")),
    ("code", Some("statistical")),
    ("capacity", Some("statistical")),
    ("partial", Some("statistical")),
    ("semantic", Some("model")),
    ("taxonomy", Some("semantic")),
    ("ontology", Some("semantic")),
    ("kgraph", Some("semantic")),
    ("state", Some("semantic")),
    ("context", Some("semantic")),
    ("norm", Some("semantic")),
    ("resource", Some("semantic")),
    ("world", Some("semantic")),
    ("goal", Some("semantic")),
    // the plan model; `plan` itself names the deductive planning process
    ("intention", Some("semantic")),
    ("bom", Some("semantic")),
    // processes
    ("transform", Some("process")),
    ("embed", Some("transform")),
    ("infer", Some("process")),
    ("induce", Some("infer")),
    ("train", Some("induce")),
    ("engineer", Some("induce")),
    ("deduce", Some("infer")),
    ("classify", Some("deduce")),
    ("predict", Some("deduce")),
    ("plan", Some("deduce")),
    ("reason", Some("deduce")),
    ("interact", Some("process")),
    ("sense", Some("interact")),
    ("act", Some("interact")),
    ("speak", Some("interact")),
    // actors
    ("human", Some("actor")),
    ("agent", Some("actor")),
    ("software", Some("agent")),
    ("robot", Some("agent")),
    ("team", Some("actor")),
];

/// The shared built-in taxonomy.
pub fn builtin_taxonomy() -> &'static Taxonomy {
    static TAXONOMY: OnceLock<Taxonomy> = OnceLock::new();
    TAXONOMY.get_or_init(|| Taxonomy::from_table(BUILTIN))
}

impl Taxonomy {
    fn from_table(table: &[(&'static str, Option<&'static str>)]) -> Taxonomy {
        let mut entries: Vec<Entry> = Vec::with_capacity(table.len());
        let mut by_name = HashMap::with_capacity(table.len());
        for &(name, parent) in table {
            let (parent, kind) = match parent {
                None => {
                    let kind = NodeKind::from_keyword(name).expect("roots are node kinds");
                    (None, kind)
                }
                Some(p) => {
                    let pid: ConceptId = *by_name.get(p).expect("parent listed before child");
                    (Some(pid), entries[pid.index()].kind)
                }
            };
            let id = ConceptId(u16::try_from(entries.len()).expect("taxonomy fits in u16"));
            let previous = by_name.insert(name, id);
            assert!(previous.is_none(), "duplicate concept name {name}");
            entries.push(Entry { name, kind, parent });
        }
        Taxonomy { entries, by_name }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn make_ref(&self, id: ConceptId) -> ConceptRef {
        let e = &self.entries[id.index()];
        ConceptRef {
            id,
            name: e.name,
            kind: e.kind,
        }
    }

    /// All concepts in table order (parents before children).
    pub fn concepts(&self) -> impl Iterator<Item = ConceptRef> + '_ {
        (0..self.entries.len()).map(|i| self.make_ref(ConceptId(i as u16)))
    }

    pub fn roots(&self) -> impl Iterator<Item = ConceptRef> + '_ {
        self.concepts()
            .filter(|c| self.entries[c.id.index()].parent.is_none())
    }

    pub fn root(&self, kind: NodeKind) -> ConceptRef {
        self.lookup(kind.as_str()).expect("every kind has a root")
    }

    pub fn lookup(&self, name: &str) -> Option<ConceptRef> {
        self.by_name.get(name).map(|&id| self.make_ref(id))
    }

    fn check(&self, c: ConceptRef) -> Result<(), TaxonomyError> {
        match self.entries.get(c.id.index()) {
            Some(e) if e.name == c.name && e.kind == c.kind => Ok(()),
            _ => Err(TaxonomyError::ForeignConcept(c.name.to_string())),
        }
    }

    pub fn parent(&self, c: ConceptRef) -> Result<Option<ConceptRef>, TaxonomyError> {
        self.check(c)?;
        Ok(self.entries[c.id.index()].parent.map(|p| self.make_ref(p)))
    }

    /// The chain `c, parent(c), ..., root`.
    pub fn ancestors(&self, c: ConceptRef) -> Result<Vec<ConceptRef>, TaxonomyError> {
        self.check(c)?;
        let mut chain = vec![c];
        let mut cur = self.entries[c.id.index()].parent;
        while let Some(p) = cur {
            assert!(chain.len() <= MAX_DEPTH, "taxonomy depth exceeded");
            chain.push(self.make_ref(p));
            cur = self.entries[p.index()].parent;
        }
        Ok(chain)
    }

    /// Number of parent links from `c` to its root.
    pub fn depth(&self, c: ConceptRef) -> Result<usize, TaxonomyError> {
        Ok(self.ancestors(c)?.len() - 1)
    }

    /// Reflexive-transitive subsumption: `a ⊑ b`.
    pub fn is_subconcept(&self, a: ConceptRef, b: ConceptRef) -> Result<bool, TaxonomyError> {
        self.check(b)?;
        Ok(self.ancestors(a)?.contains(&b))
    }

    pub fn kind_of(&self, c: ConceptRef) -> Result<NodeKind, TaxonomyError> {
        let chain = self.ancestors(c)?;
        let root = chain.last().expect("chain is never empty");
        Ok(NodeKind::from_keyword(root.name).expect("roots are node kinds"))
    }

    /// Resolve a colon-separated label such as `infer:deduce`.
    pub fn resolve_path(&self, label: &str) -> Result<ConceptRef, TaxonomyError> {
        let mut prev: Option<ConceptRef> = None;
        for segment in label.split(':') {
            let c = self
                .lookup(segment)
                .ok_or_else(|| TaxonomyError::UnknownConcept(segment.to_string()))?;
            if let Some(p) = prev {
                if c == p || !self.is_subconcept(c, p)? {
                    return Err(TaxonomyError::NotADescendant {
                        ancestor: p.name.to_string(),
                        descendant: c.name.to_string(),
                    });
                }
            }
            prev = Some(c);
        }
        // split always yields at least one segment
        Ok(prev.expect("non-empty split"))
    }

    /// Full root-to-concept path, e.g. `process:infer:deduce`.
    pub fn full_path(&self, c: ConceptRef) -> Result<String, TaxonomyError> {
        let mut chain = self.ancestors(c)?;
        chain.reverse();
        Ok(chain.iter().map(|c| c.name).collect::<Vec<_>>().join(":"))
    }

    /// Diagram label: the main category below the root plus the concept
    /// itself (`infer:deduce`, `symbol:cfp`), or the bare name for concepts
    /// one level deep or less.
    pub fn display_label(&self, c: ConceptRef) -> Result<String, TaxonomyError> {
        let chain = self.ancestors(c)?;
        if chain.len() <= 2 {
            return Ok(c.name.to_string());
        }
        let main = chain[chain.len() - 2];
        Ok(format!("{}:{}", main.name, c.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> ConceptRef {
        builtin_taxonomy().lookup(name).unwrap()
    }

    #[test]
    fn four_roots_one_per_kind() {
        let tax = builtin_taxonomy();
        let roots: Vec<_> = tax.roots().map(|r| r.kind()).collect();
        assert_eq!(roots, NodeKind::ALL.to_vec());
    }

    #[test]
    fn deduce_under_process() {
        let tax = builtin_taxonomy();
        assert!(tax.is_subconcept(c("deduce"), c("process")).unwrap());
        assert_eq!(
            tax.ancestors(c("speak")).unwrap().iter().map(|c| c.name()).collect::<Vec<_>>(),
            ["speak", "interact", "process"]
        );
    }

    #[test]
    fn builtin_is_stable() {
        assert_eq!(*builtin_taxonomy(), Taxonomy::from_table(BUILTIN));
    }

    #[test]
    fn resolve_examples() {
        let tax = builtin_taxonomy();
        assert_eq!(tax.resolve_path("infer:deduce").unwrap(), c("deduce"));
        assert_eq!(tax.resolve_path("infer").unwrap(), c("infer"));
        assert_eq!(tax.resolve_path("infer:classify").unwrap(), c("classify"));
        assert_eq!(
            tax.resolve_path("deduce:infer"),
            Err(TaxonomyError::NotADescendant {
                ancestor: "deduce".into(),
                descendant: "infer".into()
            })
        );
        assert_eq!(
            tax.resolve_path("infer:infer"),
            Err(TaxonomyError::NotADescendant {
                ancestor: "infer".into(),
                descendant: "infer".into()
            })
        );
        assert_eq!(
            tax.resolve_path("infer:frobnicate"),
            Err(TaxonomyError::UnknownConcept("frobnicate".into()))
        );
        assert_eq!(tax.resolve_path(""), Err(TaxonomyError::UnknownConcept("".into())));
        assert!(matches!(
            tax.resolve_path("induce:deduce"),
            Err(TaxonomyError::NotADescendant { .. })
        ));
    }

    #[test]
    fn subconcept_examples() {
        let tax = builtin_taxonomy();
        assert!(tax.is_subconcept(c("deduce"), c("infer")).unwrap());
        assert!(tax.is_subconcept(c("infer"), c("infer")).unwrap());
        assert!(!tax.is_subconcept(c("induce"), c("deduce")).unwrap());
        assert!(!tax.is_subconcept(c("infer"), c("deduce")).unwrap());
    }

    #[test]
    fn kinds() {
        let tax = builtin_taxonomy();
        assert_eq!(tax.kind_of(c("deduce")).unwrap(), NodeKind::Process);
        assert_eq!(tax.kind_of(c("team")).unwrap(), NodeKind::Actor);
        assert_eq!(tax.kind_of(c("capacity")).unwrap(), NodeKind::Model);
        for concept in tax.concepts() {
            assert_eq!(tax.kind_of(concept).unwrap(), concept.kind());
        }
    }

    #[test]
    fn foreign_concept_rejected() {
        let tax = builtin_taxonomy();
        let bogus = ConceptRef {
            id: ConceptId(9999),
            name: "ghost",
            kind: NodeKind::Model,
        };
        assert_eq!(
            tax.kind_of(bogus),
            Err(TaxonomyError::ForeignConcept("ghost".into()))
        );
        assert!(tax.is_subconcept(c("model"), bogus).is_err());
        assert!(tax.is_subconcept(bogus, c("model")).is_err());
    }

    #[test]
    fn display_labels() {
        let tax = builtin_taxonomy();
        assert_eq!(tax.display_label(c("deduce")).unwrap(), "infer:deduce");
        assert_eq!(tax.display_label(c("train")).unwrap(), "infer:train");
        assert_eq!(tax.display_label(c("data")).unwrap(), "data");
        assert_eq!(tax.display_label(c("team")).unwrap(), "team");
        assert_eq!(tax.display_label(c("cfp")).unwrap(), "symbol:cfp");
        for concept in tax.concepts() {
            let label = tax.display_label(concept).unwrap();
            assert_eq!(tax.resolve_path(&label).unwrap(), concept);
        }
    }

    #[test]
    fn subsumption_is_a_preorder() {
        let tax = builtin_taxonomy();
        let all: Vec<_> = tax.concepts().collect();
        for &a in &all {
            assert!(tax.is_subconcept(a, a).unwrap());
            for &b in &all {
                let ab = tax.is_subconcept(a, b).unwrap();
                if ab && a != b {
                    // antisymmetry: a forest has no mutual subsumption
                    assert!(!tax.is_subconcept(b, a).unwrap());
                }
                for &cc in &all {
                    if ab && tax.is_subconcept(b, cc).unwrap() {
                        assert!(tax.is_subconcept(a, cc).unwrap(), "{a} {b} {cc}");
                    }
                }
            }
        }
    }

    #[test]
    fn full_paths_round_trip() {
        let tax = builtin_taxonomy();
        for concept in tax.concepts() {
            let path = tax.full_path(concept).unwrap();
            assert_eq!(tax.resolve_path(&path).unwrap(), concept, "{path}");
            assert!(tax.depth(concept).unwrap() <= MAX_DEPTH);
        }
        assert_eq!(
            tax.full_path(c("train")).unwrap(),
            "process:infer:induce:train"
        );
    }
}

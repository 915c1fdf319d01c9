//! Built-in design patterns: detection inside documents and instantiation
//! as fresh document fragments.
//!
//! Detection is subgraph matching modulo subsumption. A slot accepts any node
//! of the same kind whose concept is subsumed by the slot's concept; a
//! template edge is satisfied by any document edge of the same kind between
//! the bound nodes whose label (if the template has one) is subsumed by the
//! template label. Extra document nodes and edges are allowed.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::document::{is_identifier, Document, Edge, EdgeKind, Frame, Node, Role};
use crate::taxonomy::{builtin_taxonomy, ConceptRef, NodeKind, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub concept: ConceptRef,
}

impl Slot {
    pub fn kind(&self) -> NodeKind {
        self.concept.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateEdge {
    /// Slot indices.
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub label: Option<ConceptRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTemplate {
    pub name: String,
    pub summary: String,
    pub slots: Vec<Slot>,
    pub edges: Vec<TemplateEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("duplicate slot `{0}`")]
    DuplicateSlot(String),
    #[error("malformed edge `{0}`")]
    BadEdge(String),
}

impl PatternTemplate {
    /// Build a template from slot declarations `(name, concept)` and edge
    /// strings such as `"data -> gen"` or `"a => b [cfp]"`.
    pub fn new(
        name: &str,
        summary: &str,
        slots: &[(&str, &str)],
        edges: &[&str],
        tax: &Taxonomy,
    ) -> Result<PatternTemplate, TemplateError> {
        let mut built = Vec::new();
        for &(slot, concept) in slots {
            if built.iter().any(|s: &Slot| s.name == slot) {
                return Err(TemplateError::DuplicateSlot(slot.to_string()));
            }
            let concept = tax
                .lookup(concept)
                .ok_or_else(|| TemplateError::UnknownConcept(concept.to_string()))?;
            built.push(Slot {
                name: slot.to_string(),
                concept,
            });
        }
        let index = |name: &str| {
            built
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| TemplateError::UnknownSlot(name.to_string()))
        };
        let mut tedges = Vec::new();
        for &spec in edges {
            let bad = || TemplateError::BadEdge(spec.to_string());
            let (body, label) = match spec.split_once('[') {
                Some((body, rest)) => {
                    let label = rest.strip_suffix(']').ok_or_else(bad)?.trim();
                    let c = tax
                        .lookup(label)
                        .ok_or_else(|| TemplateError::UnknownConcept(label.to_string()))?;
                    (body, Some(c))
                }
                None => (spec, None),
            };
            let parts: Vec<&str> = body.split_whitespace().collect();
            let [from, arrow, to] = parts[..] else {
                return Err(bad());
            };
            let kind = match arrow {
                "->" => EdgeKind::Flow,
                "-initiates->" => EdgeKind::Role(Role::Initiates),
                "-supports->" => EdgeKind::Role(Role::Supports),
                "~>" => EdgeKind::Influence,
                "=>" => EdgeKind::Message,
                _ => return Err(bad()),
            };
            tedges.push(TemplateEdge {
                from: index(from)?,
                to: index(to)?,
                kind,
                label,
            });
        }
        Ok(PatternTemplate {
            name: name.to_string(),
            summary: summary.to_string(),
            slots: built,
            edges: tedges,
        })
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }

    /// Slot permutations that map the template onto itself. Always contains
    /// the identity.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.slots.len();
        let edge_set: BTreeSet<(usize, usize, EdgeKind, Option<ConceptRef>)> = self
            .edges
            .iter()
            .map(|e| (e.from, e.to, e.kind, e.label))
            .collect();
        let mut out = Vec::new();
        let mut perm = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.extend_automorphism(&edge_set, &mut perm, &mut used, &mut out);
        out
    }

    fn extend_automorphism(
        &self,
        edge_set: &BTreeSet<(usize, usize, EdgeKind, Option<ConceptRef>)>,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = perm.len();
        if i == self.slots.len() {
            let mapped: BTreeSet<_> = edge_set
                .iter()
                .map(|&(f, t, k, l)| (perm[f], perm[t], k, l))
                .collect();
            if &mapped == edge_set {
                out.push(perm.clone());
            }
            return;
        }
        for j in 0..self.slots.len() {
            if !used[j] && self.slots[j].concept == self.slots[i].concept {
                used[j] = true;
                perm.push(j);
                self.extend_automorphism(edge_set, perm, used, out);
                perm.pop();
                used[j] = false;
            }
        }
    }
}

/// (name, description, slots as (role, concept), edge lines).
type PatternDef = (&'static str, &'static str, &'static [(&'static str, &'static str)], &'static [&'static str]);

/// The catalogue shipped with the toolchain, in presentation order.
pub fn builtin_patterns() -> &'static [PatternTemplate] {
    static PATTERNS: OnceLock<Vec<PatternTemplate>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let tax = builtin_taxonomy();
        let defs: &[PatternDef] = &[
            (
                "1a-train",
                "data is induced into a statistical model",
                &[("data", "data"), ("gen", "induce"), ("model", "statistical")],
                &["data -> gen", "gen -> model"],
            ),
            (
                "2a-apply",
                "a statistical model is applied deductively to data, yielding a symbol",
                &[
                    ("data", "data"),
                    ("apply", "deduce"),
                    ("model", "statistical"),
                    ("symbol", "symbol"),
                ],
                &["data -> apply", "model -> apply", "apply -> symbol"],
            ),
            (
                "3a-pipeline",
                "a model is trained on one dataset and then applied to another",
                &[
                    ("train_data", "data"),
                    ("gen", "induce"),
                    ("model", "statistical"),
                    ("data", "data"),
                    ("apply", "deduce"),
                    ("symbol", "symbol"),
                ],
                &[
                    "train_data -> gen",
                    "gen -> model",
                    "data -> apply",
                    "model -> apply",
                    "apply -> symbol",
                ],
            ),
            (
                "federated-learning",
                "a team trains partial models on local data, a requester merges them",
                &[
                    ("requester", "actor"),
                    ("team", "team"),
                    ("code", "code"),
                    ("local_data", "data"),
                    ("learn", "induce"),
                    ("partial", "partial"),
                    ("integrate", "transform"),
                    ("global", "statistical"),
                ],
                &[
                    "requester => team [request]",
                    "team => requester [reply]",
                    "code -> learn",
                    "local_data -> learn",
                    "learn -> partial",
                    "partial -> integrate",
                    "integrate -> global",
                    "requester -initiates-> integrate",
                    "team -initiates-> learn",
                ],
            ),
            (
                "bdi-loop",
                "sense, classify into beliefs, predict desires, plan intentions, act",
                &[
                    ("sense", "sense"),
                    ("observation", "data"),
                    ("classify", "classify"),
                    ("world_model", "world"),
                    ("beliefs", "symbol"),
                    ("predict", "predict"),
                    ("goal_model", "goal"),
                    ("desires", "symbol"),
                    ("plan", "plan"),
                    ("plan_model", "intention"),
                    ("intentions", "symbol"),
                    ("act", "act"),
                ],
                &[
                    "sense -> observation",
                    "observation -> classify",
                    "world_model -> classify",
                    "classify -> world_model",
                    "classify -> beliefs",
                    "beliefs -> predict",
                    "goal_model -> predict",
                    "predict -> desires",
                    "desires -> plan",
                    "plan_model -> plan",
                    "plan -> intentions",
                    "intentions -> act",
                ],
            ),
            (
                "contract-net",
                "call for proposals, proposals, assignment and result between an initiator and a team",
                &[("initiator", "actor"), ("team", "team")],
                &[
                    "initiator => team [cfp]",
                    "team => initiator [proposal]",
                    "initiator => team [assignment]",
                    "team => initiator [result]",
                ],
            ),
            (
                "distributed-planning",
                "job agents hand work orders to pool agents whose machines bid from capacity models",
                &[
                    ("job_agent", "agent"),
                    ("pool_agent", "agent"),
                    ("machines", "team"),
                    ("job", "job"),
                    ("capacity", "capacity"),
                    ("judge", "deduce"),
                    ("bid", "proposal"),
                ],
                &[
                    "job_agent => pool_agent [workorder]",
                    "pool_agent => machines [job]",
                    "machines => job_agent [result]",
                    "job -> judge",
                    "capacity -> judge",
                    "judge -> bid",
                    "machines -supports-> judge",
                ],
            ),
        ];
        defs.iter()
            .map(|&(name, summary, slots, edges)| {
                PatternTemplate::new(name, summary, slots, edges, tax).expect("builtin pattern")
            })
            .collect()
    })
}

pub fn find_pattern(name: &str) -> Option<&'static PatternTemplate> {
    builtin_patterns().iter().find(|p| p.name == name)
}

/// One occurrence of a pattern: slot names bound to node ids, in slot order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub pattern: String,
    pub binding: Vec<(String, String)>,
}

impl Match {
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.binding.iter().map(|(_, n)| n.as_str())
    }

    pub fn node_for(&self, slot: &str) -> Option<&str> {
        self.binding
            .iter()
            .find(|(s, _)| s == slot)
            .map(|(_, n)| n.as_str())
    }
}

struct OrderedBinding<'a>(&'a [(String, String)]);

impl Serialize for OrderedBinding<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (slot, node) in self.0 {
            map.serialize_entry(slot, node)?;
        }
        map.end()
    }
}

impl Serialize for Match {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Match", 2)?;
        s.serialize_field("binding", &OrderedBinding(&self.binding))?;
        s.serialize_field("pattern", &self.pattern)?;
        s.end()
    }
}

type LabeledEdges = Vec<(EdgeKind, Option<ConceptRef>)>;

struct Target<'a> {
    concepts: Vec<Option<ConceptRef>>,
    kinds: Vec<NodeKind>,
    /// (from, to) -> edges between them as (kind, resolved label).
    adjacency: BTreeMap<(usize, usize), LabeledEdges>,
    tax: &'a Taxonomy,
}

impl Target<'_> {
    fn edge_satisfied(&self, from: usize, to: usize, edge: &TemplateEdge) -> bool {
        let Some(found) = self.adjacency.get(&(from, to)) else {
            return false;
        };
        found.iter().any(|&(kind, label)| {
            kind == edge.kind
                && match edge.label {
                    None => true,
                    Some(want) => label.is_some_and(|l| self.tax.is_subconcept(l, want).unwrap_or(false)),
                }
        })
    }
}

/// Every occurrence of `pattern` in `doc`, one per class of bindings that
/// differ only by a symmetry of the template, sorted by bound node ids.
/// Nodes or labels that do not resolve against `tax` never match.
pub fn detect(doc: &Document, pattern: &PatternTemplate, tax: &Taxonomy) -> Vec<Match> {
    let nodes = doc.nodes();
    let target = Target {
        concepts: nodes.iter().map(|n| tax.resolve_path(&n.concept).ok()).collect(),
        kinds: nodes.iter().map(|n| n.kind).collect(),
        adjacency: {
            let mut adj: BTreeMap<(usize, usize), Vec<_>> = BTreeMap::new();
            for e in doc.edges() {
                let f = doc.node_position(&e.from).expect("built document");
                let t = doc.node_position(&e.to).expect("built document");
                let label = e.label.as_deref().and_then(|l| tax.resolve_path(l).ok());
                adj.entry((f, t)).or_default().push((e.kind, label));
            }
            adj
        },
        tax,
    };

    let candidates: Vec<Vec<usize>> = pattern
        .slots
        .iter()
        .map(|slot| {
            (0..nodes.len())
                .filter(|&i| {
                    target.kinds[i] == slot.kind()
                        && target.concepts[i]
                            .is_some_and(|c| tax.is_subconcept(c, slot.concept).unwrap_or(false))
                })
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Vec::new();
    }

    let order = search_order(pattern, &candidates);
    let mut assignment = vec![usize::MAX; pattern.slots.len()];
    let mut used = vec![false; nodes.len()];
    let mut found = Vec::new();
    extend(pattern, &target, &candidates, &order, 0, &mut assignment, &mut used, &mut found);

    let autos = pattern.automorphisms();
    let canonical: BTreeSet<Vec<&str>> = found
        .iter()
        .map(|b| {
            autos
                .iter()
                .map(|sigma| sigma.iter().map(|&j| nodes[b[j]].id.as_str()).collect::<Vec<_>>())
                .min()
                .expect("identity is an automorphism")
        })
        .collect();

    canonical
        .into_iter()
        .map(|ids| Match {
            pattern: pattern.name.clone(),
            binding: pattern
                .slots
                .iter()
                .zip(ids)
                .map(|(s, id)| (s.name.clone(), id.to_string()))
                .collect(),
        })
        .collect()
}

/// Most constrained slot first, then prefer slots connected to ones already
/// placed so edge checks prune early.
fn search_order(pattern: &PatternTemplate, candidates: &[Vec<usize>]) -> Vec<usize> {
    let n = pattern.slots.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&i| !placed[i])
            .min_by_key(|&i| {
                let linked = pattern.edges.iter().any(|e| {
                    (e.from == i && placed[e.to]) || (e.to == i && placed[e.from])
                });
                (!linked, candidates[i].len(), i)
            })
            .expect("unplaced slot remains");
        placed[next] = true;
        order.push(next);
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn extend(
    pattern: &PatternTemplate,
    target: &Target<'_>,
    candidates: &[Vec<usize>],
    order: &[usize],
    depth: usize,
    assignment: &mut [usize],
    used: &mut [bool],
    found: &mut Vec<Vec<usize>>,
) {
    if depth == order.len() {
        found.push(assignment.to_vec());
        return;
    }
    let slot = order[depth];
    for &node in &candidates[slot] {
        if used[node] {
            continue;
        }
        assignment[slot] = node;
        let consistent = pattern.edges.iter().all(|e| {
            let involved = e.from == slot || e.to == slot;
            let other = if e.from == slot { e.to } else { e.from };
            !involved
                || (other != slot && assignment[other] == usize::MAX)
                || target.edge_satisfied(assignment[e.from], assignment[e.to], e)
        });
        if consistent {
            used[node] = true;
            extend(pattern, target, candidates, order, depth + 1, assignment, used, found);
            used[node] = false;
        }
        assignment[slot] = usize::MAX;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("prefix `{0}` is not an identifier")]
    BadPrefix(String),
}

/// A fresh fragment: one node per slot named `<prefix>_<slot>`, the
/// template's edges, and a pattern frame around all of it.
pub fn instantiate(
    pattern: &PatternTemplate,
    prefix: &str,
    tax: &Taxonomy,
) -> Result<Document, InstantiateError> {
    if !is_identifier(prefix) {
        return Err(InstantiateError::BadPrefix(prefix.to_string()));
    }
    let id = |slot: usize| format!("{prefix}_{}", pattern.slots[slot].name);
    let label = |c: ConceptRef| tax.display_label(c).expect("template concept");
    let nodes: Vec<Node> = pattern
        .slots
        .iter()
        .enumerate()
        .map(|(i, s)| Node::new(id(i), s.kind(), label(s.concept)))
        .collect();
    let edges = pattern
        .edges
        .iter()
        .map(|e| {
            let edge = Edge::new(id(e.from), e.kind, id(e.to));
            match e.label {
                Some(l) => edge.labeled(label(l)),
                None => edge,
            }
        })
        .collect();
    let frame = Frame::pattern(&pattern.name, (0..pattern.slots.len()).map(id));
    Ok(Document::build(format!("{} {prefix}", pattern.name), nodes, edges, vec![frame])
        .expect("template ids are distinct identifiers"))
}

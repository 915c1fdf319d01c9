//! DOT output.
//!
//! Layout of the emitted text: graph attributes, one statement per document
//! node, zoom clusters (nested as the frames nest), pattern clusters, then
//! one statement per edge. Clusters only reference nodes by id, so hiding a
//! family of frames removes whole cluster blocks and nothing else.
//!
//! A cluster cannot pin its badge to a corner, so each zoom cluster starts
//! with a small triangle marker node named `badge.<badge id>`. The badge
//! node itself stays where the rest of the diagram puts it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::document::{Document, EdgeKind, Frame};
use crate::taxonomy::NodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RankDir {
    #[default]
    LR,
    TB,
}

impl RankDir {
    pub fn as_str(self) -> &'static str {
        match self {
            RankDir::LR => "LR",
            RankDir::TB => "TB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub show_pattern_frames: bool,
    pub show_zoom_frames: bool,
    pub rankdir: RankDir,
}

impl Default for RenderOptions {
    fn default() -> RenderOptions {
        RenderOptions {
            show_pattern_frames: true,
            show_zoom_frames: true,
            rankdir: RankDir::LR,
        }
    }
}

pub fn shape(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Instance => "box",
        NodeKind::Model => "hexagon",
        NodeKind::Process => "ellipse",
        NodeKind::Actor => "triangle",
    }
}

pub const ZOOM_STYLE: &str = "style=filled, fillcolor=lightgrey";
pub const PATTERN_STYLE: &str = "style=\"dashed,filled\", fillcolor=grey";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn to_dot(doc: &Document, opts: &RenderOptions) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(doc.name())).unwrap();
    writeln!(out, "  rankdir={};", opts.rankdir.as_str()).unwrap();
    writeln!(out, "  node [fontname=\"Helvetica\", fontsize=10];").unwrap();
    writeln!(out, "  edge [fontname=\"Helvetica\", fontsize=9];").unwrap();

    for node in doc.nodes() {
        let label = node.display_name.as_deref().unwrap_or(&node.concept);
        writeln!(
            out,
            "  {} [shape={}, label={}];",
            quote(&node.id),
            shape(node.kind),
            quote(label)
        )
        .unwrap();
    }

    if opts.show_zoom_frames {
        write_zoom_clusters(doc, &mut out);
    }
    if opts.show_pattern_frames {
        for frame in doc.frames().iter().filter(|f| !f.is_zoom()) {
            writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", frame.id))).unwrap();
            writeln!(
                out,
                "    graph [{PATTERN_STYLE}, label={}];",
                quote(frame.pattern_name().unwrap_or_default())
            )
            .unwrap();
            for m in &frame.members {
                writeln!(out, "    {};", quote(m)).unwrap();
            }
            writeln!(out, "  }}").unwrap();
        }
    }

    for edge in doc.edges() {
        let mut attrs = Vec::new();
        match edge.kind {
            EdgeKind::Flow => {}
            EdgeKind::Role(role) => attrs.push(format!("label={}", quote(role.as_str()))),
            EdgeKind::Influence => attrs.push("style=dotted".to_string()),
            EdgeKind::Message => attrs.push("style=bold".to_string()),
        }
        if let Some(label) = &edge.label {
            attrs.insert(0, format!("label={}", quote(label)));
        }
        let attrs = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        writeln!(out, "  {} -> {}{attrs};", quote(&edge.from), quote(&edge.to)).unwrap();
    }
    out.push_str("}\n");
    out
}

fn write_zoom_clusters(doc: &Document, out: &mut String) {
    let zooms: Vec<&Frame> = doc.frames().iter().filter(|f| f.is_zoom()).collect();
    let contents: BTreeMap<&str, BTreeSet<String>> = zooms
        .iter()
        .map(|f| (f.id.as_str(), doc.frame_contents(&f.id).expect("frame exists")))
        .collect();
    // A frame's parent is the smallest other frame whose contents include its badge.
    let parent_of = |f: &Frame| -> Option<&str> {
        let badge = f.badge().expect("zoom frame");
        zooms
            .iter()
            .filter(|g| g.id != f.id && contents[g.id.as_str()].contains(badge))
            .min_by_key(|g| (contents[g.id.as_str()].len(), g.id.as_str()))
            .map(|g| g.id.as_str())
    };
    let mut children: BTreeMap<Option<&str>, Vec<&Frame>> = BTreeMap::new();
    for f in &zooms {
        children.entry(parent_of(f)).or_default().push(f);
    }
    // Each node is listed in the innermost frame containing it.
    let mut home: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for node in doc.nodes() {
        let inner = zooms
            .iter()
            .filter(|f| contents[f.id.as_str()].contains(&node.id))
            .min_by_key(|f| (contents[f.id.as_str()].len(), f.id.as_str()));
        if let Some(f) = inner {
            home.entry(f.id.as_str()).or_default().push(&node.id);
        }
    }
    for root in children.get(&None).into_iter().flatten() {
        write_zoom(root, &children, &home, 1, out);
    }
}

fn write_zoom(
    frame: &Frame,
    children: &BTreeMap<Option<&str>, Vec<&Frame>>,
    home: &BTreeMap<&str, Vec<&str>>,
    depth: usize,
    out: &mut String,
) {
    let pad = "  ".repeat(depth);
    let badge = frame.badge().expect("zoom frame");
    writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", frame.id))).unwrap();
    writeln!(out, "{pad}  graph [{ZOOM_STYLE}, label=\"\"];").unwrap();
    writeln!(
        out,
        "{pad}  {} [shape=triangle, width=0.25, height=0.25, fixedsize=true, label=\"\", tooltip={}];",
        quote(&format!("badge.{badge}")),
        quote(badge)
    )
    .unwrap();
    for id in home.get(frame.id.as_str()).into_iter().flatten() {
        writeln!(out, "{pad}  {};", quote(id)).unwrap();
    }
    for child in children.get(&Some(frame.id.as_str())).into_iter().flatten() {
        write_zoom(child, children, home, depth + 1, out);
    }
    writeln!(out, "{pad}}}").unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    const SRC: &str = "diagram \"t\" {\n\
        team crew { actor a1 : agent  actor a2 : agent }\n\
        actor boss : human\n\
        model m : semantic:world\n\
        process p : deduce:reason\n\
        instance d : data\n\
        d -> p  m -> p  p ~> m  boss -initiates-> p  boss => crew [cfp]  a1 -supports-> p\n\
        pattern \"contract-net\" { boss, crew }\n\
        }";

    #[test]
    fn shapes_and_styles() {
        let doc = parse(SRC).unwrap();
        let dot = to_dot(&doc, &RenderOptions::default());
        assert!(dot.contains("\"m\" [shape=hexagon, label=\"semantic:world\"];"));
        assert!(dot.contains("\"d\" [shape=box"));
        assert!(dot.contains("\"p\" [shape=ellipse"));
        assert!(dot.contains("\"boss\" [shape=triangle"));
        assert!(dot.contains("\"p\" -> \"m\" [style=dotted];"));
        assert!(dot.contains("\"boss\" -> \"crew\" [label=\"cfp\", style=bold];"));
        assert!(dot.contains("\"boss\" -> \"p\" [label=\"initiates\"];"));
        assert!(dot.contains(ZOOM_STYLE));
        assert!(dot.contains(PATTERN_STYLE));
        assert!(dot.ends_with("}\n"));
    }

    #[test]
    fn badge_marker_comes_first() {
        let doc = parse(SRC).unwrap();
        let dot = to_dot(&doc, &RenderOptions::default());
        let lines: Vec<&str> = dot.lines().collect();
        let start = lines.iter().position(|l| l.contains("cluster_zoom:crew")).unwrap();
        assert!(lines[start + 2].contains("\"badge.crew\" [shape=triangle"));
        assert_eq!(lines[start + 3].trim(), "\"a1\";");
    }

    #[test]
    fn toggles_only_remove_clusters() {
        let doc = parse(SRC).unwrap();
        let full = to_dot(&doc, &RenderOptions::default());
        let bare = to_dot(
            &doc,
            &RenderOptions {
                show_pattern_frames: false,
                ..RenderOptions::default()
            },
        );
        assert!(!bare.contains("dashed"));
        let statements = |s: &str| -> Vec<String> {
            s.lines()
                .filter(|l| l.starts_with("  \"") && (l.contains("[shape=") || l.contains("->")))
                .map(str::to_string)
                .collect()
        };
        assert_eq!(statements(&full), statements(&bare));
    }

    #[test]
    fn rankdir_and_quoting() {
        let doc = parse("diagram \"say \\\"hi\\\"\" { instance d : data as \"a \\\"b\\\"\" }").unwrap();
        let dot = to_dot(
            &doc,
            &RenderOptions {
                rankdir: RankDir::TB,
                ..RenderOptions::default()
            },
        );
        assert!(dot.starts_with("digraph \"say \\\"hi\\\"\" {\n  rankdir=TB;\n"));
        assert!(dot.contains("label=\"a \\\"b\\\"\""));
    }
}

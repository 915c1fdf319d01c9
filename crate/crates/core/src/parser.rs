//! Recursive-descent parser for the `.bxl` diagram language, and the
//! canonical formatter.
//!
//! ```text
//! document   := "diagram" STRING "{" item* "}"
//! item       := nodeDecl | teamDecl | edgeDecl | frameDecl
//! nodeDecl   := ("instance"|"model"|"process"|"actor") IDENT ":" labelPath ("as" STRING)?
//! teamDecl   := "team" IDENT "{" (nodeDecl | teamDecl)* "}"
//! labelPath  := IDENT (":" IDENT)*
//! edgeDecl   := IDENT arrow IDENT ("[" labelPath "]")?
//! arrow      := "->" | "~>" | "=>" | "-initiates->" | "-supports->"
//! frameDecl  := "zoom" IDENT "{" memberList? "}" | "pattern" STRING "{" memberList? "}"
//! memberList := IDENT ("," IDENT)*
//! ```
//!
//! The parser collects errors and resynchronizes at item boundaries, so one
//! pass reports every malformed item. Frame ids are not written in the text;
//! they are derived from the badge (zoom) or name and members (pattern).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, SourceSpan};
use crate::document::{is_keyword, BuildError, Document, Edge, EdgeKind, Frame, Node, Role};
use crate::taxonomy::NodeKind;

/// Concept label given to actors declared with `team` blocks.
pub const TEAM_LABEL: &str = "actor:team";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Arrow(EdgeKind),
    Bad(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow(k) => format!("`{}`", k.arrow()),
            Tok::Bad(s) => s.clone(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let starts_with = |i: usize, s: &str| s.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));

    while i < chars.len() {
        let c = chars[i];
        let span_at = |len: usize| SourceSpan::new(line, col, len);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if starts_with(i, "//") {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token { tok, span: span_at(1) });
            i += 1;
            col += 1;
            continue;
        }
        let arrows = [
            ("-initiates->", EdgeKind::Role(Role::Initiates)),
            ("-supports->", EdgeKind::Role(Role::Supports)),
            ("->", EdgeKind::Flow),
            ("~>", EdgeKind::Influence),
            ("=>", EdgeKind::Message),
        ];
        if let Some((glyph, kind)) = arrows.iter().find(|(g, _)| starts_with(i, g)) {
            let len = glyph.chars().count();
            tokens.push(Token {
                tok: Tok::Arrow(*kind),
                span: span_at(len),
            });
            i += len;
            col += len;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            tokens.push(Token {
                tok: Tok::Ident(word),
                span: span_at(i - start),
            });
            col += i - start;
            continue;
        }
        if c == '"' {
            let start = i;
            let mut value = String::new();
            i += 1;
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                match chars[i] {
                    '"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    '\\' if i + 1 < chars.len() => {
                        value.push(match chars[i + 1] {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        i += 2;
                    }
                    other => {
                        value.push(other);
                        i += 1;
                    }
                }
            }
            let len = i - start;
            let tok = if closed {
                Tok::Str(value)
            } else {
                Tok::Bad("unterminated string literal".into())
            };
            tokens.push(Token { tok, span: span_at(len) });
            col += len;
            continue;
        }
        // A run of characters no token starts with.
        let start = i;
        while i < chars.len()
            && !chars[i].is_whitespace()
            && !chars[i].is_ascii_alphanumeric()
            && !"{}[]:,\"".contains(chars[i])
            && !arrows.iter().any(|(g, _)| starts_with(i, g))
        {
            i += 1;
        }
        if i == start {
            i += 1;
        }
        let bad: String = chars[start..i].iter().collect();
        tokens.push(Token {
            tok: Tok::Bad(format!("unexpected character sequence `{bad}`")),
            span: span_at(i - start),
        });
        col += i - start;
    }
    let eof_span = match tokens.last() {
        Some(t) => t.span,
        None => SourceSpan::new(1, 1, 0),
    };
    tokens.push(Token {
        tok: Tok::Eof,
        span: eof_span,
    });
    tokens
}

/// Marker for an item that failed; its diagnostic is already recorded.
struct Failed;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    frames: Vec<Frame>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Option<SourceSpan> {
        self.pos.checked_sub(1).map(|i| self.tokens[i].span)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, code: Code, span: SourceSpan, message: impl Into<String>) -> Failed {
        let element = format!("{}:{}", span.line, span.column);
        self.diags
            .push(Diagnostic::new(code, element, message).with_span(Some(span)));
        Failed
    }

    fn unexpected(&mut self, expected: &str) -> Failed {
        let span = self.span();
        let msg = match self.peek() {
            Tok::Bad(reason) => format!("{reason}; expected {expected}"),
            other => format!("unexpected {}; expected {expected}", other.describe()),
        };
        self.error(Code::P001, span, msg)
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), Failed> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn expect_id(&mut self, what: &str) -> Result<(String, SourceSpan), Failed> {
        if let Tok::Ident(w) = self.peek() {
            if is_keyword(w) {
                let w = w.clone();
                let prev = self.prev_span();
                if prev.is_some_and(|p| p.line != self.span().line) {
                    // A keyword opening the next line most likely starts the
                    // next item; the current one is missing its tail.
                    let msg = format!("missing {what} at end of line");
                    return Err(self.error(Code::P001, prev.unwrap(), msg));
                }
                let span = self.bump().span;
                let msg = format!("keyword `{w}` cannot be used as {what}");
                return Err(self.error(Code::P001, span, msg));
            }
        }
        self.expect_ident(what)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, Failed> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn at_item_start(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) if is_keyword(w) && w != "as" && w != "diagram" => true,
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Arrow(_)),
            Tok::RBrace | Tok::Eof => true,
            _ => false,
        }
    }

    /// Skip to the next plausible item boundary: an item keyword, an edge,
    /// a closing brace or the first token of a later line. If the failed item
    /// consumed nothing, at least one token is dropped so parsing advances.
    fn recover(&mut self, item_start: usize) {
        if self.pos == item_start && !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            self.bump();
        }
        let line = self.prev_span().map_or(0, |s| s.line);
        while !self.at_item_start() && self.span().line == line {
            self.bump();
        }
    }

    fn parse_document(&mut self) -> Option<String> {
        match self.peek() {
            Tok::Ident(w) if w == "diagram" => {
                self.bump();
            }
            _ => {
                self.unexpected("`diagram`");
                return None;
            }
        }
        let name = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                s
            }
            _ => {
                self.unexpected("diagram name string");
                return None;
            }
        };
        let open = match self.expect(Tok::LBrace, "`{`") {
            Ok(span) => span,
            Err(Failed) => return None,
        };
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error(
                        Code::P002,
                        open,
                        "unterminated block: `{` of diagram is never closed",
                    );
                    return Some(name);
                }
                _ => {
                    let start = self.pos;
                    if self.parse_item().is_err() {
                        self.recover(start);
                    }
                }
            }
        }
        if *self.peek() != Tok::Eof {
            self.unexpected("end of input after the diagram's closing `}`");
        }
        Some(name)
    }

    fn parse_item(&mut self) -> Result<(), Failed> {
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unexpected("a declaration, edge or frame")),
        };
        if let Some(kind) = NodeKind::from_keyword(&word) {
            self.bump();
            let node = self.parse_node_rest(kind)?;
            self.nodes.push(node);
            return Ok(());
        }
        match word.as_str() {
            "team" => self.parse_team().map(|_| ()),
            "zoom" => {
                self.bump();
                let (badge, span) = self.expect_id("zoom badge id")?;
                let members = self.parse_members()?;
                let mut frame = Frame::zoom(badge, members);
                frame.span = Some(span);
                self.frames.push(frame);
                Ok(())
            }
            "pattern" => {
                self.bump();
                let (name, span) = match self.peek().clone() {
                    Tok::Str(s) => (s, self.bump().span),
                    _ => return Err(self.unexpected("pattern name string")),
                };
                let members = self.parse_members()?;
                let mut frame = Frame::pattern(name, members);
                frame.span = Some(span);
                self.frames.push(frame);
                Ok(())
            }
            _ => self.parse_edge(),
        }
    }

    fn parse_label(&mut self) -> Result<String, Failed> {
        let (mut label, _) = self.expect_ident("concept label")?;
        while *self.peek() == Tok::Colon {
            self.bump();
            let (seg, _) = self.expect_ident("concept label segment")?;
            label.push(':');
            label.push_str(&seg);
        }
        Ok(label)
    }

    fn parse_node_rest(&mut self, kind: NodeKind) -> Result<Node, Failed> {
        let (id, span) = self.expect_id("node id")?;
        self.expect(Tok::Colon, "`:` before the concept label")?;
        let concept = self.parse_label()?;
        let mut node = Node::new(id, kind, concept);
        node.span = Some(span);
        if matches!(self.peek(), Tok::Ident(w) if w == "as") {
            self.bump();
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    node.display_name = Some(s);
                }
                _ => return Err(self.unexpected("display name string after `as`")),
            }
        }
        Ok(node)
    }

    /// Parses a team block and returns the team's id.
    fn parse_team(&mut self) -> Result<String, Failed> {
        self.bump();
        let (id, span) = self.expect_id("team id")?;
        let mut team = Node::new(id.clone(), NodeKind::Actor, TEAM_LABEL);
        team.span = Some(span);
        self.nodes.push(team);
        let open = self.expect(Tok::LBrace, "`{` after team id")?;
        let mut members = BTreeSet::new();
        loop {
            let start = self.pos;
            let word = match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    return Err(self.error(
                        Code::P002,
                        open,
                        format!("unterminated block: team `{id}` is never closed"),
                    ))
                }
                Tok::Ident(w) => Some(w.clone()),
                _ => None,
            };
            let result = match word.as_deref() {
                Some("team") => self.parse_team().map(|inner| {
                    members.insert(inner);
                }),
                Some(w) => match NodeKind::from_keyword(w) {
                    Some(kind) => {
                        self.bump();
                        self.parse_node_rest(kind).map(|node| {
                            members.insert(node.id.clone());
                            self.nodes.push(node);
                        })
                    }
                    None => Err(self.unexpected("a node or team declaration inside team block")),
                },
                None => Err(self.unexpected("a node or team declaration inside team block")),
            };
            if result.is_err() {
                self.recover(start);
            }
        }
        let mut frame = Frame::zoom(id.clone(), members);
        frame.span = Some(span);
        self.frames.push(frame);
        Ok(id)
    }

    fn parse_members(&mut self) -> Result<BTreeSet<String>, Failed> {
        let open = self.expect(Tok::LBrace, "`{` before member list")?;
        let mut members = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(members);
        }
        loop {
            if *self.peek() == Tok::Eof {
                return Err(self.error(Code::P002, open, "unterminated block: member list is never closed"));
            }
            let step = self.expect_id("member id").and_then(|(m, _)| {
                members.insert(m);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                        Ok(false)
                    }
                    Tok::RBrace => {
                        self.bump();
                        Ok(true)
                    }
                    Tok::Eof => Err(Failed),
                    _ => Err(self.unexpected("`,` or `}` in member list")),
                }
            });
            match step {
                Ok(true) => return Ok(members),
                Ok(false) => {}
                Err(Failed) => {
                    // Skip the rest of this member list.
                    while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                        self.bump();
                    }
                    if *self.peek() == Tok::RBrace {
                        self.bump();
                    } else {
                        self.error(Code::P002, open, "unterminated block: member list is never closed");
                    }
                    return Err(Failed);
                }
            }
        }
    }

    fn parse_edge(&mut self) -> Result<(), Failed> {
        let (from, _) = self.expect_id("edge source id")?;
        let (kind, arrow_span) = match self.peek() {
            Tok::Arrow(k) => {
                let k = *k;
                (k, self.bump().span)
            }
            _ => return Err(self.unexpected("an arrow (`->`, `~>`, `=>`, `-initiates->`, `-supports->`)")),
        };
        let (to, _) = self.expect_id("edge target id")?;
        let mut edge = Edge::new(from, kind, to);
        edge.span = Some(arrow_span);
        if *self.peek() == Tok::LBracket {
            self.bump();
            edge.label = Some(self.parse_label()?);
            self.expect(Tok::RBracket, "`]` after edge label")?;
        }
        if kind == EdgeKind::Message && edge.label.is_none() {
            return Err(self.error(
                Code::P003,
                arrow_span,
                "message arrow `=>` requires a `[symbol]` label",
            ));
        }
        self.edges.push(edge);
        Ok(())
    }

    fn build_diagnostics(&self, errors: Vec<BuildError>) -> Vec<Diagnostic> {
        let mut spans: BTreeMap<String, Vec<SourceSpan>> = BTreeMap::new();
        for n in &self.nodes {
            spans.entry(n.id.clone()).or_default().extend(n.span);
        }
        for f in &self.frames {
            spans.entry(f.id.clone()).or_default().extend(f.span);
        }
        for e in &self.edges {
            spans.entry(e.element_id()).or_default().extend(e.span);
        }
        let mut badge_spans: BTreeMap<&str, Vec<SourceSpan>> = BTreeMap::new();
        for f in &self.frames {
            if let Some(b) = f.badge() {
                badge_spans.entry(b).or_default().extend(f.span);
            }
        }
        let nth = |map: &BTreeMap<String, Vec<SourceSpan>>, key: &str, i: usize| {
            map.get(key).and_then(|v| v.get(i).or(v.first()).copied())
        };
        errors
            .into_iter()
            .map(|err| {
                let (code, span) = match &err {
                    BuildError::DuplicateId(id) => (Code::P004, nth(&spans, id, 1)),
                    BuildError::InvalidId(id) => (Code::P001, nth(&spans, id, 0)),
                    BuildError::DanglingRef { owner, .. } => (Code::P005, nth(&spans, owner, 0)),
                    BuildError::DanglingBadge { frame, .. } => (Code::E006, nth(&spans, frame, 0)),
                    BuildError::DuplicateBadge { badge } => (
                        Code::E006,
                        badge_spans.get(badge.as_str()).and_then(|v| v.get(1).copied()),
                    ),
                    BuildError::FrameOverlap { second, .. } => (Code::E008, nth(&spans, second, 0)),
                    BuildError::FrameCycle(frame) => (Code::E008, nth(&spans, frame, 0)),
                };
                Diagnostic::new(code, err.subject(), err.to_string()).with_span(span)
            })
            .collect()
    }
}

/// Parse `.bxl` text into a document, or return every error found.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let mut p = Parser {
        tokens: lex(text),
        pos: 0,
        diags: Vec::new(),
        nodes: Vec::new(),
        edges: Vec::new(),
        frames: Vec::new(),
    };
    let name = p.parse_document();
    if !p.diags.is_empty() || name.is_none() {
        sort_diagnostics(&mut p.diags);
        return Err(p.diags);
    }
    let name = name.expect("checked above");
    match Document::build(name, p.nodes.clone(), p.edges.clone(), p.frames.clone()) {
        Ok(doc) => Ok(doc),
        Err(errors) => {
            let mut diags = p.build_diagnostics(errors);
            sort_diagnostics(&mut diags);
            Err(diags)
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

const INDENT: &str = "    ";

/// Zoom frames that print as `team` blocks: badged by an unnamed
/// `actor:team` node, not containing their own badge, and sharing no
/// member with another such frame.
fn team_blocks(doc: &Document) -> BTreeMap<&str, &Frame> {
    let candidates: Vec<&Frame> = doc
        .frames()
        .iter()
        .filter(|f| {
            let Some(badge) = f.badge() else { return false };
            let node = doc.node(badge).expect("badge resolves");
            node.kind == NodeKind::Actor
                && node.concept == TEAM_LABEL
                && node.display_name.is_none()
                && !f.members.contains(badge)
        })
        .collect();
    let mut claims: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &candidates {
        for m in &f.members {
            *claims.entry(m.as_str()).or_default() += 1;
        }
    }
    candidates
        .into_iter()
        .filter(|f| f.members.iter().all(|m| claims[m.as_str()] == 1))
        .map(|f| (f.badge().expect("zoom"), f))
        .collect()
}

fn write_node(out: &mut String, depth: usize, node: &Node) {
    let _ = write!(
        out,
        "{}{} {} : {}",
        INDENT.repeat(depth),
        node.kind.as_str(),
        node.id,
        node.concept
    );
    if let Some(name) = &node.display_name {
        let _ = write!(out, " as {}", quote(name));
    }
    out.push('\n');
}

fn write_node_entry(
    out: &mut String,
    depth: usize,
    doc: &Document,
    teams: &BTreeMap<&str, &Frame>,
    node: &Node,
) {
    let Some(frame) = teams.get(node.id.as_str()) else {
        write_node(out, depth, node);
        return;
    };
    let pad = INDENT.repeat(depth);
    if frame.members.is_empty() {
        let _ = writeln!(out, "{pad}team {} {{}}", node.id);
        return;
    }
    let _ = writeln!(out, "{pad}team {} {{", node.id);
    for m in &frame.members {
        let member = doc.node(m).expect("member resolves");
        write_node_entry(out, depth + 1, doc, teams, member);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn member_list(members: &BTreeSet<String>) -> String {
    if members.is_empty() {
        "{}".to_string()
    } else {
        format!("{{ {} }}", members.iter().cloned().collect::<Vec<_>>().join(", "))
    }
}

/// Canonical text: nodes, then edges, then frames, each sorted by id.
pub fn format(doc: &Document) -> String {
    let teams = team_blocks(doc);
    let nested: BTreeSet<&str> = teams
        .values()
        .flat_map(|f| f.members.iter().map(String::as_str))
        .collect();

    let mut sections: Vec<String> = Vec::new();
    let mut nodes = String::new();
    for node in doc.nodes().iter().filter(|n| !nested.contains(n.id.as_str())) {
        write_node_entry(&mut nodes, 1, doc, &teams, node);
    }
    sections.push(nodes);

    let mut edges = String::new();
    for e in doc.edges() {
        let _ = write!(edges, "{INDENT}{} {} {}", e.from, e.kind.arrow(), e.to);
        if let Some(label) = &e.label {
            let _ = write!(edges, " [{label}]");
        }
        edges.push('\n');
    }
    sections.push(edges);

    let mut frames = String::new();
    for f in doc.frames() {
        match f.badge() {
            Some(badge) if teams.contains_key(badge) => {}
            Some(badge) => {
                let _ = writeln!(frames, "{INDENT}zoom {badge} {}", member_list(&f.members));
            }
            None => {
                let name = f.pattern_name().expect("pattern frame");
                let _ = writeln!(frames, "{INDENT}pattern {} {}", quote(name), member_list(&f.members));
            }
        }
    }
    sections.push(frames);

    let body: Vec<String> = sections.into_iter().filter(|s| !s.is_empty()).collect();
    format!("diagram {} {{\n{}}}\n", quote(doc.name()), body.join("\n"))
}

//! Stable-coded findings shared by the parser, the document builder and the
//! validator.

use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based position of an element in `.bxl` source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    /// Length in characters.
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> SourceSpan {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// The published code table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Unexpected token.
    P001,
    /// Unterminated block.
    P002,
    /// Message arrow without a `[symbol]` label.
    P003,
    /// Duplicate element id.
    P004,
    /// Edge or frame member refers to an undeclared node.
    P005,
    /// Unknown concept path.
    E001,
    /// Node kind keyword disagrees with the concept's root.
    E002,
    /// Label segment is not a descendant of its predecessor.
    E003,
    /// Edge not allowed by the legality table.
    E004,
    /// Message label missing or not a symbol concept.
    E005,
    /// Zoom badge missing, dangling or shared by two frames.
    E006,
    /// Zoom frame of an individual actor contains actors.
    E007,
    /// Zoom frames partially overlap or nest cyclically.
    E008,
    /// Isolated node.
    W001,
    /// Pattern frame matches no built-in pattern.
    W002,
}

impl Code {
    pub const ALL: [Code; 15] = [
        Code::P001,
        Code::P002,
        Code::P003,
        Code::P004,
        Code::P005,
        Code::E001,
        Code::E002,
        Code::E003,
        Code::E004,
        Code::E005,
        Code::E006,
        Code::E007,
        Code::E008,
        Code::W001,
        Code::W002,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::P001 => "P001",
            Code::P002 => "P002",
            Code::P003 => "P003",
            Code::P004 => "P004",
            Code::P005 => "P005",
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E004 => "E004",
            Code::E005 => "E005",
            Code::E006 => "E006",
            Code::E007 => "E007",
            Code::E008 => "E008",
            Code::W001 => "W001",
            Code::W002 => "W002",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        Code::ALL.into_iter().find(|c| c.as_str() == s)
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::W001 | Code::W002 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    /// Id of the offending element, used as the final sort key.
    pub element: String,
}

impl Diagnostic {
    pub fn new(code: Code, element: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            severity: code.severity(),
            message: message.into(),
            span: None,
            element: element.into(),
        }
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Diagnostic {
        self.span = span;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    fn sort_key(&self) -> (Severity, Code, &str, Option<SourceSpan>, &str) {
        (self.severity, self.code, &self.element, self.span, &self.message)
    }

    /// `file:line:col: severity[code]: message`
    pub fn to_text(&self, file: &str) -> String {
        let (line, column) = self.span.map_or((0, 0), |s| (s.line, s.column));
        format!(
            "{file}:{line}:{column}: {}[{}]: {}",
            self.severity.as_str(),
            self.code,
            self.message
        )
    }

    /// One JSON object: `{code, severity, message, file, line, column}`.
    pub fn to_json_line(&self, file: &str) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            code: &'a str,
            severity: &'a str,
            message: &'a str,
            file: &'a str,
            line: usize,
            column: usize,
        }
        let (line, column) = self.span.map_or((0, 0), |s| (s.line, s.column));
        serde_json::to_string(&Line {
            code: self.code.as_str(),
            severity: self.severity.as_str(),
            message: &self.message,
            file,
            line,
            column,
        })
        .expect("diagnostic serializes")
    }
}

/// Sort by (severity, code, element id), errors first.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_and_severity() {
        for code in Code::ALL {
            assert_eq!(Code::parse(code.as_str()), Some(code));
        }
        assert_eq!(Code::W002.severity(), Severity::Warning);
        assert_eq!(Code::E008.severity(), Severity::Error);
    }

    #[test]
    fn renders_text_and_json() {
        let d = Diagnostic::new(Code::E004, "a->b", "flow edge not allowed")
            .with_span(Some(SourceSpan::new(3, 5, 2)));
        assert_eq!(d.to_text("x.bxl"), "x.bxl:3:5: error[E004]: flow edge not allowed");
        let v: serde_json::Value = serde_json::from_str(&d.to_json_line("x.bxl")).unwrap();
        assert_eq!(v["code"], "E004");
        assert_eq!(v["line"], 3);
        assert_eq!(v["column"], 5);
    }

    #[test]
    fn sorting_puts_errors_first() {
        let mut v = vec![
            Diagnostic::new(Code::W001, "a", "w"),
            Diagnostic::new(Code::E004, "b", "e"),
            Diagnostic::new(Code::E001, "z", "e"),
            Diagnostic::new(Code::E001, "c", "e"),
        ];
        sort_diagnostics(&mut v);
        let keys: Vec<_> = v.iter().map(|d| (d.code, d.element.as_str())).collect();
        assert_eq!(
            keys,
            [(Code::E001, "c"), (Code::E001, "z"), (Code::E004, "b"), (Code::W001, "a")]
        );
    }
}

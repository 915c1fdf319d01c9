//! Toolchain for the hybrid-AI boxology notation.
//!
//! Diagrams are written in the `.bxl` text format, parsed into a
//! [`Document`], checked by the [`validator`] against the built-in
//! [`taxonomy`], searched for design patterns, rendered to DOT, and the
//! interaction patterns they describe can be executed by the [`simulator`].

pub mod corpus;
pub mod diagnostic;
pub mod document;
pub mod parser;
pub mod patterns;
pub mod renderer;
pub mod simulator;
pub mod taxonomy;
pub mod validator;

pub use diagnostic::{Code, Diagnostic, Severity, SourceSpan};
pub use document::{Document, Edge, EdgeKind, Frame, FrameKind, Node, Role};
pub use taxonomy::{builtin_taxonomy, ConceptRef, NodeKind, Taxonomy};

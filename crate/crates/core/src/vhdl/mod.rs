//! VHDL subset: a frontend (lexer, parser, elaborator) that runs designs on
//! the event kernel, and an emitter that turns circuits into VHDL.

pub mod ast;
mod elab;
mod emit;
mod interp;
mod lexer;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::Ast;
pub use elab::{elaborate, DesignPort, ElaboratedDesign, NetInfo, PortDir, ProcessKind, ProcessSpec};
pub use emit::{
    emit_parts_library, emit_testbench, emit_vhdl, emitted_port_names, part_entity_name, pin_identifier, vhdl_identifier, EmitError,
    PARTS_FILE,
};
pub use interp::simulate_vhdl;

/// Location of a token or node. `offset` and `len` are byte positions in
/// the file's text; `line` and `column` are 1-based, columns in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub file: usize,
    pub offset: usize,
    pub len: usize,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Lex,
    Syntax,
    Name,
    Type,
    Elaboration,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Lex => "LEX",
            Category::Syntax => "SYNTAX",
            Category::Name => "NAME",
            Category::Type => "TYPE",
            Category::Elaboration => "ELABORATION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub category: Category,
    pub file: String,
    pub line: u32,
    pub column: u32,
    /// Byte offset and length of the quoted region in the file.
    pub offset: usize,
    pub length: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(category: Category, file: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            category,
            file: file.to_string(),
            line: span.line,
            column: span.column,
            offset: span.offset,
            length: span.len,
            message: message.into(),
        }
    }

    pub fn warning(category: Category, file: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, ..Diagnostic::error(category, file, span, message) }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}:{}: {sev}[{}]: {}", self.file, self.line, self.column, self.category.as_str(), self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnitKind {
    #[default]
    EntityArch,
    Testbench,
}

/// One VHDL source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VhdlUnit {
    pub source_name: String,
    pub text: String,
    #[serde(default)]
    pub kind: UnitKind,
}

impl VhdlUnit {
    pub fn new(source_name: impl Into<String>, text: impl Into<String>) -> Self {
        VhdlUnit { source_name: source_name.into(), text: text.into(), kind: UnitKind::EntityArch }
    }

    pub fn testbench(source_name: impl Into<String>, text: impl Into<String>) -> Self {
        VhdlUnit { kind: UnitKind::Testbench, ..VhdlUnit::new(source_name, text) }
    }
}

const HORIZON_PRAGMA: &str = "-- dclab:horizon_ns=";

/// Lexes and parses every unit. Never fails; problems come back as
/// diagnostics and the tree holds whatever parsed.
pub fn parse_vhdl(units: &[VhdlUnit]) -> (Ast, Vec<Diagnostic>) {
    let mut ast = Ast::default();
    let mut diags = Vec::new();
    for (i, u) in units.iter().enumerate() {
        let toks = lexer::lex(i, &u.text, &mut diags, &u.source_name);
        let mut p = parser::Parser::new(toks, &u.source_name);
        ast.units.extend(p.design_file());
        diags.append(&mut p.diags);
        ast.files.push(u.source_name.clone());
        for line in u.text.lines() {
            if let Some(rest) = line.trim_start().strip_prefix(HORIZON_PRAGMA) {
                if let Ok(h) = rest.trim().parse::<u64>() {
                    ast.horizon_ns = Some(h);
                }
            }
        }
    }
    (ast, diags)
}

/// Did-you-mean helper shared by the elaborator.
pub(crate) fn closest<'a>(name: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(name, c), c))
        .filter(|(d, c)| *d <= 2.max(name.len() / 3) && *d < name.len().max(c.len()))
        .min()
        .map(|(_, c)| c)
}

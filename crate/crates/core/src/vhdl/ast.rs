//! Syntax tree of the supported VHDL subset. Every node keeps its span.

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ast {
    pub units: Vec<DesignUnit>,
    /// Source names, indexed by `Span::file`.
    pub files: Vec<String>,
    /// Run length requested by a `-- dclab:horizon_ns=N` comment.
    pub horizon_ns: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignUnit {
    Entity(EntityDecl),
    Architecture(ArchBody),
    /// Construct outside the subset, reported during elaboration.
    Unsupported { what: String, span: Span },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityDecl {
    pub name: Ident,
    pub ports: Vec<PortDecl>,
    /// Spans of unsupported clauses inside the entity (generics).
    pub unsupported: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    In,
    Out,
    Inout,
    Buffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortDecl {
    pub names: Vec<Ident>,
    pub mode: Mode,
    pub ty: TypeMark,
    pub default: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeMark {
    StdLogic(Span),
    /// `std_logic_vector(left dir right)`.
    Vector { left: i64, right: i64, descending: bool, span: Span },
    /// Any other type name; rejected during elaboration.
    Other(Ident),
}

impl TypeMark {
    pub fn span(&self) -> Span {
        match self {
            TypeMark::StdLogic(s) | TypeMark::Vector { span: s, .. } => *s,
            TypeMark::Other(i) => i.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchBody {
    pub name: Ident,
    pub entity: Ident,
    pub decls: Vec<Decl>,
    pub stmts: Vec<ConcStmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Signal { names: Vec<Ident>, ty: TypeMark, init: Option<Expr> },
    Variable { names: Vec<Ident>, ty: TypeMark, init: Option<Expr> },
    Component { name: Ident, ports: Vec<PortDecl> },
    Unsupported { what: String, span: Span },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveElem {
    pub value: Expr,
    pub after: Option<TimeLit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub transport: bool,
    pub elems: Vec<WaveElem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeLit {
    /// Exact duration in femtoseconds, converted to ns at elaboration.
    pub fs: u128,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConcStmt {
    /// `target <= w1 when c1 else w2 ...;`
    Assign { label: Option<Ident>, target: Expr, arms: Vec<(Waveform, Option<Expr>)>, transport: bool, span: Span },
    Process {
        label: Option<Ident>,
        sensitivity: Option<Vec<Expr>>,
        decls: Vec<Decl>,
        body: Vec<SeqStmt>,
        span: Span,
    },
    Instance { label: Ident, unit: InstUnit, ports: Vec<PortAssoc>, span: Span },
    Unsupported { what: String, span: Span },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstUnit {
    /// `entity work.name`
    Entity(Ident),
    /// A declared component.
    Component(Ident),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortAssoc {
    pub formal: Ident,
    /// `None` for `open`.
    pub actual: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeqStmt {
    SigAssign { target: Expr, wave: Waveform, span: Span },
    VarAssign { target: Expr, value: Expr, span: Span },
    If { branches: Vec<(Expr, Vec<SeqStmt>)>, otherwise: Option<Vec<SeqStmt>>, span: Span },
    Case { selector: Expr, arms: Vec<(Vec<Choice>, Vec<SeqStmt>)>, span: Span },
    Wait { on: Vec<Expr>, until: Option<Expr>, timeout: Option<TimeLit>, span: Span },
    Loop { cond: Option<Expr>, body: Vec<SeqStmt>, span: Span },
    Null(Span),
    Unsupported { what: String, span: Span },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Choice {
    Others(Span),
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Concat,
}

impl BinOp {
    pub fn text(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Nand => "nand",
            BinOp::Nor => "nor",
            BinOp::Xor => "xor",
            BinOp::Xnor => "xnor",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Concat => "&",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    /// `name(args)`: an index, a slice (`Range`) or a function call.
    Call(Box<Expr>, Vec<Expr>),
    Range { left: Box<Expr>, right: Box<Expr>, descending: bool },
    Attr(Box<Expr>, String),
    Char(char),
    Str(String),
    Int(u64),
    /// `(others => e)`
    Others(Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

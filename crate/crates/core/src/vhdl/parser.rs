//! Recursive-descent parser. Syntax errors are reported and the parser
//! resynchronizes at the next `;` (or the next design unit at top level),
//! so one run can report several problems.

use super::ast::*;
use super::lexer::{Tok, Token};
use super::{Category, Diagnostic, Span};

type PResult<T> = Result<T, ()>;

pub struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
    pub diags: Vec<Diagnostic>,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(w) => format!("'{w}'"),
        Tok::Char(c) => format!("character literal '{c}'"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Int(v) => format!("number {v}"),
        Tok::Real(..) => "real literal".into(),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of file".into(),
    }
}

const TIME_UNITS: &[(&str, u128)] = &[
    ("fs", 1),
    ("ps", 1_000),
    ("ns", 1_000_000),
    ("us", 1_000_000_000),
    ("ms", 1_000_000_000_000),
    ("sec", 1_000_000_000_000_000),
];

impl<'a> Parser<'a> {
    pub fn new(toks: Vec<Token>, file: &'a str) -> Self {
        Parser { toks, pos: 0, file, diags: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(w) if w == kw)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&mut self, expected: &str) -> PResult<T> {
        let found = describe(self.peek());
        let span = self.span();
        self.diags.push(Diagnostic::error(Category::Syntax, self.file, span, format!("expected {expected}, found {found}")));
        Err(())
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("'{kw}'"))
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("'{s}'"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(w) if !super::lexer::is_reserved(&w) => {
                let span = self.bump().span;
                Ok(Ident { name: w, span })
            }
            _ => self.error("an identifier"),
        }
    }

    /// Skips past the next `;`, or up to EOF.
    fn sync(&mut self) {
        while !self.at_eof() {
            if matches!(self.bump().tok, Tok::Sym(";")) {
                return;
            }
        }
    }

    /// Skips to `end <kw> ... ;` and past it.
    fn skip_to_end_of(&mut self, kw: &str) {
        while !self.at_eof() {
            if self.is_kw("end") && self.is_kw_at(1, kw) {
                self.sync();
                return;
            }
            self.bump();
        }
    }

    fn at_unit_start(&self) -> bool {
        self.is_kw("library")
            || self.is_kw("use")
            || self.is_kw("architecture")
            || self.is_kw("package")
            || self.is_kw("configuration")
            || (self.is_kw("entity") && matches!(self.peek_at(1), Tok::Ident(_)) && self.is_kw_at(2, "is"))
    }

    pub fn design_file(&mut self) -> Vec<DesignUnit> {
        let mut units = Vec::new();
        while !self.at_eof() {
            let r = if self.is_kw("library") || self.is_kw("use") {
                self.sync();
                Ok(None)
            } else if self.is_kw("entity") {
                self.entity().map(|e| Some(DesignUnit::Entity(e)))
            } else if self.is_kw("architecture") {
                self.architecture().map(|a| Some(DesignUnit::Architecture(a)))
            } else if self.is_kw("package") || self.is_kw("configuration") {
                let span = self.span();
                let what = if self.is_kw("package") { "package" } else { "configuration" };
                self.bump();
                self.skip_to_end_of(what);
                Ok(Some(DesignUnit::Unsupported { what: what.into(), span }))
            } else {
                self.error("a design unit ('entity' or 'architecture')")
            };
            match r {
                Ok(Some(u)) => units.push(u),
                Ok(None) => {}
                Err(()) => {
                    self.bump();
                    while !self.at_eof() && !self.at_unit_start() {
                        self.bump();
                    }
                }
            }
        }
        units
    }

    fn end_clause(&mut self, kw: &str) -> PResult<()> {
        self.expect_kw("end")?;
        self.eat_kw(kw);
        if matches!(self.peek(), Tok::Ident(w) if !super::lexer::is_reserved(w)) {
            self.bump();
        }
        self.expect_sym(";")?;
        Ok(())
    }

    fn entity(&mut self) -> PResult<EntityDecl> {
        let start = self.expect_kw("entity")?;
        let name = self.ident()?;
        self.expect_kw("is")?;
        let mut ports = Vec::new();
        let mut unsupported = Vec::new();
        loop {
            if self.is_kw("generic") {
                unsupported.push(("generic clause".to_string(), self.span()));
                self.bump();
                self.skip_parens()?;
                self.expect_sym(";")?;
            } else if self.is_kw("port") {
                self.bump();
                ports = self.port_list()?;
                self.expect_sym(";")?;
            } else {
                break;
            }
        }
        if self.is_kw("begin") {
            unsupported.push(("entity statement part".to_string(), self.span()));
            while !self.at_eof() && !self.is_kw("end") {
                self.bump();
            }
        }
        self.end_clause("entity")?;
        Ok(EntityDecl { name, ports, unsupported, span: start })
    }

    fn skip_parens(&mut self) -> PResult<()> {
        self.expect_sym("(")?;
        let mut depth = 1;
        while depth > 0 {
            match self.bump().tok {
                Tok::Sym("(") => depth += 1,
                Tok::Sym(")") => depth -= 1,
                Tok::Eof => return self.error("')'"),
                _ => {}
            }
        }
        Ok(())
    }

    fn port_list(&mut self) -> PResult<Vec<PortDecl>> {
        self.expect_sym("(")?;
        let mut ports = Vec::new();
        loop {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let mode = if self.eat_kw("in") {
                Mode::In
            } else if self.eat_kw("out") {
                Mode::Out
            } else if self.eat_kw("inout") {
                Mode::Inout
            } else if self.eat_kw("buffer") {
                Mode::Buffer
            } else {
                Mode::In
            };
            let ty = self.type_mark()?;
            let default = if self.eat_sym(":=") { Some(self.expr()?) } else { None };
            ports.push(PortDecl { names, mode, ty, default });
            if self.eat_sym(";") {
                continue;
            }
            self.expect_sym(")")?;
            return Ok(ports);
        }
    }

    fn int_lit(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match *self.peek() {
            Tok::Int(v) if v <= i64::MAX as u64 => {
                self.bump();
                Ok(if neg { -(v as i64) } else { v as i64 })
            }
            _ => self.error("an integer"),
        }
    }

    fn type_mark(&mut self) -> PResult<TypeMark> {
        let mut id = self.ident()?;
        // Accept selected names such as ieee.std_logic_1164.std_logic.
        while self.is_sym(".") {
            self.bump();
            id = self.ident()?;
        }
        match id.name.as_str() {
            "std_logic" | "std_ulogic" => Ok(TypeMark::StdLogic(id.span)),
            "std_logic_vector" | "std_ulogic_vector" | "unsigned" => {
                self.expect_sym("(")?;
                let left = self.int_lit()?;
                let descending = if self.eat_kw("downto") {
                    true
                } else {
                    self.expect_kw("to")?;
                    false
                };
                let right = self.int_lit()?;
                self.expect_sym(")")?;
                Ok(TypeMark::Vector { left, right, descending, span: id.span })
            }
            _ => {
                if self.is_sym("(") {
                    self.skip_parens()?;
                } else if self.is_kw("range") {
                    self.bump();
                    self.simple_expr()?;
                    if !self.eat_kw("to") {
                        self.expect_kw("downto")?;
                    }
                    self.simple_expr()?;
                }
                Ok(TypeMark::Other(id))
            }
        }
    }

    fn architecture(&mut self) -> PResult<ArchBody> {
        let start = self.expect_kw("architecture")?;
        let name = self.ident()?;
        self.expect_kw("of")?;
        let entity = self.ident()?;
        self.expect_kw("is")?;
        let decls = self.decls(&["begin"], false);
        self.expect_kw("begin")?;
        let stmts = self.conc_stmts();
        self.end_clause("architecture")?;
        Ok(ArchBody { name, entity, decls, stmts, span: start })
    }

    /// Declarations up to one of `stop` keywords.
    fn decls(&mut self, stop: &[&str], in_process: bool) -> Vec<Decl> {
        let mut out = Vec::new();
        while !self.at_eof() && !stop.iter().any(|k| self.is_kw(k)) {
            let start = self.pos;
            match self.decl(in_process) {
                Ok(d) => out.push(d),
                Err(()) => {
                    if self.pos == start {
                        self.bump();
                    }
                    self.sync();
                }
            }
        }
        out
    }

    fn decl(&mut self, in_process: bool) -> PResult<Decl> {
        let span = self.span();
        if self.is_kw("signal") || self.is_kw("variable") || self.is_kw("shared") {
            self.eat_kw("shared");
            let is_var = self.is_kw("variable");
            self.bump();
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let ty = self.type_mark()?;
            let init = if self.eat_sym(":=") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            if is_var && !in_process {
                return Ok(Decl::Unsupported { what: "shared variable".into(), span });
            }
            return Ok(if is_var { Decl::Variable { names, ty, init } } else { Decl::Signal { names, ty, init } });
        }
        if self.is_kw("component") {
            self.bump();
            let name = self.ident()?;
            self.eat_kw("is");
            let mut ports = Vec::new();
            loop {
                if self.is_kw("generic") {
                    self.bump();
                    self.skip_parens()?;
                    self.expect_sym(";")?;
                    return {
                        self.skip_to_end_of("component");
                        Ok(Decl::Unsupported { what: "generic clause".into(), span })
                    };
                } else if self.eat_kw("port") {
                    ports = self.port_list()?;
                    self.expect_sym(";")?;
                } else {
                    break;
                }
            }
            self.expect_kw("end")?;
            self.expect_kw("component")?;
            if matches!(self.peek(), Tok::Ident(_)) {
                self.ident()?;
            }
            self.expect_sym(";")?;
            return Ok(Decl::Component { name, ports });
        }
        for kw in ["function", "procedure", "impure", "pure"] {
            if self.is_kw(kw) {
                self.bump();
                let what = if self.is_kw("function") || kw == "function" { "function" } else { "procedure" };
                self.eat_kw("function");
                let name = self.peek().clone();
                // Declaration only, or a body ending in `end [function] [name];`.
                while !self.at_eof() && !self.is_sym(";") && !self.is_kw("is") {
                    self.bump();
                }
                if self.eat_kw("is") {
                    while !self.at_eof() {
                        if self.is_kw("end")
                            && (self.is_kw_at(1, what)
                                || (self.peek_at(1) == &name && matches!(self.peek_at(2), Tok::Sym(";"))))
                        {
                            break;
                        }
                        self.bump();
                    }
                }
                self.sync();
                return Ok(Decl::Unsupported { what: what.into(), span });
            }
        }
        for kw in ["constant", "type", "subtype", "alias", "attribute", "file"] {
            if self.is_kw(kw) {
                self.sync();
                return Ok(Decl::Unsupported { what: format!("{kw} declaration"), span });
            }
        }
        self.error("a declaration")
    }

    fn conc_stmts(&mut self) -> Vec<ConcStmt> {
        let mut out = Vec::new();
        while !self.at_eof() && !self.is_kw("end") {
            let start = self.pos;
            match self.conc_stmt() {
                Ok(s) => out.push(s),
                Err(()) => {
                    if self.pos == start {
                        self.bump();
                    }
                    self.sync();
                }
            }
        }
        out
    }

    fn label(&mut self) -> PResult<Option<Ident>> {
        if matches!(self.peek(), Tok::Ident(w) if !super::lexer::is_reserved(w))
            && matches!(self.peek_at(1), Tok::Sym(":"))
        {
            let l = self.ident()?;
            self.bump();
            Ok(Some(l))
        } else {
            Ok(None)
        }
    }

    fn conc_stmt(&mut self) -> PResult<ConcStmt> {
        let span = self.span();
        let label = self.label()?;
        if self.is_kw("process") || (self.is_kw("postponed") && self.is_kw_at(1, "process")) {
            return self.process(label);
        }
        if self.is_kw("entity") {
            let Some(label) = label else { return self.error("an instance label before 'entity'") };
            self.bump();
            if self.is_kw_at(1, ".") || matches!(self.peek_at(1), Tok::Sym(".")) {
                self.ident().or_else(|_| {
                    // `work` is not reserved, so this only fails on junk.
                    Err(())
                })?;
                self.expect_sym(".")?;
            }
            let unit = self.ident()?;
            if self.is_sym("(") {
                // architecture selection: entity work.e(rtl)
                self.skip_parens()?;
            }
            return self.port_map(label, InstUnit::Entity(unit), span);
        }
        if let Some(label) = &label {
            if self.is_kw("component") {
                self.bump();
                let unit = self.ident()?;
                return self.port_map(label.clone(), InstUnit::Component(unit), span);
            }
            if matches!(self.peek(), Tok::Ident(w) if !super::lexer::is_reserved(w))
                && (self.is_kw_at(1, "port") || self.is_kw_at(1, "generic"))
            {
                let unit = self.ident()?;
                return self.port_map(label.clone(), InstUnit::Component(unit), span);
            }
        }
        for (kw, what) in [("with", "selected signal assignment"), ("assert", "assertion")] {
            if self.is_kw(kw) {
                self.sync();
                return Ok(ConcStmt::Unsupported { what: what.into(), span });
            }
        }
        if self.is_kw("block") {
            self.skip_to_end_of("block");
            return Ok(ConcStmt::Unsupported { what: "block statement".into(), span });
        }
        if self.is_kw("for") || self.is_kw("if") {
            self.skip_to_end_of("generate");
            return Ok(ConcStmt::Unsupported { what: "generate statement".into(), span });
        }
        if self.is_kw("postponed") {
            self.bump();
        }
        let target = self.target()?;
        self.expect_sym("<=")?;
        self.eat_kw("guarded");
        let transport = self.eat_kw("transport");
        if self.eat_kw("inertial") {
            // default mode spelled out
        }
        let mut arms = Vec::new();
        loop {
            let w = self.waveform(transport)?;
            if self.eat_kw("when") {
                let c = self.expr()?;
                arms.push((w, Some(c)));
                if self.eat_kw("else") {
                    continue;
                }
            } else {
                arms.push((w, None));
            }
            break;
        }
        self.expect_sym(";")?;
        Ok(ConcStmt::Assign { label, target, arms, transport, span })
    }

    fn port_map(&mut self, label: Ident, unit: InstUnit, span: Span) -> PResult<ConcStmt> {
        if self.is_kw("generic") {
            self.bump();
            self.sync();
            return Ok(ConcStmt::Unsupported { what: "generic map".into(), span });
        }
        self.expect_kw("port")?;
        self.expect_kw("map")?;
        self.expect_sym("(")?;
        let mut ports = Vec::new();
        loop {
            let aspan = self.span();
            if !matches!(self.peek_at(1), Tok::Sym("=>")) {
                self.error::<()>("a named association 'formal => actual'")?;
            }
            let formal = self.ident()?;
            self.expect_sym("=>")?;
            let actual = if self.eat_kw("open") { None } else { Some(self.expr()?) };
            ports.push(PortAssoc { formal, actual, span: aspan });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        self.expect_sym(";")?;
        Ok(ConcStmt::Instance { label, unit, ports, span })
    }

    fn process(&mut self, label: Option<Ident>) -> PResult<ConcStmt> {
        self.eat_kw("postponed");
        let span = self.expect_kw("process")?;
        let sensitivity = if self.eat_sym("(") {
            let mut names = Vec::new();
            if self.is_kw("all") {
                let s = self.bump().span;
                names.push(Expr::new(ExprKind::Name("all".into()), s));
            } else {
                loop {
                    names.push(self.name()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
            Some(names)
        } else {
            None
        };
        self.eat_kw("is");
        let decls = self.decls(&["begin"], true);
        self.expect_kw("begin")?;
        let body = self.seq_stmts(&[]);
        self.expect_kw("end")?;
        self.eat_kw("postponed");
        self.expect_kw("process")?;
        if matches!(self.peek(), Tok::Ident(_)) {
            self.ident()?;
        }
        self.expect_sym(";")?;
        Ok(ConcStmt::Process { label, sensitivity, decls, body, span })
    }

    fn seq_stmts(&mut self, extra_stops: &[&str]) -> Vec<SeqStmt> {
        let mut out = Vec::new();
        while !self.at_eof() && !self.is_kw("end") && !extra_stops.iter().any(|k| self.is_kw(k)) {
            let start = self.pos;
            match self.seq_stmt() {
                Ok(s) => out.push(s),
                Err(()) => {
                    if self.pos == start {
                        self.bump();
                    }
                    self.sync();
                }
            }
        }
        out
    }

    fn seq_stmt(&mut self) -> PResult<SeqStmt> {
        let span = self.span();
        self.label()?;
        if self.eat_kw("null") {
            self.expect_sym(";")?;
            return Ok(SeqStmt::Null(span));
        }
        if self.eat_kw("if") {
            let mut branches = Vec::new();
            let c = self.expr()?;
            self.expect_kw("then")?;
            branches.push((c, self.seq_stmts(&["elsif", "else"])));
            let mut otherwise = None;
            loop {
                if self.eat_kw("elsif") {
                    let c = self.expr()?;
                    self.expect_kw("then")?;
                    branches.push((c, self.seq_stmts(&["elsif", "else"])));
                } else if self.eat_kw("else") {
                    otherwise = Some(self.seq_stmts(&[]));
                    break;
                } else {
                    break;
                }
            }
            self.expect_kw("end")?;
            self.expect_kw("if")?;
            if matches!(self.peek(), Tok::Ident(_)) {
                self.ident()?;
            }
            self.expect_sym(";")?;
            return Ok(SeqStmt::If { branches, otherwise, span });
        }
        if self.eat_kw("case") {
            let selector = self.expr()?;
            self.expect_kw("is")?;
            let mut arms = Vec::new();
            while self.eat_kw("when") {
                let mut choices = Vec::new();
                loop {
                    if self.is_kw("others") {
                        choices.push(Choice::Others(self.bump().span));
                    } else {
                        choices.push(Choice::Expr(self.simple_expr()?));
                    }
                    if !self.eat_sym("|") {
                        break;
                    }
                }
                self.expect_sym("=>")?;
                arms.push((choices, self.seq_stmts(&["when"])));
            }
            self.expect_kw("end")?;
            self.expect_kw("case")?;
            if matches!(self.peek(), Tok::Ident(_)) {
                self.ident()?;
            }
            self.expect_sym(";")?;
            return Ok(SeqStmt::Case { selector, arms, span });
        }
        if self.eat_kw("wait") {
            let mut on = Vec::new();
            if self.eat_kw("on") {
                loop {
                    on.push(self.name()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            let until = if self.eat_kw("until") { Some(self.expr()?) } else { None };
            let timeout = if self.eat_kw("for") { Some(self.time()?) } else { None };
            self.expect_sym(";")?;
            return Ok(SeqStmt::Wait { on, until, timeout, span });
        }
        if self.is_kw("loop") || self.is_kw("while") {
            let cond = if self.eat_kw("while") { Some(self.expr()?) } else { None };
            self.expect_kw("loop")?;
            let body = self.seq_stmts(&[]);
            self.expect_kw("end")?;
            self.expect_kw("loop")?;
            if matches!(self.peek(), Tok::Ident(_)) {
                self.ident()?;
            }
            self.expect_sym(";")?;
            return Ok(SeqStmt::Loop { cond, body, span });
        }
        if self.is_kw("for") {
            self.skip_to_end_of("loop");
            return Ok(SeqStmt::Unsupported { what: "for loop".into(), span });
        }
        for kw in ["assert", "report", "exit", "next", "return"] {
            if self.is_kw(kw) {
                self.sync();
                return Ok(SeqStmt::Unsupported { what: format!("{kw} statement"), span });
            }
        }
        let target = self.target()?;
        if self.eat_sym(":=") {
            let value = self.expr()?;
            self.expect_sym(";")?;
            return Ok(SeqStmt::VarAssign { target, value, span });
        }
        self.expect_sym("<=")?;
        let transport = self.eat_kw("transport");
        self.eat_kw("inertial");
        let wave = self.waveform(transport)?;
        if self.is_kw("when") {
            self.sync();
            return Ok(SeqStmt::Unsupported { what: "conditional assignment inside a process".into(), span });
        }
        self.expect_sym(";")?;
        Ok(SeqStmt::SigAssign { target, wave, span })
    }

    fn target(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Ident(w) if !super::lexer::is_reserved(w)) {
            self.name()
        } else {
            self.error("a statement")
        }
    }

    fn waveform(&mut self, transport: bool) -> PResult<Waveform> {
        let mut elems = Vec::new();
        loop {
            let value = self.expr()?;
            let after = if self.eat_kw("after") { Some(self.time()?) } else { None };
            elems.push(WaveElem { value, after });
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(Waveform { transport, elems })
    }

    fn time(&mut self) -> PResult<TimeLit> {
        let span = self.span();
        let (mant, scale) = match *self.peek() {
            Tok::Int(v) => (v as u128, 0u32),
            Tok::Real(m, s) => (m as u128, s),
            _ => return self.error("a time literal"),
        };
        self.bump();
        let unit = match self.peek() {
            Tok::Ident(u) => TIME_UNITS.iter().find(|(n, _)| n == u).map(|(_, f)| *f),
            _ => None,
        };
        let Some(unit) = unit else { return self.error("a time unit (fs, ps, ns, us, ms, sec)") };
        self.bump();
        let scaled = mant.checked_mul(unit).unwrap_or(u128::MAX);
        let div = 10u128.checked_pow(scale).unwrap_or(u128::MAX);
        let fs = if scaled % div == 0 { scaled / div } else { u128::MAX };
        let span = Span { len: self.prev_span().offset + self.prev_span().len - span.offset, ..span };
        Ok(TimeLit { fs, span })
    }

    // Expressions, lowest precedence first.

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.relation()?;
        loop {
            let op = match self.peek() {
                Tok::Ident(w) => match w.as_str() {
                    "and" => BinOp::And,
                    "or" => BinOp::Or,
                    "nand" => BinOp::Nand,
                    "nor" => BinOp::Nor,
                    "xor" => BinOp::Xor,
                    "xnor" => BinOp::Xnor,
                    _ => break,
                },
                _ => break,
            };
            self.bump();
            let rhs = self.relation()?;
            lhs = join(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn relation(&mut self) -> PResult<Expr> {
        let lhs = self.simple_expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("/=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.simple_expr()?;
        Ok(join(op, lhs, rhs))
    }

    fn simple_expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut lhs = if self.eat_sym("-") {
            let e = self.factor()?;
            Expr::new(ExprKind::Neg(Box::new(e)), span)
        } else {
            self.eat_sym("+");
            self.factor()?
        };
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                Tok::Sym("&") => BinOp::Concat,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = join(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_kw("not") {
            let e = self.factor()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(e)), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Char(c) => {
                self.bump();
                Ok(Expr::new(ExprKind::Char(c), span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), span))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_kw("others") {
                    self.expect_sym("=>")?;
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(Expr::new(ExprKind::Others(Box::new(e)), span));
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) if !super::lexer::is_reserved(&w) => self.name(),
            _ => self.error("an expression"),
        }
    }

    fn name(&mut self) -> PResult<Expr> {
        let id = self.ident()?;
        let mut e = Expr::new(ExprKind::Name(id.name), id.span);
        loop {
            if self.is_sym("(") {
                self.bump();
                let mut args = Vec::new();
                loop {
                    let a = self.simple_expr()?;
                    let a = if self.is_kw("downto") || self.is_kw("to") {
                        let descending = self.is_kw("downto");
                        self.bump();
                        let r = self.simple_expr()?;
                        let span = a.span;
                        Expr::new(ExprKind::Range { left: Box::new(a), right: Box::new(r), descending }, span)
                    } else {
                        a
                    };
                    args.push(a);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(")")?;
                let span = e.span;
                e = Expr::new(ExprKind::Call(Box::new(e), args), span);
            } else if self.is_sym("'") && matches!(self.peek_at(1), Tok::Ident(_)) {
                self.bump();
                let Tok::Ident(attr) = self.bump().tok else { unreachable!() };
                let span = e.span;
                e = Expr::new(ExprKind::Attr(Box::new(e), attr), span);
            } else if self.is_sym(".") && matches!(self.peek_at(1), Tok::Ident(_)) {
                // Selected names such as ieee.numeric_std.unsigned: keep the suffix.
                self.bump();
                let id = self.ident()?;
                e = Expr::new(ExprKind::Name(id.name), id.span);
            } else {
                return Ok(e);
            }
        }
    }
}

fn join(op: BinOp, l: Expr, r: Expr) -> Expr {
    let span = l.span;
    Expr::new(ExprKind::Bin(op, Box::new(l), Box::new(r)), span)
}

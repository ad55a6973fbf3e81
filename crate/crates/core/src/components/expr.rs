//! Boolean expressions used by part fixtures to define combinational outputs.
//!
//! Grammar: `expr := or ; or := xor ('|' xor)* ; xor := and ('^' and)* ;
//! and := unary ('&' unary)* ; unary := '!' unary | '(' expr ')' | name | 0 | 1`.
//! Names are pin names or named intermediate terms.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Var(String),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expression {source_text:?}: {reason} at offset {offset}")]
pub struct ExprError {
    pub source_text: String,
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Not,
    And,
    Or,
    Xor,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let tok = match c {
            ' ' | '\t' | '\n' => {
                i += 1;
                continue;
            }
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '^' => Tok::Xor,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((start, Tok::Name(src[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(ExprError {
                    source_text: src.to_string(),
                    offset: i,
                    reason: format!("unexpected character {c:?}"),
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: impl Into<String>) -> ExprError {
        let offset = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.src.len());
        ExprError { source_text: self.src.to_string(), offset, reason: reason.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<BoolExpr, ExprError> {
        let mut lhs = self.xor()?;
        while self.eat(&Tok::Or) {
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(self.xor()?));
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<BoolExpr, ExprError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Xor) {
            lhs = BoolExpr::Xor(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<BoolExpr, ExprError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = BoolExpr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<BoolExpr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(BoolExpr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(match n.as_str() {
                    "0" => BoolExpr::Const(false),
                    "1" => BoolExpr::Const(true),
                    _ => BoolExpr::Var(n),
                })
            }
            _ => Err(self.err("expected operand")),
        }
    }
}

impl BoolExpr {
    pub fn parse(src: &str) -> Result<BoolExpr, ExprError> {
        let toks = tokenize(src)?;
        let mut p = Parser { src, toks, pos: 0 };
        let e = p.or()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Replaces every reference to a named term by that term's expression.
    pub fn inline_terms(&self, terms: &BTreeMap<String, BoolExpr>) -> BoolExpr {
        match self {
            BoolExpr::Var(n) => match terms.get(n) {
                Some(t) => t.inline_terms(terms),
                None => self.clone(),
            },
            BoolExpr::Const(_) => self.clone(),
            BoolExpr::Not(e) => BoolExpr::Not(Box::new(e.inline_terms(terms))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.inline_terms(terms)), Box::new(b.inline_terms(terms))),
            BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(a.inline_terms(terms)), Box::new(b.inline_terms(terms))),
            BoolExpr::Xor(a, b) => BoolExpr::Xor(Box::new(a.inline_terms(terms)), Box::new(b.inline_terms(terms))),
        }
    }

    /// Variable names in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        fn walk(e: &BoolExpr, out: &mut Vec<String>) {
            match e {
                BoolExpr::Var(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                BoolExpr::Const(_) => {}
                BoolExpr::Not(e) => walk(e, out),
                BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Xor(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn eval(&self, lookup: &dyn Fn(&str) -> bool) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(n) => lookup(n),
            BoolExpr::Not(e) => !e.eval(lookup),
            BoolExpr::And(a, b) => a.eval(lookup) && b.eval(lookup),
            BoolExpr::Or(a, b) => a.eval(lookup) || b.eval(lookup),
            BoolExpr::Xor(a, b) => a.eval(lookup) ^ b.eval(lookup),
        }
    }
}

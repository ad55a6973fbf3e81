use super::{Category, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Identifier, lowercased. Keywords are identifiers too; the parser
    /// decides by context.
    Ident(String),
    Char(char),
    Str(String),
    Int(u64),
    /// Decimal literal with a fractional part, kept as (mantissa, scale).
    Real(u64, u32),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "<=", ">=", "=>", ":=", "/=", "**", "(", ")", ";", ":", ",", ".", "=", "<", ">", "+", "-", "*", "/", "&", "|", "'",
];

pub const RESERVED: &[&str] = &[
    "abs", "access", "after", "alias", "all", "and", "architecture", "array", "assert", "attribute", "begin", "block",
    "body", "buffer", "bus", "case", "component", "configuration", "constant", "disconnect", "downto", "else", "elsif",
    "end", "entity", "exit", "file", "for", "function", "generate", "generic", "group", "guarded", "if", "impure", "in",
    "inertial", "inout", "is", "label", "library", "linkage", "literal", "loop", "map", "mod", "nand", "new", "next",
    "nor", "not", "null", "of", "on", "open", "or", "others", "out", "package", "port", "postponed", "procedure",
    "process", "pure", "range", "record", "register", "reject", "rem", "report", "return", "rol", "ror", "select",
    "severity", "signal", "shared", "sla", "sll", "sra", "srl", "subtype", "then", "to", "transport", "type", "unaffected",
    "units", "until", "use", "variable", "wait", "when", "while", "with", "xnor", "xor",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Splits one source file into tokens. Never fails: bad characters become
/// LEX diagnostics and are skipped.
pub fn lex(file: usize, text: &str, diags: &mut Vec<Diagnostic>, file_name: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut out: Vec<Token> = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;
    let span = |start: usize, end: usize, line: u32, line_start: usize| Span {
        file,
        offset: start,
        len: end - start,
        line,
        column: (text[line_start..start].chars().count() + 1) as u32,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = text[start..i].to_ascii_lowercase();
            if word.ends_with('_') || word.contains("__") {
                diags.push(Diagnostic::error(
                    Category::Lex,
                    file_name,
                    span(start, i, line, line_start),
                    format!("malformed identifier {:?}", &text[start..i]),
                ));
            }
            // Bit-string literal such as x"0F" or b"0101".
            if matches!(word.as_str(), "x" | "b" | "o") && bytes.get(i) == Some(&b'"') {
                if let Some(end) = text[i + 1..].find(['"', '\n']).map(|e| e + i + 1) {
                    if bytes[end] == b'"' {
                        let body: String = text[i + 1..end].chars().filter(|&ch| ch != '_').collect();
                        let bits = expand_bit_string(&word, &body);
                        i = end + 1;
                        match bits {
                            Some(b) => out.push(Token { tok: Tok::Str(b), span: span(start, i, line, line_start) }),
                            None => diags.push(Diagnostic::error(
                                Category::Lex,
                                file_name,
                                span(start, i, line, line_start),
                                "malformed bit-string literal",
                            )),
                        }
                        continue;
                    }
                }
            }
            out.push(Token { tok: Tok::Ident(word), span: span(start, i, line, line_start) });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
            let int_part: String = text[start..i].chars().filter(|&ch| ch != '_').collect();
            let mut frac = String::new();
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()) {
                i += 1;
                let fs = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
                frac = text[fs..i].chars().filter(|&ch| ch != '_').collect();
            }
            let sp = span(start, i, line, line_start);
            let parsed = if frac.is_empty() {
                int_part.parse::<u64>().ok().map(Tok::Int)
            } else {
                format!("{int_part}{frac}").parse::<u64>().ok().map(|m| Tok::Real(m, frac.len() as u32))
            };
            match parsed {
                Some(t) => out.push(Token { tok: t, span: sp }),
                None => diags.push(Diagnostic::error(Category::Lex, file_name, sp, "numeric literal out of range")),
            }
            continue;
        }
        if c == b'"' {
            match text[i + 1..].find(['"', '\n']).map(|e| e + i + 1) {
                Some(end) if bytes[end] == b'"' => {
                    i = end + 1;
                    out.push(Token {
                        tok: Tok::Str(text[start + 1..end].to_string()),
                        span: span(start, i, line, line_start),
                    });
                }
                _ => {
                    let end = text[i..].find('\n').map_or(text.len(), |e| e + i);
                    diags.push(Diagnostic::error(
                        Category::Lex,
                        file_name,
                        span(start, end, line, line_start),
                        "unterminated string literal",
                    ));
                    i = end;
                }
            }
            continue;
        }
        if c == b'\'' {
            // A character literal unless this tick follows a name or ')'.
            let after_name = matches!(
                out.last(),
                Some(Token { tok: Tok::Ident(w), span: s }) if !is_reserved(w) && s.offset + s.len == i
            ) || matches!(out.last(), Some(Token { tok: Tok::Sym(")"), .. }));
            let ch = text[i + 1..].chars().next();
            if !after_name {
                if let Some(ch) = ch {
                    let close = i + 1 + ch.len_utf8();
                    if bytes.get(close) == Some(&b'\'') && ch != '\n' {
                        i = close + 1;
                        out.push(Token { tok: Tok::Char(ch), span: span(start, i, line, line_start) });
                        continue;
                    }
                }
            }
        }
        if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            out.push(Token { tok: Tok::Sym(sym), span: span(start, i, line, line_start) });
            continue;
        }
        let ch = text[i..].chars().next().unwrap_or('?');
        i += ch.len_utf8();
        diags.push(Diagnostic::error(
            Category::Lex,
            file_name,
            span(start, i, line, line_start),
            format!("unexpected character {ch:?}"),
        ));
    }
    let end = text.len();
    out.push(Token {
        tok: Tok::Eof,
        span: Span { file, offset: end, len: 0, line, column: (text[line_start..].chars().count() + 1) as u32 },
    });
    out
}

fn expand_bit_string(base: &str, body: &str) -> Option<String> {
    let per = match base {
        "b" => 1,
        "o" => 3,
        _ => 4,
    };
    let mut out = String::new();
    for ch in body.chars() {
        let v = ch.to_digit(1 << per)?;
        for k in (0..per).rev() {
            out.push(if v >> k & 1 == 1 { '1' } else { '0' });
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let mut d = Vec::new();
        let t = lex(0, s, &mut d, "t.vhd");
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ticks_and_chars() {
        assert_eq!(
            toks("clk'event and clk='1'"),
            vec![
                Tok::Ident("clk".into()),
                Tok::Sym("'"),
                Tok::Ident("event".into()),
                Tok::Ident("and".into()),
                Tok::Ident("clk".into()),
                Tok::Sym("="),
                Tok::Char('1'),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn literals() {
        assert_eq!(toks("x\"A\""), vec![Tok::Str("1010".into()), Tok::Eof]);
        assert_eq!(toks("1_000 2.5"), vec![Tok::Int(1000), Tok::Real(25, 1), Tok::Eof]);
        assert_eq!(toks("A <= B; -- note"), toks("a<=b;"));
    }

    #[test]
    fn positions() {
        let mut d = Vec::new();
        let t = lex(0, "entity e is\n  port (a : in bit);", &mut d, "t.vhd");
        let port = &t[3];
        assert_eq!(port.tok, Tok::Ident("port".into()));
        assert_eq!((port.span.line, port.span.column), (2, 3));
    }

    #[test]
    fn bad_character_is_reported() {
        let mut d = Vec::new();
        lex(0, "a <= b # c;", &mut d, "t.vhd");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].category, Category::Lex);
        assert_eq!((d[0].line, d[0].column), (1, 8));
    }
}

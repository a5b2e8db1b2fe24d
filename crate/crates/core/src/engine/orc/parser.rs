//! Line-oriented recursive descent parser for the orchestra language.
//!
//! ```text
//! program := { instr } ;
//! instr   := "instr" INT NL { stmt NL } "endin" ;
//! stmt    := IDENT "=" expr | "out" expr { "," expr } ;
//! ```
//!
//! Errors are collected per line; the parser resynchronises at the next
//! newline so one bad statement does not hide the rest.

use super::ast::{BinOp, Expr, InstrAst, Pos, Stmt};
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Int(u64),
    Ident(String),
    PField(usize),
    Str(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Assign,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(n) => format!("number {n}"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::PField(n) => format!("'p{n}'"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Assign => "'='".into(),
        }
    }
}

type Spanned = (Tok, Pos);

fn lex_line(src: &str, line: usize) -> Result<Vec<Spanned>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: i + 1 };
        if c == ';' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '=' => Some(Tok::Assign),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, pos));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_int = true;
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if is_int {
                match text.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Number(text.parse::<f64>().unwrap_or(f64::INFINITY)),
                }
            } else {
                match text.parse::<f64>() {
                    Ok(n) => Tok::Number(n),
                    Err(_) => return Err(Diagnostic::new(pos, format!("malformed number '{text}'"))),
                }
            };
            toks.push((tok, pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.strip_prefix('p') {
                Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                    match digits.parse::<usize>() {
                        Ok(n) if n >= 1 => Tok::PField(n),
                        _ => return Err(Diagnostic::new(pos, format!("invalid p-field '{word}'"))),
                    }
                }
                _ => Tok::Ident(word),
            };
            toks.push((tok, pos));
            continue;
        }
        if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i >= chars.len() {
                return Err(Diagnostic::new(pos, "unterminated string"));
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            toks.push((Tok::Str(s), pos));
            continue;
        }
        return Err(Diagnostic::new(pos, format!("unexpected character '{c}'")));
    }
    Ok(toks)
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    at: usize,
    eol: Pos,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.eol)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.at);
        self.at += 1;
        t
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => Diagnostic::new(self.pos(), format!("expected {wanted}, found {}", t.describe())),
            None => Diagnostic::new(self.pos(), format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), Diagnostic> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn args(&mut self, n: usize, name: &str) -> Result<Vec<Expr>, Diagnostic> {
        self.expect(Tok::LParen, &format!("'(' after '{name}'"))?;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                self.expect(Tok::Comma, &format!("',' ({name} takes {n} arguments)"))?;
            }
            out.push(self.expr()?);
        }
        self.expect(Tok::RParen, &format!("')' ({name} takes {n} arguments)"))?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let pos = self.pos();
        let Some((tok, _)) = self.bump() else {
            return Err(Diagnostic::new(pos, "expected expression, found end of line"));
        };
        match tok {
            Tok::Number(n) => Ok(Expr::Num(*n)),
            Tok::Int(n) => Ok(Expr::Num(*n as f64)),
            Tok::PField(n) => Ok(Expr::PField(*n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "oscil" => {
                    let mut a = self.args(2, "oscil")?.into_iter();
                    let amp = a.next().unwrap();
                    let freq = a.next().unwrap();
                    Ok(Expr::Oscil(Box::new(amp), Box::new(freq)))
                }
                "line" => {
                    let mut a = self.args(3, "line")?.into_iter();
                    let from = a.next().unwrap();
                    let dur = a.next().unwrap();
                    let to = a.next().unwrap();
                    Ok(Expr::Line(Box::new(from), Box::new(dur), Box::new(to)))
                }
                "in" => {
                    self.expect(Tok::LParen, "'(' after 'in'")?;
                    let ch = match self.bump() {
                        Some((Tok::Int(n), _)) => *n as usize,
                        _ => {
                            self.at -= 1;
                            return Err(self.unexpected("integer input channel"));
                        }
                    };
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Expr::In(ch))
                }
                "chan" => {
                    self.expect(Tok::LParen, "'(' after 'chan'")?;
                    let name = match self.bump() {
                        Some((Tok::Str(s), p)) if s.is_empty() => {
                            return Err(Diagnostic::new(*p, "channel name must not be empty"))
                        }
                        Some((Tok::Str(s), _)) => s.clone(),
                        _ => {
                            self.at -= 1;
                            return Err(self.unexpected("channel name string"));
                        }
                    };
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Expr::Chan(name))
                }
                "instr" | "endin" | "out" => {
                    Err(Diagnostic::new(pos, format!("keyword '{name}' cannot be used in an expression")))
                }
                _ => Ok(Expr::Ident(name.clone(), pos)),
            },
            _ => {
                self.at -= 1;
                Err(self.unexpected("expression"))
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(kw)) if kw == "out" => {
                self.at += 1;
                let mut channels = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    channels.push(self.expr()?);
                }
                self.finish()?;
                Ok(Stmt::Out { channels, pos })
            }
            Some(Tok::Ident(name)) => {
                if matches!(name.as_str(), "instr" | "oscil" | "line" | "in" | "chan") {
                    return Err(Diagnostic::new(pos, format!("cannot assign to built-in '{name}'")));
                }
                let name = name.clone();
                self.at += 1;
                self.expect(Tok::Assign, "'='")?;
                let value = self.expr()?;
                self.finish()?;
                Ok(Stmt::Assign { name, value, pos })
            }
            Some(Tok::PField(n)) => Err(Diagnostic::new(pos, format!("cannot assign to p-field 'p{n}'"))),
            _ => Err(self.unexpected("statement")),
        }
    }
}

/// Parses orchestra source into instrument ASTs, collecting every
/// syntax error.
pub fn parse(source: &str) -> Result<Vec<InstrAst>, Vec<Diagnostic>> {
    let mut instrs = Vec::new();
    let mut diags = Vec::new();
    let mut current: Option<InstrAst> = None;

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let toks = match lex_line(raw, line) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks: &toks,
            at: 0,
            eol: Pos {
                line,
                column: raw.chars().count() + 1,
            },
        };
        let head_is = |kw: &str| matches!(&toks[0].0, Tok::Ident(w) if w == kw);

        if head_is("instr") {
            if let Some(open) = current.take() {
                diags.push(Diagnostic::new(open.pos, format!("instr {} is missing 'endin'", open.number)));
            }
            p.at = 1;
            let number = match p.bump() {
                Some((Tok::Int(n), _)) if *n >= 1 && *n <= u32::MAX as u64 => *n as u32,
                Some((_, pos)) => {
                    diags.push(Diagnostic::new(*pos, "instrument number must be a positive integer"));
                    continue;
                }
                None => {
                    diags.push(p.unexpected("instrument number"));
                    continue;
                }
            };
            if let Err(d) = p.finish() {
                diags.push(d);
            }
            current = Some(InstrAst {
                number,
                pos: toks[0].1,
                body: Vec::new(),
            });
            continue;
        }
        if head_is("endin") {
            p.at = 1;
            if let Err(d) = p.finish() {
                diags.push(d);
            }
            match current.take() {
                Some(done) => instrs.push(done),
                None => diags.push(Diagnostic::new(toks[0].1, "'endin' without matching 'instr'")),
            }
            continue;
        }
        match current.as_mut() {
            Some(instr) => match p.stmt() {
                Ok(s) => instr.body.push(s),
                Err(d) => diags.push(d),
            },
            None => diags.push(Diagnostic::new(toks[0].1, "statement outside of an instrument block")),
        }
    }
    if let Some(open) = current {
        diags.push(Diagnostic::new(open.pos, format!("instr {} is missing 'endin'", open.number)));
    }

    if diags.is_empty() {
        Ok(instrs)
    } else {
        Err(diags)
    }
}

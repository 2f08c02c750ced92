//! Text syntax for universes and independence statements.
//!
//! ```text
//! stochastic X, Y, Z;
//! decision Theta, Phi;
//! complementary {Theta, Phi};
//! reduce W <= Y;
//! premise X _||_ Y, Theta | Z, Phi;
//! ```
//!
//! A statement is `varlist _||_ varlist [| varlist]`; an empty conditioning
//! set is written by omitting the bar or as `| 0`. A bar followed by nothing
//! is an error. `#` starts a comment that runs to the end of the line.

use thiserror::Error;

use crate::lattice::{LatticeError, NamedStatement, Statement, Universe, VarKind};

pub const INDEP_TOKEN: &str = "_||_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("ill-formed statement `{0}`: decision variables must contain a declared complementary family")]
    IllFormed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    Comma,
    Bar,
    Indep,
    LBrace,
    RBrace,
    Le,
    Semi,
}

fn perr(offset: usize, message: impl Into<String>) -> DslError {
    DslError::Parse { offset, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap();
        if c == '#' {
            i += rest.find('\n').unwrap_or(rest.len());
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with(INDEP_TOKEN) {
            out.push((i, Tok::Indep));
            i += INDEP_TOKEN.len();
            continue;
        }
        if rest.starts_with("<=") {
            out.push((i, Tok::Le));
            i += 2;
            continue;
        }
        let simple = match c {
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((i, t));
            i += 1;
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            let mut j = i;
            for ch in rest.chars() {
                if text[j..].starts_with(INDEP_TOKEN) {
                    break;
                }
                if ch.is_alphanumeric() || ch == '_' || ch == '\'' {
                    j += ch.len_utf8();
                } else {
                    break;
                }
            }
            let word = &text[start..j];
            if word == "0" {
                out.push((start, Tok::Zero));
            } else if crate::lattice::is_identifier(word) {
                out.push((start, Tok::Ident(word.to_string())));
            } else {
                return Err(perr(start, format!("invalid identifier `{word}`")));
            }
            i = j;
            continue;
        }
        return Err(perr(i, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        let off = self.offset();
        match self.bump() {
            Some(t) if *t == want => Ok(()),
            _ => Err(perr(off, format!("expected {what}"))),
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s.clone()),
            _ => Err(perr(off, "expected variable name")),
        }
    }

    fn varlist(&mut self) -> Result<Vec<String>, DslError> {
        let mut v = vec![self.ident()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn statement(&mut self) -> Result<NamedStatement, DslError> {
        let left = self.varlist()?;
        self.expect(Tok::Indep, "`_||_`")?;
        let right = self.varlist()?;
        let mut cond = Vec::new();
        if self.peek() == Some(&Tok::Bar) {
            self.bump();
            match self.peek() {
                Some(Tok::Zero) => {
                    self.bump();
                }
                Some(Tok::Ident(_)) => cond = self.varlist()?,
                _ => return Err(perr(self.offset(), "expected conditioning variables or `0` after `|`")),
            }
        }
        Ok(NamedStatement { left, right, cond })
    }
}

/// Parse a statement without resolving names.
pub fn parse_named_statement(text: &str) -> Result<NamedStatement, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len() };
    let stmt = p.statement()?;
    if p.pos < toks.len() {
        return Err(perr(p.offset(), "trailing input after statement"));
    }
    Ok(stmt)
}

/// Render name lists in the statement syntax; an empty conditioning set is omitted.
pub fn render_named(stmt: &NamedStatement) -> String {
    let mut s = format!("{} {INDEP_TOKEN} {}", stmt.left.join(", "), stmt.right.join(", "));
    if !stmt.cond.is_empty() {
        s.push_str(" | ");
        s.push_str(&stmt.cond.join(", "));
    }
    s
}

/// Parse and canonicalize a statement against a universe.
pub fn parse_statement(text: &str, universe: &Universe) -> Result<Statement, DslError> {
    let named = parse_named_statement(text)?;
    let stmt = universe.canonicalize(&named)?;
    if !universe.well_formed(&stmt, true) {
        return Err(DslError::IllFormed(text.trim().to_string()));
    }
    Ok(stmt)
}

/// Declarations plus premises, as read from a session file.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub universe: Universe,
    pub premises: Vec<Statement>,
}

/// Parse a session: declarations and `premise` lines, `;`-terminated.
pub fn parse_session(text: &str) -> Result<Session, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len() };
    let mut universe = Universe::new();
    let mut pending: Vec<(usize, NamedStatement)> = Vec::new();
    while p.pos < toks.len() {
        let off = p.offset();
        let keyword = p.ident()?;
        match keyword.as_str() {
            "stochastic" | "decision" => {
                let kind = if keyword == "stochastic" { VarKind::Stochastic } else { VarKind::Decision };
                for name in p.varlist()? {
                    universe.declare(&name, kind)?;
                }
            }
            "complementary" => {
                p.expect(Tok::LBrace, "`{`")?;
                let names = p.varlist()?;
                p.expect(Tok::RBrace, "`}`")?;
                universe.declare_complementary(&names)?;
            }
            "reduce" => {
                let w = p.ident()?;
                p.expect(Tok::Le, "`<=`")?;
                let y = p.ident()?;
                universe.declare_reduction(&w, &y)?;
            }
            "premise" => {
                let start = p.offset();
                pending.push((start, p.statement()?));
            }
            other => return Err(perr(off, format!("unknown declaration `{other}`"))),
        }
        if p.pos < toks.len() {
            p.expect(Tok::Semi, "`;`")?;
        }
    }
    let mut premises = Vec::with_capacity(pending.len());
    for (_, named) in pending {
        let stmt = universe.canonicalize(&named)?;
        if !universe.well_formed(&stmt, true) {
            return Err(DslError::IllFormed(universe.render(&stmt)));
        }
        premises.push(stmt);
    }
    Ok(Session { universe, premises })
}

/// Parse only the universe declarations (no premises allowed to be unresolved).
pub fn parse_universe(text: &str) -> Result<Universe, DslError> {
    Ok(parse_session(text)?.universe)
}

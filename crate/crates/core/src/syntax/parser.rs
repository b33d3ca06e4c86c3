//! Recursive-descent parser for the rule language.
//!
//! ```text
//! statement := head "."  |  head ":-" body "."  |  ":-" body "."
//! body      := literal ("," literal)*
//! literal   := "not" atom  |  expr cmp expr  |  atom
//! expr      := primary ("+" primary)*
//! primary   := ident | ident "(" expr, ... ")" | integer | integer ".." integer
//! ```
//!
//! In atom position any identifier names a predicate; the first letter of a
//! predicate is case-folded so `Dom` and `dom` coincide. In term position an
//! identifier starting with an uppercase letter or `_` is a variable.

use super::program::{Builtin, CmpOp, Program, Rule};
use super::term::{Atom, Symbol, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    If,
    Plus,
    Cmp(CmpOp),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: tl,
                column: tc,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '.' if chars.get(i + 1) == Some(&'.') => push(Tok::DotDot, 2, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::If, 2, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => {
                push(Tok::Cmp(CmpOp::Ne), 2, &mut i, &mut col)
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                push(Tok::Cmp(CmpOp::Le), 2, &mut i, &mut col)
            }
            '>' if chars.get(i + 1) == Some(&'=') => {
                push(Tok::Cmp(CmpOp::Ge), 2, &mut i, &mut col)
            }
            '<' => push(Tok::Cmp(CmpOp::Lt), 1, &mut i, &mut col),
            '>' => push(Tok::Cmp(CmpOp::Gt), 1, &mut i, &mut col),
            '=' => push(Tok::Cmp(CmpOp::Eq), 1, &mut i, &mut col),
            '$' => return Err(syntax(tl, tc, "`$` is reserved for analysis constants")),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<i64>()
                    .map_err(|_| syntax(tl, tc, format!("integer `{s}` out of range")))?;
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Int(v),
                    line: tl,
                    column: tc,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: tl,
                    column: tc,
                });
            }
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Surface term before it is known whether it denotes an atom or a term.
#[derive(Clone, Debug)]
enum Raw {
    Ident(String, Option<Vec<Raw>>),
    Int(i64),
    Interval(i64, i64),
    Add(Box<Raw>, Box<Raw>),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

fn is_variable_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_uppercase() || c == '_')
}

fn predicate_name(name: &str) -> Symbol {
    let mut chars = name.chars();
    match chars.next() {
        Some(first) => Symbol::new(&(first.to_lowercase().collect::<String>() + chars.as_str())),
        None => Symbol::new(name),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn primary(&mut self) -> Result<Raw> {
        match self.bump() {
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Raw::Ident(name, Some(args)))
                } else {
                    Ok(Raw::Ident(name, None))
                }
            }
            Tok::Int(v) => {
                if *self.peek() == Tok::DotDot {
                    self.bump();
                    match self.bump() {
                        Tok::Int(hi) => Ok(Raw::Interval(v, hi)),
                        _ => Err(self.error("expected integer after `..`")),
                    }
                } else {
                    Ok(Raw::Int(v))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected a term, found {other:?}")))
            }
        }
    }

    fn expr(&mut self) -> Result<Raw> {
        let mut left = self.primary()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let right = self.primary()?;
            left = Raw::Add(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn to_term(&self, raw: &Raw) -> Result<Term> {
        Ok(match raw {
            Raw::Ident(name, None) if is_variable_name(name) => Term::var(name),
            Raw::Ident(name, None) => Term::constant(name),
            Raw::Ident(name, Some(args)) => Term::Func(
                Symbol::new(name),
                args.iter()
                    .map(|a| self.to_term(a))
                    .collect::<Result<Vec<_>>>()?
                    .into(),
            ),
            Raw::Int(v) => Term::Int(*v),
            Raw::Add(l, r) => Term::add(self.to_term(l)?, self.to_term(r)?),
            Raw::Interval(..) => return Err(self.error("intervals are only allowed in facts")),
        })
    }

    /// Converts a raw head/body item to an atom, keeping intervals for expansion.
    fn to_atom_with_intervals(&self, raw: &Raw) -> Result<(Symbol, Vec<Raw>)> {
        match raw {
            Raw::Ident(name, args) => Ok((predicate_name(name), args.clone().unwrap_or_default())),
            _ => Err(self.error("expected an atom")),
        }
    }

    fn to_atom(&self, raw: &Raw) -> Result<Atom> {
        let (predicate, args) = self.to_atom_with_intervals(raw)?;
        let args = args
            .iter()
            .map(|a| self.to_term(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Atom { predicate, args })
    }

    fn literal(&mut self, rule: &mut Rule) -> Result<()> {
        if matches!(self.peek(), Tok::Ident(s) if s == "not") {
            // `not` followed by a term start is negation; a bare `not` is an atom.
            if !matches!(
                self.toks[self.pos + 1].tok,
                Tok::Comma | Tok::Dot | Tok::Cmp(_) | Tok::Eof
            ) {
                self.bump();
                let raw = self.primary()?;
                rule.neg.push(self.to_atom(&raw)?);
                return Ok(());
            }
        }
        let left = self.expr()?;
        if let Tok::Cmp(op) = *self.peek() {
            self.bump();
            let right = self.expr()?;
            rule.builtins.push(Builtin {
                op,
                left: self.to_term(&left)?,
                right: self.to_term(&right)?,
            });
        } else {
            rule.pos.push(self.to_atom(&left)?);
        }
        Ok(())
    }

    fn statement(&mut self, out: &mut Vec<Rule>) -> Result<()> {
        let head = if *self.peek() == Tok::If {
            None
        } else {
            Some(self.expr()?)
        };
        let mut rule = Rule {
            head: None,
            pos: Vec::new(),
            neg: Vec::new(),
            builtins: Vec::new(),
        };
        let has_body = *self.peek() == Tok::If;
        if has_body {
            self.bump();
            // `:- .` is the constraint with an empty body.
            if head.is_none() && *self.peek() == Tok::Dot {
                self.bump();
                out.push(rule);
                return Ok(());
            }
            self.literal(&mut rule)?;
            while *self.peek() == Tok::Comma {
                self.bump();
                self.literal(&mut rule)?;
            }
        } else if head.is_none() {
            return Err(self.error("empty statement"));
        }
        self.expect(Tok::Dot, "`.`")?;

        match head {
            None => out.push(rule),
            Some(raw) if !has_body => {
                let (predicate, args) = self.to_atom_with_intervals(&raw)?;
                for args in self.expand_intervals(&args)? {
                    out.push(Rule::fact(Atom {
                        predicate: predicate.clone(),
                        args,
                    }));
                }
            }
            Some(raw) => {
                rule.head = Some(self.to_atom(&raw)?);
                out.push(rule);
            }
        }
        Ok(())
    }

    fn expand_intervals(&self, args: &[Raw]) -> Result<Vec<Vec<Term>>> {
        let mut rows: Vec<Vec<Term>> = vec![Vec::new()];
        for a in args {
            let options: Vec<Term> = match a {
                Raw::Interval(lo, hi) => (*lo..=*hi).map(Term::Int).collect(),
                other => vec![self.to_term(other)?],
            };
            rows = rows
                .into_iter()
                .flat_map(|row| {
                    options.iter().map(move |o| {
                        let mut r = row.clone();
                        r.push(o.clone());
                        r
                    })
                })
                .collect();
        }
        Ok(rows)
    }
}

/// Parses program text into a safe, desugared [`Program`].
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut rules = Vec::new();
    while *p.peek() != Tok::Eof {
        p.statement(&mut rules)?;
    }
    Program::new(rules)
}

/// Parses a single ground atom such as `r(f(b),f(f(b)))`; a trailing `.` is allowed.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let raw = p.primary()?;
    let atom = p.to_atom(&raw)?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error("trailing input after atom"));
    }
    if !atom.is_ground() {
        return Err(syntax(1, 1, format!("atom `{atom}` is not ground")));
    }
    Ok(atom)
}

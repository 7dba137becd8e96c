//! Text syntax for programs (`.lp`) and test cases (`.test`).
//!
//! ```text
//! h1 | h2 :- l1, not l2, X != Y.    % rule
//! p(1).                             % fact
//! :- a, not b.                      % constraint
//! {a}.                              % choice over a ground atom
//! ```

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    check_safety, is_reserved, Atom, BodyElement, CmpOp, Comparison, Literal, Program, RuleId,
    Span, Term,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    ArityClash {
        predicate: String,
        expected: usize,
        found: usize,
    },
    Reserved(String),
    Unsafe {
        rule: RuleId,
        variable: String,
    },
    NonGroundChoice,
    NonGroundAssertion,
    Contradiction(Atom),
}

/// A parse error with a 1-based line/column and the byte offset it refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => f.write_str(m),
            ParseErrorKind::ArityClash {
                predicate,
                expected,
                found,
            } => write!(
                f,
                "predicate {predicate} used with arity {found}, previously {expected}"
            ),
            ParseErrorKind::Reserved(p) => write!(f, "identifier {p} is in a reserved namespace"),
            ParseErrorKind::Unsafe { rule, variable } => write!(
                f,
                "rule {rule} is unsafe: variable {variable} does not occur in a positive body literal"
            ),
            ParseErrorKind::NonGroundChoice => f.write_str("choice over non-ground atom"),
            ParseErrorKind::NonGroundAssertion => f.write_str("asserted atom must be ground"),
            ParseErrorKind::Contradiction(a) => {
                write!(f, "{a} is asserted both true and false")
            }
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `_debug`, `_support`, `_f_` identifiers and nested terms, as
    /// printed by the instrumenter.
    pub allow_reserved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    If,
    Pipe,
    Cmp(CmpOp),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_trivia(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'%' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, Span), (usize, String)> {
        self.skip_trivia();
        let bytes = self.text.as_bytes();
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::Eof, Span::new(start, start)));
        };
        let ident_end = |from: usize| {
            let mut end = from;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            end
        };
        let tok = match c {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'{' => {
                self.pos += 1;
                Tok::LBrace
            }
            b'}' => {
                self.pos += 1;
                Tok::RBrace
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'.' => {
                self.pos += 1;
                Tok::Dot
            }
            b'|' => {
                self.pos += 1;
                Tok::Pipe
            }
            b':' if bytes.get(start + 1) == Some(&b'-') => {
                self.pos += 2;
                Tok::If
            }
            b'=' => {
                self.pos += if bytes.get(start + 1) == Some(&b'=') {
                    2
                } else {
                    1
                };
                Tok::Cmp(CmpOp::Eq)
            }
            b'!' if bytes.get(start + 1) == Some(&b'=') => {
                self.pos += 2;
                Tok::Cmp(CmpOp::Ne)
            }
            b'<' => match bytes.get(start + 1) {
                Some(b'=') => {
                    self.pos += 2;
                    Tok::Cmp(CmpOp::Le)
                }
                Some(b'>') => {
                    self.pos += 2;
                    Tok::Cmp(CmpOp::Ne)
                }
                _ => {
                    self.pos += 1;
                    Tok::Cmp(CmpOp::Lt)
                }
            },
            b'>' => {
                if bytes.get(start + 1) == Some(&b'=') {
                    self.pos += 2;
                    Tok::Cmp(CmpOp::Ge)
                } else {
                    self.pos += 1;
                    Tok::Cmp(CmpOp::Gt)
                }
            }
            b'-' | b'0'..=b'9' => {
                let mut end = start + 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let lit = &self.text[start..end];
                let value = lit
                    .parse::<i64>()
                    .map_err(|_| (start, alloc::format!("invalid integer `{lit}`")))?;
                self.pos = end;
                Tok::Int(value)
            }
            b'a'..=b'z' | b'_' => {
                let end = ident_end(start);
                self.pos = end;
                Tok::Ident(self.text[start..end].into())
            }
            b'A'..=b'Z' => {
                let end = ident_end(start);
                self.pos = end;
                Tok::Var(self.text[start..end].into())
            }
            _ => {
                let ch = self.text[start..].chars().next().unwrap_or('?');
                return Err((start, alloc::format!("unexpected character `{ch}`")));
            }
        };
        Ok((tok, Span::new(start, self.pos)))
    }
}

struct Parser<'a> {
    text: &'a str,
    lexer: Lexer<'a>,
    tok: Tok,
    span: Span,
    opts: ParseOptions,
    arities: BTreeMap<String, usize>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(text: &'a str, opts: ParseOptions) -> PResult<Self> {
        let mut p = Parser {
            text,
            lexer: Lexer { text, pos: 0 },
            tok: Tok::Eof,
            span: Span::default(),
            opts,
            arities: BTreeMap::new(),
        };
        p.bump()?;
        Ok(p)
    }

    fn error_at(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        let (line, column) = line_col(self.text, offset);
        ParseError {
            line,
            column,
            offset: offset.min(self.text.len()),
            kind,
        }
    }

    fn syntax(&self, msg: String) -> ParseError {
        self.error_at(self.span.start, ParseErrorKind::Syntax(msg))
    }

    fn bump(&mut self) -> PResult<Tok> {
        let (tok, span) = self
            .lexer
            .next()
            .map_err(|(at, msg)| self.error_at(at, ParseErrorKind::Syntax(msg)))?;
        self.span = span;
        Ok(core::mem::replace(&mut self.tok, tok))
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if self.tok == want {
            self.bump()?;
            Ok(())
        } else {
            Err(self.syntax(alloc::format!("expected {want}, found {}", self.tok)))
        }
    }

    fn check_name(&self, name: &str, at: usize) -> PResult<()> {
        if name.starts_with('_') && !(self.opts.allow_reserved && is_reserved(name)) {
            return Err(self.error_at(at, ParseErrorKind::Reserved(name.into())));
        }
        Ok(())
    }

    fn args(&mut self) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if self.tok != Tok::LParen {
            return Ok(args);
        }
        self.bump()?;
        loop {
            args.push(self.term()?);
            match self.tok {
                Tok::Comma => {
                    self.bump()?;
                }
                Tok::RParen => {
                    self.bump()?;
                    return Ok(args);
                }
                _ => {
                    return Err(
                        self.syntax(alloc::format!("expected `,` or `)`, found {}", self.tok))
                    )
                }
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let start = self.span.start;
        match self.bump()? {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Int(i) => Ok(Term::Int(i)),
            Tok::Ident(name) => {
                self.check_name(&name, start)?;
                if self.tok == Tok::LParen {
                    if !self.opts.allow_reserved {
                        return Err(self.error_at(
                            start,
                            ParseErrorKind::Syntax("function symbols are not supported".into()),
                        ));
                    }
                    let args = self.args()?;
                    Ok(Term::Func(name, args))
                } else {
                    Ok(Term::Sym(name))
                }
            }
            other => Err(self.error_at(
                start,
                ParseErrorKind::Syntax(alloc::format!("expected a term, found {other}")),
            )),
        }
    }

    fn register(&mut self, atom: &Atom, at: usize) -> PResult<()> {
        match self.arities.get(&atom.predicate) {
            Some(&expected) if expected != atom.arity() => Err(self.error_at(
                at,
                ParseErrorKind::ArityClash {
                    predicate: atom.predicate.clone(),
                    expected,
                    found: atom.arity(),
                },
            )),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let start = self.span.start;
        let atom = self.raw_atom()?;
        self.register(&atom, start)?;
        Ok(atom)
    }

    fn raw_atom(&mut self) -> PResult<Atom> {
        let start = self.span.start;
        match self.bump()? {
            Tok::Ident(name) => {
                self.check_name(&name, start)?;
                let args = self.args()?;
                Ok(Atom {
                    predicate: name,
                    args,
                })
            }
            other => Err(self.error_at(
                start,
                ParseErrorKind::Syntax(alloc::format!("expected an atom, found {other}")),
            )),
        }
    }

    fn cmp_rest(&mut self, left: Term) -> PResult<BodyElement> {
        let op = match self.bump()? {
            Tok::Cmp(op) => op,
            other => {
                return Err(self.syntax(alloc::format!(
                    "expected a comparison operator, found {other}"
                )))
            }
        };
        let right = self.term()?;
        Ok(BodyElement::Comparison(Comparison::new(left, op, right)))
    }

    fn body_element(&mut self) -> PResult<BodyElement> {
        let start = self.span.start;
        match &self.tok {
            Tok::Ident(kw) if kw == "not" => {
                self.bump()?;
                Ok(BodyElement::Literal(Literal::neg(self.atom()?)))
            }
            Tok::Ident(_) => {
                let atom = self.raw_atom()?;
                if let Tok::Cmp(_) = self.tok {
                    // `a < b`: the identifier was a constant.
                    let left = if atom.args.is_empty() {
                        Term::Sym(atom.predicate)
                    } else {
                        return Err(self.error_at(
                            start,
                            ParseErrorKind::Syntax("function symbols are not supported".into()),
                        ));
                    };
                    self.cmp_rest(left)
                } else {
                    self.register(&atom, start)?;
                    Ok(BodyElement::Literal(Literal::pos(atom)))
                }
            }
            Tok::Var(_) | Tok::Int(_) => {
                let left = self.term()?;
                self.cmp_rest(left)
            }
            other => Err(self.syntax(alloc::format!("expected a body element, found {other}"))),
        }
    }

    fn body(&mut self) -> PResult<Vec<BodyElement>> {
        let mut body = alloc::vec![self.body_element()?];
        while self.tok == Tok::Comma {
            self.bump()?;
            body.push(self.body_element()?);
        }
        Ok(body)
    }

    fn statement(&mut self, program: &mut Program) -> PResult<()> {
        let start = self.span.start;
        if self.tok == Tok::LBrace {
            self.bump()?;
            let atom_at = self.span.start;
            let atom = self.atom()?;
            self.expect(Tok::RBrace)?;
            let body = if self.tok == Tok::If {
                self.bump()?;
                self.body()?
            } else {
                Vec::new()
            };
            let end = self.span.end;
            self.expect(Tok::Dot)?;
            if !atom.is_ground() {
                return Err(self.error_at(atom_at, ParseErrorKind::NonGroundChoice));
            }
            let id = program
                .push_choice(atom, body, Span::new(start, end))
                .map_err(|_| self.error_at(atom_at, ParseErrorKind::NonGroundChoice))?;
            return self.safe(program, id, start);
        }

        let mut head = Vec::new();
        if self.tok != Tok::If {
            head.push(self.atom()?);
            while self.tok == Tok::Pipe {
                self.bump()?;
                head.push(self.atom()?);
            }
        }
        let body = if self.tok == Tok::If {
            self.bump()?;
            self.body()?
        } else {
            Vec::new()
        };
        let end = self.span.end;
        self.expect(Tok::Dot)?;
        let mut rule = crate::ast::Rule::new(head, body);
        rule.span = Span::new(start, end);
        let id = program.push(rule);
        self.safe(program, id, start)
    }

    fn safe(&self, program: &Program, id: RuleId, at: usize) -> PResult<()> {
        let rule = program.rule(id).expect("rule was just pushed");
        check_safety(rule).map_err(|v| {
            self.error_at(
                at,
                ParseErrorKind::Unsafe {
                    rule: id,
                    variable: v.variable,
                },
            )
        })
    }
}

/// Parses a user program. Rule ids follow source order starting at 1.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with(text, ParseOptions::default())
}

pub fn parse_program_with(text: &str, opts: ParseOptions) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text, opts)?;
    let mut program = Program::new();
    while parser.tok != Tok::Eof {
        parser.statement(&mut program)?;
    }
    Ok(program)
}

/// Literals a failing test case asserts about an intended answer set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestCase {
    /// `assertTrue(a)` yields `a`, `assertFalse(a)` yields `not a`.
    pub asserted: Vec<Literal>,
    pub source: Option<String>,
}

impl TestCase {
    pub fn from_literals(asserted: Vec<Literal>) -> Self {
        TestCase {
            asserted,
            source: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.asserted.is_empty()
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.asserted {
            let kw = if l.negated {
                "assertFalse"
            } else {
                "assertTrue"
            };
            writeln!(f, "{kw}({}).", l.atom)?;
        }
        Ok(())
    }
}

/// Parses `assertTrue(<atom>).` / `assertFalse(<atom>).` statements.
pub fn parse_test_case(text: &str) -> Result<TestCase, ParseError> {
    let mut parser = Parser::new(text, ParseOptions::default())?;
    let mut asserted: Vec<Literal> = Vec::new();
    while parser.tok != Tok::Eof {
        let start = parser.span.start;
        let negated = match parser.bump()? {
            Tok::Ident(kw) if kw == "assertTrue" => false,
            Tok::Ident(kw) if kw == "assertFalse" => true,
            other => {
                return Err(parser.error_at(
                    start,
                    ParseErrorKind::Syntax(alloc::format!(
                        "expected `assertTrue(..)` or `assertFalse(..)`, found {other}"
                    )),
                ))
            }
        };
        parser.expect(Tok::LParen)?;
        let atom_at = parser.span.start;
        let atom = parser.atom()?;
        parser.expect(Tok::RParen)?;
        parser.expect(Tok::Dot)?;
        if !atom.is_ground() {
            return Err(parser.error_at(atom_at, ParseErrorKind::NonGroundAssertion));
        }
        if asserted
            .iter()
            .any(|l| l.atom == atom && l.negated != negated)
        {
            return Err(parser.error_at(atom_at, ParseErrorKind::Contradiction(atom)));
        }
        let lit = Literal { atom, negated };
        if !asserted.contains(&lit) {
            asserted.push(lit);
        }
    }
    Ok(TestCase {
        asserted,
        source: None,
    })
}

/// Parses a single ground atom such as `col(1,blue)`.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut parser = Parser::new(text, ParseOptions::default())?;
    let atom = parser.atom()?;
    if parser.tok != Tok::Eof {
        return Err(parser.syntax(alloc::format!("unexpected {} after atom", parser.tok)));
    }
    if !atom.is_ground() {
        return Err(parser.error_at(0, ParseErrorKind::NonGroundAssertion));
    }
    Ok(atom)
}

impl ParseError {
    /// Short message without the location prefix.
    pub fn message(&self) -> String {
        let full = self.to_string();
        match full.split_once(": ") {
            Some((_, m)) => m.to_string(),
            None => full,
        }
    }
}

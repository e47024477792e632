//! Recursive-descent parser for `.loop` files.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use super::{LoopSpec, ParseError, ParseErrorKind, Updates};
use crate::linarith::{Atom, Conj, Dnf, LinTerm, Rational, Semantics, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("`{s}`"),
            Tok::Num(n) => alloc::format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => {
                let s = match other {
                    Tok::Prime => "'",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Semi => ";",
                    Tok::Comma => ",",
                    Tok::Assign => ":=",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::Gt => ">",
                    Tok::Ge => ">=",
                    _ => "=",
                };
                alloc::format!("`{s}`")
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<u64>().map_err(|_| ParseError {
                line: l0,
                col: c0,
                kind: ParseErrorKind::NumberTooLarge(digits.clone()),
            })?;
            out.push(Spanned { tok: Tok::Num(n), line: l0, col: c0 });
            continue;
        } else {
            match (c, next) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('=', _) => (Tok::Eq, 1),
                ('\'', _) => (Tok::Prime, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (';', _) => (Tok::Semi, 1),
                (',', _) => (Tok::Comma, 1),
                _ => {
                    return Err(ParseError { line: l0, col: c0, kind: ParseErrorKind::BadChar(c) })
                }
            }
        };
        i += tok.1;
        col += tok.1;
        out.push(Spanned { tok: tok.0, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 9] = ["vars", "pre", "semantics", "while", "relation", "and", "or", "true", "false"];

/// Where a formula appears, for primed-variable checks.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Guard,
    Pre,
    Update,
    Relation,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vec<VarId>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, col: t.col, kind }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.err_here(ParseErrorKind::Unexpected { found: self.peek().describe(), expected })
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &'static str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn ident(&mut self, expected: &'static str) -> PResult<(String, usize, usize)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let t = self.bump();
                Ok((s, t.line, t.col))
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    /// A variable occurrence, with optional prime.
    fn var_ref(&mut self, ctx: Ctx) -> PResult<VarId> {
        let (name, line, col) = self.ident("a variable")?;
        let at = |kind| ParseError { line, col, kind };
        let v = VarId::new(&name);
        if !self.vars.contains(&v) {
            return Err(at(ParseErrorKind::Undeclared(name)));
        }
        if *self.peek() == Tok::Prime {
            self.bump();
            return match ctx {
                Ctx::Guard => Err(at(ParseErrorKind::PrimedIn("guard"))),
                Ctx::Pre => Err(at(ParseErrorKind::PrimedIn("precondition"))),
                Ctx::Update => Err(at(ParseErrorKind::PrimedIn("update"))),
                Ctx::Relation => Ok(v.primed()),
            };
        }
        Ok(v)
    }

    // term := ['-'|'+'] product (('+'|'-') product)*
    fn term(&mut self, ctx: Ctx) -> PResult<LinTerm> {
        let mut acc = self.product(ctx)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.product(ctx)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.product(ctx)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // product := unary (('*'|'/') unary)*
    fn product(&mut self, ctx: Ctx) -> PResult<LinTerm> {
        let mut acc = self.unary(ctx)?;
        loop {
            let t = &self.toks[self.pos];
            let (line, col) = (t.line, t.col);
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary(ctx)?;
                    acc = if acc.is_constant() {
                        rhs * acc.constant_part()
                    } else if rhs.is_constant() {
                        acc * rhs.constant_part()
                    } else {
                        return Err(ParseError { line, col, kind: ParseErrorKind::NonLinear });
                    };
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary(ctx)?;
                    if !rhs.is_constant() {
                        return Err(ParseError { line, col, kind: ParseErrorKind::NonLinear });
                    }
                    if rhs.constant_part().is_zero() {
                        return Err(ParseError { line, col, kind: ParseErrorKind::DivisionByZero });
                    }
                    acc = acc * &(Rational::from_integer(1.into()) / rhs.constant_part());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self, ctx: Ctx) -> PResult<LinTerm> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary(ctx)?)
            }
            Tok::Plus => {
                self.bump();
                self.unary(ctx)
            }
            Tok::Num(n) => {
                self.bump();
                Ok(LinTerm::constant(Rational::from_integer(n.into())))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term(ctx)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(_) => Ok(LinTerm::var(self.var_ref(ctx)?)),
            _ => Err(self.unexpected("a term")),
        }
    }

    fn comparison(&mut self, ctx: Ctx) -> PResult<Atom> {
        let lhs = self.term(ctx)?;
        let op = self.peek().clone();
        let build: fn(LinTerm, LinTerm) -> Atom = match op {
            Tok::Lt => Atom::lt,
            Tok::Le => Atom::le,
            Tok::Gt => Atom::gt,
            Tok::Ge => Atom::ge,
            Tok::Eq => Atom::eq,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.term(ctx)?;
        Ok(build(lhs, rhs))
    }

    // formula := conjunct ('or' conjunct)*
    fn formula(&mut self, ctx: Ctx) -> PResult<Dnf> {
        let mut acc = self.conjunct(ctx)?;
        while self.is_kw("or") {
            self.bump();
            acc = acc.or(&self.conjunct(ctx)?);
        }
        Ok(acc)
    }

    // conjunct := primary ('and' primary)*
    fn conjunct(&mut self, ctx: Ctx) -> PResult<Dnf> {
        let mut acc = self.primary(ctx)?;
        while self.is_kw("and") {
            self.bump();
            acc = acc.and(&self.primary(ctx)?);
        }
        Ok(acc)
    }

    fn primary(&mut self, ctx: Ctx) -> PResult<Dnf> {
        if self.is_kw("true") {
            self.bump();
            return Ok(Dnf::top());
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Dnf::bottom());
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesized formula or a comparison whose left side
            // starts with a parenthesized term.
            let save = self.pos;
            self.bump();
            if let Ok(inner) = self.formula(ctx) {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !self.continues_term() {
                        return Ok(inner);
                    }
                }
            }
            self.pos = save;
        }
        Ok(Dnf::from(self.comparison(ctx)?))
    }

    /// True if the next token would extend an arithmetic term.
    fn continues_term(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq
        )
    }

    fn check_reserved(&self, name: &str, line: usize, col: usize) -> PResult<()> {
        if name.starts_with("__") {
            return Err(ParseError { line, col, kind: ParseErrorKind::Reserved(name.to_string()) });
        }
        Ok(())
    }

    fn spec(&mut self) -> PResult<LoopSpec> {
        self.expect_kw("vars")?;
        loop {
            let (name, line, col) = self.ident("a variable name")?;
            self.check_reserved(&name, line, col)?;
            let v = VarId::new(&name);
            if self.vars.contains(&v) {
                return Err(ParseError { line, col, kind: ParseErrorKind::DuplicateVariable(name) });
            }
            self.vars.push(v);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi, "`,` or `;`")?;

        let mut pre: Option<Dnf> = None;
        let mut semantics: Option<Semantics> = None;
        loop {
            if self.is_kw("pre") {
                if pre.is_some() {
                    return Err(self.err_here(ParseErrorKind::DuplicateClause("pre")));
                }
                self.bump();
                pre = Some(self.formula(Ctx::Pre)?);
                self.expect(Tok::Semi, "`;`")?;
            } else if self.is_kw("semantics") {
                if semantics.is_some() {
                    return Err(self.err_here(ParseErrorKind::DuplicateClause("semantics")));
                }
                self.bump();
                semantics = Some(match self.peek() {
                    Tok::Ident(s) if s == "int" => Semantics::Int,
                    Tok::Ident(s) if s == "rat" => Semantics::Rat,
                    _ => return Err(self.unexpected("`int` or `rat`")),
                });
                self.bump();
                self.expect(Tok::Semi, "`;`")?;
            } else {
                break;
            }
        }
        let semantics = semantics.unwrap_or_default();

        self.expect_kw("while")?;
        let guard = self.formula(Ctx::Guard)?;
        self.expect(Tok::LBrace, "`{`")?;
        let updates = if self.is_kw("relation") {
            self.bump();
            let t = &self.toks[self.pos];
            let (line, col) = (t.line, t.col);
            let rel = self.formula(Ctx::Relation)?;
            self.expect(Tok::Semi, "`;`")?;
            let conj = match rel.disjuncts() {
                [] => Conj::bottom(),
                [c] => c.clone(),
                _ => return Err(ParseError { line, col, kind: ParseErrorKind::DisjunctiveRelation }),
            };
            Updates::Relational(conj)
        } else {
            self.assignments(semantics)?
        };
        self.expect(Tok::RBrace, "`}`")?;
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(LoopSpec {
            name: "loop".into(),
            vars: core::mem::take(&mut self.vars),
            guard,
            updates,
            pre: pre.unwrap_or_else(Dnf::top),
            semantics,
        })
    }

    fn assignments(&mut self, semantics: Semantics) -> PResult<Updates> {
        let mut map: BTreeMap<VarId, LinTerm> = BTreeMap::new();
        while *self.peek() != Tok::RBrace {
            let (name, line, col) = self.ident("an assignment or `}`")?;
            let at = |kind| ParseError { line, col, kind };
            let v = VarId::new(&name);
            if !self.vars.contains(&v) {
                return Err(at(ParseErrorKind::Undeclared(name)));
            }
            if *self.peek() == Tok::Prime {
                return Err(at(ParseErrorKind::PrimedLhs));
            }
            self.expect(Tok::Assign, "`:=`")?;
            let rhs = self.term(Ctx::Update)?;
            self.expect(Tok::Semi, "`;`")?;
            if map.contains_key(&v) {
                return Err(at(ParseErrorKind::DuplicateUpdate(name)));
            }
            if semantics == Semantics::Int
                && !(rhs.constant_part().is_integer() && rhs.coeffs().values().all(|c| c.is_integer()))
            {
                return Err(at(ParseErrorKind::NonIntegralUpdate(name)));
            }
            map.insert(v, rhs);
        }
        let mut ordered = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            match map.remove(v) {
                Some(t) => ordered.push((v.clone(), t)),
                None => return Err(self.err_here(ParseErrorKind::MissingUpdate(v.name().into()))),
            }
        }
        Ok(Updates::Deterministic(ordered))
    }
}

pub(super) fn parse(text: &str) -> Result<LoopSpec, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars: Vec::new() };
    p.spec()
}

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Location, Name};

/// Source terms of the calculi that encode into the FMC.
///
/// One tree covers every sub-language; each translator accepts only its own
/// constructs and rejects the rest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SourceTerm {
    Var(Name),
    Lam(Name, Box<SourceTerm>),
    App(Box<SourceTerm>, Box<SourceTerm>),
    Int(i64),
    /// `read`
    Read,
    /// `write N; M`
    Write(Box<SourceTerm>, Box<SourceTerm>),
    /// `c := N; M`
    Assign(Location, Box<SourceTerm>, Box<SourceTerm>),
    /// `!c`
    Lookup(Location),
    /// `N (+) M`, probabilistic sum
    Prob(Box<SourceTerm>, Box<SourceTerm>),
    /// `N + M`, nondeterministic sum
    Nondet(Box<SourceTerm>, Box<SourceTerm>),
    Pair(Box<SourceTerm>, Box<SourceTerm>),
    /// `fst P` (1) and `snd P` (2)
    Proj(u8, Box<SourceTerm>),
    Unit,
    /// `return M`
    Return(Box<SourceTerm>),
    /// `let x = N in M`
    Let(Name, Box<SourceTerm>, Box<SourceTerm>),
    /// `thunk M`
    Thunk(Box<SourceTerm>),
    /// `force V`
    Force(Box<SourceTerm>),
    /// `N to x. M`
    To(Box<SourceTerm>, Name, Box<SourceTerm>),
    /// `arr M`
    Arr(Box<SourceTerm>),
    /// `P >>> Q`
    Then(Box<SourceTerm>, Box<SourceTerm>),
    /// `first P`
    First(Box<SourceTerm>),
    /// `push V`
    Push(Box<SourceTerm>),
    /// `kappa x. M`
    Kappa(Name, Box<SourceTerm>),
    /// `mkthunk M`
    MkThunk(Box<SourceTerm>),
    /// `apply`
    Apply,
    /// `M ; N`, primitive composition
    Seq(Box<SourceTerm>, Box<SourceTerm>),
}

use SourceTerm as S;

impl SourceTerm {
    pub fn var(x: &str) -> Self {
        S::Var(Name::new(x))
    }

    pub fn lam(x: &str, body: SourceTerm) -> Self {
        S::Lam(Name::new(x), Box::new(body))
    }

    pub fn app(f: SourceTerm, a: SourceTerm) -> Self {
        S::App(Box::new(f), Box::new(a))
    }

    /// Short description used in error messages.
    pub fn construct(&self) -> &'static str {
        match self {
            S::Var(_) => "variable",
            S::Lam(..) => "abstraction",
            S::App(..) => "application",
            S::Int(_) => "integer",
            S::Read => "read",
            S::Write(..) => "write",
            S::Assign(..) => "update",
            S::Lookup(_) => "lookup",
            S::Prob(..) => "probabilistic sum",
            S::Nondet(..) => "nondeterministic sum",
            S::Pair(..) => "pair",
            S::Proj(..) => "projection",
            S::Unit => "unit",
            S::Return(_) => "return",
            S::Let(..) => "let",
            S::Thunk(_) => "thunk",
            S::Force(_) => "force",
            S::To(..) => "to",
            S::Arr(_) => "arr",
            S::Then(..) => ">>>",
            S::First(_) => "first",
            S::Push(_) => "push",
            S::Kappa(..) => "kappa",
            S::MkThunk(_) => "mkthunk",
            S::Apply => "apply",
            S::Seq(..) => "composition",
        }
    }

    pub fn children(&self) -> Vec<&SourceTerm> {
        match self {
            S::Var(_) | S::Int(_) | S::Read | S::Lookup(_) | S::Unit | S::Apply => vec![],
            S::Lam(_, m)
            | S::Proj(_, m)
            | S::Return(m)
            | S::Thunk(m)
            | S::Force(m)
            | S::Arr(m)
            | S::First(m)
            | S::Push(m)
            | S::Kappa(_, m)
            | S::MkThunk(m) => vec![m],
            S::App(a, b)
            | S::Write(a, b)
            | S::Assign(_, a, b)
            | S::Prob(a, b)
            | S::Nondet(a, b)
            | S::Pair(a, b)
            | S::Let(_, a, b)
            | S::To(a, _, b)
            | S::Then(a, b)
            | S::Seq(a, b) => vec![a, b],
        }
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(SourceTerm::size)
            .sum::<usize>()
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            S::Var(x) | S::Lam(x, _) | S::Let(x, _, _) | S::To(_, x, _) | S::Kappa(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_names(out);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            S::Var(x) => [x.clone()].into(),
            S::Lam(x, m) | S::Kappa(x, m) => {
                let mut f = m.free_vars();
                f.remove(x);
                f
            }
            S::Let(x, n, m) | S::To(n, x, m) => {
                let mut f = m.free_vars();
                f.remove(x);
                f.extend(n.free_vars());
                f
            }
            _ => self
                .children()
                .into_iter()
                .flat_map(SourceTerm::free_vars)
                .collect(),
        }
    }

    /// Capture-avoiding substitution `{value/x}self`.
    pub fn substitute(&self, x: &Name, value: &SourceTerm) -> SourceTerm {
        let fv = value.free_vars();
        self.subst(x, value, &fv)
    }

    fn subst(&self, x: &Name, v: &SourceTerm, fv: &BTreeSet<Name>) -> SourceTerm {
        let b = |m: &SourceTerm| Box::new(m.subst(x, v, fv));
        // rename binder y in body m if it would capture
        let binder = |y: &Name, m: &SourceTerm| -> (Name, Box<SourceTerm>) {
            if y == x {
                return (y.clone(), Box::new(m.clone()));
            }
            if fv.contains(y) {
                let taken: BTreeSet<Name> =
                    m.names().into_iter().chain(fv.iter().cloned()).collect();
                let y2 = crate::syntax::fresh_name(y, |n| taken.contains(n) || n == x);
                let m2 = m.substitute(y, &S::Var(y2.clone()));
                (y2, Box::new(m2.subst(x, v, fv)))
            } else {
                (y.clone(), Box::new(m.subst(x, v, fv)))
            }
        };
        match self {
            S::Var(y) if y == x => v.clone(),
            S::Var(_) | S::Int(_) | S::Read | S::Lookup(_) | S::Unit | S::Apply => self.clone(),
            S::Lam(y, m) => {
                let (y, m) = binder(y, m);
                S::Lam(y, m)
            }
            S::Kappa(y, m) => {
                let (y, m) = binder(y, m);
                S::Kappa(y, m)
            }
            S::Let(y, n, m) => {
                let n = b(n);
                let (y, m) = binder(y, m);
                S::Let(y, n, m)
            }
            S::To(n, y, m) => {
                let n = b(n);
                let (y, m) = binder(y, m);
                S::To(n, y, m)
            }
            S::App(p, q) => S::App(b(p), b(q)),
            S::Write(p, q) => S::Write(b(p), b(q)),
            S::Assign(c, p, q) => S::Assign(c.clone(), b(p), b(q)),
            S::Prob(p, q) => S::Prob(b(p), b(q)),
            S::Nondet(p, q) => S::Nondet(b(p), b(q)),
            S::Pair(p, q) => S::Pair(b(p), b(q)),
            S::Then(p, q) => S::Then(b(p), b(q)),
            S::Seq(p, q) => S::Seq(b(p), b(q)),
            S::Proj(i, m) => S::Proj(*i, b(m)),
            S::Return(m) => S::Return(b(m)),
            S::Thunk(m) => S::Thunk(b(m)),
            S::Force(m) => S::Force(b(m)),
            S::Arr(m) => S::Arr(b(m)),
            S::First(m) => S::First(b(m)),
            S::Push(m) => S::Push(b(m)),
            S::MkThunk(m) => S::MkThunk(b(m)),
        }
    }
}

impl fmt::Display for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_seq(f, self)
    }
}

// Printing mirrors the parser's three levels: sequence, sum, application.
fn write_seq(f: &mut fmt::Formatter<'_>, t: &SourceTerm) -> fmt::Result {
    match t {
        S::Lam(x, m) => {
            write!(f, "\\{x}. ")?;
            write_seq(f, m)
        }
        S::Kappa(x, m) => {
            write!(f, "kappa {x}. ")?;
            write_seq(f, m)
        }
        S::Let(x, n, m) => {
            write!(f, "let {x} = ")?;
            write_seq(f, n)?;
            f.write_str(" in ")?;
            write_seq(f, m)
        }
        S::Write(n, m) => {
            f.write_str("write ")?;
            write_app(f, n)?;
            f.write_str("; ")?;
            write_seq(f, m)
        }
        S::Assign(c, n, m) => {
            write!(f, "{c} := ")?;
            write_app(f, n)?;
            f.write_str("; ")?;
            write_seq(f, m)
        }
        S::Seq(m, n) => {
            write_sum(f, m)?;
            f.write_str(" ; ")?;
            write_seq(f, n)
        }
        S::To(n, x, m) => {
            write_sum(f, n)?;
            write!(f, " to {x}. ")?;
            write_seq(f, m)
        }
        _ => write_sum(f, t),
    }
}

fn write_sum(f: &mut fmt::Formatter<'_>, t: &SourceTerm) -> fmt::Result {
    let (op, l, r) = match t {
        S::Prob(l, r) => ("(+)", l, r),
        S::Nondet(l, r) => ("+", l, r),
        S::Then(l, r) => (">>>", l, r),
        _ => return write_app(f, t),
    };
    write_sum(f, l)?;
    write!(f, " {op} ")?;
    write_app(f, r)
}

fn write_app(f: &mut fmt::Formatter<'_>, t: &SourceTerm) -> fmt::Result {
    let prefix = match t {
        S::Proj(1, _) => "fst",
        S::Proj(_, _) => "snd",
        S::Return(_) => "return",
        S::Thunk(_) => "thunk",
        S::Force(_) => "force",
        S::Arr(_) => "arr",
        S::First(_) => "first",
        S::Push(_) => "push",
        S::MkThunk(_) => "mkthunk",
        S::App(m, n) => {
            write_app(f, m)?;
            f.write_str(" ")?;
            return write_atom(f, n);
        }
        _ => return write_atom(f, t),
    };
    let arg = t.children()[0];
    write!(f, "{prefix} ")?;
    write_atom(f, arg)
}

fn write_atom(f: &mut fmt::Formatter<'_>, t: &SourceTerm) -> fmt::Result {
    match t {
        S::Var(x) => write!(f, "{x}"),
        S::Int(n) => write!(f, "{n}"),
        S::Read => f.write_str("read"),
        S::Apply => f.write_str("apply"),
        S::Lookup(c) => write!(f, "!{c}"),
        S::Unit => f.write_str("()"),
        S::Pair(a, b) => {
            f.write_str("(")?;
            write_seq(f, a)?;
            f.write_str(", ")?;
            write_seq(f, b)?;
            f.write_str(")")
        }
        _ => {
            f.write_str("(")?;
            write_seq(f, t)?;
            f.write_str(")")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("source syntax error at column {col}: {message}")]
pub struct SourceParseError {
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

const KEYWORDS: [&str; 15] = [
    "read", "write", "let", "in", "return", "fst", "snd", "thunk", "force", "to", "arr", "first",
    "push", "kappa", "mkthunk",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SourceParseError> {
    const SYMS: [&str; 13] = [
        ">>>", "(+)", ":=", "\\", "λ", ".", ";", "(", ")", ",", "!", "+", "=",
    ];
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| SourceParseError {
                col: start + 1,
                message: "integer out of range".into(),
            })?;
            out.push((Tok::Int(n), start));
            continue;
        }
        if c.is_alphabetic() && c != 'λ' || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        for s in SYMS {
            let n = s.chars().count();
            if chars[i..].iter().take(n).copied().eq(s.chars()) {
                out.push((Tok::Sym(if s == "λ" { "\\" } else { s }), i));
                i += n;
                continue 'outer;
            }
        }
        return Err(SourceParseError {
            col: i + 1,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Parse the source surface syntax: `\x. M`, `M N`, `read`, `write N; M`,
/// `c := N; M`, `!c`, `M (+) N`, `M + N`, `let x = N in M`, `return M`,
/// pairs `(M, N)` with `fst`/`snd` and `()`, `thunk M`, `force V`,
/// `N to x. M`, `arr M`, `P >>> Q`, `first P`, `push V`, `kappa x. M`,
/// `mkthunk M`, `apply`, `M ; N`, and integers.
pub fn parse_source(text: &str) -> Result<SourceTerm, SourceParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let t = p.seq()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

impl Parser {
    fn error(&self, message: &str) -> SourceParseError {
        let col = self
            .toks
            .get(self.pos)
            .map_or_else(|| self.toks.last().map_or(0, |t| t.1 + 1), |t| t.1);
        SourceParseError {
            col: col + 1,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SourceParseError> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), SourceParseError> {
        if self.is_kw(k) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{k}`")))
        }
    }

    fn name(&mut self) -> Result<Name, SourceParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) && x != "apply" => {
                let n = Name::new(x);
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected a variable")),
        }
    }

    fn seq(&mut self) -> Result<SourceTerm, SourceParseError> {
        if self.is_sym("\\") {
            self.pos += 1;
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(S::Lam(x, Box::new(self.seq()?)));
        }
        if self.is_kw("kappa") {
            self.pos += 1;
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(S::Kappa(x, Box::new(self.seq()?)));
        }
        if self.is_kw("let") {
            self.pos += 1;
            let x = self.name()?;
            self.expect_sym("=")?;
            let n = self.seq()?;
            self.expect_kw("in")?;
            return Ok(S::Let(x, Box::new(n), Box::new(self.seq()?)));
        }
        if self.is_kw("write") {
            self.pos += 1;
            let n = self.app()?;
            self.expect_sym(";")?;
            return Ok(S::Write(Box::new(n), Box::new(self.seq()?)));
        }
        if let (Some(Tok::Ident(c)), Some(Tok::Sym(":="))) = (self.peek(), self.peek2()) {
            let c = Location::new(c);
            self.pos += 2;
            let n = self.app()?;
            self.expect_sym(";")?;
            return Ok(S::Assign(c, Box::new(n), Box::new(self.seq()?)));
        }
        let m = self.sum()?;
        if self.is_kw("to") {
            self.pos += 1;
            let x = self.name()?;
            self.expect_sym(".")?;
            return Ok(S::To(Box::new(m), x, Box::new(self.seq()?)));
        }
        if self.is_sym(";") {
            self.pos += 1;
            return Ok(S::Seq(Box::new(m), Box::new(self.seq()?)));
        }
        Ok(m)
    }

    fn sum(&mut self) -> Result<SourceTerm, SourceParseError> {
        let mut l = self.app()?;
        loop {
            let ctor: fn(Box<SourceTerm>, Box<SourceTerm>) -> SourceTerm = if self.is_sym("(+)") {
                S::Prob
            } else if self.is_sym("+") {
                S::Nondet
            } else if self.is_sym(">>>") {
                S::Then
            } else {
                return Ok(l);
            };
            self.pos += 1;
            let r = self.app()?;
            l = ctor(Box::new(l), Box::new(r));
        }
    }

    fn app(&mut self) -> Result<SourceTerm, SourceParseError> {
        let prefix: Option<fn(Box<SourceTerm>) -> SourceTerm> = match self.peek() {
            Some(Tok::Ident(k)) => match k.as_str() {
                "fst" => Some(|m| S::Proj(1, m)),
                "snd" => Some(|m| S::Proj(2, m)),
                "return" => Some(S::Return),
                "thunk" => Some(S::Thunk),
                "force" => Some(S::Force),
                "arr" => Some(S::Arr),
                "first" => Some(S::First),
                "push" => Some(S::Push),
                "mkthunk" => Some(S::MkThunk),
                _ => None,
            },
            _ => None,
        };
        // `return M N` is `(return M) N`
        let mut f = match prefix {
            Some(ctor) => {
                self.pos += 1;
                let arg = self
                    .atom()?
                    .ok_or_else(|| self.error("expected an argument"))?;
                ctor(Box::new(arg))
            }
            None => self.atom()?.ok_or_else(|| self.error("expected a term"))?,
        };
        while let Some(a) = self.atom()? {
            f = S::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Option<SourceTerm>, SourceParseError> {
        let t = match self.peek() {
            Some(Tok::Int(n)) => S::Int(*n),
            Some(Tok::Ident(k)) if k == "read" => S::Read,
            Some(Tok::Ident(k)) if k == "apply" => S::Apply,
            Some(Tok::Ident(k)) if KEYWORDS.contains(&k.as_str()) => return Ok(None),
            Some(Tok::Ident(x)) => {
                if matches!(self.peek2(), Some(Tok::Sym(":="))) {
                    return Ok(None);
                }
                S::Var(Name::new(x))
            }
            Some(Tok::Sym("!")) => {
                self.pos += 1;
                match self.peek() {
                    Some(Tok::Ident(c)) => S::Lookup(Location::new(c)),
                    _ => return Err(self.error("expected a cell name after `!`")),
                }
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if self.is_sym(")") {
                    self.pos += 1;
                    return Ok(Some(S::Unit));
                }
                let a = self.seq()?;
                let t = if self.is_sym(",") {
                    self.pos += 1;
                    let b = self.seq()?;
                    S::Pair(Box::new(a), Box::new(b))
                } else {
                    a
                };
                self.expect_sym(")")?;
                return Ok(Some(t));
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(t))
    }
}

impl std::str::FromStr for SourceTerm {
    type Err = SourceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_source(s)
    }
}

use std::fmt;
use std::sync::Arc;

/// A variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The wildcard binder `_`, which never occurs free.
    pub fn wildcard() -> Self {
        Name::new("_")
    }

    pub fn is_wildcard(&self) -> bool {
        &*self.0 == "_"
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// The reserved internal name of the main location.
pub const MAIN: &str = "λ";

/// A location: the name of one stack (or stream) of the machine memory.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location(Arc<str>);

impl Location {
    pub fn new(s: &str) -> Self {
        match s {
            "" | "~" | MAIN => Location::main(),
            _ => Location(Arc::from(s)),
        }
    }

    pub fn main() -> Self {
        Location(Arc::from(MAIN))
    }

    pub fn is_main(&self) -> bool {
        &*self.0 == MAIN
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Surface rendering: empty for the main location.
    pub fn surface(&self) -> &str {
        if self.is_main() {
            ""
        } else {
            &self.0
        }
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Location {
    fn from(s: &str) -> Self {
        Location::new(s)
    }
}

/// Primitive operators available with the `consts` feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Eq,
    If,
}

impl Prim {
    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "×",
            Prim::Eq => "==",
            Prim::If => "if",
        }
    }

    /// Number of main-stack operands consumed.
    pub fn arity(self) -> usize {
        match self {
            Prim::If => 3,
            _ => 2,
        }
    }
}

/// Constants of the `consts` extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Int(i64),
    Bool(bool),
    Prim(Prim),
}

impl Constant {
    pub fn is_literal(self) -> bool {
        !matches!(self, Constant::Prim(_))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Prim(p) => f.write_str(p.symbol()),
        }
    }
}

/// FMC terms.
///
/// Every constructor except `Nil` carries its continuation, so a term is a
/// sequence of actions ending in `*`. `Thunk` and `Force` belong to the
/// `thunks` extension, `Const` to the `consts` extension.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub enum Term {
    /// `*`
    #[default]
    Nil,
    /// `x.M`
    Var(Name, Arc<Term>),
    /// `[N]a.M`
    Push(Arc<Term>, Location, Arc<Term>),
    /// `a<x>.M`
    Pop(Location, Name, Arc<Term>),
    /// `!{N}.M`: a suspended computation in value position.
    Thunk(Arc<Term>, Arc<Term>),
    /// `?V.M`
    Force(Arc<Term>, Arc<Term>),
    /// integer, boolean or primitive operator followed by a continuation
    Const(Constant, Arc<Term>),
}

impl Term {
    pub fn nil() -> Term {
        Term::Nil
    }

    pub fn var(x: impl Into<Name>, rest: Term) -> Term {
        Term::Var(x.into(), Arc::new(rest))
    }

    /// The variable `x` alone, i.e. `x.*`.
    pub fn atom(x: impl Into<Name>) -> Term {
        Term::var(x, Term::Nil)
    }

    pub fn push(arg: Term, loc: impl Into<Location>, rest: Term) -> Term {
        Term::Push(Arc::new(arg), loc.into(), Arc::new(rest))
    }

    pub fn pop(loc: impl Into<Location>, x: impl Into<Name>, rest: Term) -> Term {
        Term::Pop(loc.into(), x.into(), Arc::new(rest))
    }

    pub fn thunk(body: Term, rest: Term) -> Term {
        Term::Thunk(Arc::new(body), Arc::new(rest))
    }

    pub fn force(value: Term, rest: Term) -> Term {
        Term::Force(Arc::new(value), Arc::new(rest))
    }

    pub fn constant(c: Constant, rest: Term) -> Term {
        Term::Const(c, Arc::new(rest))
    }

    pub fn int(n: i64) -> Term {
        Term::constant(Constant::Int(n), Term::Nil)
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Nil)
    }

    /// The continuation of the head action, if any.
    pub fn rest(&self) -> Option<&Arc<Term>> {
        match self {
            Term::Nil => None,
            Term::Var(_, r)
            | Term::Push(_, _, r)
            | Term::Pop(_, _, r)
            | Term::Thunk(_, r)
            | Term::Force(_, r)
            | Term::Const(_, r) => Some(r),
        }
    }

    /// Rebuild the head action over a new continuation.
    pub fn with_rest(&self, rest: Term) -> Term {
        let rest = Arc::new(rest);
        match self {
            Term::Nil => Arc::unwrap_or_clone(rest),
            Term::Var(x, _) => Term::Var(x.clone(), rest),
            Term::Push(a, l, _) => Term::Push(a.clone(), l.clone(), rest),
            Term::Pop(l, x, _) => Term::Pop(l.clone(), x.clone(), rest),
            Term::Thunk(b, _) => Term::Thunk(b.clone(), rest),
            Term::Force(v, _) => Term::Force(v.clone(), rest),
            Term::Const(c, _) => Term::Const(*c, rest),
        }
    }

    /// Number of constructors, not counting the terminating `*`s.
    pub fn size(&self) -> usize {
        match self {
            Term::Nil => 0,
            Term::Var(_, r) | Term::Pop(_, _, r) | Term::Const(_, r) => 1 + r.size(),
            Term::Push(a, _, r) | Term::Thunk(a, r) | Term::Force(a, r) => 1 + a.size() + r.size(),
        }
    }

    /// True when the term uses only the core grammar (no thunks or constants).
    pub fn is_core(&self) -> bool {
        match self {
            Term::Nil => true,
            Term::Var(_, r) | Term::Pop(_, _, r) => r.is_core(),
            Term::Push(a, _, r) => a.is_core() && r.is_core(),
            Term::Thunk(..) | Term::Force(..) | Term::Const(..) => false,
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One step of a path from the root of a term to a subterm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// into the continuation
    Rest,
    /// into the argument of a push
    Arg,
    /// into the body of a thunk
    Body,
    /// into the value of a force
    Value,
}

/// Position of a subterm.
pub type Path = Vec<Step>;

impl Term {
    pub fn at(&self, path: &[Step]) -> Option<&Term> {
        let mut t = self;
        for step in path {
            t = match (step, t) {
                (Step::Rest, _) => t.rest()?,
                (Step::Arg, Term::Push(a, _, _)) => a,
                (Step::Body, Term::Thunk(b, _)) => b,
                (Step::Value, Term::Force(v, _)) => v,
                _ => return None,
            };
        }
        Some(t)
    }

    /// Replace the subterm at `path`.
    pub fn replace_at(&self, path: &[Step], new: Term) -> Option<Term> {
        let Some((step, tail)) = path.split_first() else {
            return Some(new);
        };
        Some(match (step, self) {
            (Step::Rest, t) => {
                let r = t.rest()?;
                t.with_rest(r.replace_at(tail, new)?)
            }
            (Step::Arg, Term::Push(a, l, r)) => {
                Term::Push(Arc::new(a.replace_at(tail, new)?), l.clone(), r.clone())
            }
            (Step::Body, Term::Thunk(b, r)) => {
                Term::Thunk(Arc::new(b.replace_at(tail, new)?), r.clone())
            }
            (Step::Value, Term::Force(v, r)) => {
                Term::Force(Arc::new(v.replace_at(tail, new)?), r.clone())
            }
            _ => return None,
        })
    }
}

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::term::{Location, Name, Term};

/// A prefix of push and pop actions ending in a hole.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum HeadContext {
    Hole,
    Push(Arc<Term>, Location, Box<HeadContext>),
    Pop(Location, Name, Box<HeadContext>),
}

impl HeadContext {
    /// `H.M`: fill the hole. Binders of the context capture in `term`.
    pub fn plug(&self, term: Term) -> Term {
        match self {
            HeadContext::Hole => term,
            HeadContext::Push(a, l, h) => Term::Push(a.clone(), l.clone(), Arc::new(h.plug(term))),
            HeadContext::Pop(l, x, h) => Term::Pop(l.clone(), x.clone(), Arc::new(h.plug(term))),
        }
    }

    /// Binding variables `bv(H)`.
    pub fn bound_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut h = self;
        loop {
            match h {
                HeadContext::Hole => return out,
                HeadContext::Push(_, _, k) => h = k,
                HeadContext::Pop(_, x, k) => {
                    out.insert(x.clone());
                    h = k;
                }
            }
        }
    }

    /// Locations of the head actions `loc(H)`.
    ///
    /// Only the actions of the context itself count; locations used inside
    /// pushed arguments do not.
    pub fn locations(&self) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        let mut h = self;
        loop {
            match h {
                HeadContext::Hole => return out,
                HeadContext::Push(_, l, k) | HeadContext::Pop(l, _, k) => {
                    out.insert(l.clone());
                    h = k;
                }
            }
        }
    }

    /// Free variables of the pushed arguments not bound earlier in the context.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        let mut h = self;
        loop {
            match h {
                HeadContext::Hole => return out,
                HeadContext::Push(a, _, k) => {
                    for x in super::subst::free_vars(a) {
                        if !bound.contains(&x) {
                            out.insert(x);
                        }
                    }
                    h = k;
                }
                HeadContext::Pop(_, x, k) => {
                    bound.push(x.clone());
                    h = k;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            HeadContext::Hole => 0,
            HeadContext::Push(_, _, k) | HeadContext::Pop(_, _, k) => 1 + k.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, HeadContext::Hole)
    }

    /// Split the first `n` head actions of `term` into a context.
    /// Fails if one of them is not a push or pop.
    pub fn split(term: &Term, n: usize) -> Option<(HeadContext, Term)> {
        if n == 0 {
            return Some((HeadContext::Hole, term.clone()));
        }
        match term {
            Term::Push(a, l, r) => {
                let (h, m) = HeadContext::split(r, n - 1)?;
                Some((HeadContext::Push(a.clone(), l.clone(), Box::new(h)), m))
            }
            Term::Pop(l, x, r) => {
                let (h, m) = HeadContext::split(r, n - 1)?;
                Some((HeadContext::Pop(l.clone(), x.clone(), Box::new(h)), m))
            }
            _ => None,
        }
    }
}

impl fmt::Display for HeadContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut h = self;
        loop {
            match h {
                HeadContext::Hole => return f.write_str("{}"),
                HeadContext::Push(a, l, k) => {
                    write!(f, "[{a}]{}.", l.surface())?;
                    h = k;
                }
                HeadContext::Pop(l, x, k) => {
                    write!(f, "{}<{x}>.", l.surface())?;
                    h = k;
                }
            }
        }
    }
}

impl fmt::Debug for HeadContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{
    compose, free_vars, fresh_name, occurs_free, rename, substitute, HeadContext, Location, Name,
    Path, Step, Term,
};

/// Which redexes a strategy may contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// every redex, in any context
    Full,
    /// every redex, contracting the leftmost-outermost first
    #[default]
    LeftmostOutermost,
    /// every context except argument position
    Spine,
    /// redexes whose pushed argument is already normal, leftmost first
    Innermost,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::LeftmostOutermost => "lo",
            Strategy::Spine => "spine",
            Strategy::Innermost => "inner",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Strategy::Full),
            "lo" | "leftmost-outermost" => Ok(Strategy::LeftmostOutermost),
            "spine" => Ok(Strategy::Spine),
            "inner" | "innermost" => Ok(Strategy::Innermost),
            other => Err(format!(
                "unknown strategy `{other}` (expected full, lo, spine or inner)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RedexKind {
    /// `[N]a.H.a<x>.M`
    Beta,
    /// `?!{N}.M`
    Force,
}

/// A redex: the path to its push (or force) and the head context up to
/// the matching pop.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RedexSite {
    pub path: Path,
    pub kind: RedexKind,
    pub context: HeadContext,
    /// binders of the context capture free variables of the argument, so
    /// the context is renamed before contraction
    pub needs_refresh: bool,
}

impl RedexSite {
    /// Path of the pop that completes a beta redex.
    pub fn pop_path(&self) -> Path {
        let mut p = self.path.clone();
        p.extend(std::iter::repeat_n(Step::Rest, self.context.len() + 1));
        p
    }
}

impl fmt::Display for RedexSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<&str> = self
            .path
            .iter()
            .map(|s| match s {
                Step::Rest => "r",
                Step::Arg => "a",
                Step::Body => "b",
                Step::Value => "v",
            })
            .collect();
        write!(
            f,
            "{:?} at /{} via {}",
            self.kind,
            path.join("/"),
            self.context
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RedexError {
    #[error("no redex at the given position")]
    InvalidSite,
    #[error("eta side condition fails: {0}")]
    EtaSideCondition(&'static str),
}

/// The head context between a push on `a` and the matching pop, if any.
fn match_pop<'t>(loc: &Location, rest: &'t Term) -> Option<(usize, &'t Term)> {
    let mut t = rest;
    let mut n = 0;
    loop {
        match t {
            Term::Pop(l, _, _) if l == loc => return Some((n, t)),
            Term::Push(_, l, r) | Term::Pop(l, _, r) if l != loc => {
                n += 1;
                t = r;
            }
            _ => return None,
        }
    }
}

/// The redex whose push (or force) is the head of `term`, if any.
pub fn redex_at_head(term: &Term, path: Path) -> Option<RedexSite> {
    match term {
        Term::Push(arg, loc, rest) => {
            let (n, _) = match_pop(loc, rest)?;
            let (context, _) = HeadContext::split(rest, n)?;
            let fv = free_vars(arg);
            let needs_refresh = context.bound_vars().iter().any(|x| fv.contains(x));
            Some(RedexSite {
                path,
                kind: RedexKind::Beta,
                context,
                needs_refresh,
            })
        }
        Term::Force(v, _) => match &**v {
            Term::Thunk(_, r) if r.is_nil() => Some(RedexSite {
                path,
                kind: RedexKind::Force,
                context: HeadContext::Hole,
                needs_refresh: false,
            }),
            _ => None,
        },
        _ => None,
    }
}

/// All redexes the strategy permits, in leftmost-outermost order.
pub fn find_redexes(term: &Term, strategy: Strategy) -> Vec<RedexSite> {
    let mut out = Vec::new();
    collect(term, &mut Vec::new(), strategy != Strategy::Spine, &mut out);
    if strategy == Strategy::Innermost {
        out.retain(|site| {
            let t = term.at(&site.path).expect("site path is valid");
            match (site.kind, t) {
                (RedexKind::Beta, Term::Push(arg, _, _)) => is_normal(arg),
                _ => true,
            }
        });
    }
    out
}

fn collect(term: &Term, path: &mut Path, inside_args: bool, out: &mut Vec<RedexSite>) {
    let mut t = term;
    let depth = path.len();
    loop {
        if let Some(site) = redex_at_head(t, path.clone()) {
            out.push(site);
        }
        if inside_args {
            let (sub, step) = match t {
                Term::Push(a, _, _) => (Some(a), Step::Arg),
                Term::Thunk(b, _) => (Some(b), Step::Body),
                Term::Force(v, _) => (Some(v), Step::Value),
                _ => (None, Step::Arg),
            };
            if let Some(sub) = sub {
                path.push(step);
                collect(sub, path, inside_args, out);
                path.pop();
            }
        }
        match t.rest() {
            Some(r) => {
                path.push(Step::Rest);
                t = r;
            }
            None => break,
        }
    }
    path.truncate(depth);
}

/// True if the term has no beta or force redex anywhere.
pub fn is_normal(term: &Term) -> bool {
    let mut t = term;
    loop {
        if redex_at_head(t, Vec::new()).is_some() {
            return false;
        }
        match t {
            Term::Nil => return true,
            Term::Push(a, _, r) | Term::Thunk(a, r) | Term::Force(a, r) => {
                if !is_normal(a) {
                    return false;
                }
                t = r;
            }
            Term::Var(_, r) | Term::Pop(_, _, r) | Term::Const(_, r) => t = r,
        }
    }
}

/// Rename binders among the first `n` actions of `term` that occur in
/// `avoid`.
pub(crate) fn refresh_prefix(term: &Term, n: usize, avoid: &BTreeSet<Name>) -> Term {
    if n == 0 {
        return term.clone();
    }
    match term {
        Term::Pop(l, y, r) if avoid.contains(y) => {
            let body_fv = free_vars(r);
            let y2 = fresh_name(y, |c| avoid.contains(c) || body_fv.contains(c));
            Term::pop(
                l.clone(),
                y2.clone(),
                refresh_prefix(&rename(r, y, &y2), n - 1, avoid),
            )
        }
        t => {
            let r = t.rest().expect("prefix actions are pushes and pops");
            t.with_rest(refresh_prefix(r, n - 1, avoid))
        }
    }
}

/// The contractum of the redex at the head of `term`.
fn contract_head(term: &Term, site: &RedexSite) -> Result<Term, RedexError> {
    match (site.kind, term) {
        (RedexKind::Beta, Term::Push(arg, loc, rest)) => {
            let (n, _) = match_pop(loc, rest).ok_or(RedexError::InvalidSite)?;
            let rest = if site.needs_refresh || n > 0 {
                refresh_prefix(rest, n, &free_vars(arg))
            } else {
                (**rest).clone()
            };
            let (h, pop) = HeadContext::split(&rest, n).ok_or(RedexError::InvalidSite)?;
            let Term::Pop(_, x, body) = pop else {
                return Err(RedexError::InvalidSite);
            };
            Ok(h.plug(substitute(arg, &x, &body)))
        }
        (RedexKind::Force, Term::Force(v, rest)) => match &**v {
            Term::Thunk(body, r) if r.is_nil() => Ok(compose(body, rest)),
            _ => Err(RedexError::InvalidSite),
        },
        _ => Err(RedexError::InvalidSite),
    }
}

/// Contract the redex at `site`: `[N]a.H.a<x>.M → H.{N/x}M`, renaming the
/// binders of `H` first where they would capture in `N`.
pub fn beta_step(term: &Term, site: &RedexSite) -> Result<Term, RedexError> {
    let sub = term.at(&site.path).ok_or(RedexError::InvalidSite)?;
    let contractum = contract_head(sub, site)?;
    term.replace_at(&site.path, contractum)
        .ok_or(RedexError::InvalidSite)
}

/// An eta redex `a<x>.H.[x]a.M`: the path to the pop and the length of `H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EtaSite {
    pub path: Path,
    pub context_len: usize,
}

fn eta_at_head(term: &Term) -> Option<usize> {
    let Term::Pop(loc, x, rest) = term else {
        return None;
    };
    if x.is_wildcard() {
        return None;
    }
    let mut t: &Term = rest;
    let mut n = 0;
    loop {
        match t {
            Term::Push(arg, l, m) if l == loc => {
                let is_x = matches!(&**arg, Term::Var(y, r) if y == x && r.is_nil());
                return (is_x && !occurs_free(x, m)).then_some(n);
            }
            Term::Push(arg, _, r) => {
                if occurs_free(x, arg) {
                    return None;
                }
                n += 1;
                t = r;
            }
            Term::Pop(l, y, r) if l != loc && y != x => {
                n += 1;
                t = r;
            }
            _ => return None,
        }
    }
}

/// All eta redexes, in leftmost-outermost order.
pub fn find_eta_sites(term: &Term) -> Vec<EtaSite> {
    let mut out = Vec::new();
    collect_eta(term, &mut Vec::new(), &mut out);
    out
}

fn collect_eta(term: &Term, path: &mut Path, out: &mut Vec<EtaSite>) {
    let depth = path.len();
    let mut t = term;
    loop {
        if let Some(n) = eta_at_head(t) {
            out.push(EtaSite {
                path: path.clone(),
                context_len: n,
            });
        }
        let sub = match t {
            Term::Push(a, _, _) => Some((a, Step::Arg)),
            Term::Thunk(b, _) => Some((b, Step::Body)),
            Term::Force(v, _) => Some((v, Step::Value)),
            _ => None,
        };
        if let Some((sub, step)) = sub {
            path.push(step);
            collect_eta(sub, path, out);
            path.pop();
        }
        match t.rest() {
            Some(r) => {
                path.push(Step::Rest);
                t = r;
            }
            None => break,
        }
    }
    path.truncate(depth);
}

/// `a<x>.H.[x]a.M → H.M` when `a ∉ loc(H)` and `x ∉ fv(H) ∪ fv(M)`.
pub fn eta_step(term: &Term, site: &EtaSite) -> Result<Term, RedexError> {
    let sub = term.at(&site.path).ok_or(RedexError::InvalidSite)?;
    let n = eta_at_head(sub).ok_or(RedexError::EtaSideCondition("not an eta redex"))?;
    if n != site.context_len {
        return Err(RedexError::InvalidSite);
    }
    let Term::Pop(_, _, rest) = sub else {
        unreachable!("checked by eta_at_head")
    };
    let (h, push) = HeadContext::split(rest, n).ok_or(RedexError::InvalidSite)?;
    let m = push.rest().expect("a push has a continuation");
    term.replace_at(&site.path, h.plug((**m).clone()))
        .ok_or(RedexError::InvalidSite)
}

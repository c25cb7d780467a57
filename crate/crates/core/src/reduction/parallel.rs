use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::{alpha_eq, fresh_name, Constant, Location, Name, Path, Step, Term};

/// Mark colour `•`.
pub const DOT: u8 = 0b01;
/// Mark colour `◦`.
pub const CIRCLE: u8 = 0b10;
pub const ALL_MARKS: u8 = DOT | CIRCLE;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MarkError {
    #[error("no push at the marked position")]
    NotAPush,
    #[error("the marked push has no matching pop")]
    NoMatchingPop,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum MTerm {
    Nil,
    Var(Name, Box<MTerm>),
    Push(Box<MTerm>, Location, u8, Box<MTerm>),
    Pop(Location, Name, Box<MTerm>),
    Thunk(Box<MTerm>, Box<MTerm>),
    Force(Box<MTerm>, Box<MTerm>),
    Const(Constant, Box<MTerm>),
}

impl MTerm {
    fn from_term(t: &Term) -> MTerm {
        match t {
            Term::Nil => MTerm::Nil,
            Term::Var(x, r) => MTerm::Var(x.clone(), Box::new(MTerm::from_term(r))),
            Term::Push(a, l, r) => MTerm::Push(
                Box::new(MTerm::from_term(a)),
                l.clone(),
                0,
                Box::new(MTerm::from_term(r)),
            ),
            Term::Pop(l, x, r) => MTerm::Pop(l.clone(), x.clone(), Box::new(MTerm::from_term(r))),
            Term::Thunk(a, r) => {
                MTerm::Thunk(Box::new(MTerm::from_term(a)), Box::new(MTerm::from_term(r)))
            }
            Term::Force(a, r) => {
                MTerm::Force(Box::new(MTerm::from_term(a)), Box::new(MTerm::from_term(r)))
            }
            Term::Const(c, r) => MTerm::Const(*c, Box::new(MTerm::from_term(r))),
        }
    }

    fn erase(&self) -> Term {
        match self {
            MTerm::Nil => Term::Nil,
            MTerm::Var(x, r) => Term::var(x.clone(), r.erase()),
            MTerm::Push(a, l, _, r) => Term::push(a.erase(), l.clone(), r.erase()),
            MTerm::Pop(l, x, r) => Term::pop(l.clone(), x.clone(), r.erase()),
            MTerm::Thunk(a, r) => Term::thunk(a.erase(), r.erase()),
            MTerm::Force(a, r) => Term::force(a.erase(), r.erase()),
            MTerm::Const(c, r) => Term::constant(*c, r.erase()),
        }
    }

    fn rest(&self) -> Option<&MTerm> {
        match self {
            MTerm::Nil => None,
            MTerm::Var(_, r)
            | MTerm::Push(_, _, _, r)
            | MTerm::Pop(_, _, r)
            | MTerm::Thunk(_, r)
            | MTerm::Force(_, r)
            | MTerm::Const(_, r) => Some(r),
        }
    }

    fn with_rest(&self, rest: MTerm) -> MTerm {
        let rest = Box::new(rest);
        match self {
            MTerm::Nil => *rest,
            MTerm::Var(x, _) => MTerm::Var(x.clone(), rest),
            MTerm::Push(a, l, m, _) => MTerm::Push(a.clone(), l.clone(), *m, rest),
            MTerm::Pop(l, x, _) => MTerm::Pop(l.clone(), x.clone(), rest),
            MTerm::Thunk(a, _) => MTerm::Thunk(a.clone(), rest),
            MTerm::Force(a, _) => MTerm::Force(a.clone(), rest),
            MTerm::Const(c, _) => MTerm::Const(*c, rest),
        }
    }

    fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let depth = bound.len();
        let mut t = self;
        loop {
            match t {
                MTerm::Nil => break,
                MTerm::Var(x, r) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                    t = r;
                }
                MTerm::Push(a, _, _, r) | MTerm::Thunk(a, r) | MTerm::Force(a, r) => {
                    a.collect_free(bound, out);
                    t = r;
                }
                MTerm::Pop(_, x, r) => {
                    bound.push(x.clone());
                    t = r;
                }
                MTerm::Const(_, r) => t = r,
            }
        }
        bound.truncate(depth);
    }

    fn occurs_free(&self, x: &Name) -> bool {
        self.free_vars().contains(x)
    }

    fn rename(&self, from: &Name, to: &Name) -> MTerm {
        subst(&MTerm::Var(to.clone(), Box::new(MTerm::Nil)), from, self)
    }

    fn set_mark(&mut self, path: &[Step], bits: u8) -> Result<(), MarkError> {
        let Some((step, tail)) = path.split_first() else {
            return match self {
                MTerm::Push(_, l, m, r) => {
                    if match_pop(l, r).is_none() {
                        return Err(MarkError::NoMatchingPop);
                    }
                    *m |= bits;
                    Ok(())
                }
                _ => Err(MarkError::NotAPush),
            };
        };
        let next: &mut MTerm = match (step, self) {
            (Step::Rest, MTerm::Nil) => return Err(MarkError::NotAPush),
            (Step::Rest, MTerm::Var(_, r))
            | (Step::Rest, MTerm::Push(_, _, _, r))
            | (Step::Rest, MTerm::Pop(_, _, r))
            | (Step::Rest, MTerm::Thunk(_, r))
            | (Step::Rest, MTerm::Force(_, r))
            | (Step::Rest, MTerm::Const(_, r)) => r,
            (Step::Arg, MTerm::Push(a, _, _, _)) => a,
            (Step::Body, MTerm::Thunk(a, _)) => a,
            (Step::Value, MTerm::Force(a, _)) => a,
            _ => return Err(MarkError::NotAPush),
        };
        next.set_mark(tail, bits)
    }

    fn collect_marks(&self, bits: u8, path: &mut Path, out: &mut BTreeSet<Path>) {
        let depth = path.len();
        let mut t = self;
        loop {
            let sub = match t {
                MTerm::Push(a, _, m, _) => {
                    if m & bits != 0 {
                        out.insert(path.clone());
                    }
                    Some((a, Step::Arg))
                }
                MTerm::Thunk(a, _) => Some((a, Step::Body)),
                MTerm::Force(a, _) => Some((a, Step::Value)),
                _ => None,
            };
            if let Some((a, step)) = sub {
                path.push(step);
                a.collect_marks(bits, path, out);
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

    /// Contract every redex whose push carries a colour in `colors`;
    /// other marks are kept on their residuals.
    fn reduce(&self, colors: u8) -> Result<MTerm, MarkError> {
        Ok(match self {
            MTerm::Nil => MTerm::Nil,
            MTerm::Var(x, r) => MTerm::Var(x.clone(), Box::new(r.reduce(colors)?)),
            MTerm::Pop(l, x, r) => MTerm::Pop(l.clone(), x.clone(), Box::new(r.reduce(colors)?)),
            MTerm::Thunk(a, r) => {
                MTerm::Thunk(Box::new(a.reduce(colors)?), Box::new(r.reduce(colors)?))
            }
            MTerm::Force(a, r) => {
                MTerm::Force(Box::new(a.reduce(colors)?), Box::new(r.reduce(colors)?))
            }
            MTerm::Const(c, r) => MTerm::Const(*c, Box::new(r.reduce(colors)?)),
            MTerm::Push(a, l, m, r) if m & colors == 0 => MTerm::Push(
                Box::new(a.reduce(colors)?),
                l.clone(),
                *m,
                Box::new(r.reduce(colors)?),
            ),
            MTerm::Push(a, l, _, r) => {
                // {(N)_x / x}(H.M)_x, after making H not bind in N and x not
                // free in H.
                let n = match_pop(l, r).ok_or(MarkError::NoMatchingPop)?;
                let fv_n = a.free_vars();
                let (x, body) = remove_pop(r, n, &fv_n);
                let contracted = body.reduce(colors)?;
                subst(&a.reduce(colors)?, &x, &contracted)
            }
        })
    }
}

fn match_pop(loc: &Location, rest: &MTerm) -> Option<usize> {
    let mut t = rest;
    let mut n = 0;
    loop {
        match t {
            MTerm::Pop(l, _, _) if l == loc => return Some(n),
            MTerm::Push(_, l, _, r) | MTerm::Pop(l, _, r) if l != loc => {
                n += 1;
                t = r;
            }
            _ => return None,
        }
    }
}

/// Turn `H.a<x>.M` (with `H` of length `n`) into `(x, H.M)`, renaming the
/// binders of `H` away from `avoid` and `x` away from the free variables
/// of `H`.
fn remove_pop(term: &MTerm, n: usize, avoid: &BTreeSet<Name>) -> (Name, MTerm) {
    let mut heads: Vec<MTerm> = Vec::with_capacity(n);
    let mut h_fv: BTreeSet<Name> = BTreeSet::new();
    let mut t = term.clone();
    for _ in 0..n {
        t = match t {
            MTerm::Pop(l, y, r) => {
                let (y2, r2) = if avoid.contains(&y) {
                    let fv = r.free_vars();
                    let y2 = fresh_name(&y, |c| avoid.contains(c) || fv.contains(c));
                    let r2 = r.rename(&y, &y2);
                    (y2, r2)
                } else {
                    (y, *r)
                };
                heads.push(MTerm::Pop(l, y2, Box::new(MTerm::Nil)));
                r2
            }
            MTerm::Push(a, l, m, r) => {
                h_fv.extend(a.free_vars());
                heads.push(MTerm::Push(a, l, m, Box::new(MTerm::Nil)));
                *r
            }
            _ => unreachable!("head contexts contain pushes and pops only"),
        };
    }
    let MTerm::Pop(_, x, body) = t else {
        unreachable!("match_pop found a pop")
    };
    let (x, body) = if h_fv.contains(&x) {
        let mut taken = body.free_vars();
        taken.extend(h_fv.iter().cloned());
        taken.extend(avoid.iter().cloned());
        for h in &heads {
            if let MTerm::Pop(_, y, _) = h {
                taken.insert(y.clone());
            }
        }
        let x2 = fresh_name(&x, |c| taken.contains(c));
        let body2 = body.rename(&x, &x2);
        (x2, body2)
    } else {
        (x, *body)
    };
    let rebuilt = heads
        .into_iter()
        .rev()
        .fold(body, |acc, h| h.with_rest(acc));
    (x, rebuilt)
}

fn subst(value: &MTerm, var: &Name, target: &MTerm) -> MTerm {
    if !target.occurs_free(var) {
        return target.clone();
    }
    let fv = value.free_vars();
    subst_rec(value, &fv, var, target)
}

fn subst_rec(value: &MTerm, fv: &BTreeSet<Name>, var: &Name, target: &MTerm) -> MTerm {
    let go = |t: &MTerm| Box::new(subst_rec(value, fv, var, t));
    match target {
        MTerm::Nil => MTerm::Nil,
        MTerm::Var(y, r) if y == var => compose(value, &subst_rec(value, fv, var, r)),
        MTerm::Var(y, r) => MTerm::Var(y.clone(), go(r)),
        MTerm::Push(a, l, m, r) => MTerm::Push(go(a), l.clone(), *m, go(r)),
        MTerm::Thunk(a, r) => MTerm::Thunk(go(a), go(r)),
        MTerm::Force(a, r) => MTerm::Force(go(a), go(r)),
        MTerm::Const(c, r) => MTerm::Const(*c, go(r)),
        MTerm::Pop(_, y, _) if y == var => target.clone(),
        MTerm::Pop(l, y, r) => {
            if !r.occurs_free(var) {
                return target.clone();
            }
            if fv.contains(y) {
                let body_fv = r.free_vars();
                let y2 = fresh_name(y, |n| fv.contains(n) || body_fv.contains(n) || n == var);
                let r2 = r.rename(y, &y2);
                MTerm::Pop(l.clone(), y2, Box::new(subst_rec(value, fv, var, &r2)))
            } else {
                MTerm::Pop(l.clone(), y.clone(), go(r))
            }
        }
    }
}

fn compose(first: &MTerm, second: &MTerm) -> MTerm {
    if matches!(second, MTerm::Nil) {
        return first.clone();
    }
    let fv = second.free_vars();
    compose_rec(first, second, &fv)
}

fn compose_rec(first: &MTerm, second: &MTerm, fv: &BTreeSet<Name>) -> MTerm {
    match first {
        MTerm::Nil => second.clone(),
        MTerm::Pop(l, y, r) if fv.contains(y) => {
            let body_fv = r.free_vars();
            let y2 = fresh_name(y, |n| fv.contains(n) || body_fv.contains(n));
            let r2 = r.rename(y, &y2);
            MTerm::Pop(l.clone(), y2, Box::new(compose_rec(&r2, second, fv)))
        }
        t => {
            let r = t.rest().expect("non-nil");
            t.with_rest(compose_rec(r, second, fv))
        }
    }
}

/// A term with marked redexes in up to two colours, [`DOT`] and
/// [`CIRCLE`]. A mark sits on the push of a redex; its pop is the first
/// pop on the same location reached through other-location actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedTerm(MTerm);

impl MarkedTerm {
    pub fn unmarked(term: &Term) -> Self {
        MarkedTerm(MTerm::from_term(term))
    }

    /// Mark the redexes whose pushes are at `marks`, in colour [`DOT`].
    pub fn new(term: &Term, marks: &BTreeSet<Path>) -> Result<Self, MarkError> {
        let mut m = MarkedTerm::unmarked(term);
        for p in marks {
            m.mark(p, DOT)?;
        }
        Ok(m)
    }

    pub fn mark(&mut self, path: &[Step], colors: u8) -> Result<(), MarkError> {
        self.0.set_mark(path, colors)
    }

    pub fn with_marks(mut self, marks: &BTreeSet<Path>, colors: u8) -> Result<Self, MarkError> {
        for p in marks {
            self.mark(p, colors)?;
        }
        Ok(self)
    }

    pub fn term(&self) -> Term {
        self.0.erase()
    }

    /// Positions of pushes carrying any of `colors`.
    pub fn marks(&self, colors: u8) -> BTreeSet<Path> {
        let mut out = BTreeSet::new();
        self.0.collect_marks(colors, &mut Vec::new(), &mut out);
        out
    }

    /// Contract the redexes marked in `colors`, keeping other marks.
    pub fn reduce(&self, colors: u8) -> Result<MarkedTerm, MarkError> {
        Ok(MarkedTerm(self.0.reduce(colors)?))
    }

    /// The marked reduct, contracting every mark.
    pub fn reduct(&self) -> Result<Term, MarkError> {
        Ok(self.0.reduce(ALL_MARKS)?.erase())
    }

    /// Substitution on marked terms; marks of `value` are copied to every
    /// occurrence.
    pub fn substitute(value: &MarkedTerm, var: &Name, target: &MarkedTerm) -> MarkedTerm {
        MarkedTerm(subst(&value.0, var, &target.0))
    }

    pub fn compose(first: &MarkedTerm, second: &MarkedTerm) -> MarkedTerm {
        MarkedTerm(compose(&first.0, &second.0))
    }
}

/// One parallel reduction step: contract all marked redexes at once.
pub fn parallel_step(term: &MarkedTerm) -> Result<Term, MarkError> {
    term.reduct()
}

/// Check `(M_•)_◦ = M_{•◦} = (M_◦)_•` up to alpha, for marks `dot` and
/// `circle` on `term`.
pub fn parallel_diamond_check(
    term: &Term,
    dot: &BTreeSet<Path>,
    circle: &BTreeSet<Path>,
) -> Result<bool, MarkError> {
    let m = MarkedTerm::unmarked(term)
        .with_marks(dot, DOT)?
        .with_marks(circle, CIRCLE)?;
    let both = m.reduce(ALL_MARKS)?.term();
    let dot_first = m.reduce(DOT)?.reduce(CIRCLE)?.term();
    let circle_first = m.reduce(CIRCLE)?.reduce(DOT)?.term();
    Ok(alpha_eq(&dot_first, &both) && alpha_eq(&circle_first, &both))
}

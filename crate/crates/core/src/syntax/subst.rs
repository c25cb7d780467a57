use std::collections::BTreeSet;
use std::sync::Arc;

use super::term::{Location, Name, Term};

pub fn free_vars(term: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(term, &mut Vec::new(), &mut out);
    out
}

fn collect_free(term: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let mut t = term;
    let depth = bound.len();
    loop {
        match t {
            Term::Nil => break,
            Term::Var(x, r) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
                t = r;
            }
            Term::Push(a, _, r) | Term::Thunk(a, r) | Term::Force(a, r) => {
                collect_free(a, bound, out);
                t = r;
            }
            Term::Pop(_, x, r) => {
                bound.push(x.clone());
                t = r;
            }
            Term::Const(_, r) => t = r,
        }
    }
    bound.truncate(depth);
}

pub fn occurs_free(x: &Name, term: &Term) -> bool {
    let mut t = term;
    loop {
        match t {
            Term::Nil => return false,
            Term::Var(y, r) => {
                if y == x {
                    return true;
                }
                t = r;
            }
            Term::Push(a, _, r) | Term::Thunk(a, r) | Term::Force(a, r) => {
                if occurs_free(x, a) {
                    return true;
                }
                t = r;
            }
            Term::Pop(_, y, r) => {
                if y == x {
                    return false;
                }
                t = r;
            }
            Term::Const(_, r) => t = r,
        }
    }
}

/// Every location mentioned anywhere in the term, arguments included.
pub fn locations(term: &Term) -> BTreeSet<Location> {
    let mut out = BTreeSet::new();
    collect_locations(term, &mut out);
    out
}

fn collect_locations(term: &Term, out: &mut BTreeSet<Location>) {
    let mut t = term;
    loop {
        match t {
            Term::Nil => break,
            Term::Push(a, l, r) => {
                out.insert(l.clone());
                collect_locations(a, out);
                t = r;
            }
            Term::Pop(l, _, r) => {
                out.insert(l.clone());
                t = r;
            }
            Term::Thunk(a, r) | Term::Force(a, r) => {
                collect_locations(a, out);
                t = r;
            }
            Term::Var(_, r) | Term::Const(_, r) => t = r,
        }
    }
}

/// The shortest primed variant of `base` that is not `taken`.
///
/// Existing primes on `base` are stripped first, so renaming `y'` yields
/// `y''` only if `y'` itself is taken.
pub fn fresh_name(base: &Name, taken: impl Fn(&Name) -> bool) -> Name {
    let stem = base.as_str().trim_end_matches('\'');
    let stem = if stem.is_empty() || stem == "_" {
        "x"
    } else {
        stem
    };
    let mut candidate = format!("{stem}'");
    loop {
        let name = Name::new(&candidate);
        if !taken(&name) {
            return name;
        }
        candidate.push('\'');
    }
}

/// `{y'/y}M`: rename free occurrences of `from` to `to`.
pub fn rename(term: &Term, from: &Name, to: &Name) -> Term {
    substitute(&Term::atom(to.clone()), from, term)
}

/// Capture-avoiding substitution `{value/var}target`.
///
/// A variable occurrence `x.N` becomes the composition `value ; {value/x}N`.
pub fn substitute(value: &Term, var: &Name, target: &Term) -> Term {
    if !occurs_free(var, target) {
        return target.clone();
    }
    let fv = free_vars(value);
    subst_rec(value, &fv, var, target)
}

fn subst_rec(value: &Term, fv: &BTreeSet<Name>, var: &Name, target: &Term) -> Term {
    match target {
        Term::Nil => Term::Nil,
        Term::Var(y, r) if y == var => compose(value, &subst_rec(value, fv, var, r)),
        Term::Var(y, r) => Term::Var(y.clone(), Arc::new(subst_rec(value, fv, var, r))),
        Term::Push(a, l, r) => Term::Push(
            Arc::new(subst_rec(value, fv, var, a)),
            l.clone(),
            Arc::new(subst_rec(value, fv, var, r)),
        ),
        Term::Thunk(a, r) => Term::Thunk(
            Arc::new(subst_rec(value, fv, var, a)),
            Arc::new(subst_rec(value, fv, var, r)),
        ),
        Term::Force(a, r) => Term::Force(
            Arc::new(subst_rec(value, fv, var, a)),
            Arc::new(subst_rec(value, fv, var, r)),
        ),
        Term::Const(c, r) => Term::Const(*c, Arc::new(subst_rec(value, fv, var, r))),
        Term::Pop(_, y, _) if y == var => target.clone(),
        Term::Pop(l, y, r) => {
            if !occurs_free(var, r) {
                return target.clone();
            }
            if fv.contains(y) {
                let body_fv = free_vars(r);
                let y2 = fresh_name(y, |n| fv.contains(n) || body_fv.contains(n) || n == var);
                let r2 = rename(r, y, &y2);
                Term::Pop(l.clone(), y2, Arc::new(subst_rec(value, fv, var, &r2)))
            } else {
                Term::Pop(l.clone(), y.clone(), Arc::new(subst_rec(value, fv, var, r)))
            }
        }
    }
}

/// Capture-avoiding composition `first ; second`.
pub fn compose(first: &Term, second: &Term) -> Term {
    if second.is_nil() {
        return first.clone();
    }
    let fv = free_vars(second);
    compose_rec(first, second, &fv)
}

fn compose_rec(first: &Term, second: &Term, fv: &BTreeSet<Name>) -> Term {
    match first {
        Term::Nil => second.clone(),
        Term::Pop(l, y, r) if fv.contains(y) => {
            let body_fv = free_vars(r);
            let y2 = fresh_name(y, |n| fv.contains(n) || body_fv.contains(n));
            let r2 = rename(r, y, &y2);
            Term::Pop(l.clone(), y2, Arc::new(compose_rec(&r2, second, fv)))
        }
        t => {
            let r = t.rest().expect("non-nil term has a continuation");
            t.with_rest(compose_rec(r, second, fv))
        }
    }
}

/// Alpha-equivalence: equality up to the names of bound variables.
pub fn alpha_eq(left: &Term, right: &Term) -> bool {
    aeq(left, right, &mut Vec::new())
}

fn lookup(env: &[(Name, Name)], x: &Name, side: usize) -> Option<usize> {
    env.iter().rposition(|pair| {
        if side == 0 {
            &pair.0 == x
        } else {
            &pair.1 == x
        }
    })
}

fn aeq(left: &Term, right: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    let depth = env.len();
    let mut l = left;
    let mut r = right;
    let result = loop {
        match (l, r) {
            (Term::Nil, Term::Nil) => break true,
            (Term::Var(x, l2), Term::Var(y, r2)) => {
                let ok = match (lookup(env, x, 0), lookup(env, y, 1)) {
                    (None, None) => x == y,
                    (Some(i), Some(j)) => i == j,
                    _ => false,
                };
                if !ok {
                    break false;
                }
                l = l2;
                r = r2;
            }
            (Term::Push(a1, l1, l2), Term::Push(a2, m1, r2)) => {
                if l1 != m1 || !aeq(a1, a2, env) {
                    break false;
                }
                l = l2;
                r = r2;
            }
            (Term::Thunk(a1, l2), Term::Thunk(a2, r2))
            | (Term::Force(a1, l2), Term::Force(a2, r2)) => {
                if !aeq(a1, a2, env) {
                    break false;
                }
                l = l2;
                r = r2;
            }
            (Term::Pop(l1, x, l2), Term::Pop(m1, y, r2)) => {
                if l1 != m1 {
                    break false;
                }
                env.push((x.clone(), y.clone()));
                l = l2;
                r = r2;
            }
            (Term::Const(c1, l2), Term::Const(c2, r2)) => {
                if c1 != c2 {
                    break false;
                }
                l = l2;
                r = r2;
            }
            _ => break false,
        }
    };
    env.truncate(depth);
    result
}

/// Locally nameless canonical form: every binder is renamed after its
/// binding depth (`%0`, `%1`, ...). Two terms are alpha-equivalent iff their
/// canonical forms are structurally equal, so this doubles as a hash key.
pub fn canonical(term: &Term) -> Term {
    canon(term, &mut Vec::new())
}

fn canon(term: &Term, env: &mut Vec<(Name, Name)>) -> Term {
    match term {
        Term::Nil => Term::Nil,
        Term::Var(x, r) => {
            let name = env
                .iter()
                .rev()
                .find(|(from, _)| from == x)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| x.clone());
            Term::Var(name, Arc::new(canon(r, env)))
        }
        Term::Push(a, l, r) => {
            Term::Push(Arc::new(canon(a, env)), l.clone(), Arc::new(canon(r, env)))
        }
        Term::Thunk(a, r) => Term::Thunk(Arc::new(canon(a, env)), Arc::new(canon(r, env))),
        Term::Force(a, r) => Term::Force(Arc::new(canon(a, env)), Arc::new(canon(r, env))),
        Term::Const(c, r) => Term::Const(*c, Arc::new(canon(r, env))),
        Term::Pop(l, x, r) => {
            let fresh = Name::new(&format!("%{}", env.len()));
            env.push((x.clone(), fresh.clone()));
            let body = canon(r, env);
            env.pop();
            Term::Pop(l.clone(), fresh, Arc::new(body))
        }
    }
}

use std::collections::HashMap;

use crate::syntax::{free_vars, rename, Constant, Location, Name, Term};

/// Decide the permutation equivalence `∼` (up to alpha): adjacent actions
/// on distinct locations commute, except that a pop may not move past a
/// push whose argument uses the popped variable.
pub fn perm_eq(left: &Term, right: &Term) -> bool {
    perm_canonical(left) == perm_canonical(right)
}

/// A representative of the `∼`-class of `term`, unique up to equality.
///
/// The spine is read as a partial order of actions and emitted greedily,
/// always taking the smallest available action. Binders are renamed by
/// emission order and argument nesting level, so the result is also
/// alpha-canonical.
pub fn perm_canonical(term: &Term) -> Term {
    canon_seq(term, 0)
}

fn binder_name(level: usize, k: usize) -> Name {
    if level == 0 {
        Name::new(&format!("%{k}"))
    } else {
        Name::new(&format!("#{level}.{k}"))
    }
}

enum Act {
    Var(Name),
    Push(Term, Location),
    Pop(Location, Name),
    Thunk(Term),
    Force(Term),
    Const(Constant),
}

impl Act {
    fn location(&self) -> Option<&Location> {
        match self {
            Act::Push(_, l) | Act::Pop(l, _) => Some(l),
            _ => None,
        }
    }

    fn is_barrier(&self) -> bool {
        !matches!(self, Act::Push(..) | Act::Pop(..))
    }

    fn mentions(&self, x: &Name) -> bool {
        match self {
            Act::Var(y) => y == x,
            Act::Push(a, _) | Act::Thunk(a) | Act::Force(a) => free_vars(a).contains(x),
            _ => false,
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Key(u8, String, String);

fn rename_free(term: &Term, env: &HashMap<Name, Name>) -> Term {
    let fv = free_vars(term);
    if !fv.iter().any(|x| env.contains_key(x)) {
        return term.clone();
    }
    // Two-phase renaming so that targets never collide with sources.
    let mut t = term.clone();
    let mut staged = Vec::new();
    for (i, x) in fv.iter().filter(|x| env.contains_key(*x)).enumerate() {
        let tmp = Name::new(&format!("\u{1}{i}"));
        t = rename(&t, x, &tmp);
        staged.push((tmp, env[x].clone()));
    }
    for (tmp, target) in staged {
        t = rename(&t, &tmp, &target);
    }
    t
}

fn canon_seq(term: &Term, level: usize) -> Term {
    // Flatten the spine, giving every binder a unique identity so that
    // shadowing cannot confuse the dependency analysis.
    let mut acts: Vec<Act> = Vec::new();
    let mut ids: HashMap<Name, Name> = HashMap::new();
    let mut t = term;
    while !t.is_nil() {
        let act = match t {
            Term::Var(x, _) => Act::Var(ids.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::Push(a, l, _) => Act::Push(rename_free(a, &ids), l.clone()),
            Term::Thunk(a, _) => Act::Thunk(rename_free(a, &ids)),
            Term::Force(a, _) => Act::Force(rename_free(a, &ids)),
            Term::Const(c, _) => Act::Const(*c),
            Term::Pop(l, x, _) => {
                let u = Name::new(&format!("\u{2}{level}.{}", acts.len()));
                ids.insert(x.clone(), u.clone());
                Act::Pop(l.clone(), u)
            }
            Term::Nil => unreachable!(),
        };
        acts.push(act);
        t = t.rest().expect("non-nil");
    }

    let n = acts.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..j {
            let dependent = acts[i].is_barrier()
                || acts[j].is_barrier()
                || acts[i].location() == acts[j].location()
                || matches!(&acts[i], Act::Pop(_, u) if acts[j].mentions(u));
            if dependent {
                preds[j].push(i);
            }
        }
    }

    // Arguments are canonicalized with spine binders still under their
    // unique names; these are mapped to emission names afterwards.
    let mut keys: Vec<Option<(Key, Term)>> = (0..n).map(|_| None).collect();
    let mut emitted = vec![false; n];
    let mut env: HashMap<Name, Name> = HashMap::new();
    let mut order: Vec<Term> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if emitted[j] || preds[j].iter().any(|&i| !emitted[i]) {
                continue;
            }
            if keys[j].is_none() {
                keys[j] = Some(key_of(&acts[j], &env, level));
            }
            let better = match best {
                None => true,
                Some(b) => keys[j].as_ref().unwrap().0 < keys[b].as_ref().unwrap().0,
            };
            if better {
                best = Some(j);
            }
        }
        let j = best.expect("a dependency order always has a minimal element");
        emitted[j] = true;
        let (_, mut action) = keys[j].take().unwrap();
        if let Act::Pop(l, u) = &acts[j] {
            let name = binder_name(level, env.len());
            env.insert(u.clone(), name.clone());
            action = Term::pop(l.clone(), name, Term::Nil);
        }
        order.push(action);
    }
    order
        .into_iter()
        .rev()
        .fold(Term::Nil, |acc, a| a.with_rest(acc))
}

/// Sort key and canonical rendering of an available action. Every spine
/// binder the action refers to has already been emitted, so `env` fixes its
/// name and the key does not change later.
fn key_of(act: &Act, env: &HashMap<Name, Name>, level: usize) -> (Key, Term) {
    let nested = |a: &Term| canon_seq(&rename_free(a, env), level + 1);
    match act {
        Act::Pop(l, _) => (Key(0, l.to_string(), String::new()), Term::Nil),
        Act::Push(a, l) => {
            let c = nested(a);
            (
                Key(1, l.to_string(), c.to_string()),
                Term::push(c, l.clone(), Term::Nil),
            )
        }
        Act::Var(x) => {
            let x = env.get(x).cloned().unwrap_or_else(|| x.clone());
            (Key(2, x.to_string(), String::new()), Term::atom(x))
        }
        Act::Thunk(a) => {
            let c = nested(a);
            (
                Key(3, c.to_string(), String::new()),
                Term::thunk(c, Term::Nil),
            )
        }
        Act::Force(a) => {
            let c = nested(a);
            (
                Key(4, c.to_string(), String::new()),
                Term::force(c, Term::Nil),
            )
        }
        Act::Const(c) => (
            Key(5, c.to_string(), String::new()),
            Term::constant(*c, Term::Nil),
        ),
    }
}

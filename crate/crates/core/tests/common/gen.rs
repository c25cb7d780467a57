//! Source term enumeration and random generation.

use std::collections::HashMap;

use fmc::encodings::SourceTerm as S;
use fmc::enumerate::binder;
use fmc::syntax::Location;
use rand::Rng;

/// Which source constructs to enumerate.
#[derive(Clone, Copy, Debug)]
pub struct Grammar {
    pub pairs: bool,
    pub effects: bool,
    pub metalanguage: bool,
}

impl Grammar {
    pub const CBN: Grammar = Grammar {
        pairs: true,
        effects: true,
        metalanguage: true,
    };
    /// `return` pushes an unevaluated computation under call-by-value, so
    /// it is left out; pairs have no call-by-value encoding.
    pub const CBV: Grammar = Grammar {
        pairs: false,
        effects: true,
        metalanguage: false,
    };
}

fn b(t: S) -> Box<S> {
    Box::new(t)
}

/// Every source term of exactly `size` constructors with free variables
/// among the first `scope` binders.
pub struct SourceEnumerator {
    g: Grammar,
    let_binding: bool,
    memo: HashMap<(usize, usize), Vec<S>>,
}

impl SourceEnumerator {
    pub fn new(g: Grammar, let_binding: bool) -> Self {
        SourceEnumerator {
            g,
            let_binding,
            memo: HashMap::new(),
        }
    }

    pub fn terms(&mut self, size: usize, scope: usize) -> Vec<S> {
        if size == 0 {
            return vec![];
        }
        if let Some(v) = self.memo.get(&(size, scope)) {
            return v.clone();
        }
        let g = self.g;
        let cell = || Location::new("a");
        let mut out = Vec::new();
        if size == 1 {
            out.extend((0..scope).map(|i| S::Var(binder(i))));
            out.push(S::Int(1));
            if g.effects {
                out.push(S::Read);
                out.push(S::Lookup(cell()));
            }
            out.push(S::Unit);
        } else {
            for body in self.terms(size - 1, scope + 1) {
                out.push(S::Lam(binder(scope), b(body)));
            }
            if g.pairs {
                for p in self.terms(size - 1, scope) {
                    out.push(S::Proj(1, b(p.clone())));
                    out.push(S::Proj(2, b(p)));
                }
            }
            if g.metalanguage {
                for v in self.terms(size - 1, scope) {
                    out.push(S::Return(b(v)));
                }
            }
            for l in 1..size - 1 {
                let left = self.terms(l, scope);
                let right = self.terms(size - 1 - l, scope);
                for x in &left {
                    for y in &right {
                        let (x, y) = (x.clone(), y.clone());
                        out.push(S::App(b(x.clone()), b(y.clone())));
                        if g.effects {
                            out.push(S::Write(b(x.clone()), b(y.clone())));
                            out.push(S::Assign(cell(), b(x.clone()), b(y.clone())));
                            out.push(S::Prob(b(x.clone()), b(y.clone())));
                            out.push(S::Nondet(b(x.clone()), b(y.clone())));
                        }
                        if g.pairs {
                            out.push(S::Pair(b(x), b(y)));
                        }
                    }
                }
                if self.let_binding {
                    let bodies = self.terms(size - 1 - l, scope + 1);
                    for x in &left {
                        for y in &bodies {
                            out.push(S::Let(binder(scope), b(x.clone()), b(y.clone())));
                        }
                    }
                }
            }
        }
        self.memo.insert((size, scope), out.clone());
        out
    }

    pub fn closed_up_to(&mut self, max: usize) -> Vec<S> {
        (1..=max).flat_map(|n| self.terms(n, 0)).collect()
    }
}

/// A random pure λ-term with free variables among `scope` binders and the
/// extra names in `free`.
pub fn random_lambda<R: Rng>(rng: &mut R, size: usize, scope: usize, free: &[&str]) -> S {
    let leaves = scope + free.len() + 1;
    if size <= 1 {
        let i = rng.random_range(0..leaves);
        return if i < scope {
            S::Var(binder(i))
        } else if i < scope + free.len() {
            S::var(free[i - scope])
        } else {
            S::Int(rng.random_range(0..3))
        };
    }
    match rng.random_range(0..4) {
        0 | 1 => S::Lam(
            binder(scope),
            b(random_lambda(rng, size - 1, scope + 1, free)),
        ),
        2 if size >= 3 => {
            let l = rng.random_range(1..size - 1);
            S::App(
                b(random_lambda(rng, l, scope, free)),
                b(random_lambda(rng, size - 1 - l, scope, free)),
            )
        }
        2 => S::Lam(
            binder(scope),
            b(random_lambda(rng, size - 1, scope + 1, free)),
        ),
        _ => S::Return(b(random_lambda(rng, size - 1, scope, free))),
    }
}

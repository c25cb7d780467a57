//! Exhaustive enumeration and random generation of terms and types, for
//! property checks.

use std::collections::HashMap;

use rand::Rng;

use crate::syntax::{Location, Name, Term};
use crate::types::{find_type, CheckOptions, Type, TypeVector, TypingContext, VectorFamily};

/// Binder name for nesting depth `i`: `x y z u v w`, then `x6`, `x7`, ...
pub fn binder(i: usize) -> Name {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    match NAMES.get(i) {
        Some(n) => Name::new(n),
        None => Name::new(&format!("x{i}")),
    }
}

/// Every core term of exactly `size` constructors whose free variables are
/// among the first `scope` binders, over the given locations. Binders are
/// named after their depth, so alpha-equivalent terms are produced once.
pub struct TermEnumerator {
    locs: Vec<Location>,
    memo: HashMap<(usize, usize), Vec<Term>>,
}

impl TermEnumerator {
    pub fn new(locs: &[Location]) -> Self {
        TermEnumerator {
            locs: locs.to_vec(),
            memo: HashMap::new(),
        }
    }

    pub fn terms(&mut self, size: usize, scope: usize) -> Vec<Term> {
        if let Some(v) = self.memo.get(&(size, scope)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 0 {
            out.push(Term::Nil);
        } else {
            for m in self.terms(size - 1, scope) {
                for i in 0..scope {
                    out.push(Term::var(binder(i), m.clone()));
                }
            }
            let locs = self.locs.clone();
            for m in self.terms(size - 1, scope + 1) {
                for l in &locs {
                    out.push(Term::pop(l.clone(), binder(scope), m.clone()));
                }
            }
            for n_size in 0..size {
                let args = self.terms(n_size, scope);
                let rests = self.terms(size - 1 - n_size, scope);
                for n in &args {
                    for m in &rests {
                        for l in &locs {
                            out.push(Term::push(n.clone(), l.clone(), m.clone()));
                        }
                    }
                }
            }
        }
        self.memo.insert((size, scope), out.clone());
        out
    }

    /// Closed terms of every size up to `max_size`.
    pub fn closed_up_to(&mut self, max_size: usize) -> Vec<Term> {
        (0..=max_size).flat_map(|n| self.terms(n, 0)).collect()
    }
}

/// Closed core terms up to `max_size` over `locs`.
pub fn closed_terms(max_size: usize, locs: &[Location]) -> Vec<Term> {
    TermEnumerator::new(locs).closed_up_to(max_size)
}

/// Arrow types built from `(>)` up to nesting `depth`, with at most `width`
/// inputs and outputs in total per arrow, spread over `locs`.
pub fn types(depth: usize, width: usize, locs: &[Location]) -> Vec<Type> {
    if depth == 0 {
        return vec![Type::unit()];
    }
    let inner = types(depth - 1, width, locs);
    let mut out = Vec::new();
    // slots: (is_output, location), each filled by an inner type
    let slots: Vec<(bool, Location)> = [false, true]
        .iter()
        .flat_map(|&o| locs.iter().map(move |l| (o, l.clone())))
        .collect();
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    counts(slots.len(), width, &mut Vec::new(), &mut shapes);
    for shape in shapes {
        let n: usize = shape.iter().sum();
        let mut fill = vec![0usize; n];
        loop {
            let mut k = 0;
            let mut inputs = VectorFamily::new();
            let mut outputs = VectorFamily::new();
            for (s, &c) in slots.iter().zip(&shape) {
                let v = TypeVector::new(fill[k..k + c].iter().map(|&i| inner[i].clone()).collect());
                k += c;
                if s.0 {
                    outputs.set(s.1.clone(), v);
                } else {
                    inputs.set(s.1.clone(), v);
                }
            }
            out.push(Type::arrow(inputs, outputs));
            if !odometer(&mut fill, inner.len()) {
                break;
            }
        }
    }
    out
}

fn counts(slots: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == slots {
        out.push(cur.clone());
        return;
    }
    for c in 0..=budget {
        cur.push(c);
        counts(slots, budget - c, cur, out);
        cur.pop();
    }
}

fn odometer(v: &mut [usize], base: usize) -> bool {
    for d in v.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// A random core term of about `size` constructors with free variables
/// among the first `scope` binders.
pub fn random_term<R: Rng>(rng: &mut R, size: usize, scope: usize, locs: &[Location]) -> Term {
    if size == 0 {
        return Term::Nil;
    }
    let choice = rng.random_range(0..10);
    match choice {
        0..=2 if scope > 0 => {
            let x = binder(rng.random_range(0..scope));
            Term::var(x, random_term(rng, size - 1, scope, locs))
        }
        0..=5 => {
            let l = locs[rng.random_range(0..locs.len())].clone();
            Term::pop(
                l,
                binder(scope),
                random_term(rng, size - 1, scope + 1, locs),
            )
        }
        _ => {
            let l = locs[rng.random_range(0..locs.len())].clone();
            let n_size = rng.random_range(0..size);
            let n = random_term(rng, n_size, scope, locs);
            Term::push(n, l, random_term(rng, size - 1 - n_size, scope, locs))
        }
    }
}

/// A random closed term with a type found by the checker, after at most
/// `tries` attempts.
pub fn random_typed_term<R: Rng>(
    rng: &mut R,
    size: usize,
    locs: &[Location],
    tries: usize,
) -> Option<(Term, Type)> {
    let opts = CheckOptions {
        budget: 20_000,
        ..CheckOptions::default()
    };
    for _ in 0..tries {
        let t = random_term(rng, size, 0, locs);
        if let Ok((ty, _)) = find_type(&TypingContext::new(), &t, &opts) {
            return Some((t, ty));
        }
    }
    None
}

//! Call-by-name oracle: a substitution interpreter on source terms with a
//! store, an output list and input/choice streams. It knows nothing of the
//! machine or the encoding.

use std::collections::{BTreeMap, VecDeque};

use fmc::encodings::SourceTerm as S;
use fmc::syntax::Location;

use super::World;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Int(i64),
    /// a function waiting for an argument
    Lambda,
    /// returned values, bottom first: `(M, N)` returns `N` then `M`
    Stack(Vec<S>),
    Stuck,
    Diverge,
}

#[derive(Clone, Debug)]
pub struct State {
    pub store: BTreeMap<Location, S>,
    pub out: Vec<S>,
    input: VecDeque<i64>,
    rnd: VecDeque<bool>,
    fuel: usize,
}

impl State {
    pub fn new(world: &World, fuel: usize) -> Self {
        State {
            store: world.cells.iter().map(|c| (c.clone(), S::Unit)).collect(),
            out: Vec::new(),
            input: world.input.iter().copied().collect(),
            rnd: world.rnd.iter().copied().collect(),
            fuel,
        }
    }
}

pub fn eval(m: &S, world: &World, fuel: usize) -> (Outcome, State) {
    let mut st = State::new(world, fuel);
    let o = run(m.clone(), &mut st, 0);
    (o, st)
}

/// Projections and `let` evaluate their subject in a nested call; runaway
/// nesting counts as divergence.
const MAX_NESTING: usize = 200;

fn run(mut term: S, st: &mut State, depth: usize) -> Outcome {
    if depth > MAX_NESTING {
        return Outcome::Diverge;
    }
    let mut args: Vec<S> = Vec::new();
    loop {
        if st.fuel == 0 {
            return Outcome::Diverge;
        }
        st.fuel -= 1;
        term = match term {
            S::App(f, a) => {
                args.push(*a);
                *f
            }
            S::Lam(x, body) => match args.pop() {
                Some(a) => body.substitute(&x, &a),
                None => return Outcome::Lambda,
            },
            S::Int(n) => {
                return if args.is_empty() {
                    Outcome::Int(n)
                } else {
                    Outcome::Stuck
                }
            }
            S::Read => match st.input.pop_front() {
                Some(i) => S::Int(i),
                None => return Outcome::Stuck,
            },
            S::Write(n, k) => {
                st.out.push(*n);
                *k
            }
            S::Assign(c, n, k) => {
                if !st.store.contains_key(&c) {
                    return Outcome::Stuck;
                }
                st.store.insert(c, *n);
                *k
            }
            S::Lookup(c) => match st.store.get(&c) {
                Some(v) => v.clone(),
                None => return Outcome::Stuck,
            },
            // the first boolean picks the right summand
            S::Prob(l, r) => match st.rnd.pop_front() {
                Some(true) => *r,
                Some(false) => *l,
                None => return Outcome::Stuck,
            },
            // the nondeterministic chooser always answers true
            S::Nondet(_, r) => *r,
            S::Pair(a, b) => return returned(args, vec![*b, *a]),
            S::Unit => return returned(args, vec![]),
            S::Return(v) => return returned(args, vec![*v]),
            S::Proj(i, p) => match run(*p, st, depth + 1) {
                Outcome::Stack(mut v) if v.len() == 2 => {
                    if i == 1 {
                        v.pop().expect("two items")
                    } else {
                        v.swap_remove(0)
                    }
                }
                Outcome::Diverge => return Outcome::Diverge,
                _ => return Outcome::Stuck,
            },
            S::Let(x, n, body) => match run(*n, st, depth + 1) {
                Outcome::Stack(mut v) if v.len() == 1 => {
                    body.substitute(&x, &v.pop().expect("one item"))
                }
                Outcome::Diverge => return Outcome::Diverge,
                _ => return Outcome::Stuck,
            },
            _ => return Outcome::Stuck,
        };
    }
}

fn returned(args: Vec<S>, items: Vec<S>) -> Outcome {
    if args.is_empty() {
        Outcome::Stack(items)
    } else {
        Outcome::Stuck
    }
}

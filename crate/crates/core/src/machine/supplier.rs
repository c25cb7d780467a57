use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Constant, Name, Term};

/// What a random supplier produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sample {
    /// Church booleans `<x>.<y>.x` and `<x>.<y>.y`
    Church,
    /// integer literals drawn uniformly from `0..=max`
    Int { max: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoicePolicy {
    /// always the Church boolean `true`
    Leftmost,
    Seeded(u64),
}

/// Source of values for a location whose stack has run dry.
#[derive(Clone, Debug)]
pub enum Supplier {
    /// Hands out `items` from the left; exhausts to an error.
    FixedList { items: Vec<Term>, next: usize },
    SeededRandom {
        seed: u64,
        sample: Sample,
        rng: ChaCha8Rng,
    },
    Nondet {
        policy: ChoicePolicy,
        rng: Option<ChaCha8Rng>,
    },
}

pub fn church(b: bool) -> Term {
    let (x, y) = (Name::new("x"), Name::new("y"));
    let body = if b { x.clone() } else { y.clone() };
    Term::pop(
        crate::syntax::Location::main(),
        x,
        Term::pop(crate::syntax::Location::main(), y, Term::atom(body)),
    )
}

impl Supplier {
    pub fn list(items: Vec<Term>) -> Self {
        Supplier::FixedList { items, next: 0 }
    }

    pub fn seeded(seed: u64, sample: Sample) -> Self {
        Supplier::SeededRandom {
            seed,
            sample,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn nondet(policy: ChoicePolicy) -> Self {
        let rng = match policy {
            ChoicePolicy::Leftmost => None,
            ChoicePolicy::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        };
        Supplier::Nondet { policy, rng }
    }

    /// The next value, or `None` once a fixed list is used up.
    pub fn next_value(&mut self) -> Option<Term> {
        match self {
            Supplier::FixedList { items, next } => {
                let item = items.get(*next).cloned()?;
                *next += 1;
                Some(item)
            }
            Supplier::SeededRandom { sample, rng, .. } => Some(match sample {
                Sample::Church => church(rng.random()),
                Sample::Int { max } => {
                    Term::constant(Constant::Int(rng.random_range(0..=*max)), Term::Nil)
                }
            }),
            Supplier::Nondet { rng, .. } => Some(match rng {
                None => church(true),
                Some(rng) => church(rng.random()),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Supplier::FixedList { items, next } => format!("list({} left)", items.len() - next),
            Supplier::SeededRandom {
                seed,
                sample: Sample::Church,
                ..
            } => format!("seeded({seed}, church)"),
            Supplier::SeededRandom {
                seed,
                sample: Sample::Int { max },
                ..
            } => {
                format!("seeded({seed}, 0..={max})")
            }
            Supplier::Nondet {
                policy: ChoicePolicy::Leftmost,
                ..
            } => "nondet(leftmost)".into(),
            Supplier::Nondet {
                policy: ChoicePolicy::Seeded(s),
                ..
            } => format!("nondet(seed {s})"),
        }
    }
}

use super::algebra::bottom;
use super::ty::Type;
use crate::machine::{run_quiet, Memory};
use crate::syntax::{Constant, Location, Term};

/// Finite approximation of membership in the run set of `t`.
///
/// The input stacks are populated with the canonical inhabitants of the
/// input types. The run must halt in `*` (or at a bare literal, which counts
/// as pushed on the main stack) with exactly as many items at each location
/// as the output family asks for. Arrow-typed outputs are checked the same
/// way, recursively, down to `depth`; base-typed outputs must be literals of
/// that base. Locations not mentioned by `t` must start and end empty.
pub fn run_set_member(term: &Term, t: &Type, fuel: usize) -> bool {
    member(term, t, fuel, 2)
}

pub fn run_set_member_depth(term: &Term, t: &Type, fuel: usize, depth: usize) -> bool {
    member(term, t, fuel, depth)
}

fn member(term: &Term, t: &Type, fuel: usize, depth: usize) -> bool {
    let arrow = match t {
        Type::Base(b) => return is_literal_of(term, b),
        Type::Arrow(a) => a,
    };
    let mut memory = Memory::new();
    for (l, v) in arrow.inputs.iter() {
        // pop order: the first input is the top of the stack
        for s in v.items().iter().rev() {
            match bottom(s) {
                Some(b) => memory.push(l, b),
                None => return false,
            }
        }
    }
    let summary = run_quiet(memory, term.clone(), fuel);
    if !summary.outcome.is_halted() {
        return false;
    }
    let mut memory = summary.state.memory;
    match &summary.state.term {
        Term::Nil => {}
        lit @ Term::Const(..) => memory.push(&Location::main(), lit.clone()),
        _ => return false,
    }
    let mut locs: Vec<Location> = memory.locations().cloned().collect();
    locs.extend(arrow.outputs.locations().cloned());
    locs.sort();
    locs.dedup();
    for l in locs {
        let want = arrow.outputs.slice(&l);
        let got = memory.stack(&l);
        if got.len() != want.len() {
            return false;
        }
        if depth > 0
            && !got
                .iter()
                .zip(want.items())
                .all(|(n, s)| member(n, s, fuel, depth - 1))
        {
            return false;
        }
    }
    true
}

fn is_literal_of(term: &Term, base: &str) -> bool {
    match term {
        Term::Const(Constant::Int(_), r) => r.is_nil() && base == "Z",
        Term::Const(Constant::Bool(_), r) => r.is_nil() && base == "B",
        _ => false,
    }
}

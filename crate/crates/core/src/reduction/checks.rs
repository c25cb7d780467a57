use std::collections::{HashMap, HashSet, VecDeque};

use super::normalize::normalize_with;
use super::perm::perm_eq;
use super::redex::{beta_step, find_redexes, Strategy};
use crate::machine::{run_quiet, Memory};
use crate::syntax::{alpha_eq, canonical, Term};

/// Every one-step reduct under `strategy`.
pub fn one_step_reducts(term: &Term, strategy: Strategy) -> Vec<Term> {
    find_redexes(term, strategy)
        .iter()
        .map(|site| beta_step(term, site).expect("found sites are valid"))
        .collect()
}

/// Spine reduction is diamond at `term`: any two one-step spine reducts
/// meet after at most one further spine step on each side.
pub fn spine_diamond_check(term: &Term) -> bool {
    let reducts = one_step_reducts(term, Strategy::Spine);
    let closures: Vec<Vec<Term>> = reducts
        .iter()
        .map(|r| {
            let mut c = vec![canonical(r)];
            c.extend(one_step_reducts(r, Strategy::Spine).iter().map(canonical));
            c
        })
        .collect();
    for i in 0..closures.len() {
        for j in i + 1..closures.len() {
            let left: HashSet<&Term> = closures[i].iter().collect();
            if !closures[j].iter().any(|t| left.contains(t)) {
                return false;
            }
        }
    }
    true
}

/// Terms reachable in at most `depth` steps, keyed by canonical form.
/// Stops expanding once `limit` terms have been collected.
pub fn reachable(
    term: &Term,
    depth: usize,
    strategy: Strategy,
    limit: usize,
) -> HashMap<Term, Term> {
    let mut seen: HashMap<Term, Term> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(canonical(term), term.clone());
    queue.push_back((term.clone(), 0));
    while let Some((t, d)) = queue.pop_front() {
        if d == depth || seen.len() >= limit {
            continue;
        }
        for r in one_step_reducts(&t, strategy) {
            let key = canonical(&r);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                e.insert(r.clone());
                queue.push_back((r, d + 1));
            }
        }
    }
    seen
}

/// Two terms have a common reduct within `depth` steps each.
pub fn joinable(left: &Term, right: &Term, depth: usize) -> bool {
    if alpha_eq(left, right) {
        return true;
    }
    let a = reachable(left, depth, Strategy::Full, 20_000);
    let b = reachable(right, depth, Strategy::Full, 20_000);
    a.keys().any(|k| b.contains_key(k))
}

/// Equality under `→βη ∪ ∼`, decided by comparing βη-normal forms up to
/// permutation. Returns `None` if either side fails to normalize.
pub fn equal_beta_eta_perm(left: &Term, right: &Term, fuel: usize) -> Option<bool> {
    let l = normalize_with(left, Strategy::LeftmostOutermost, fuel, true);
    let r = normalize_with(right, Strategy::LeftmostOutermost, fuel, true);
    if !l.is_normal() || !r.is_normal() {
        return None;
    }
    Some(perm_eq(&l.term, &r.term))
}

/// Equality under `→β ∪ ∼`.
pub fn equal_beta_perm(left: &Term, right: &Term, fuel: usize) -> Option<bool> {
    let l = normalize_with(left, Strategy::LeftmostOutermost, fuel, false);
    let r = normalize_with(right, Strategy::LeftmostOutermost, fuel, false);
    if !l.is_normal() || !r.is_normal() {
        return None;
    }
    Some(perm_eq(&l.term, &r.term))
}

/// If `term` and its reduct both halt from empty memory, their final
/// memories agree up to beta: stacks have the same length and items at the
/// same position are joinable. `None` when the precondition fails.
pub fn beta_preserves_run(term: &Term, reduct: &Term, fuel: usize) -> Option<bool> {
    let a = run_quiet(Memory::new(), term.clone(), fuel);
    let b = run_quiet(Memory::new(), reduct.clone(), fuel);
    if !a.outcome.is_halted() || !b.outcome.is_halted() {
        return None;
    }
    let (ma, mb) = (&a.state.memory, &b.state.memory);
    let same = ma.locations().chain(mb.locations()).all(|l| {
        let (x, y) = (ma.stack(l), mb.stack(l));
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| convertible(p, q, fuel))
    });
    Some(same && convertible(&a.state.term, &b.state.term, fuel))
}

fn convertible(p: &Term, q: &Term, fuel: usize) -> bool {
    if alpha_eq(p, q) {
        return true;
    }
    let np = normalize_with(p, Strategy::LeftmostOutermost, fuel, false);
    let nq = normalize_with(q, Strategy::LeftmostOutermost, fuel, false);
    if np.is_normal() && nq.is_normal() {
        return alpha_eq(&np.term, &nq.term);
    }
    joinable(p, q, 3)
}

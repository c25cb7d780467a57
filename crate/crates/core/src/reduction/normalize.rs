use std::collections::{BTreeSet, HashSet};
use std::fmt::Write;

use super::redex::{
    beta_step, eta_step, find_eta_sites, find_redexes, EtaSite, RedexKind, RedexSite, Strategy,
};
use crate::syntax::{canonical, write_action, Path, Step, Term};

/// Upper bound on the number of remembered terms used to detect loops.
const LOOP_MEMORY: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Contracted {
    Beta(RedexSite),
    Eta(EtaSite),
}

/// One rewrite: the term before, the redex contracted, and the result.
#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub before: Term,
    pub redex: Contracted,
    pub after: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    Normal,
    /// The budget ran out. `looped` is set when a term recurred up to alpha,
    /// so the reduction cannot terminate along this strategy.
    FuelExhausted {
        looped: bool,
    },
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub steps: Vec<ReductionStep>,
    pub term: Term,
    pub outcome: Normalization,
}

impl Reduction {
    pub fn is_normal(&self) -> bool {
        self.outcome == Normalization::Normal
    }
}

/// The next rewrite the strategy takes, if any. Eta redexes are only
/// considered once no beta redex remains.
pub fn next_step(term: &Term, strategy: Strategy, eta: bool) -> Option<ReductionStep> {
    if let Some(site) = find_redexes(term, strategy).into_iter().next() {
        let after = beta_step(term, &site).expect("found sites are valid");
        return Some(ReductionStep {
            before: term.clone(),
            redex: Contracted::Beta(site),
            after,
        });
    }
    if eta {
        if let Some(site) = find_eta_sites(term).into_iter().next() {
            let after = eta_step(term, &site).expect("found sites are valid");
            return Some(ReductionStep {
                before: term.clone(),
                redex: Contracted::Eta(site),
                after,
            });
        }
    }
    None
}

/// Reduce until no redex remains or `fuel` steps have been taken.
pub fn normalize(term: &Term, strategy: Strategy, fuel: usize) -> Reduction {
    normalize_with(term, strategy, fuel, false)
}

pub fn normalize_with(term: &Term, strategy: Strategy, fuel: usize, eta: bool) -> Reduction {
    let mut steps = Vec::new();
    let mut current = term.clone();
    let mut seen: HashSet<Term> = HashSet::new();
    seen.insert(canonical(&current));
    loop {
        let Some(step) = next_step(&current, strategy, eta) else {
            return Reduction {
                steps,
                term: current,
                outcome: Normalization::Normal,
            };
        };
        if steps.len() >= fuel {
            return Reduction {
                steps,
                term: current,
                outcome: Normalization::FuelExhausted { looped: false },
            };
        }
        current = step.after.clone();
        steps.push(step);
        let key = canonical(&current);
        if seen.contains(&key) {
            return Reduction {
                steps,
                term: current,
                outcome: Normalization::FuelExhausted { looped: true },
            };
        }
        if seen.len() < LOOP_MEMORY {
            seen.insert(key);
        }
    }
}

/// Print `term` with the actions at `marked` wrapped in braces.
pub fn print_marked(term: &Term, marked: &BTreeSet<Path>) -> String {
    let mut out = String::new();
    write_marked(&mut out, term, &mut Vec::new(), marked);
    out
}

fn write_marked(out: &mut String, term: &Term, path: &mut Path, marked: &BTreeSet<Path>) {
    if term.is_nil() {
        out.push('*');
        return;
    }
    let depth = path.len();
    let mut t = term;
    let mut first = true;
    while !t.is_nil() {
        if !first {
            out.push('.');
        }
        first = false;
        let mark = marked.contains(path);
        if mark {
            out.push('{');
        }
        match t {
            Term::Push(a, l, _) => {
                out.push('[');
                path.push(Step::Arg);
                write_marked(out, a, path, marked);
                path.pop();
                let _ = write!(out, "]{}", l.surface());
            }
            Term::Thunk(b, _) => {
                out.push_str("!{");
                path.push(Step::Body);
                write_marked(out, b, path, marked);
                path.pop();
                out.push('}');
            }
            _ => {
                let _ = write_action(out, t);
            }
        }
        if mark {
            out.push('}');
        }
        path.push(Step::Rest);
        t = t.rest().expect("non-nil");
    }
    path.truncate(depth);
}

/// The action positions that make up a contracted redex.
pub fn redex_actions(redex: &Contracted) -> BTreeSet<Path> {
    let mut set = BTreeSet::new();
    match redex {
        Contracted::Beta(site) => {
            set.insert(site.path.clone());
            if site.kind == RedexKind::Beta {
                set.insert(site.pop_path());
            }
        }
        Contracted::Eta(site) => {
            set.insert(site.path.clone());
            let mut p = site.path.clone();
            p.extend(std::iter::repeat_n(Step::Rest, site.context_len + 1));
            set.insert(p);
        }
    }
    set
}

/// The reduction log: the first term, then `-->  term` per step, each term
/// showing the redex about to be contracted in braces.
pub fn render_reduction(reduction: &Reduction) -> String {
    let mut out = String::new();
    let mut lines: Vec<String> = reduction
        .steps
        .iter()
        .map(|s| print_marked(&s.before, &redex_actions(&s.redex)))
        .collect();
    lines.push(reduction.term.to_string());
    for (i, line) in lines.iter().enumerate() {
        out.push_str(if i == 0 { "     " } else { "-->  " });
        out.push_str(line);
        out.push('\n');
    }
    out
}

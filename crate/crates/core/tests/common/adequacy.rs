//! Compare machine runs of encoded programs against the oracles.

use fmc::encodings::{encode_cbn, encode_cbv, SourceTerm};
use fmc::machine::{run_quiet, Outcome as Run, StuckReason, Summary};
use fmc::syntax::{alpha_eq, Location, Term};

use super::{cbn, cbv, World};

#[derive(Debug, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    /// the oracle gets stuck or runs out of fuel, so there is nothing to compare
    Skipped,
    Disagree(String),
}

const FUEL: usize = 10_000;

fn same(machine: &[Term], expected: &[Term]) -> bool {
    machine.len() == expected.len() && machine.iter().zip(expected).all(|(a, b)| alpha_eq(a, b))
}

fn check_effects(
    run: &Summary,
    world: &World,
    store: impl Fn(&Location) -> Term,
    out: &[Term],
) -> Result<(), String> {
    for c in &world.cells {
        let expect = [store(c)];
        if !same(run.state.memory.stack(c), &expect) {
            return Err(format!(
                "cell {c}: machine {:?}, oracle {}",
                run.state.memory.stack(c),
                expect[0]
            ));
        }
    }
    if !same(run.state.memory.stack(&Location::new("out")), out) {
        return Err(format!(
            "output: machine {:?}, oracle {out:?}",
            run.state.memory.stack(&Location::new("out"))
        ));
    }
    Ok(())
}

fn enc_cbn(s: &SourceTerm) -> Term {
    encode_cbn(s).expect("oracle terms stay in the source language")
}

/// Call-by-name adequacy for one closed program.
pub fn cbn_verdict(m: &SourceTerm, world: &World) -> Verdict {
    let (expected, st) = cbn::eval(m, world, FUEL);
    if matches!(expected, cbn::Outcome::Stuck | cbn::Outcome::Diverge) {
        return Verdict::Skipped;
    }
    let term = match encode_cbn(m) {
        Ok(t) => t,
        Err(e) => return Verdict::Disagree(e.to_string()),
    };
    let run = run_quiet(world.memory(), term, FUEL);
    let main = run.state.memory.stack(&Location::main());
    let result_ok = match (&expected, &run.outcome) {
        (cbn::Outcome::Int(n), Run::Halted) => {
            main.is_empty() && alpha_eq(&run.state.term, &Term::int(*n))
        }
        (cbn::Outcome::Lambda, Run::Stuck(StuckReason::EmptyStack(l))) => l.is_main(),
        (cbn::Outcome::Stack(items), Run::Halted) => {
            run.state.term.is_nil() && same(main, &items.iter().map(enc_cbn).collect::<Vec<_>>())
        }
        _ => false,
    };
    if !result_ok {
        return Verdict::Disagree(format!(
            "{m}: oracle {expected:?}, machine {} at {} with {}",
            run.outcome.label(),
            run.state.term,
            run.state.memory
        ));
    }
    let out: Vec<Term> = st.out.iter().map(enc_cbn).collect();
    match check_effects(&run, world, |c| enc_cbn(&st.store[c]), &out) {
        Ok(()) => Verdict::Agree,
        Err(e) => Verdict::Disagree(format!("{m}: {e}")),
    }
}

/// The stack item an encoded value leaves behind.
pub fn cbv_value(v: &cbv::Value) -> Term {
    match encode_cbv(&v.to_source()).expect("values are in the source language") {
        Term::Push(arg, l, rest) if l.is_main() && rest.is_nil() => (*arg).clone(),
        other => panic!("value encoding is not a single push: {other}"),
    }
}

/// Call-by-value adequacy for one closed program.
pub fn cbv_verdict(m: &SourceTerm, world: &World) -> Verdict {
    let (expected, st) = cbv::eval(m, world, FUEL);
    let cbv::Outcome::Value(v) = expected else {
        return Verdict::Skipped;
    };
    let term = match encode_cbv(m) {
        Ok(t) => t,
        Err(e) => return Verdict::Disagree(e.to_string()),
    };
    let run = run_quiet(world.memory(), term, FUEL);
    let main = run.state.memory.stack(&Location::main());
    let ok = run.outcome.is_halted() && run.state.term.is_nil() && same(main, &[cbv_value(&v)]);
    if !ok {
        return Verdict::Disagree(format!(
            "{m}: oracle {}, machine {} at {} with {}",
            v.to_source(),
            run.outcome.label(),
            run.state.term,
            run.state.memory
        ));
    }
    let out: Vec<Term> = st.out.iter().map(cbv_value).collect();
    match check_effects(&run, world, |c| cbv_value(&st.store[c]), &out) {
        Ok(()) => Verdict::Agree,
        Err(e) => Verdict::Disagree(format!("{m}: {e}")),
    }
}

/// Tally of an adequacy sweep.
#[derive(Debug, Default)]
pub struct Tally {
    pub agree: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Agree => self.agree += 1,
            Verdict::Skipped => self.skipped += 1,
            Verdict::Disagree(e) => self.failures.push(e),
        }
    }
}

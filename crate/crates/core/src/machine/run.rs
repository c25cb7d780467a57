use std::fmt;

use thiserror::Error;

use super::memory::{Memory, PopError};
use crate::syntax::{compose, substitute, Constant, Location, Name, Prim, Term};

pub const DEFAULT_FUEL: usize = 100_000;

/// A machine state: memory and the term still to run.
#[derive(Clone, Debug)]
pub struct MachineState {
    pub memory: Memory,
    pub term: Term,
}

/// The kind of a single machine transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transition {
    Push(Location),
    Pop(Location),
    Force,
    /// a primitive operator acting on the main stack
    Prim(Prim),
    /// a literal in head position, pushed onto the main stack
    Literal,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Push(l) => write!(f, "{l} push"),
            Transition::Pop(l) => write!(f, "{l} pop"),
            Transition::Force => f.write_str("force"),
            Transition::Prim(p) => write!(f, "prim {}", p.symbol()),
            Transition::Literal => f.write_str("literal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StuckReason {
    #[error("open variable `{0}` in head position")]
    OpenVariable(Name),
    #[error("pop from empty stack at `{0}`")]
    EmptyStack(Location),
    #[error("supplier for `{0}` is exhausted")]
    SupplyExhausted(Location),
    #[error("`{prim}` applied to {detail}")]
    TypeMismatch { prim: &'static str, detail: String },
    #[error("`{0}` is not executable")]
    NotExecutable(String),
    #[error("arithmetic overflow in `{0}`")]
    Overflow(&'static str),
}

/// Result of one machine step.
#[derive(Clone, Debug)]
pub enum StepResult {
    Moved(Transition, MachineState),
    Halt,
    Stuck(StuckReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The term reached `*`, or a bare literal that stands for the result.
    Halted,
    Stuck(StuckReason),
    FuelExhausted,
}

impl Outcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, Outcome::Halted)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Halted => "halted",
            Outcome::Stuck(_) => "stuck",
            Outcome::FuelExhausted => "fuel exhausted",
        }
    }
}

/// A recorded run: `states[i]` goes to `states[i + 1]` by `transitions[i]`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub states: Vec<MachineState>,
    pub transitions: Vec<Transition>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn steps(&self) -> impl Iterator<Item = (&MachineState, &Transition, &MachineState)> {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (&self.states[i], t, &self.states[i + 1]))
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn final_state(&self) -> &MachineState {
        self.states.last().expect("a trace has an initial state")
    }

    /// The literal left in head position by a halted run, if any.
    pub fn result_value(&self) -> Option<Constant> {
        match (&self.outcome, &self.final_state().term) {
            (Outcome::Halted, Term::Const(c, r)) if r.is_nil() => Some(*c),
            _ => None,
        }
    }
}

/// Outcome of a run that keeps only the final state.
#[derive(Clone, Debug)]
pub struct Summary {
    pub state: MachineState,
    pub steps: usize,
    pub outcome: Outcome,
}

fn literal(t: &Term) -> Option<Constant> {
    match t {
        Term::Const(c, r) if r.is_nil() && c.is_literal() => Some(*c),
        _ => None,
    }
}

impl MachineState {
    pub fn new(memory: Memory, term: Term) -> Self {
        MachineState { memory, term }
    }

    pub fn is_final(&self) -> bool {
        self.term.is_nil() || literal(&self.term).is_some()
    }

    /// One transition, leaving `self` untouched.
    pub fn step(&self) -> StepResult {
        let mut next = self.clone();
        match next.advance() {
            Ok(Some(t)) => StepResult::Moved(t, next),
            Ok(None) => StepResult::Halt,
            Err(r) => StepResult::Stuck(r),
        }
    }

    /// One transition in place. `Ok(None)` means the state is final.
    pub fn advance(&mut self) -> Result<Option<Transition>, StuckReason> {
        if self.is_final() {
            return Ok(None);
        }
        let term = std::mem::take(&mut self.term);
        let (transition, next) = match term {
            Term::Nil => unreachable!("final states are handled above"),
            Term::Var(ref x, _) => {
                let x = x.clone();
                self.term = term;
                return Err(StuckReason::OpenVariable(x));
            }
            Term::Push(a, l, r) => {
                self.memory.push(&l, (*a).clone());
                (Transition::Push(l), (*r).clone())
            }
            Term::Pop(ref l, ref x, ref r) => match self.memory.pop(l) {
                Ok(v) => (Transition::Pop(l.clone()), substitute(&v, x, r)),
                Err(e) => {
                    let l = l.clone();
                    self.term = term;
                    return Err(match e {
                        PopError::Empty => StuckReason::EmptyStack(l),
                        PopError::Exhausted => StuckReason::SupplyExhausted(l),
                    });
                }
            },
            Term::Force(ref v, ref r) => match &**v {
                Term::Thunk(body, vr) if vr.is_nil() => (Transition::Force, compose(body, r)),
                Term::Var(x, _) => {
                    let x = x.clone();
                    self.term = term;
                    return Err(StuckReason::OpenVariable(x));
                }
                other => {
                    let msg = format!("?({other})");
                    self.term = term;
                    return Err(StuckReason::NotExecutable(msg));
                }
            },
            Term::Thunk(ref b, _) => {
                let msg = format!("!{{{b}}}");
                self.term = term;
                return Err(StuckReason::NotExecutable(msg));
            }
            Term::Const(Constant::Prim(p), ref r) => {
                let r = (**r).clone();
                if let Err(e) = self.apply_prim(p) {
                    self.term = term;
                    return Err(e);
                }
                (Transition::Prim(p), r)
            }
            Term::Const(c, r) => {
                self.memory
                    .push(&Location::main(), Term::constant(c, Term::Nil));
                (Transition::Literal, (*r).clone())
            }
        };
        self.term = next;
        Ok(Some(transition))
    }

    fn apply_prim(&mut self, p: Prim) -> Result<(), StuckReason> {
        let main = Location::main();
        let stack = self.memory.stack_mut(&main);
        if stack.len() < p.arity() {
            return Err(StuckReason::EmptyStack(main));
        }
        let operands: Vec<Term> = (0..p.arity())
            .map(|_| stack.pop().expect("arity checked"))
            .collect();
        let result = match compute(p, &operands) {
            Ok(t) => t,
            Err(e) => {
                stack.extend(operands.into_iter().rev());
                return Err(e);
            }
        };
        stack.push(result);
        Ok(())
    }
}

/// Apply a primitive to its operands, listed in pop order (top first).
fn compute(p: Prim, ops: &[Term]) -> Result<Term, StuckReason> {
    let mismatch = |what: &str| StuckReason::TypeMismatch {
        prim: p.symbol(),
        detail: format!(
            "{what}: {}",
            ops.iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    if p == Prim::If {
        return match literal(&ops[0]) {
            Some(Constant::Bool(true)) => Ok(ops[1].clone()),
            Some(Constant::Bool(false)) => Ok(ops[2].clone()),
            _ => Err(mismatch("a non-boolean condition")),
        };
    }
    let ints = (literal(&ops[0]), literal(&ops[1]));
    let value = match (p, ints) {
        (Prim::Eq, (Some(a), Some(b))) => Constant::Bool(a == b),
        (_, (Some(Constant::Int(a)), Some(Constant::Int(b)))) => {
            let r = match p {
                Prim::Add => a.checked_add(b),
                Prim::Sub => a.checked_sub(b),
                Prim::Mul => a.checked_mul(b),
                _ => unreachable!("handled above"),
            };
            Constant::Int(r.ok_or(StuckReason::Overflow(p.symbol()))?)
        }
        _ => return Err(mismatch("non-integer operands")),
    };
    Ok(Term::constant(value, Term::Nil))
}

/// Run and record every state.
pub fn run(memory: Memory, term: Term, fuel: usize) -> Trace {
    let mut state = MachineState::new(memory, term);
    let mut states = vec![state.clone()];
    let mut transitions = Vec::new();
    let outcome = loop {
        if transitions.len() >= fuel && !state.is_final() {
            break Outcome::FuelExhausted;
        }
        match state.advance() {
            Ok(Some(t)) => {
                transitions.push(t);
                states.push(state.clone());
            }
            Ok(None) => break Outcome::Halted,
            Err(r) => break Outcome::Stuck(r),
        }
    };
    Trace {
        states,
        transitions,
        outcome,
    }
}

/// Run without recording intermediate states.
pub fn run_quiet(memory: Memory, term: Term, fuel: usize) -> Summary {
    let mut state = MachineState::new(memory, term);
    let mut steps = 0;
    let outcome = loop {
        if steps >= fuel && !state.is_final() {
            break Outcome::FuelExhausted;
        }
        match state.advance() {
            Ok(Some(_)) => steps += 1,
            Ok(None) => break Outcome::Halted,
            Err(r) => break Outcome::Stuck(r),
        }
    };
    Summary {
        state,
        steps,
        outcome,
    }
}

/// Check run composition: if `(R, M)` halts in `S` and `(S, N)` halts in
/// `T`, then `(R, M;N)` halts in `T`.
///
/// Returns `None` when the premises do not hold, since there is then
/// nothing to check.
pub fn run_composed_check(r: &Memory, m: &Term, n: &Term, fuel: usize) -> Option<bool> {
    let first = run_quiet(r.clone(), m.clone(), fuel);
    if !first.outcome.is_halted() || !first.state.term.is_nil() {
        return None;
    }
    let second = run_quiet(first.state.memory, n.clone(), fuel);
    if !second.outcome.is_halted() {
        return None;
    }
    let whole = run_quiet(r.clone(), compose(m, n), fuel.saturating_mul(2));
    Some(
        whole.outcome.is_halted()
            && whole.state.memory.same_stacks(&second.state.memory)
            && crate::syntax::alpha_eq(&whole.state.term, &second.state.term),
    )
}

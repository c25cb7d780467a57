//! Call-by-value oracle: an environment machine with an explicit store.
//! Arguments are evaluated before the function, as in the encoding.

use std::collections::{BTreeMap, VecDeque};
use std::rc::Rc;

use fmc::encodings::SourceTerm as S;
use fmc::syntax::{Location, Name};

use super::World;

type Env = Rc<BTreeMap<Name, Value>>;

#[derive(Clone, Debug)]
pub enum Value {
    Int(i64),
    Unit,
    Closure(Name, Rc<S>, Env),
}

impl Value {
    /// Back to a closed source value, substituting the environment.
    pub fn to_source(&self) -> S {
        match self {
            Value::Int(n) => S::Int(*n),
            Value::Unit => S::Unit,
            Value::Closure(x, body, env) => {
                let mut b = (**body).clone();
                for (y, v) in env.iter() {
                    if y != x {
                        b = b.substitute(y, &v.to_source());
                    }
                }
                S::Lam(x.clone(), Box::new(b))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Value),
    Stuck,
    Diverge,
}

enum Frame {
    /// the argument is done; evaluate the function next
    Fun(Rc<S>, Env),
    /// both done; apply the function to this argument
    Call(Value),
    Write(Rc<S>, Env),
    Assign(Location, Rc<S>, Env),
    Let(Name, Rc<S>, Env),
}

enum Control {
    Eval(Rc<S>, Env),
    Return(Value),
}

pub struct State {
    pub store: BTreeMap<Location, Value>,
    pub out: Vec<Value>,
    input: VecDeque<i64>,
    rnd: VecDeque<bool>,
}

pub fn eval(m: &S, world: &World, fuel: usize) -> (Outcome, State) {
    let mut st = State {
        store: world
            .cells
            .iter()
            .map(|c| (c.clone(), Value::Unit))
            .collect(),
        out: Vec::new(),
        input: world.input.iter().copied().collect(),
        rnd: world.rnd.iter().copied().collect(),
    };
    let o = run(m, &mut st, fuel);
    (o, st)
}

fn run(m: &S, st: &mut State, fuel: usize) -> Outcome {
    let mut control = Control::Eval(Rc::new(m.clone()), Rc::new(BTreeMap::new()));
    let mut kont: Vec<Frame> = Vec::new();
    for _ in 0..fuel {
        control = match control {
            Control::Eval(term, env) => match &*term {
                S::Var(x) => match env.get(x) {
                    Some(v) => Control::Return(v.clone()),
                    None => return Outcome::Stuck,
                },
                S::Int(n) => Control::Return(Value::Int(*n)),
                S::Unit => Control::Return(Value::Unit),
                S::Lam(x, b) => {
                    Control::Return(Value::Closure(x.clone(), Rc::new((**b).clone()), env))
                }
                S::App(f, a) => {
                    kont.push(Frame::Fun(Rc::new((**f).clone()), env.clone()));
                    Control::Eval(Rc::new((**a).clone()), env)
                }
                S::Read => match st.input.pop_front() {
                    Some(i) => Control::Return(Value::Int(i)),
                    None => return Outcome::Stuck,
                },
                S::Write(n, k) => {
                    kont.push(Frame::Write(Rc::new((**k).clone()), env.clone()));
                    Control::Eval(Rc::new((**n).clone()), env)
                }
                S::Assign(c, n, k) => {
                    kont.push(Frame::Assign(
                        c.clone(),
                        Rc::new((**k).clone()),
                        env.clone(),
                    ));
                    Control::Eval(Rc::new((**n).clone()), env)
                }
                S::Lookup(c) => match st.store.get(c) {
                    Some(v) => Control::Return(v.clone()),
                    None => return Outcome::Stuck,
                },
                // the first boolean picks the left summand
                S::Prob(l, r) => match st.rnd.pop_front() {
                    Some(b) => {
                        Control::Eval(Rc::new(if b { (**l).clone() } else { (**r).clone() }), env)
                    }
                    None => return Outcome::Stuck,
                },
                S::Nondet(l, _) => Control::Eval(Rc::new((**l).clone()), env),
                S::Let(x, n, b) => {
                    kont.push(Frame::Let(x.clone(), Rc::new((**b).clone()), env.clone()));
                    Control::Eval(Rc::new((**n).clone()), env)
                }
                _ => return Outcome::Stuck,
            },
            Control::Return(v) => match kont.pop() {
                None => return Outcome::Value(v),
                Some(Frame::Fun(f, env)) => {
                    kont.push(Frame::Call(v));
                    Control::Eval(f, env)
                }
                Some(Frame::Call(arg)) => match v {
                    Value::Closure(x, body, env) => {
                        let mut e = (*env).clone();
                        e.insert(x, arg);
                        Control::Eval(body, Rc::new(e))
                    }
                    _ => return Outcome::Stuck,
                },
                Some(Frame::Write(k, env)) => {
                    st.out.push(v);
                    Control::Eval(k, env)
                }
                Some(Frame::Assign(c, k, env)) => {
                    if !st.store.contains_key(&c) {
                        return Outcome::Stuck;
                    }
                    st.store.insert(c, v);
                    Control::Eval(k, env)
                }
                Some(Frame::Let(x, b, env)) => {
                    let mut e = (*env).clone();
                    e.insert(x, v);
                    Control::Eval(b, Rc::new(e))
                }
            },
        };
    }
    Outcome::Diverge
}

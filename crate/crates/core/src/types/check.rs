use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use super::ty::{Type, TypeVector, VectorFamily};
use crate::syntax::{free_vars, locations, Constant, Location, Name, Path, Prim, Step, Term};

/// Finite map from variables to types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext(BTreeMap<Name, Type>);

impl TypingContext {
    pub fn new() -> Self {
        TypingContext(BTreeMap::new())
    }

    pub fn get(&self, x: &Name) -> Option<&Type> {
        self.0.get(x)
    }

    /// `Γ, x:t`, replacing any earlier binding of `x`.
    pub fn extend(&self, x: Name, t: Type) -> Self {
        let mut c = self.clone();
        c.0.insert(x, t);
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<N: Into<Name>> FromIterator<(N, Type)> for TypingContext {
    fn from_iter<I: IntoIterator<Item = (N, Type)>>(iter: I) -> Self {
        TypingContext(iter.into_iter().map(|(n, t)| (n.into(), t)).collect())
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match t {
                Type::Arrow(_) => write!(f, "{x}:({t})")?,
                Type::Base(_) => write!(f, "{x}:{t}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("rule {rule} fails at `{at}`: {message}")]
    Mismatch {
        rule: &'static str,
        path: Path,
        at: String,
        message: String,
    },
    #[error("search budget of {0} nodes exhausted")]
    BudgetExceeded(usize),
    #[error("invalid derivation at `{at}`: {message}")]
    Invalid { at: String, message: String },
}

/// Knobs for the checker's bounded search.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Largest number of outputs per location guessed for a variable whose
    /// type is not yet known.
    pub max_width: usize,
    /// Search nodes before giving up with `BudgetExceeded`.
    pub budget: usize,
    /// Base types a variable may take when nothing else fixes its type.
    /// `Z` and `B` are added automatically for terms with constants.
    pub base_types: Vec<String>,
    /// After trying a pushed value's own type for a variable, also try every
    /// other shape. Needed for completeness; `find_type` turns it off.
    pub exhaustive: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_width: 3,
            budget: 200_000,
            base_types: Vec::new(),
            exhaustive: true,
        }
    }
}

/// Which typing rule concludes a derivation node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `* : ?t > !t`
    Nil,
    /// `x.M`, with `x` of arrow type
    Var,
    /// `a<x>.M`
    Abs,
    /// `[N]a.M`
    App,
    /// `x.M` with `x` of base type: the value is pushed on the main stack
    Atom,
    /// `n.M` for a literal `n`
    Literal,
    /// primitive operator
    Prim,
    /// `?V.M`
    Force,
    /// a pushed value of base type: `x` or a literal
    BaseValue,
    /// `!{N}` as a value, typed like `N`
    Thunk,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Nil => "T*",
            Rule::Var => "Tx",
            Rule::Abs => "Tλ",
            Rule::App => "Ta",
            Rule::Atom => "Tatom",
            Rule::Literal => "Tlit",
            Rule::Prim => "Tprim",
            Rule::Force => "T?",
            Rule::BaseValue => "Tbase",
            Rule::Thunk => "T!",
        }
    }
}

/// A typing derivation: `context ⊢ term : ty` by `rule` from `premises`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub context: TypingContext,
    pub term: Term,
    pub ty: Type,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    fn render(&self, depth: usize, out: &mut String) {
        use std::fmt::Write;
        let ctx = if self.context.is_empty() {
            String::new()
        } else {
            format!("{} ", self.context)
        };
        let _ = writeln!(
            out,
            "{}{} {}⊢ {} : {}",
            "  ".repeat(depth),
            self.rule.name(),
            ctx,
            self.term,
            self.ty
        );
        for p in &self.premises {
            p.render(depth + 1, out);
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        f.write_str(s.trim_end())
    }
}

// ---------------------------------------------------------------------------
// Internal types with metavariables.

#[derive(Clone, Debug)]
enum Ty {
    Meta(usize),
    Base(Arc<str>),
    Arrow(Rc<IArrow>),
}

#[derive(Clone, Debug, Default)]
struct IArrow {
    /// pop order
    inputs: BTreeMap<Location, Vec<Ty>>,
    /// stack order
    outputs: BTreeMap<Location, Vec<Ty>>,
}

fn lift(t: &Type) -> Ty {
    match t {
        Type::Base(b) => Ty::Base(b.clone()),
        Type::Arrow(a) => Ty::Arrow(Rc::new(IArrow {
            inputs: lift_family(&a.inputs),
            outputs: lift_family(&a.outputs),
        })),
    }
}

fn lift_family(f: &VectorFamily) -> BTreeMap<Location, Vec<Ty>> {
    f.iter()
        .map(|(l, v)| (l.clone(), v.items().iter().map(lift).collect()))
        .collect()
}

/// One goal state of the forward simulation: the typed stacks the term
/// starts from, and what it must end with.
#[derive(Clone)]
struct RunGoal {
    ctx: Rc<HashMap<Name, Ty>>,
    term: Term,
    path: Path,
    /// bottom first
    stacks: BTreeMap<Location, Vec<Ty>>,
    /// In open mode the inputs are discovered as the term pops past the
    /// bottom of the stacks; they are recorded here in pop order.
    drawn: Option<BTreeMap<Location, Vec<Ty>>>,
    target: Target,
}

#[derive(Clone)]
enum Target {
    Outputs(BTreeMap<Location, Vec<Ty>>),
    Meta(usize),
}

#[derive(Clone)]
enum Goal {
    Run(RunGoal),
    Value {
        ctx: Rc<HashMap<Name, Ty>>,
        term: Term,
        path: Path,
        meta: usize,
    },
}

enum Shape {
    Base(Arc<str>),
    Arrow {
        inputs: Vec<(Location, usize)>,
        outputs: Vec<(Location, usize)>,
    },
}

enum Alt {
    /// bind the meta to a fresh type of this shape, then retry the goal
    Bind(usize, Shape),
    /// replace the goal (the last one runs first)
    Goals(Vec<Goal>),
    /// discharge the goal by unifying two types
    Unify(Ty, Ty),
}

enum Progress {
    Next(Vec<Goal>),
    Fail(TypeError),
    Branch(Goal, Vec<Alt>),
}

#[derive(Clone)]
struct Solver {
    store: Vec<Option<Ty>>,
    values: HashMap<Path, usize>,
    nodes: usize,
    budget: usize,
    width: usize,
    bases: Vec<Arc<str>>,
    locs: Vec<Location>,
    first_error: Option<TypeError>,
    /// value goals not yet checked, by the meta of their type
    pending: HashMap<usize, Goal>,
    done: HashSet<usize>,
    exhaustive: bool,
}

fn fail(rule: &'static str, path: &Path, term: &Term, message: String) -> Progress {
    Progress::Fail(TypeError::Mismatch {
        rule,
        path: path.clone(),
        at: term.to_string(),
        message,
    })
}

fn child(path: &Path, step: Step) -> Path {
    let mut p = path.clone();
    p.push(step);
    p
}

impl Solver {
    fn fresh(&mut self) -> usize {
        self.store.push(None);
        self.store.len() - 1
    }

    fn resolve(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(m) = t {
            match &self.store[m] {
                Some(u) => t = u.clone(),
                None => return Ty::Meta(m),
            }
        }
        t
    }

    fn occurs(&self, m: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Meta(n) => n == m,
            Ty::Base(_) => false,
            Ty::Arrow(a) => a
                .inputs
                .values()
                .chain(a.outputs.values())
                .flatten()
                .any(|u| self.occurs(m, u)),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), String> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::Meta(m), Ty::Meta(n)) if m == n => Ok(()),
            (Ty::Meta(m), t) | (t, Ty::Meta(m)) => {
                if self.occurs(*m, t) {
                    return Err(format!(
                        "cyclic type: {} occurs in {}",
                        self.show(&Ty::Meta(*m)),
                        self.show(t)
                    ));
                }
                self.store[*m] = Some(t.clone());
                Ok(())
            }
            (Ty::Base(x), Ty::Base(y)) if x == y => Ok(()),
            (Ty::Arrow(x), Ty::Arrow(y)) => {
                self.unify_family(&x.inputs, &y.inputs)
                    .map_err(|e| format!("{e} in the inputs"))?;
                self.unify_family(&x.outputs, &y.outputs)
                    .map_err(|e| format!("{e} in the outputs"))
            }
            _ => Err(format!(
                "{} does not match {}",
                self.show(&a),
                self.show(&b)
            )),
        }
    }

    fn unify_family(
        &mut self,
        x: &BTreeMap<Location, Vec<Ty>>,
        y: &BTreeMap<Location, Vec<Ty>>,
    ) -> Result<(), String> {
        let locs: BTreeSet<&Location> = x.keys().chain(y.keys()).collect();
        let empty = Vec::new();
        for l in locs {
            let (u, v) = (x.get(l).unwrap_or(&empty), y.get(l).unwrap_or(&empty));
            if u.len() != v.len() {
                return Err(format!("{} versus {} types at {l}", u.len(), v.len()));
            }
            for (s, t) in u.iter().zip(v) {
                self.unify(s, t)?;
            }
        }
        Ok(())
    }

    /// Replace solved metas; unsolved ones become `(>)`.
    fn zonk(&self, t: &Ty) -> Type {
        match self.resolve(t) {
            Ty::Meta(_) => Type::unit(),
            Ty::Base(b) => Type::Base(b),
            Ty::Arrow(a) => Type::arrow(self.zonk_family(&a.inputs), self.zonk_family(&a.outputs)),
        }
    }

    fn zonk_family(&self, f: &BTreeMap<Location, Vec<Ty>>) -> VectorFamily {
        f.iter()
            .map(|(l, v)| {
                (
                    l.clone(),
                    TypeVector::new(v.iter().map(|t| self.zonk(t)).collect()),
                )
            })
            .collect()
    }

    fn show(&self, t: &Ty) -> String {
        match self.resolve(t) {
            Ty::Meta(m) => format!("?{m}"),
            other => {
                let z = self.zonk(&other);
                match z {
                    Type::Arrow(_) => format!("({z})"),
                    Type::Base(_) => z.to_string(),
                }
            }
        }
    }

    fn record(&mut self, e: TypeError) {
        if self.first_error.is_none() {
            self.first_error = Some(e);
        }
    }

    fn solve(&mut self, mut goals: Vec<Goal>) -> bool {
        loop {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.first_error = Some(TypeError::BudgetExceeded(self.budget));
                return false;
            }
            let Some(goal) = goals.pop() else { return true };
            match self.advance(goal) {
                Progress::Next(more) => goals.extend(more),
                Progress::Fail(e) => {
                    self.record(e);
                    return false;
                }
                Progress::Branch(retry, alts) => {
                    for alt in alts {
                        let saved = self.clone();
                        let mut next = goals.clone();
                        match alt {
                            Alt::Bind(m, shape) => {
                                let t = self.build(shape);
                                self.store[m] = Some(t);
                                next.push(retry.clone());
                            }
                            Alt::Goals(g) => next.extend(g),
                            Alt::Unify(a, b) => {
                                if self.unify(&a, &b).is_err() {
                                    *self = saved;
                                    continue;
                                }
                            }
                        }
                        if self.solve(next) {
                            return true;
                        }
                        if matches!(self.first_error, Some(TypeError::BudgetExceeded(_))) {
                            return false;
                        }
                        let err = self.first_error.take();
                        let nodes = self.nodes;
                        *self = saved;
                        self.nodes = nodes;
                        self.first_error = self.first_error.take().or(err);
                    }
                    return false;
                }
            }
        }
    }

    fn build(&mut self, shape: Shape) -> Ty {
        match shape {
            Shape::Base(b) => Ty::Base(b),
            Shape::Arrow { inputs, outputs } => {
                let mut arrow = IArrow::default();
                for (l, n) in inputs {
                    let v: Vec<Ty> = (0..n).map(|_| Ty::Meta(self.fresh())).collect();
                    arrow.inputs.insert(l, v);
                }
                for (l, n) in outputs {
                    let v: Vec<Ty> = (0..n).map(|_| Ty::Meta(self.fresh())).collect();
                    arrow.outputs.insert(l, v);
                }
                Ty::Arrow(Rc::new(arrow))
            }
        }
    }

    /// Every shape a variable of unknown type could take in head position.
    fn shapes(&self, g: &RunGoal) -> Vec<Shape> {
        let mut out: Vec<Shape> = self.bases.iter().map(|b| Shape::Base(b.clone())).collect();
        let extra = if g.drawn.is_some() { self.width } else { 0 };
        let avail: Vec<usize> = self
            .locs
            .iter()
            .map(|l| g.stacks.get(l).map_or(0, Vec::len) + extra)
            .collect();
        let mut combos: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
        let n = self.locs.len();
        let mut ins = vec![0; n];
        loop {
            let mut outs = vec![0; n];
            loop {
                combos.push((
                    ins.iter().sum::<usize>() + outs.iter().sum::<usize>(),
                    ins.clone(),
                    outs.clone(),
                ));
                if !bump(&mut outs, &vec![self.width; n]) {
                    break;
                }
            }
            if !bump(&mut ins, &avail) {
                break;
            }
        }
        combos.sort_by_key(|c| c.0);
        for (_, i, o) in combos {
            let pick = |v: &[usize]| -> Vec<(Location, usize)> {
                self.locs
                    .iter()
                    .cloned()
                    .zip(v.iter().copied())
                    .filter(|p| p.1 > 0)
                    .collect()
            };
            out.push(Shape::Arrow {
                inputs: pick(&i),
                outputs: pick(&o),
            });
        }
        out
    }

    fn pop(&mut self, g: &mut RunGoal, l: &Location) -> Option<Ty> {
        if let Some(t) = g.stacks.get_mut(l).and_then(Vec::pop) {
            return Some(t);
        }
        let drawn = g.drawn.as_mut()?;
        let t = Ty::Meta(self.fresh());
        drawn.entry(l.clone()).or_default().push(t.clone());
        Some(t)
    }

    fn push(g: &mut RunGoal, l: &Location, t: Ty) {
        g.stacks.entry(l.clone()).or_default().push(t);
    }

    /// Consume the inputs and produce the outputs of an arrow-typed action.
    #[allow(clippy::result_large_err)]
    fn apply_arrow(
        &mut self,
        g: &mut RunGoal,
        a: &IArrow,
        rule: &'static str,
    ) -> Result<(), Progress> {
        for (l, want) in &a.inputs {
            for w in want {
                let Some(got) = self.pop(g, l) else {
                    return Err(fail(
                        rule,
                        &g.path,
                        &g.term,
                        format!("needs {} inputs at {l}", want.len()),
                    ));
                };
                if let Err(e) = self.unify(&got, w) {
                    return Err(fail(rule, &g.path, &g.term, e));
                }
            }
        }
        for (l, v) in &a.outputs {
            for t in v {
                Self::push(g, l, t.clone());
            }
        }
        Ok(())
    }

    fn advance(&mut self, goal: Goal) -> Progress {
        match goal {
            Goal::Value {
                ctx,
                term,
                path,
                meta,
            } => {
                self.pending.remove(&meta);
                if !self.done.insert(meta) {
                    return Progress::Next(vec![]);
                }
                self.advance_value(ctx, term, path, meta)
            }
            Goal::Run(g) => self.advance_run(g),
        }
    }

    fn advance_value(
        &mut self,
        ctx: Rc<HashMap<Name, Ty>>,
        term: Term,
        path: Path,
        meta: usize,
    ) -> Progress {
        let want = self.resolve(&Ty::Meta(meta));
        let lit_base = match &term {
            Term::Const(Constant::Int(_), r) if r.is_nil() => Some("Z"),
            Term::Const(Constant::Bool(_), r) if r.is_nil() => Some("B"),
            _ => None,
        };
        let var_ty = match &term {
            Term::Var(x, r) if r.is_nil() => ctx.get(x).map(|t| self.resolve(t)),
            _ => None,
        };
        if let Ty::Base(b) = &want {
            if let Some(t) = &var_ty {
                return match self.unify(t, &want) {
                    Ok(()) => Progress::Next(vec![]),
                    Err(e) => fail("Tbase", &path, &term, e),
                };
            }
            return if lit_base.is_some_and(|l| **b == *l) {
                Progress::Next(vec![])
            } else {
                fail(
                    "Tbase",
                    &path,
                    &term,
                    format!("not a value of base type {b}"),
                )
            };
        }
        if let Some(t) = var_ty {
            match (&t, &want) {
                (Ty::Base(_), _) => {
                    return match self.unify(&want, &t) {
                        Ok(()) => Progress::Next(vec![]),
                        Err(e) => fail("Tbase", &path, &term, e),
                    }
                }
                (_, Ty::Meta(_)) => {
                    // the variable's own type, or failing that an expansion
                    let run = self.run_goal_for(ctx, term, path, meta);
                    return Progress::Branch(
                        run.clone(),
                        vec![Alt::Unify(want, t), Alt::Goals(vec![run])],
                    );
                }
                _ => {}
            }
        }
        if let Term::Thunk(body, r) = &term {
            if r.is_nil() {
                let goal = self.run_goal_for(ctx, (**body).clone(), child(&path, Step::Body), meta);
                return Progress::Next(vec![goal]);
            }
        }
        let run = self.run_goal_for(ctx, term, path, meta);
        match (lit_base, &want) {
            (Some(b), Ty::Meta(_)) => Progress::Branch(
                run.clone(),
                vec![
                    Alt::Bind(meta, Shape::Base(Arc::from(b))),
                    Alt::Goals(vec![run]),
                ],
            ),
            _ => Progress::Next(vec![run]),
        }
    }

    /// A goal running `term` against the arrow `meta`, open if it is unknown.
    fn run_goal_for(
        &mut self,
        ctx: Rc<HashMap<Name, Ty>>,
        term: Term,
        path: Path,
        meta: usize,
    ) -> Goal {
        match self.resolve(&Ty::Meta(meta)) {
            Ty::Arrow(a) => Goal::Run(RunGoal {
                ctx,
                term,
                path,
                stacks: a
                    .inputs
                    .iter()
                    .map(|(l, v)| (l.clone(), v.iter().rev().cloned().collect()))
                    .collect(),
                drawn: None,
                target: Target::Outputs(a.outputs.clone()),
            }),
            _ => Goal::Run(RunGoal {
                ctx,
                term,
                path,
                stacks: BTreeMap::new(),
                drawn: Some(BTreeMap::new()),
                target: Target::Meta(meta),
            }),
        }
    }

    fn advance_run(&mut self, mut g: RunGoal) -> Progress {
        let term = g.term.clone();
        match &term {
            Term::Nil => self.finish(g),
            Term::Var(x, r) => {
                let Some(t) = g.ctx.get(x).cloned() else {
                    return Progress::Fail(TypeError::UnboundVariable(x.clone()));
                };
                match self.resolve(&t) {
                    Ty::Arrow(a) => {
                        if let Err(p) = self.apply_arrow(&mut g, &a, "Tx") {
                            return p;
                        }
                    }
                    Ty::Base(b) => Self::push(&mut g, &Location::main(), Ty::Base(b)),
                    Ty::Meta(m) => {
                        // Type the pushed value first if there is one; its own
                        // type is the natural guess. Otherwise guess shapes.
                        let mut alts = Vec::new();
                        if let Some(v) = self.pending.get(&m) {
                            alts.push(Alt::Goals(vec![Goal::Run(g.clone()), v.clone()]));
                        }
                        if alts.is_empty() || self.exhaustive {
                            alts.extend(self.shapes(&g).into_iter().map(|s| Alt::Bind(m, s)));
                        }
                        return Progress::Branch(Goal::Run(g), alts);
                    }
                }
                self.continue_with(g, r)
            }
            Term::Pop(l, x, r) => {
                let Some(t) = self.pop(&mut g, l) else {
                    return fail("Tλ", &g.path, &term, format!("no input left at {l}"));
                };
                let mut ctx = (*g.ctx).clone();
                ctx.insert(x.clone(), t);
                g.ctx = Rc::new(ctx);
                self.continue_with(g, r)
            }
            Term::Push(n, l, r) => {
                let m = self.fresh();
                self.values.insert(g.path.clone(), m);
                Self::push(&mut g, l, Ty::Meta(m));
                let value = Goal::Value {
                    ctx: g.ctx.clone(),
                    term: (**n).clone(),
                    path: child(&g.path, Step::Arg),
                    meta: m,
                };
                self.pending.insert(m, value.clone());
                let mut next = self.continue_with(g, r);
                if let Progress::Next(v) = &mut next {
                    v.insert(0, value);
                }
                next
            }
            Term::Force(v, r) => {
                let m = self.fresh();
                self.values.insert(g.path.clone(), m);
                let value = Goal::Value {
                    ctx: g.ctx.clone(),
                    term: (**v).clone(),
                    path: child(&g.path, Step::Value),
                    meta: m,
                };
                self.pending.insert(m, value.clone());
                // run the forced value as soon as its type is known
                let force = RunGoal {
                    term: Term::var(Name::new("?"), (**r).clone()),
                    ..g.clone()
                };
                let mut ctx = (*g.ctx).clone();
                ctx.insert(Name::new("?"), Ty::Meta(m));
                let force = RunGoal {
                    ctx: Rc::new(ctx),
                    ..force
                };
                Progress::Next(vec![value, Goal::Run(force)])
            }
            Term::Thunk(..) => fail(
                "T!",
                &g.path,
                &term,
                "a thunk cannot run in head position".into(),
            ),
            Term::Const(c, r) => {
                let main = Location::main();
                let z = || Ty::Base(Arc::from("Z"));
                let b = || Ty::Base(Arc::from("B"));
                match c {
                    Constant::Int(_) => Self::push(&mut g, &main, z()),
                    Constant::Bool(_) => Self::push(&mut g, &main, b()),
                    Constant::Prim(p) => {
                        let arrow = match p {
                            Prim::Add | Prim::Sub | Prim::Mul => IArrow {
                                inputs: [(main.clone(), vec![z(), z()])].into(),
                                outputs: [(main.clone(), vec![z()])].into(),
                            },
                            Prim::Eq => IArrow {
                                inputs: [(main.clone(), vec![z(), z()])].into(),
                                outputs: [(main.clone(), vec![b()])].into(),
                            },
                            Prim::If => {
                                let t = Ty::Meta(self.fresh());
                                IArrow {
                                    inputs: [(main.clone(), vec![b(), t.clone(), t.clone()])]
                                        .into(),
                                    outputs: [(main.clone(), vec![t])].into(),
                                }
                            }
                        };
                        if let Err(e) = self.apply_arrow(&mut g, &arrow, "Tprim") {
                            return e;
                        }
                    }
                }
                self.continue_with(g, r)
            }
        }
    }

    fn continue_with(&mut self, mut g: RunGoal, rest: &Arc<Term>) -> Progress {
        g.term = (**rest).clone();
        g.path.push(Step::Rest);
        Progress::Next(vec![Goal::Run(g)])
    }

    fn finish(&mut self, g: RunGoal) -> Progress {
        match &g.target {
            Target::Outputs(outs) => {
                let stacks: BTreeMap<Location, Vec<Ty>> = g
                    .stacks
                    .iter()
                    .filter(|(_, v)| !v.is_empty())
                    .map(|(l, v)| (l.clone(), v.clone()))
                    .collect();
                match self.unify_family(&stacks, outs) {
                    Ok(()) => Progress::Next(vec![]),
                    Err(e) => fail(
                        "T*",
                        &g.path,
                        &g.term,
                        format!("final stacks do not match the outputs: {e}"),
                    ),
                }
            }
            Target::Meta(m) => {
                let arrow = IArrow {
                    inputs: g.drawn.clone().unwrap_or_default(),
                    outputs: g
                        .stacks
                        .iter()
                        .filter(|(_, v)| !v.is_empty())
                        .map(|(l, v)| (l.clone(), v.clone()))
                        .collect(),
                };
                match self.unify(&Ty::Meta(*m), &Ty::Arrow(Rc::new(arrow))) {
                    Ok(()) => Progress::Next(vec![]),
                    Err(e) => fail("T*", &g.path, &g.term, e),
                }
            }
        }
    }
}

/// Odometer increment of `v` below the bounds `max` (inclusive).
fn bump(v: &mut [usize], max: &[usize]) -> bool {
    for i in 0..v.len() {
        if v[i] < max[i] {
            v[i] += 1;
            return true;
        }
        v[i] = 0;
    }
    false
}

// ---------------------------------------------------------------------------

fn new_solver(
    ctx: &TypingContext,
    term: &Term,
    goal: Option<&Type>,
    opts: &CheckOptions,
) -> Solver {
    let mut locs: BTreeSet<Location> = locations(term);
    locs.insert(Location::main());
    for (_, t) in ctx.iter() {
        locs.extend(t.locations());
    }
    if let Some(g) = goal {
        locs.extend(g.locations());
    }
    let mut bases: Vec<Arc<str>> = opts
        .base_types
        .iter()
        .map(|b| Arc::from(b.as_str()))
        .collect();
    if has_constants(term) {
        for b in ["Z", "B"] {
            if !bases.iter().any(|x| &**x == b) {
                bases.push(Arc::from(b));
            }
        }
    }
    Solver {
        store: Vec::new(),
        values: HashMap::new(),
        nodes: 0,
        budget: opts.budget,
        width: opts.max_width,
        bases,
        locs: locs.into_iter().collect(),
        first_error: None,
        pending: HashMap::new(),
        done: HashSet::new(),
        exhaustive: opts.exhaustive,
    }
}

fn has_constants(t: &Term) -> bool {
    match t {
        Term::Nil => false,
        Term::Const(..) => true,
        Term::Var(_, r) | Term::Pop(_, _, r) => has_constants(r),
        Term::Push(a, _, r) | Term::Thunk(a, r) | Term::Force(a, r) => {
            has_constants(a) || has_constants(r)
        }
    }
}

fn check_scope(ctx: &TypingContext, term: &Term) -> Result<(), TypeError> {
    match free_vars(term).into_iter().find(|x| ctx.get(x).is_none()) {
        Some(x) => Err(TypeError::UnboundVariable(x)),
        None => Ok(()),
    }
}

/// Check `ctx ⊢ term : goal` and return a derivation.
pub fn check(ctx: &TypingContext, term: &Term, goal: &Type) -> Result<Derivation, TypeError> {
    check_with(ctx, term, goal, &CheckOptions::default())
}

pub fn check_with(
    ctx: &TypingContext,
    term: &Term,
    goal: &Type,
    opts: &CheckOptions,
) -> Result<Derivation, TypeError> {
    check_scope(ctx, term)?;
    let mut s = new_solver(ctx, term, Some(goal), opts);
    let lctx: Rc<HashMap<Name, Ty>> =
        Rc::new(ctx.iter().map(|(x, t)| (x.clone(), lift(t))).collect());
    let m = s.fresh();
    s.store[m] = Some(lift(goal));
    let top = match goal {
        // at an arrow goal the term always runs; it is never a thunk value
        Type::Arrow(_) => s.run_goal_for(lctx, term.clone(), Vec::new(), m),
        Type::Base(_) => Goal::Value {
            ctx: lctx,
            term: term.clone(),
            path: Vec::new(),
            meta: m,
        },
    };
    if !s.solve(vec![top]) {
        return Err(s.first_error.unwrap_or_else(|| TypeError::Mismatch {
            rule: "T*",
            path: Vec::new(),
            at: term.to_string(),
            message: "no derivation".into(),
        }));
    }
    let d = match goal {
        Type::Arrow(_) => reconstruct_run(&s, ctx, term, &Vec::new(), goal),
        Type::Base(_) => reconstruct_value(&s, ctx, term, &Vec::new(), goal),
    }?;
    validate(&d)?;
    Ok(d)
}

/// Search for some type of `term` (at the main and named locations it
/// uses), within the bounds of `opts`. Used to enumerate typed terms; this
/// is not principal type inference.
pub fn find_type(
    ctx: &TypingContext,
    term: &Term,
    opts: &CheckOptions,
) -> Result<(Type, Derivation), TypeError> {
    check_scope(ctx, term)?;
    let opts = CheckOptions {
        exhaustive: false,
        ..opts.clone()
    };
    let mut s = new_solver(ctx, term, None, &opts);
    let lctx: Rc<HashMap<Name, Ty>> =
        Rc::new(ctx.iter().map(|(x, t)| (x.clone(), lift(t))).collect());
    let m = s.fresh();
    let top = s.run_goal_for(lctx, term.clone(), Vec::new(), m);
    if !s.solve(vec![top]) {
        return Err(s.first_error.unwrap_or_else(|| TypeError::Mismatch {
            rule: "T*",
            path: Vec::new(),
            at: term.to_string(),
            message: "no derivation".into(),
        }));
    }
    let ty = s.zonk(&Ty::Meta(m));
    let d = reconstruct_run(&s, ctx, term, &Vec::new(), &ty)?;
    validate(&d)?;
    Ok((ty, d))
}

pub fn is_typeable(ctx: &TypingContext, term: &Term, goal: &Type) -> bool {
    check(ctx, term, goal).is_ok()
}

// ---------------------------------------------------------------------------
// Rebuilding the derivation once every pushed value has a type.

fn invalid(term: &Term, message: impl Into<String>) -> TypeError {
    TypeError::Invalid {
        at: term.to_string(),
        message: message.into(),
    }
}

fn value_type(s: &Solver, path: &Path, term: &Term) -> Result<Type, TypeError> {
    let m = s
        .values
        .get(path)
        .ok_or_else(|| invalid(term, "no type recorded for a pushed value"))?;
    Ok(s.zonk(&Ty::Meta(*m)))
}

fn reconstruct_value(
    s: &Solver,
    ctx: &TypingContext,
    term: &Term,
    path: &Path,
    ty: &Type,
) -> Result<Derivation, TypeError> {
    let leaf = |rule| Derivation {
        rule,
        context: ctx.clone(),
        term: term.clone(),
        ty: ty.clone(),
        premises: vec![],
    };
    if let Type::Base(_) = ty {
        return Ok(leaf(Rule::BaseValue));
    }
    if let Term::Thunk(body, r) = term {
        if r.is_nil() {
            let p = reconstruct_run(s, ctx, body, &child(path, Step::Body), ty)?;
            return Ok(Derivation {
                premises: vec![p],
                ..leaf(Rule::Thunk)
            });
        }
    }
    reconstruct_run(s, ctx, term, path, ty)
}

fn reconstruct_run(
    s: &Solver,
    ctx: &TypingContext,
    term: &Term,
    path: &Path,
    ty: &Type,
) -> Result<Derivation, TypeError> {
    let arrow = ty
        .as_arrow()
        .ok_or_else(|| invalid(term, "a running term needs an arrow type"))?;
    let node = |rule, premises| Derivation {
        rule,
        context: ctx.clone(),
        term: term.clone(),
        ty: ty.clone(),
        premises,
    };
    let rest_path = child(path, Step::Rest);
    let main = Location::main();
    match term {
        Term::Nil => Ok(node(Rule::Nil, vec![])),
        Term::Var(x, r) => {
            let xt = ctx
                .get(x)
                .ok_or_else(|| TypeError::UnboundVariable(x.clone()))?;
            let (rule, inputs) = match xt {
                Type::Arrow(xa) => (
                    Rule::Var,
                    consume(&arrow.inputs, xa).ok_or_else(|| invalid(term, "inputs"))?,
                ),
                Type::Base(_) => (Rule::Atom, push_input(&arrow.inputs, &main, xt.clone())),
            };
            let p = reconstruct_run(
                s,
                ctx,
                r,
                &rest_path,
                &Type::arrow(inputs, arrow.outputs.clone()),
            )?;
            Ok(node(rule, vec![p]))
        }
        Term::Pop(l, x, r) => {
            let v = arrow.inputs.slice(l);
            let (head, tail) = v
                .items()
                .split_first()
                .ok_or_else(|| invalid(term, "no input to pop"))?;
            let mut inputs = arrow.inputs.clone();
            inputs.set(l.clone(), TypeVector::new(tail.to_vec()));
            let p = reconstruct_run(
                s,
                &ctx.extend(x.clone(), head.clone()),
                r,
                &rest_path,
                &Type::arrow(inputs, arrow.outputs.clone()),
            )?;
            Ok(node(Rule::Abs, vec![p]))
        }
        Term::Push(n, l, r) => {
            let vt = value_type(s, path, term)?;
            let pn = reconstruct_value(s, ctx, n, &child(path, Step::Arg), &vt)?;
            let inputs = push_input(&arrow.inputs, l, vt);
            let pm = reconstruct_run(
                s,
                ctx,
                r,
                &rest_path,
                &Type::arrow(inputs, arrow.outputs.clone()),
            )?;
            Ok(node(Rule::App, vec![pn, pm]))
        }
        Term::Force(v, r) => {
            let vt = value_type(s, path, term)?;
            let pv = reconstruct_value(s, ctx, v, &child(path, Step::Value), &vt)?;
            let va = vt
                .as_arrow()
                .ok_or_else(|| invalid(term, "forced value of base type"))?;
            let inputs = consume(&arrow.inputs, va).ok_or_else(|| invalid(term, "inputs"))?;
            let pm = reconstruct_run(
                s,
                ctx,
                r,
                &rest_path,
                &Type::arrow(inputs, arrow.outputs.clone()),
            )?;
            Ok(node(Rule::Force, vec![pv, pm]))
        }
        Term::Thunk(..) => Err(invalid(term, "a thunk cannot run in head position")),
        Term::Const(c, r) => {
            let (rule, inputs) = match c {
                Constant::Int(_) => (
                    Rule::Literal,
                    push_input(&arrow.inputs, &main, Type::base("Z")),
                ),
                Constant::Bool(_) => (
                    Rule::Literal,
                    push_input(&arrow.inputs, &main, Type::base("B")),
                ),
                Constant::Prim(p) => {
                    let pa = prim_type(*p, &arrow.inputs.slice(&main))
                        .ok_or_else(|| invalid(term, "operands"))?;
                    let pa = pa.as_arrow().expect("prim types are arrows").clone();
                    (
                        Rule::Prim,
                        consume(&arrow.inputs, &pa).ok_or_else(|| invalid(term, "operands"))?,
                    )
                }
            };
            let p = reconstruct_run(
                s,
                ctx,
                r,
                &rest_path,
                &Type::arrow(inputs, arrow.outputs.clone()),
            )?;
            Ok(node(rule, vec![p]))
        }
    }
}

/// The type of a primitive, instantiated against the operands on the main
/// stack where it is polymorphic.
pub fn prim_type(p: Prim, main_inputs: &TypeVector) -> Option<Type> {
    let z = Type::base("Z");
    let b = Type::base("B");
    Some(match p {
        Prim::Add | Prim::Sub | Prim::Mul => Type::seq(vec![z.clone(), z.clone()], vec![z]),
        Prim::Eq => Type::seq(vec![z.clone(), z], vec![b]),
        Prim::If => {
            let t = main_inputs.items().get(1)?.clone();
            Type::seq(vec![b, t.clone(), t.clone()], vec![t])
        }
    })
}

/// `?r ?t` minus the arrow's inputs `?r`, plus its outputs reversed: the
/// inputs left for the continuation under the variable rule.
fn consume(inputs: &VectorFamily, a: &super::ty::Arrow) -> Option<VectorFamily> {
    let mut out = inputs.clone();
    for (l, r) in a.inputs.iter() {
        let have = inputs.slice(l);
        if have.len() < r.len() || have.items()[..r.len()] != *r.items() {
            return None;
        }
        out.set(l.clone(), TypeVector::new(have.items()[r.len()..].to_vec()));
    }
    for (l, s) in a.outputs.iter() {
        out.set(l.clone(), s.reversed().concat(&out.slice(l)));
    }
    Some(out)
}

fn push_input(inputs: &VectorFamily, l: &Location, t: Type) -> VectorFamily {
    let mut out = inputs.clone();
    out.set(l.clone(), TypeVector::new(vec![t]).concat(&inputs.slice(l)));
    out
}

/// Check a derivation against the rules, independently of how it was found.
pub fn validate(d: &Derivation) -> Result<(), TypeError> {
    let bad = |m: &str| Err(invalid(&d.term, format!("{}: {m}", d.rule.name())));
    let premise_is = |i: usize, term: &Term, ctx: &TypingContext| {
        d.premises
            .get(i)
            .is_some_and(|p| &p.term == term && &p.context == ctx)
    };
    match (d.rule, &d.term) {
        (Rule::BaseValue, t) => {
            let Type::Base(b) = &d.ty else {
                return bad("not a base type");
            };
            let ok = match t {
                Term::Const(Constant::Int(_), r) => r.is_nil() && &**b == "Z",
                Term::Const(Constant::Bool(_), r) => r.is_nil() && &**b == "B",
                Term::Var(x, r) => r.is_nil() && d.context.get(x) == Some(&d.ty),
                _ => false,
            };
            if !ok || !d.premises.is_empty() {
                return bad("not a value of this base type");
            }
        }
        (Rule::Thunk, Term::Thunk(body, r)) => {
            if !r.is_nil()
                || d.premises.len() != 1
                || !premise_is(0, body, &d.context)
                || d.premises[0].ty != d.ty
            {
                return bad("premise must type the body at the same type");
            }
        }
        (rule, term) => {
            let Some(a) = d.ty.as_arrow() else {
                return bad("expected an arrow type");
            };
            let main = Location::main();
            let expect = |i: usize, t: &Term, ctx: &TypingContext, inputs: &VectorFamily| -> bool {
                premise_is(i, t, ctx)
                    && d.premises[i]
                        .ty
                        .as_arrow()
                        .is_some_and(|p| &p.inputs == inputs && p.outputs == a.outputs)
            };
            let ok = match (rule, term) {
                (Rule::Nil, Term::Nil) => a.inputs.reversed() == a.outputs && d.premises.is_empty(),
                (Rule::Var, Term::Var(x, r)) => match d.context.get(x).and_then(Type::as_arrow) {
                    Some(xa) => {
                        consume(&a.inputs, xa).is_some_and(|i| expect(0, r, &d.context, &i))
                    }
                    None => false,
                },
                (Rule::Atom, Term::Var(x, r)) => match d.context.get(x) {
                    Some(t @ Type::Base(_)) => {
                        expect(0, r, &d.context, &push_input(&a.inputs, &main, t.clone()))
                    }
                    _ => false,
                },
                (Rule::Abs, Term::Pop(l, x, r)) => {
                    let v = a.inputs.slice(l);
                    match v.items().split_first() {
                        Some((h, tail)) => {
                            let mut i = a.inputs.clone();
                            i.set(l.clone(), TypeVector::new(tail.to_vec()));
                            expect(0, r, &d.context.extend(x.clone(), h.clone()), &i)
                        }
                        None => false,
                    }
                }
                (Rule::App, Term::Push(n, l, r)) => {
                    d.premises.len() == 2
                        && premise_is(0, n, &d.context)
                        && expect(
                            1,
                            r,
                            &d.context,
                            &push_input(&a.inputs, l, d.premises[0].ty.clone()),
                        )
                }
                (Rule::Force, Term::Force(v, r)) => {
                    d.premises.len() == 2
                        && premise_is(0, v, &d.context)
                        && match d.premises[0]
                            .ty
                            .as_arrow()
                            .and_then(|va| consume(&a.inputs, va))
                        {
                            Some(i) => expect(1, r, &d.context, &i),
                            None => false,
                        }
                }
                (Rule::Literal, Term::Const(c, r)) => {
                    let t = match c {
                        Constant::Int(_) => Type::base("Z"),
                        Constant::Bool(_) => Type::base("B"),
                        Constant::Prim(_) => return bad("an operator is not a literal"),
                    };
                    expect(0, r, &d.context, &push_input(&a.inputs, &main, t))
                }
                (Rule::Prim, Term::Const(Constant::Prim(p), r)) => {
                    match prim_type(*p, &a.inputs.slice(&main))
                        .as_ref()
                        .and_then(Type::as_arrow)
                    {
                        Some(pa) => {
                            consume(&a.inputs, pa).is_some_and(|i| expect(0, r, &d.context, &i))
                        }
                        None => false,
                    }
                }
                _ => false,
            };
            if !ok {
                return bad("premises do not follow from the conclusion");
            }
        }
    }
    d.premises.iter().try_for_each(validate)
}

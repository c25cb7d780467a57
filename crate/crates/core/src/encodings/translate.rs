use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::source::SourceTerm;
use crate::enumerate::binder;
use crate::syntax::{compose, fresh_name, Constant, Features, Location, Name, Term};

/// The source calculi with an encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// call-by-name λ-calculus with effects, pairs and the metalanguage
    Cbn,
    /// computational λ-calculus with effects, call-by-value
    Cbv,
    Cbpv,
    Arrow,
    Kappa,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Cbn, Mode::Cbv, Mode::Cbpv, Mode::Arrow, Mode::Kappa];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Cbn => "cbn",
            Mode::Cbv => "cbv",
            Mode::Cbpv => "cbpv",
            Mode::Arrow => "arrow",
            Mode::Kappa => "kappa",
        }
    }

    /// Whether encoded terms use thunks and force.
    pub fn needs_thunks(self) -> bool {
        matches!(self, Mode::Cbpv | Mode::Kappa)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("{construct} is not part of the {mode} source language")]
    Foreign { mode: Mode, construct: &'static str },
    #[error("the {mode} encoding needs the `thunks` feature")]
    ThunksDisabled { mode: Mode },
}

fn foreign(mode: Mode, t: &SourceTerm) -> EncodeError {
    EncodeError::Foreign {
        mode,
        construct: t.construct(),
    }
}

/// Fresh binder supply: the first of `x y z u v w ...` not named in the
/// source term. One name serves every generated binder, since generated
/// binders never scope over each other's bodies' free variables.
struct Names {
    x: Name,
    taken: BTreeSet<Name>,
}

impl Names {
    fn for_term(m: &SourceTerm) -> Self {
        let taken = m.names();
        let x = (0..)
            .map(binder)
            .find(|n| !taken.contains(n))
            .expect("unbounded supply");
        Names { x, taken }
    }

    /// A fresh name based on `stem`.
    fn named(&self, stem: &str) -> Name {
        let n = Name::new(stem);
        if self.taken.contains(&n) {
            fresh_name(&n, |c| self.taken.contains(c))
        } else {
            n
        }
    }
}

fn main() -> Location {
    Location::main()
}

fn int(n: i64) -> Term {
    Term::constant(Constant::Int(n), Term::Nil)
}

fn out() -> Location {
    Location::new("out")
}

/// Call-by-name encoding of the λ-calculus with effects, pairs and the
/// monadic metalanguage.
pub fn encode_cbn(m: &SourceTerm) -> Result<Term, EncodeError> {
    let names = Names::for_term(m);
    cbn(m, &names)
}

fn cbn(m: &SourceTerm, n: &Names) -> Result<Term, EncodeError> {
    use SourceTerm as S;
    let x = || n.x.clone();
    Ok(match m {
        S::Var(v) => Term::atom(v.clone()),
        S::Lam(v, body) => Term::pop(main(), v.clone(), cbn(body, n)?),
        S::App(f, a) => Term::push(cbn(a, n)?, main(), cbn(f, n)?),
        S::Int(i) => int(*i),
        S::Read => Term::pop("in", x(), Term::atom(x())),
        S::Write(v, k) => Term::push(cbn(v, n)?, out(), cbn(k, n)?),
        S::Assign(c, v, k) => Term::pop(
            c.clone(),
            Name::wildcard(),
            Term::push(cbn(v, n)?, c.clone(), cbn(k, n)?),
        ),
        S::Lookup(c) => Term::pop(
            c.clone(),
            x(),
            Term::push(Term::atom(x()), c.clone(), Term::atom(x())),
        ),
        S::Prob(l, r) => choice("rnd", cbn(l, n)?, cbn(r, n)?, x()),
        S::Nondet(l, r) => choice("nd", cbn(l, n)?, cbn(r, n)?, x()),
        S::Pair(a, b) => Term::push(
            cbn(b, n)?,
            main(),
            Term::push(cbn(a, n)?, main(), Term::Nil),
        ),
        S::Proj(i, p) => {
            let (x1, x2) = (n.named("x1"), n.named("x2"));
            let pick = if *i == 1 { x1.clone() } else { x2.clone() };
            compose(
                &cbn(p, n)?,
                &Term::pop(main(), x1, Term::pop(main(), x2, Term::atom(pick))),
            )
        }
        S::Unit => Term::Nil,
        S::Return(v) => Term::push(cbn(v, n)?, main(), Term::Nil),
        S::Let(v, a, b) => compose(&cbn(a, n)?, &Term::pop(main(), v.clone(), cbn(b, n)?)),
        _ => return Err(foreign(Mode::Cbn, m)),
    })
}

/// `N (+) M` as `loc<x>.[N].[M].x`: the chooser `x` receives `M` on top, so
/// the first Church boolean selects the right summand.
fn choice(loc: &str, left: Term, right: Term, x: Name) -> Term {
    Term::pop(
        loc,
        x.clone(),
        Term::push(left, main(), Term::push(right, main(), Term::atom(x))),
    )
}

/// Call-by-value encoding of the computational λ-calculus with effects.
/// Every encoded computation returns its value on the main stack.
pub fn encode_cbv(m: &SourceTerm) -> Result<Term, EncodeError> {
    let names = Names::for_term(m);
    cbv(m, &names)
}

fn ret(v: Term) -> Term {
    Term::push(v, main(), Term::Nil)
}

fn cbv(m: &SourceTerm, n: &Names) -> Result<Term, EncodeError> {
    use SourceTerm as S;
    let x = || n.x.clone();
    Ok(match m {
        S::Var(v) => ret(Term::atom(v.clone())),
        S::Lam(v, body) => ret(Term::pop(main(), v.clone(), cbv(body, n)?)),
        // argument first, then the function, then apply
        S::App(f, a) => compose(
            &compose(&cbv(a, n)?, &cbv(f, n)?),
            &Term::pop(main(), x(), Term::atom(x())),
        ),
        S::Int(i) => ret(int(*i)),
        S::Unit => ret(Term::Nil),
        S::Read => Term::pop("in", x(), ret(Term::atom(x()))),
        S::Write(v, k) => compose(
            &cbv(v, n)?,
            &Term::pop(main(), x(), Term::push(Term::atom(x()), out(), cbv(k, n)?)),
        ),
        S::Assign(c, v, k) => compose(
            &cbv(v, n)?,
            &Term::pop(
                main(),
                x(),
                Term::pop(
                    c.clone(),
                    Name::wildcard(),
                    Term::push(Term::atom(x()), c.clone(), cbv(k, n)?),
                ),
            ),
        ),
        S::Lookup(c) => Term::pop(
            c.clone(),
            x(),
            Term::push(Term::atom(x()), c.clone(), ret(Term::atom(x()))),
        ),
        // `rnd<x>.[M].[N].x` for `N (+) M`: here the first boolean selects N
        S::Prob(l, r) => choice("rnd", cbv(r, n)?, cbv(l, n)?, x()),
        S::Nondet(l, r) => choice("nd", cbv(r, n)?, cbv(l, n)?, x()),
        S::Return(v) => ret(cbv(v, n)?),
        S::Let(v, a, b) => compose(&cbv(a, n)?, &Term::pop(main(), v.clone(), cbv(b, n)?)),
        _ => return Err(foreign(Mode::Cbv, m)),
    })
}

/// Call-by-push-value, with `thunk` and `force` as FMC thunks.
pub fn encode_cbpv(m: &SourceTerm) -> Result<Term, EncodeError> {
    use SourceTerm as S;
    Ok(match m {
        S::Var(v) => Term::atom(v.clone()),
        S::Int(i) => int(*i),
        S::Thunk(c) => Term::thunk(encode_cbpv(c)?, Term::Nil),
        S::Force(v) => Term::force(encode_cbpv(v)?, Term::Nil),
        S::Return(v) => ret(encode_cbpv(v)?),
        S::To(a, v, b) => compose(
            &encode_cbpv(a)?,
            &Term::pop(main(), v.clone(), encode_cbpv(b)?),
        ),
        S::Lam(v, body) => Term::pop(main(), v.clone(), encode_cbpv(body)?),
        // `V'M`, written `M V` in the surface syntax
        S::App(f, a) => Term::push(encode_cbpv(a)?, main(), encode_cbpv(f)?),
        _ => return Err(foreign(Mode::Cbpv, m)),
    })
}

/// Arrow combinators over call-by-name λ-terms.
pub fn encode_arrow(m: &SourceTerm) -> Result<Term, EncodeError> {
    let names = Names::for_term(m);
    arrow(m, &names)
}

fn arrow(m: &SourceTerm, n: &Names) -> Result<Term, EncodeError> {
    use SourceTerm as S;
    let x = || n.x.clone();
    Ok(match m {
        S::Arr(f) => {
            let f = cbn(f, n).map_err(|_| foreign(Mode::Arrow, f))?;
            Term::pop(main(), x(), ret(Term::push(Term::atom(x()), main(), f)))
        }
        S::Then(p, q) => compose(&arrow(p, n)?, &arrow(q, n)?),
        S::First(p) => Term::pop(main(), x(), ret(Term::var(x(), arrow(p, n)?))),
        _ => return Err(foreign(Mode::Arrow, m)),
    })
}

/// The higher-order κ-calculus, with composition as a primitive.
pub fn encode_kappa(m: &SourceTerm) -> Result<Term, EncodeError> {
    let names = Names::for_term(m);
    kappa(m, &names)
}

fn kappa(m: &SourceTerm, n: &Names) -> Result<Term, EncodeError> {
    use SourceTerm as S;
    let x = || n.x.clone();
    Ok(match m {
        S::Var(v) => Term::atom(v.clone()),
        S::Int(i) => int(*i),
        S::Push(v) => ret(kappa(v, n)?),
        S::Kappa(v, body) => Term::pop(main(), v.clone(), kappa(body, n)?),
        S::MkThunk(body) => Term::thunk(kappa(body, n)?, Term::Nil),
        S::Apply => Term::pop(main(), x(), Term::force(Term::atom(x()), Term::Nil)),
        S::Seq(a, b) => compose(&kappa(a, n)?, &kappa(b, n)?),
        _ => return Err(foreign(Mode::Kappa, m)),
    })
}

/// Encode under `mode`, refusing thunk-based encodings unless enabled.
pub fn encode(mode: Mode, m: &SourceTerm, features: Features) -> Result<Term, EncodeError> {
    if mode.needs_thunks() && !features.thunks {
        return Err(EncodeError::ThunksDisabled { mode });
    }
    match mode {
        Mode::Cbn => encode_cbn(m),
        Mode::Cbv => encode_cbv(m),
        Mode::Cbpv => encode_cbpv(m),
        Mode::Arrow => encode_arrow(m),
        Mode::Kappa => encode_kappa(m),
    }
}

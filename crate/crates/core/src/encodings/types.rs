use std::fmt;

use thiserror::Error;

use super::translate::Mode;
use crate::types::{Type, TypeVector, VectorFamily};

/// Types of the source calculi.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SourceType {
    /// the base type `o`
    O,
    /// a named base type such as `Z`
    Base(String),
    /// `σ -> τ`
    Fun(Box<SourceType>, Box<SourceType>),
    /// `σ * τ`
    Prod(Box<SourceType>, Box<SourceType>),
    /// `1`
    Unit,
    /// `T σ`
    T(Box<SourceType>),
    /// `F σ`
    F(Box<SourceType>),
    /// `U σ`
    U(Box<SourceType>),
    /// `σ ~> τ`
    Arrow(Box<SourceType>, Box<SourceType>),
}

impl SourceType {
    pub fn base(name: &str) -> Self {
        SourceType::Base(name.to_string())
    }

    pub fn fun(a: SourceType, b: SourceType) -> Self {
        SourceType::Fun(Box::new(a), Box::new(b))
    }

    pub fn prod(a: SourceType, b: SourceType) -> Self {
        SourceType::Prod(Box::new(a), Box::new(b))
    }

    pub fn t(a: SourceType) -> Self {
        SourceType::T(Box::new(a))
    }

    fn construct(&self) -> &'static str {
        match self {
            SourceType::O => "o",
            SourceType::Base(_) => "base type",
            SourceType::Fun(..) => "function type",
            SourceType::Prod(..) => "product type",
            SourceType::Unit => "unit type",
            SourceType::T(_) => "monadic type",
            SourceType::F(_) => "F",
            SourceType::U(_) => "U",
            SourceType::Arrow(..) => "arrow type",
        }
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(f: &mut fmt::Formatter<'_>, t: &SourceType) -> fmt::Result {
            match t {
                SourceType::O | SourceType::Base(_) | SourceType::Unit => write!(f, "{t}"),
                _ => write!(f, "({t})"),
            }
        }
        match self {
            SourceType::O => f.write_str("o"),
            SourceType::Base(b) => f.write_str(b),
            SourceType::Unit => f.write_str("1"),
            SourceType::Fun(a, b) | SourceType::Arrow(a, b) => {
                let op = if matches!(self, SourceType::Fun(..)) {
                    "->"
                } else {
                    "~>"
                };
                match **a {
                    SourceType::Fun(..) | SourceType::Arrow(..) => write!(f, "({a}) {op} {b}"),
                    _ => write!(f, "{a} {op} {b}"),
                }
            }
            SourceType::Prod(a, b) => {
                atom(f, a)?;
                f.write_str(" * ")?;
                atom(f, b)
            }
            SourceType::T(a) | SourceType::F(a) | SourceType::U(a) => {
                let k = match self {
                    SourceType::T(_) => "T",
                    SourceType::F(_) => "F",
                    _ => "U",
                };
                write!(f, "{k} ")?;
                atom(f, a)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SourceTypeError {
    #[error("source type syntax error at column {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("{construct} has no {mode} encoding")]
    Foreign { mode: Mode, construct: &'static str },
}

/// Parse `o`, base names, `1`, `T s`, `F s`, `U s`, `s * t`, `s -> t` and
/// `s ~> t`. Arrows associate to the right and bind loosest.
pub fn parse_source_type(text: &str) -> Result<SourceType, SourceTypeError> {
    let toks = lex(text)?;
    let mut p = TyParser { toks, pos: 0 };
    let t = p.arrow()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

fn lex(text: &str) -> Result<Vec<(String, usize)>, SourceTypeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let s = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push((chars[s..i].iter().collect(), s));
        } else if (c == '-' || c == '~') && chars.get(i + 1) == Some(&'>') {
            out.push((chars[i..i + 2].iter().collect(), i));
            i += 2;
        } else if "()*".contains(c) {
            out.push((c.to_string(), i));
            i += 1;
        } else {
            return Err(SourceTypeError::Syntax {
                col: i + 1,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct TyParser {
    toks: Vec<(String, usize)>,
    pos: usize,
}

impl TyParser {
    fn error(&self, message: &str) -> SourceTypeError {
        let col = self
            .toks
            .get(self.pos)
            .map_or_else(|| self.toks.last().map_or(0, |t| t.1 + 1), |t| t.1);
        SourceTypeError::Syntax {
            col: col + 1,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.0.as_str())
    }

    fn arrow(&mut self) -> Result<SourceType, SourceTypeError> {
        let a = self.prod()?;
        match self.peek() {
            Some("->") => {
                self.pos += 1;
                Ok(SourceType::Fun(Box::new(a), Box::new(self.arrow()?)))
            }
            Some("~>") => {
                self.pos += 1;
                Ok(SourceType::Arrow(Box::new(a), Box::new(self.arrow()?)))
            }
            _ => Ok(a),
        }
    }

    fn prod(&mut self) -> Result<SourceType, SourceTypeError> {
        let mut a = self.app()?;
        while self.peek() == Some("*") {
            self.pos += 1;
            a = SourceType::Prod(Box::new(a), Box::new(self.app()?));
        }
        Ok(a)
    }

    fn app(&mut self) -> Result<SourceType, SourceTypeError> {
        let ctor: Option<fn(Box<SourceType>) -> SourceType> = match self.peek() {
            Some("T") => Some(SourceType::T),
            Some("F") => Some(SourceType::F),
            Some("U") => Some(SourceType::U),
            _ => None,
        };
        if let Some(ctor) = ctor {
            self.pos += 1;
            return Ok(ctor(Box::new(self.app()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<SourceType, SourceTypeError> {
        let t = match self.peek() {
            Some("(") => {
                self.pos += 1;
                let t = self.arrow()?;
                if self.peek() != Some(")") {
                    return Err(self.error("expected `)`"));
                }
                t
            }
            Some("o") => SourceType::O,
            Some("1") => SourceType::Unit,
            Some(b) if b.chars().all(char::is_alphanumeric) => SourceType::Base(b.to_string()),
            _ => return Err(self.error("expected a type")),
        };
        self.pos += 1;
        Ok(t)
    }
}

fn outputs(ts: Vec<Type>) -> Type {
    Type::seq(vec![], ts)
}

/// Prepend an input at the main location: `ρ ⊃ (s > t)` is `r s > t`. A base
/// result `b` is first read as the computation `> b`.
fn prepend(input: Type, result: Type) -> Type {
    let result = as_computation(result);
    let a = result.as_arrow().expect("computations are arrows");
    let mut inputs = vec![input];
    inputs.extend(
        a.inputs
            .slice(&crate::syntax::Location::main())
            .items()
            .iter()
            .cloned(),
    );
    let mut family = a.inputs.clone();
    family.set(crate::syntax::Location::main(), TypeVector::new(inputs));
    Type::arrow(family, a.outputs.clone())
}

/// The type a term of the given encoded type is checked at: base types are
/// carried by literals and variables in head position, which push them.
pub fn as_computation(t: Type) -> Type {
    match t {
        Type::Base(_) => outputs(vec![t]),
        t => t,
    }
}

/// Translate a source type into an FMC type under `mode`.
///
/// Call-by-name: `o` and `1` are `(>)`, `σ -> τ` prepends `σ` to the inputs
/// of `τ`, `σ * τ` is `> τ σ`, `T σ` is `> σ` and `σ ~> τ` is `σ > τ`.
/// Call-by-value: `σ -> τ` is `σ > τ` with `τ` the returned value's type and
/// `T σ` is `> σ`. Call-by-push-value: `F σ` is `> σ`, `U` is transparent and
/// `σ -> τ` prepends as under call-by-name. Base types map to themselves.
pub fn encode_types(t: &SourceType, mode: Mode) -> Result<Type, SourceTypeError> {
    use SourceType as S;
    let foreign = || SourceTypeError::Foreign {
        mode,
        construct: t.construct(),
    };
    let rec = |u: &SourceType| encode_types(u, mode);
    Ok(match (mode, t) {
        (_, S::O) | (Mode::Cbn | Mode::Cbv, S::Unit) => Type::unit(),
        (_, S::Base(b)) => Type::base(b),
        (Mode::Cbn | Mode::Cbpv, S::Fun(a, b)) => prepend(rec(a)?, rec(b)?),
        (Mode::Cbv, S::Fun(a, b)) => Type::arrow(
            VectorFamily::main(TypeVector::new(vec![rec(a)?])),
            VectorFamily::main(TypeVector::new(vec![rec(b)?])),
        ),
        (Mode::Cbn, S::Prod(a, b)) => outputs(vec![rec(b)?, rec(a)?]),
        (Mode::Cbn | Mode::Cbv, S::T(a)) | (Mode::Cbpv, S::F(a)) => outputs(vec![rec(a)?]),
        (Mode::Cbpv, S::U(a)) => rec(a)?,
        (Mode::Cbn | Mode::Arrow, S::Arrow(a, b)) => {
            let a = encode_types(a, Mode::Cbn)?;
            let b = encode_types(b, Mode::Cbn)?;
            Type::seq(vec![a], vec![b])
        }
        (Mode::Arrow, _) => encode_types(t, Mode::Cbn)?,
        _ => return Err(foreign()),
    })
}

/// The FMC type at which a call-by-value computation of source type `t`
/// checks: it returns one value of type `t`.
pub fn cbv_computation_type(t: &SourceType) -> Result<Type, SourceTypeError> {
    Ok(outputs(vec![encode_types(t, Mode::Cbv)?]))
}

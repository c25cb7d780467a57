use crate::syntax::{parse_with, Features, Location, Name, ParseError, ParseOptions, Term};

/// The input/output and state operations of the programming sugar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sugar {
    Print,
    Read,
    Rand,
    Get(Location),
    Set(Location),
}

impl Sugar {
    /// The FMC term the operation abbreviates.
    pub fn expand(&self) -> Term {
        self.expand_with(&Name::new("x"))
    }

    /// As [`Sugar::expand`], binding `x` instead of the default name.
    pub fn expand_with(&self, x: &Name) -> Term {
        let x = || x.clone();
        let main = Location::main;
        match self {
            Sugar::Print => Term::pop(main(), x(), Term::push(Term::atom(x()), "out", Term::Nil)),
            Sugar::Read => Term::pop("in", x(), Term::push(Term::atom(x()), main(), Term::Nil)),
            Sugar::Rand => Term::pop("rnd", x(), Term::push(Term::atom(x()), main(), Term::Nil)),
            Sugar::Get(c) => Term::pop(
                c.clone(),
                x(),
                Term::push(
                    Term::atom(x()),
                    c.clone(),
                    Term::push(Term::atom(x()), main(), Term::Nil),
                ),
            ),
            Sugar::Set(c) => Term::pop(
                main(),
                x(),
                Term::pop(
                    c.clone(),
                    Name::wildcard(),
                    Term::push(Term::atom(x()), c.clone(), Term::Nil),
                ),
            ),
        }
    }
}

/// Parse a program written with the sugar and return the plain FMC term.
pub fn desugar(text: &str, features: Features) -> Result<Term, ParseError> {
    parse_with(text, ParseOptions::new(features).with_sugar())
}

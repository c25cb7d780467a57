use thiserror::Error;

use super::ty::{Type, TypeVector, VectorFamily};
use crate::syntax::Location;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("type syntax error at column {col}: {message}")]
pub struct TypeParseError {
    pub col: usize,
    pub message: String,
}

/// Parse a type such as `rnd(Z Z) c(Z) > c(Z) out(Z)`.
///
/// Main-location vectors are written bare. An identifier glued to `(` names a
/// location; any other identifier is a base type, except `o`, which stands
/// for the empty type `(>)`. A lone base name parses as that base type.
pub fn parse_type(text: &str) -> Result<Type, TypeParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let t = p.ty(true)?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

/// Parse a bare type vector such as `Z (>) Z`.
pub fn parse_vector(text: &str) -> Result<TypeVector, TypeParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let v = p.vector()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

impl Parser {
    fn error(&self, message: &str) -> TypeParseError {
        TypeParseError {
            col: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && ident_char(self.chars[self.pos]) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn expect(&mut self, c: char) -> Result<(), TypeParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ty(&mut self, top: bool) -> Result<Type, TypeParseError> {
        let start = self.pos;
        let inputs = self.family()?;
        if self.peek() == Some('>') {
            self.pos += 1;
            let outputs = self.family()?;
            return Ok(Type::arrow(inputs, outputs));
        }
        // A single base name without an arrow.
        self.pos = start;
        match self.atom()? {
            Some(t) => {
                if self.peek().is_some_and(|c| c != ')') {
                    return Err(self.error("expected `>`"));
                }
                Ok(t)
            }
            None => Err(self.error(if top {
                "expected a type"
            } else {
                "expected `>`"
            })),
        }
    }

    fn family(&mut self) -> Result<VectorFamily, TypeParseError> {
        let mut items: Vec<(Location, TypeVector)> = Vec::new();
        loop {
            match self.peek() {
                Some(c) if ident_char(c) || c == '~' || c == 'λ' => {
                    let save = self.pos;
                    let name = if c == '~' {
                        self.pos += 1;
                        "~".to_string()
                    } else {
                        self.ident().expect("peeked an identifier char")
                    };
                    if self.chars.get(self.pos) == Some(&'(') {
                        self.pos += 1;
                        let v = self.vector()?;
                        self.expect(')')?;
                        items.push((Location::new(&name), v));
                    } else if name == "~" {
                        return Err(self.error("expected `(` after `~`"));
                    } else {
                        self.pos = save;
                        let t = self.atom()?.expect("identifier atom");
                        items.push((Location::main(), TypeVector::new(vec![t])));
                    }
                }
                Some('(') => {
                    let t = self.atom()?.expect("parenthesised atom");
                    items.push((Location::main(), TypeVector::new(vec![t])));
                }
                _ => break,
            }
        }
        Ok(items.into_iter().collect())
    }

    fn vector(&mut self) -> Result<TypeVector, TypeParseError> {
        let mut out = Vec::new();
        while let Some(t) = self.atom()? {
            out.push(t);
        }
        Ok(TypeVector::new(out))
    }

    fn atom(&mut self) -> Result<Option<Type>, TypeParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let t = self.ty(false)?;
                self.expect(')')?;
                Ok(Some(t))
            }
            Some(c) if ident_char(c) => {
                let save = self.pos;
                let name = self.ident().expect("identifier");
                if self.chars.get(self.pos) == Some(&'(') {
                    // a location slice, not an atom
                    self.pos = save;
                    return Ok(None);
                }
                Ok(Some(if name == "o" {
                    Type::unit()
                } else {
                    Type::base(&name)
                }))
            }
            _ => Ok(None),
        }
    }
}

impl std::str::FromStr for Type {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_type(s)
    }
}

use thiserror::Error;

use super::subst::compose;
use super::term::{Constant, Location, Name, Prim, Term};
use crate::encodings::sugar::Sugar;

/// Optional extensions of the core grammar.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Features {
    /// `!{M}` thunks and `?V` force
    pub thunks: bool,
    /// integer and boolean literals, primitive operators
    pub consts: bool,
}

impl Features {
    pub const CORE: Features = Features {
        thunks: false,
        consts: false,
    };
    pub const ALL: Features = Features {
        thunks: true,
        consts: true,
    };

    pub fn consts() -> Self {
        Features {
            consts: true,
            ..Features::CORE
        }
    }

    pub fn thunks() -> Self {
        Features {
            thunks: true,
            ..Features::CORE
        }
    }

    /// Parse a comma separated list such as `thunks,consts`.
    pub fn from_list(list: &str) -> Result<Self, String> {
        let mut f = Features::CORE;
        for word in list.split(',').map(str::trim).filter(|w| !w.is_empty()) {
            match word {
                "thunks" => f.thunks = true,
                "consts" => f.consts = true,
                other => return Err(format!("unknown feature `{other}`")),
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub features: Features,
    /// recognise `print`, `read`, `rand`, `get c`, `set c` and `(x = N)`
    pub sugar: bool,
}

impl ParseOptions {
    pub fn new(features: Features) -> Self {
        ParseOptions {
            features,
            sugar: false,
        }
    }

    pub fn with_sugar(mut self) -> Self {
        self.sugar = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("`{construct}` at {line}:{col} requires the `{feature}` feature")]
    FeatureDisabled {
        line: usize,
        col: usize,
        construct: String,
        feature: &'static str,
    },
}

/// Parse a term of the core grammar.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<Term, ParseError> {
    let tokens = lex(text)?;
    let used = tokens
        .iter()
        .filter_map(|t| match &t.kind {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser {
        tokens,
        pos: 0,
        options,
        used,
    };
    let term = p.term()?;
    if let Some(tok) = p.peek_tok() {
        return Err(p.error_at(tok, format!("unexpected `{}`", tok.kind)));
    }
    Ok(term)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Main,
    Star,
    Dot,
    Semi,
    LBracket,
    RBracket,
    Lt,
    Gt,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bang,
    Question,
    Equals,
    EqEq,
    Plus,
    Minus,
    Times,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Main => f.write_str("~"),
            Tok::Star => f.write_str("*"),
            Tok::Dot => f.write_str("."),
            Tok::Semi => f.write_str(";"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Lt => f.write_str("<"),
            Tok::Gt => f.write_str(">"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::Bang => f.write_str("!"),
            Tok::Question => f.write_str("?"),
            Tok::Equals => f.write_str("="),
            Tok::EqEq => f.write_str("=="),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Times => f.write_str("×"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let mut advance = 1;
        let kind = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                advance = j - i;
                Tok::Ident(chars[i..j].iter().collect())
            }
            c if c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) =>
            {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                advance = j - i;
                let s: String = chars[i..j].iter().collect();
                let n = s.parse().map_err(|_| ParseError::Syntax {
                    line,
                    col,
                    message: format!("integer literal `{s}` out of range"),
                })?;
                Tok::Int(n)
            }
            '~' | 'λ' => Tok::Main,
            '*' => Tok::Star,
            '.' => Tok::Dot,
            ';' => Tok::Semi,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '!' => Tok::Bang,
            '?' => Tok::Question,
            '=' if chars.get(i + 1) == Some(&'=') => {
                advance = 2;
                Tok::EqEq
            }
            '=' => Tok::Equals,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '×' => Tok::Times,
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token {
            kind,
            line: start.0,
            col: start.1,
        });
        i += advance;
        col += advance;
    }
    Ok(out)
}

/// A chain element before scoping is resolved.
enum Item {
    Nil,
    /// a single action, rebuilt over the continuation
    Action(Term),
    /// a parenthesised group, composed with the continuation
    Group(Term),
    Let(Name, Term),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    options: ParseOptions,
    /// identifiers of the source, avoided by binders that sugar introduces
    used: std::collections::BTreeSet<String>,
}

const SUGAR_BINDERS: [&str; 11] = ["x", "y", "z", "p", "q", "r", "s", "t", "u", "v", "w"];

impl Parser {
    fn sugar_binder(&mut self) -> Name {
        let pick = SUGAR_BINDERS
            .iter()
            .map(|s| s.to_string())
            .find(|s| !self.used.contains(s))
            .unwrap_or_else(|| {
                (0..)
                    .map(|i| format!("x{i}"))
                    .find(|s| !self.used.contains(s))
                    .expect("unbounded")
            });
        self.used.insert(pick.clone());
        Name::new(&pick)
    }

    fn peek_tok(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &Tok) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_at(&self, tok: &Token, message: String) -> ParseError {
        ParseError::Syntax {
            line: tok.line,
            col: tok.col,
            message,
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        match self.peek_tok() {
            Some(t) => self.error_at(t, message.into()),
            None => {
                let (line, col) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.col + t.kind.to_string().chars().count()))
                    .unwrap_or((1, 1));
                ParseError::Syntax {
                    line,
                    col,
                    message: format!("{} at end of input", message.into()),
                }
            }
        }
    }

    fn expect(&mut self, kind: Tok) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{kind}`")))
        }
    }

    fn require(&self, feature: &'static str, construct: &str) -> Result<(), ParseError> {
        let enabled = match feature {
            "thunks" => self.options.features.thunks,
            _ => self.options.features.consts,
        };
        if enabled {
            return Ok(());
        }
        let (line, col) = self.peek_tok().map(|t| (t.line, t.col)).unwrap_or((1, 1));
        Err(ParseError::FeatureDisabled {
            line,
            col,
            construct: construct.to_string(),
            feature,
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let items = self.chain()?;
        let rest = if self.eat(&Tok::Semi) {
            Some(self.term()?)
        } else {
            None
        };
        Ok(build(items, rest))
    }

    fn chain(&mut self) -> Result<Vec<Item>, ParseError> {
        let mut items = vec![self.item()?];
        while self.eat(&Tok::Dot) {
            if matches!(items.last(), Some(Item::Nil)) {
                return Err(self.error_here("`*` must end a sequence"));
            }
            items.push(self.item()?);
        }
        Ok(items)
    }

    fn location_after_push(&mut self) -> Location {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let loc = Location::new(s);
                self.pos += 1;
                loc
            }
            Some(Tok::Main) => {
                self.pos += 1;
                Location::main()
            }
            _ => Location::main(),
        }
    }

    fn binder(&mut self) -> Result<Name, ParseError> {
        match self.bump() {
            Some(Token {
                kind: Tok::Ident(s),
                ..
            }) => Ok(Name::new(&s)),
            Some(t) => Err(self.error_at(&t, format!("expected a binder, found `{}`", t.kind))),
            None => Err(self.error_here("expected a binder")),
        }
    }

    fn pop(&mut self, loc: Location) -> Result<Item, ParseError> {
        self.expect(Tok::Lt)?;
        let x = self.binder()?;
        self.expect(Tok::Gt)?;
        Ok(Item::Action(Term::pop(loc, x, Term::Nil)))
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let Some(tok) = self.peek_tok().cloned() else {
            return Err(self.error_here("expected a term"));
        };
        match &tok.kind {
            Tok::Star => {
                self.pos += 1;
                Ok(Item::Nil)
            }
            Tok::Lt => self.pop(Location::main()),
            Tok::Main => {
                self.pos += 1;
                self.pop(Location::main())
            }
            Tok::LBracket => {
                self.pos += 1;
                let arg = self.term()?;
                self.expect(Tok::RBracket)?;
                let loc = self.location_after_push();
                Ok(Item::Action(Term::push(arg, loc, Term::Nil)))
            }
            Tok::LParen => {
                self.pos += 1;
                if self.options.sugar {
                    if let (Some(Tok::Ident(x)), Some(Tok::Equals)) =
                        (self.peek().cloned(), self.peek2())
                    {
                        self.pos += 2;
                        let value = self.term()?;
                        self.expect(Tok::RParen)?;
                        return Ok(Item::Let(Name::new(&x), value));
                    }
                }
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Group(inner))
            }
            Tok::Bang => {
                self.require("thunks", "!{…}")?;
                self.pos += 1;
                let body = self.braced()?;
                Ok(Item::Action(Term::thunk(body, Term::Nil)))
            }
            Tok::Question => {
                self.require("thunks", "?")?;
                self.pos += 1;
                let value = match self.peek() {
                    Some(Tok::Ident(x)) => {
                        let v = Term::atom(x.as_str());
                        self.pos += 1;
                        v
                    }
                    Some(Tok::Bang) => {
                        self.pos += 1;
                        Term::thunk(self.braced()?, Term::Nil)
                    }
                    Some(Tok::LParen) => {
                        self.pos += 1;
                        let v = self.term()?;
                        self.expect(Tok::RParen)?;
                        v
                    }
                    _ => return Err(self.error_here("expected a value after `?`")),
                };
                Ok(Item::Action(Term::force(value, Term::Nil)))
            }
            Tok::Int(n) => {
                self.require("consts", &n.to_string())?;
                self.pos += 1;
                Ok(Item::Action(Term::constant(Constant::Int(*n), Term::Nil)))
            }
            Tok::Plus | Tok::Minus | Tok::Times | Tok::EqEq => {
                let prim = match tok.kind {
                    Tok::Plus => Prim::Add,
                    Tok::Minus => Prim::Sub,
                    Tok::Times => Prim::Mul,
                    _ => Prim::Eq,
                };
                self.require("consts", prim.symbol())?;
                self.pos += 1;
                Ok(Item::Action(Term::constant(
                    Constant::Prim(prim),
                    Term::Nil,
                )))
            }
            Tok::Ident(name) => {
                if self.peek2() == Some(&Tok::Lt) {
                    self.pos += 1;
                    return self.pop(Location::new(name));
                }
                if self.options.features.consts {
                    let c = match name.as_str() {
                        "true" => Some(Constant::Bool(true)),
                        "false" => Some(Constant::Bool(false)),
                        "if" => Some(Constant::Prim(Prim::If)),
                        "mul" => Some(Constant::Prim(Prim::Mul)),
                        _ => None,
                    };
                    if let Some(c) = c {
                        self.pos += 1;
                        return Ok(Item::Action(Term::constant(c, Term::Nil)));
                    }
                }
                if self.options.sugar {
                    let sugar = match name.as_str() {
                        "print" => Some(Sugar::Print),
                        "read" => Some(Sugar::Read),
                        "rand" => Some(Sugar::Rand),
                        "get" | "set" => {
                            self.pos += 1;
                            let loc = match self.peek() {
                                Some(Tok::Ident(c)) => Location::new(c),
                                Some(Tok::Main) => Location::main(),
                                _ => {
                                    return Err(
                                        self.error_here(format!("`{name}` expects a location"))
                                    )
                                }
                            };
                            Some(if name == "get" {
                                Sugar::Get(loc)
                            } else {
                                Sugar::Set(loc)
                            })
                        }
                        _ => None,
                    };
                    if let Some(s) = sugar {
                        self.pos += 1;
                        let x = self.sugar_binder();
                        return Ok(Item::Group(s.expand_with(&x)));
                    }
                }
                if name == "_" {
                    return Err(self.error_at(&tok, "`_` cannot be used as a variable".into()));
                }
                self.pos += 1;
                Ok(Item::Action(Term::atom(name.as_str())))
            }
            other => Err(self.error_at(&tok, format!("unexpected `{other}`"))),
        }
    }

    fn braced(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::LBrace)?;
        let body = self.term()?;
        self.expect(Tok::RBrace)?;
        Ok(body)
    }
}

/// Resolve scoping: `.` prefixes (binders capture), `;` composes (binders
/// are renamed away), and a definition `(x = N)` scopes over everything to
/// its right.
fn build(items: Vec<Item>, rest: Option<Term>) -> Term {
    if let Some(i) = items.iter().position(|it| matches!(it, Item::Let(..))) {
        let mut items = items;
        let tail: Vec<Item> = items.split_off(i + 1);
        let Some(Item::Let(x, value)) = items.pop() else {
            unreachable!()
        };
        let body = build(tail, rest);
        let core = Term::push(
            value,
            Location::main(),
            Term::pop(Location::main(), x, body),
        );
        return prefix(items, core);
    }
    let chain = prefix(items, Term::Nil);
    match rest {
        Some(r) => compose(&chain, &r),
        None => chain,
    }
}

fn prefix(items: Vec<Item>, tail: Term) -> Term {
    items.into_iter().rev().fold(tail, |acc, item| match item {
        Item::Nil => acc,
        Item::Action(t) => t.with_rest(acc),
        Item::Group(t) => compose(&t, &acc),
        Item::Let(..) => unreachable!("definitions are resolved by build"),
    })
}

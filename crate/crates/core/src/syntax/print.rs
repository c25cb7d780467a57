use std::fmt::{self, Write};

use super::term::Term;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

/// Canonical rendering: main locations are left implicit and the trailing
/// `.*` is dropped.
pub fn print(term: &Term) -> String {
    term.to_string()
}

pub(crate) fn write_term(out: &mut impl Write, term: &Term) -> fmt::Result {
    if term.is_nil() {
        return out.write_char('*');
    }
    let mut t = term;
    let mut first = true;
    while !t.is_nil() {
        if !first {
            out.write_char('.')?;
        }
        first = false;
        write_action(out, t)?;
        t = t.rest().expect("non-nil");
    }
    Ok(())
}

/// Render only the head action of `term`.
pub(crate) fn write_action(out: &mut impl Write, term: &Term) -> fmt::Result {
    match term {
        Term::Nil => out.write_char('*'),
        Term::Var(x, _) => write!(out, "{x}"),
        Term::Push(a, l, _) => {
            out.write_char('[')?;
            write_term(out, a)?;
            write!(out, "]{}", l.surface())
        }
        Term::Pop(l, x, _) => write!(out, "{}<{x}>", l.surface()),
        Term::Thunk(b, _) => {
            out.write_str("!{")?;
            write_term(out, b)?;
            out.write_char('}')
        }
        Term::Force(v, _) => {
            out.write_char('?')?;
            match &**v {
                Term::Var(x, r) if r.is_nil() => write!(out, "{x}"),
                Term::Thunk(b, r) if r.is_nil() => {
                    out.write_str("!{")?;
                    write_term(out, b)?;
                    out.write_char('}')
                }
                other => {
                    out.write_char('(')?;
                    write_term(out, other)?;
                    out.write_char(')')
                }
            }
        }
        Term::Const(c, _) => write!(out, "{c}"),
    }
}

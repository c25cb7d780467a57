use std::collections::BTreeMap;
use std::fmt;

use super::supplier::Supplier;
use crate::syntax::{alpha_eq, Location, Term};

/// A family of stacks indexed by location, top of each stack at the end.
///
/// Locations without an entry are empty stacks. A location may also carry a
/// supplier, consulted only when a pop finds its stack empty.
#[derive(Clone, Debug, Default)]
pub struct Memory {
    stacks: BTreeMap<Location, Vec<Term>>,
    suppliers: BTreeMap<Location, Supplier>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PopError {
    Empty,
    Exhausted,
}

impl Memory {
    pub fn new() -> Self {
        Memory::default()
    }

    /// Build a memory from stacks listed bottom first.
    pub fn from_stacks<L, I>(stacks: I) -> Self
    where
        L: Into<Location>,
        I: IntoIterator<Item = (L, Vec<Term>)>,
    {
        let mut m = Memory::new();
        for (l, items) in stacks {
            m.stacks.insert(l.into(), items);
        }
        m
    }

    pub fn with_supplier(mut self, loc: impl Into<Location>, supplier: Supplier) -> Self {
        self.suppliers.insert(loc.into(), supplier);
        self
    }

    pub fn set_supplier(&mut self, loc: Location, supplier: Supplier) {
        self.suppliers.insert(loc, supplier);
    }

    pub fn push(&mut self, loc: &Location, term: Term) {
        self.stacks.entry(loc.clone()).or_default().push(term);
    }

    pub fn pop(&mut self, loc: &Location) -> Result<Term, PopError> {
        if let Some(t) = self.stacks.get_mut(loc).and_then(Vec::pop) {
            return Ok(t);
        }
        match self.suppliers.get_mut(loc) {
            None => Err(PopError::Empty),
            Some(s) => s.next_value().ok_or(PopError::Exhausted),
        }
    }

    /// The stack at `loc`, bottom first.
    pub fn stack(&self, loc: &Location) -> &[Term] {
        self.stacks.get(loc).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn stack_mut(&mut self, loc: &Location) -> &mut Vec<Term> {
        self.stacks.entry(loc.clone()).or_default()
    }

    /// Locations with a stack entry (possibly empty) or a supplier.
    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        let mut all: Vec<&Location> = self.stacks.keys().chain(self.suppliers.keys()).collect();
        all.sort();
        all.dedup();
        all.into_iter()
    }

    pub fn stacks(&self) -> impl Iterator<Item = (&Location, &[Term])> {
        self.stacks.iter().map(|(l, s)| (l, s.as_slice()))
    }

    pub fn suppliers(&self) -> impl Iterator<Item = (&Location, &Supplier)> {
        self.suppliers.iter()
    }

    /// True if every stack is empty.
    pub fn is_empty(&self) -> bool {
        self.stacks.values().all(Vec::is_empty)
    }

    /// Stack-wise equality up to alpha, treating missing stacks as empty.
    /// Suppliers are ignored.
    pub fn same_stacks(&self, other: &Memory) -> bool {
        let locs: Vec<&Location> = self.stacks.keys().chain(other.stacks.keys()).collect();
        locs.into_iter().all(|l| {
            let (a, b) = (self.stack(l), other.stack(l));
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| alpha_eq(x, y))
        })
    }

    /// Drop empty stack entries.
    pub fn compact(mut self) -> Self {
        self.stacks.retain(|_, s| !s.is_empty());
        self
    }
}

/// Render a stack as in the machine tables: `ε·t1·t2`, top at the right.
pub fn render_stack(stack: &[Term]) -> String {
    let mut s = String::from("ε");
    for t in stack {
        s.push('·');
        let printed = t.to_string();
        if printed.contains('.') {
            s.push('(');
            s.push_str(&printed);
            s.push(')');
        } else {
            s.push_str(&printed);
        }
    }
    s
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, s) in &self.stacks {
            if s.is_empty() {
                continue;
            }
            if !first {
                f.write_str(" ; ")?;
            }
            first = false;
            write!(f, "{l}: {}", render_stack(s))?;
        }
        if first {
            f.write_str("ε")?;
        }
        Ok(())
    }
}

//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod adequacy;
pub mod cbn;
pub mod cbv;
pub mod gen;

use fmc::machine::{church, Memory, Supplier};
use fmc::syntax::{parse_with, Features, Location, ParseOptions, Term};

/// Parse with every extension enabled, panicking on error.
pub fn t(text: &str) -> Term {
    parse_with(text, ParseOptions::new(Features::ALL)).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Parse with the programming sugar.
pub fn sugar(text: &str) -> Term {
    parse_with(text, ParseOptions::new(Features::ALL).with_sugar())
        .unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Effect resources shared by an oracle run and the matching machine run.
#[derive(Clone, Debug)]
pub struct World {
    pub cells: Vec<Location>,
    pub input: Vec<i64>,
    pub rnd: Vec<bool>,
}

impl Default for World {
    fn default() -> Self {
        World {
            cells: vec![Location::new("a")],
            input: vec![5, 6],
            rnd: vec![false, true, false, true],
        }
    }
}

impl World {
    /// Machine memory: every cell holds the dummy `*`, `in` and `rnd` hand
    /// out their lists, `nd` always answers `true`.
    pub fn memory(&self) -> Memory {
        let mut m = Memory::from_stacks(self.cells.iter().map(|c| (c.clone(), vec![Term::Nil])));
        m.set_supplier(
            Location::new("in"),
            Supplier::list(self.input.iter().map(|&i| Term::int(i)).collect()),
        );
        m.set_supplier(
            Location::new("rnd"),
            Supplier::list(self.rnd.iter().map(|&b| church(b)).collect()),
        );
        m.set_supplier(
            Location::new("nd"),
            Supplier::nondet(fmc::machine::ChoicePolicy::Leftmost),
        );
        m
    }
}

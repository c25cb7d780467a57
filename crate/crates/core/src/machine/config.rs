use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use super::memory::Memory;
use super::supplier::{ChoicePolicy, Sample, Supplier};
use crate::syntax::{parse_with, Features, Location, ParseError, ParseOptions, Term};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid memory configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in stack `{location}`: {source}")]
    Term {
        location: String,
        source: ParseError,
    },
    #[error("supplier for `{location}`: {message}")]
    Supplier { location: String, message: String },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Config {
    Full(FullConfig),
    Flat(BTreeMap<String, Vec<String>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FullConfig {
    #[serde(default)]
    stacks: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    suppliers: BTreeMap<String, SupplierSpec>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SupplierSpec {
    List {
        items: Vec<String>,
    },
    Seeded {
        seed: Option<u64>,
        #[serde(default)]
        values: Option<String>,
        max: Option<i64>,
    },
    Nondet {
        #[serde(default)]
        policy: Option<String>,
        seed: Option<u64>,
    },
}

fn parse_terms(
    location: &str,
    items: &[String],
    features: Features,
) -> Result<Vec<Term>, ConfigError> {
    items
        .iter()
        .map(|s| {
            parse_with(s, ParseOptions::new(features)).map_err(|source| ConfigError::Term {
                location: location.to_string(),
                source,
            })
        })
        .collect()
}

/// Read a memory from JSON.
///
/// Accepts `{"stacks": {...}, "suppliers": {...}}` or a bare map of stacks.
/// Stack entries are terms in surface syntax, leftmost at the bottom.
/// Random suppliers without an explicit seed use `default_seed`.
pub fn memory_from_json(
    text: &str,
    features: Features,
    default_seed: u64,
) -> Result<Memory, ConfigError> {
    let config: Config = serde_json::from_str(text)?;
    let (stacks, suppliers) = match config {
        Config::Full(FullConfig { stacks, suppliers }) => (stacks, suppliers),
        Config::Flat(stacks) => (stacks, BTreeMap::new()),
    };
    let mut memory = Memory::new();
    for (loc, items) in &stacks {
        let terms = parse_terms(loc, items, features)?;
        let l = Location::new(loc);
        memory.stack_mut(&l).extend(terms);
    }
    for (loc, spec) in suppliers {
        let bad = |message: String| ConfigError::Supplier {
            location: loc.clone(),
            message,
        };
        let supplier = match spec {
            SupplierSpec::List { items } => Supplier::list(parse_terms(&loc, &items, features)?),
            SupplierSpec::Seeded { seed, values, max } => {
                let sample = match values.as_deref() {
                    None | Some("church") => Sample::Church,
                    Some("int") => Sample::Int {
                        max: max.unwrap_or(9),
                    },
                    Some(other) => return Err(bad(format!("unknown value kind `{other}`"))),
                };
                if max.is_some_and(|m| m < 0) {
                    return Err(bad("`max` must be non-negative".into()));
                }
                Supplier::seeded(seed.unwrap_or(default_seed), sample)
            }
            SupplierSpec::Nondet { policy, seed } => match policy.as_deref() {
                None | Some("leftmost") => Supplier::nondet(ChoicePolicy::Leftmost),
                Some("seeded") => {
                    Supplier::nondet(ChoicePolicy::Seeded(seed.unwrap_or(default_seed)))
                }
                Some(other) => return Err(bad(format!("unknown policy `{other}`"))),
            },
        };
        memory.set_supplier(Location::new(&loc), supplier);
    }
    Ok(memory)
}

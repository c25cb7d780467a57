use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use super::memory::{render_stack, Memory};
use super::run::{Outcome, Trace};
use crate::syntax::Location;

const LEADING: [&str; 4] = ["out", "in", "rnd", "nd"];

/// Column order of machine tables: `out in rnd nd`, then the remaining
/// locations by name, then the main stack.
pub fn column_order(locations: impl IntoIterator<Item = Location>) -> Vec<Location> {
    let set: BTreeSet<Location> = locations.into_iter().collect();
    let mut cols: Vec<Location> = LEADING
        .iter()
        .map(|s| Location::new(s))
        .filter(|l| set.contains(l))
        .collect();
    cols.extend(
        set.iter()
            .filter(|l| !l.is_main() && !LEADING.contains(&l.as_str()))
            .cloned(),
    );
    cols.push(Location::main());
    cols
}

fn trace_columns(trace: &Trace) -> Vec<Location> {
    let mut locs: BTreeSet<Location> = trace.states[0].memory.locations().cloned().collect();
    for s in &trace.states {
        for (l, st) in s.memory.stacks() {
            if !st.is_empty() {
                locs.insert(l.clone());
            }
        }
    }
    column_order(locs)
}

pub fn describe_outcome(trace: &Trace) -> String {
    let n = trace.len();
    let steps = if n == 1 {
        "1 step".to_string()
    } else {
        format!("{n} steps")
    };
    match &trace.outcome {
        Outcome::Halted => match trace.result_value() {
            Some(v) => format!("halted after {steps} with result {v}"),
            None => format!("halted after {steps}"),
        },
        Outcome::Stuck(r) => format!("stuck after {steps}: {r}"),
        Outcome::FuelExhausted => format!("fuel exhausted after {steps}"),
    }
}

/// A machine table: one row per state, each row headed by the transition
/// that produced it, then one column per location, then the term.
pub fn render_table(trace: &Trace) -> String {
    let cols = trace_columns(trace);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(cols.iter().map(|l| l.to_string()));
    header.push("term".into());
    rows.push(header);
    for (i, state) in trace.states.iter().enumerate() {
        let mut row = vec![if i == 0 {
            String::new()
        } else {
            trace.transitions[i - 1].to_string()
        }];
        row.extend(cols.iter().map(|l| render_stack(state.memory.stack(l))));
        row.push(state.term.to_string());
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let last = row.len() - 1;
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == last {
                    cell.clone()
                } else {
                    format!("{cell:<w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

/// The table followed by the outcome and the final memory.
pub fn render_trace(trace: &Trace) -> String {
    let mut out = render_table(trace);
    out.push_str(&describe_outcome(trace));
    out.push('\n');
    out.push_str(&format!("memory: {}\n", trace.final_state().memory));
    out
}

pub fn memory_to_json(memory: &Memory) -> Value {
    let mut map = Map::new();
    for (l, s) in memory.stacks() {
        if !s.is_empty() {
            map.insert(
                l.to_string(),
                json!(s.iter().map(|t| t.to_string()).collect::<Vec<_>>()),
            );
        }
    }
    Value::Object(map)
}

pub fn trace_to_json(trace: &Trace) -> Value {
    let rows: Vec<Value> = trace
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "transition": if i == 0 { Value::Null } else { json!(trace.transitions[i - 1].to_string()) },
                "memory": memory_to_json(&s.memory),
                "term": s.term.to_string(),
            })
        })
        .collect();
    let reason = match &trace.outcome {
        Outcome::Stuck(r) => json!(r.to_string()),
        _ => Value::Null,
    };
    json!({
        "outcome": trace.outcome.label(),
        "reason": reason,
        "steps": trace.len(),
        "result": trace.result_value().map(|v| v.to_string()),
        "rows": rows,
        "final_memory": memory_to_json(&trace.final_state().memory),
    })
}

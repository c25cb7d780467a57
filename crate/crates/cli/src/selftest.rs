//! Quick property checks over small enumerations, one thread per check.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fmc::encodings::{encode_cbn, parse_source};
use fmc::enumerate::{closed_terms, random_term, random_typed_term};
use fmc::machine::{run, Memory};
use fmc::reduction::{
    find_redexes, normalize, one_step_reducts, parallel_diamond_check, spine_diamond_check,
    RedexKind, Strategy,
};
use fmc::syntax::{alpha_eq, parse_with, Features, Location, ParseOptions, Term};
use fmc::types::{check_with, find_type, run_set_member, CheckOptions, TypingContext};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(u64) -> Result<String, String>;

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    let checks: [(&'static str, Check); 5] = [
        ("machine golden", machine_golden),
        ("spine confluence", spine_confluence),
        ("parallel reduction", parallel_reduction),
        ("typed termination", typed_termination),
        ("subject reduction", subject_reduction),
    ];
    std::thread::scope(|s| {
        let handles: Vec<_> = checks
            .iter()
            .map(|(name, f)| (name, s.spawn(move || f(seed))))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                let r = h.join().unwrap_or_else(|_| Err("panicked".into()));
                CheckResult {
                    name,
                    passed: r.is_ok(),
                    detail: r.unwrap_or_else(|e| e),
                }
            })
            .collect()
    })
}

fn locs() -> [Location; 2] {
    [Location::main(), Location::new("a")]
}

fn machine_golden(_: u64) -> Result<String, String> {
    let src = parse_source("a := 2; ((\\x. !a) (a := 3; 0))").map_err(|e| e.to_string())?;
    let m = encode_cbn(&src).map_err(|e| e.to_string())?;
    let trace = run(
        Memory::from_stacks([("a", vec![Term::int(0)])]),
        m.clone(),
        100,
    );
    let result = trace.result_value().map(|v| v.to_string());
    if trace.states.len() != 7 || result.as_deref() != Some("2") {
        return Err(format!("{} states, result {result:?}", trace.states.len()));
    }
    let nf = normalize(&m, Strategy::LeftmostOutermost, 100).term;
    let want = parse_with("a<_>.[2]a.2", ParseOptions::new(Features::consts()))
        .map_err(|e| e.to_string())?;
    if !alpha_eq(&nf, &want) {
        return Err(format!("normal form {nf}"));
    }
    Ok("7 states, result 2, normal form a := 2; 2".into())
}

fn spine_confluence(_: u64) -> Result<String, String> {
    let terms = closed_terms(5, &locs());
    for t in &terms {
        if !spine_diamond_check(t) {
            return Err(format!("spine peak on {t} does not close"));
        }
    }
    Ok(format!("{} closed terms to size 5", terms.len()))
}

fn parallel_reduction(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < 1000 {
        let size = rng.random_range(4..=10);
        let t = random_term(&mut rng, size, 0, &locs());
        let sites: Vec<_> = find_redexes(&t, Strategy::Full)
            .into_iter()
            .filter(|s| s.kind == RedexKind::Beta)
            .collect();
        if sites.is_empty() {
            continue;
        }
        let (mut dot, mut circle) = (BTreeSet::new(), BTreeSet::new());
        for s in sites {
            match rng.random_range(0..3) {
                0 => dot.insert(s.path),
                1 => circle.insert(s.path),
                _ => false,
            };
        }
        match parallel_diamond_check(&t, &dot, &circle) {
            Ok(true) => done += 1,
            Ok(false) => return Err(format!("marked reducts of {t} differ")),
            Err(e) => return Err(format!("{t}: {e}")),
        }
    }
    Ok(format!("{done} marked terms"))
}

fn typed_termination(_: u64) -> Result<String, String> {
    let ctx = TypingContext::new();
    let opts = CheckOptions::default();
    let mut typed = 0;
    let terms = closed_terms(5, &locs());
    for t in &terms {
        if let Ok((ty, _)) = find_type(&ctx, t, &opts) {
            typed += 1;
            if !run_set_member(t, &ty, 10_000) {
                return Err(format!("{t} : {ty} does not terminate as typed"));
            }
        }
    }
    Ok(format!(
        "{typed} of {} terms typed, all terminate",
        terms.len()
    ))
}

fn subject_reduction(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = TypingContext::new();
    let opts = CheckOptions {
        budget: 1_000_000,
        ..CheckOptions::default()
    };
    let mut n = 0;
    for _ in 0..500 {
        let size = rng.random_range(3..=8);
        let Some((t, ty)) = random_typed_term(&mut rng, size, &locs(), 20) else {
            continue;
        };
        for r in one_step_reducts(&t, Strategy::Full) {
            check_with(&ctx, &r, &ty, &opts).map_err(|e| format!("{t} → {r} loses {ty}: {e}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} reducts keep their type"))
}

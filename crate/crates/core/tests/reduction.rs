mod common;

use std::collections::BTreeSet;

use common::t;
use fmc::enumerate::random_term;
use fmc::reduction::{
    beta_preserves_run, beta_step, eta_step, find_eta_sites, find_redexes, is_normal, joinable,
    normalize, normalize_with, one_step_reducts, parallel_diamond_check, perm_eq,
    spine_diamond_check, MarkError, MarkedTerm, Normalization, RedexError, RedexKind, Strategy,
    CIRCLE, DOT,
};
use fmc::syntax::{alpha_eq, Location, Step};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nf(s: &str, strategy: Strategy) -> String {
    let r = normalize(&t(s), strategy, 200);
    assert!(r.is_normal(), "{s} did not normalize");
    r.term.to_string()
}

#[test]
fn beta_on_adjacent_actions() {
    assert_eq!(nf("[y].<x>.[x]a", Strategy::LeftmostOutermost), "[y]a");
    // redexes may be separated by actions on other locations
    assert_eq!(
        nf("[y]a.[z]b.a<x>.[x]", Strategy::LeftmostOutermost),
        "[z]b.[y]"
    );
    // but not by actions on the same one
    assert!(!is_normal(&t("[y]a.a<u>.[u]c")));
    assert!(is_normal(&t("[y]a.<w>.[w]b")));
}

#[test]
fn interleaved_peak_resolves() {
    let m = t("[n]a.[p]b.a<x>.b<y>.[x].[y]");
    let reducts = one_step_reducts(&m, Strategy::Full);
    assert_eq!(reducts.len(), 2);
    for r in &reducts {
        assert!(alpha_eq(
            &normalize(r, Strategy::Full, 10).term,
            &t("[n].[p]")
        ));
    }
}

#[test]
fn strategies_agree_on_normal_forms() {
    let m = "[<x>.[x].[x]].<f>.[<y>.a<_>.[y]a].<g>.[1].f.g.g";
    let lo = nf(m, Strategy::LeftmostOutermost);
    for s in [Strategy::Full, Strategy::Spine, Strategy::Innermost] {
        assert!(alpha_eq(&t(&nf(m, s)), &t(&lo)), "{s:?}");
    }
}

#[test]
fn divergence_is_reported() {
    let r = normalize(&t("[<x>.[x].x].<x>.[x].x"), Strategy::LeftmostOutermost, 50);
    assert_eq!(r.outcome, Normalization::FuelExhausted { looped: true });
}

#[test]
fn beta_step_rejects_stale_sites() {
    let m = t("[y].<x>.x");
    let site = find_redexes(&m, Strategy::Full).remove(0);
    assert_eq!(site.kind, RedexKind::Beta);
    assert!(alpha_eq(&beta_step(&m, &site).unwrap(), &t("y")));
    assert_eq!(beta_step(&t("<x>.x"), &site), Err(RedexError::InvalidSite));
}

#[test]
fn eta() {
    let m = t("a<x>.[x]a.y");
    let sites = find_eta_sites(&m);
    assert_eq!(sites.len(), 1);
    assert!(alpha_eq(&eta_step(&m, &sites[0]).unwrap(), &t("y")));
    // through actions on other locations
    assert_eq!(find_eta_sites(&t("a<x>.[z]b.[x]a.y")).len(), 1);
    // x occurs in the remainder
    assert!(find_eta_sites(&t("a<x>.[x]a.x")).is_empty());
    // the first state law: lookup then a redundant update
    let r = normalize_with(
        &t("a<y>.[y]a.a<_>.[y]a.x"),
        Strategy::LeftmostOutermost,
        10,
        true,
    );
    assert_eq!(r.steps.len(), 2);
    assert!(alpha_eq(&r.term, &t("x")));
}

#[test]
fn permutation_equivalence() {
    assert!(perm_eq(&t("[x]a.[y]b.z"), &t("[y]b.[x]a.z")));
    assert!(perm_eq(&t("a<x>.b<y>.[x].[y]"), &t("b<y>.a<x>.[x].[y]")));
    assert!(perm_eq(&t("a<x>.[v]b.x"), &t("[v]b.a<x>.x")));
    assert!(!perm_eq(&t("a<x>.[x]b.x"), &t("[x]b.a<x>.x")));
    assert!(!perm_eq(&t("[x]a.[y]a.z"), &t("[y]a.[x]a.z")));
    assert!(!perm_eq(&t("[x].[y]a.<z>"), &t("[y]a.<z>.[x]")));
}

#[test]
fn joinability() {
    let m = t("[[w].<z>.z].<x>.x.x");
    let rs = one_step_reducts(&m, Strategy::Full);
    assert!(rs.len() >= 2);
    assert!(joinable(&rs[0], &rs[1], 3));
    assert!(!joinable(&t("x"), &t("y"), 3));
}

#[test]
fn spine_peaks_close() {
    assert!(spine_diamond_check(&t("[[y].<u>.u].<x>.[x].<v>.v")));
}

#[test]
fn marked_reduction() {
    let m = t("[y].<x>.[x].[z]a.a<w>.w");
    let beta: Vec<_> = find_redexes(&m, Strategy::Full)
        .into_iter()
        .map(|s| s.path)
        .collect();
    assert_eq!(beta.len(), 2);
    let dot: BTreeSet<_> = beta[..1].iter().cloned().collect();
    let circle: BTreeSet<_> = beta[1..].iter().cloned().collect();
    assert_eq!(parallel_diamond_check(&m, &dot, &circle), Ok(true));
    let both = MarkedTerm::unmarked(&m)
        .with_marks(&dot, DOT)
        .unwrap()
        .with_marks(&circle, CIRCLE)
        .unwrap();
    assert!(alpha_eq(&both.reduct().unwrap(), &t("[y].z")));
    // marks must sit on pushes with a matching pop
    let bad: BTreeSet<_> = [vec![Step::Rest]].into_iter().collect();
    assert!(matches!(
        MarkedTerm::unmarked(&m).with_marks(&bad, DOT),
        Err(MarkError::NotAPush)
    ));
    let lonely = t("[y]b.<x>.x");
    let at_push: BTreeSet<_> = [vec![]].into_iter().collect();
    assert!(matches!(
        MarkedTerm::unmarked(&lonely).with_marks(&at_push, DOT),
        Err(MarkError::NoMatchingPop)
    ));
}

fn locs() -> Vec<Location> {
    vec![Location::main(), Location::new("a")]
}

proptest! {
    /// Every reduct of a term that halts from empty memory halts in the
    /// same memory.
    #[test]
    fn reduction_preserves_runs(seed in any::<u64>(), size in 1usize..10) {
        let m = random_term(&mut ChaCha8Rng::seed_from_u64(seed), size, 0, &locs());
        for r in one_step_reducts(&m, Strategy::Full) {
            prop_assert_ne!(beta_preserves_run(&m, &r, 2_000), Some(false), "{} → {}", m, r);
        }
    }

    /// One step from any redex, then normalization, lands on the same
    /// normal form.
    #[test]
    fn normal_forms_are_unique(seed in any::<u64>(), size in 1usize..10) {
        let m = random_term(&mut ChaCha8Rng::seed_from_u64(seed), size, 0, &locs());
        let base = normalize(&m, Strategy::LeftmostOutermost, 300);
        prop_assume!(base.is_normal());
        for r in one_step_reducts(&m, Strategy::Full) {
            let n = normalize(&r, Strategy::LeftmostOutermost, 300);
            prop_assert!(n.is_normal());
            prop_assert!(alpha_eq(&n.term, &base.term), "{} and {}", n.term, base.term);
        }
    }

    #[test]
    fn perm_eq_is_an_equivalence(seed in any::<u64>(), size in 0usize..10) {
        let m = random_term(&mut ChaCha8Rng::seed_from_u64(seed), size, 0, &locs());
        prop_assert!(perm_eq(&m, &m));
        let c = fmc::reduction::perm_canonical(&m);
        prop_assert!(perm_eq(&m, &c));
        prop_assert!(alpha_eq(&fmc::reduction::perm_canonical(&c), &c));
    }
}

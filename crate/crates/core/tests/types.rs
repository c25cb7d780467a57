mod common;

use common::{sugar, t};
use fmc::enumerate::{random_typed_term, types};
use fmc::reduction::{normalize, Strategy};
use fmc::syntax::Location;
use fmc::types::{
    bottom, check, check_with, expand, find_type, is_typeable, parse_type, run_set_member,
    type_compose, type_eq, validate, CheckOptions, Type, TypeError, TypingContext, VectorFamily,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ty(s: &str) -> Type {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn ctx() -> TypingContext {
    TypingContext::new()
}

#[test]
fn parse_and_print() {
    for s in [
        "t > t t",
        "t s >",
        "(> t) > (> t) t",
        ">",
        "rnd(Z Z) c(Z) > c(Z) out(Z)",
    ] {
        let parsed = ty(s);
        assert!(
            type_eq(&ty(&parsed.to_string()), &parsed),
            "{s} printed as {parsed}"
        );
    }
    assert!(parse_type("t >> t").is_err());
    assert!(parse_type("a(t").is_err());
}

#[test]
fn singleton_types_permute() {
    assert!(type_eq(&ty("a(t) b(s) >"), &ty("b(s) a(t) >")));
    assert!(!type_eq(&ty("a(t s) >"), &ty("a(s t) >")));
    assert!(!type_eq(&ty("t > s"), &ty("s > t")));
}

#[test]
fn sequential_examples() {
    assert!(is_typeable(&ctx(), &t("<x>.[x].[x]"), &ty("t > t t")));
    assert!(is_typeable(&ctx(), &t("<x>.<y>.[y].[x]"), &ty("t s > s t")));
    assert!(!is_typeable(
        &ctx(),
        &t("<x>.<y>.[y].[x]"),
        &ty("t s > t s")
    ));
    // the empty term passes its inputs through, so the vector reverses
    assert!(is_typeable(&ctx(), &t("*"), &ty("t s > s t")));
    assert!(!is_typeable(&ctx(), &t("*"), &ty("t s > t s")));
}

#[test]
fn effectful_program() {
    let m = sugar("(f = rand ; set c ; get c) ; f ; f ; + ; print");
    let d = check(&ctx(), &m, &ty("rnd(Z Z) c(Z) > c(Z) out(Z)")).unwrap();
    assert!(validate(&d).is_ok());
    assert!(check(&ctx(), &m, &ty("rnd(Z) c(Z) > c(Z) out(Z)")).is_err());
    // the types of the parts compose to the whole
    let get = ty("c(Z) > c(Z) Z");
    let set = ty("Z c(Z) > c(Z)");
    assert!(type_eq(
        &type_compose(&set, &get).unwrap(),
        &ty("Z c(Z) > c(Z) Z")
    ));
}

#[test]
fn composition_is_partial() {
    assert!(type_compose(&ty("> t"), &ty("s >")).is_none());
    assert!(type_eq(
        &type_compose(&ty("> t"), &ty("t >")).unwrap(),
        &ty(">")
    ));
    // leftover inputs of the second part become inputs of the whole
    assert!(type_eq(
        &type_compose(&ty("> t"), &ty("t s > r")).unwrap(),
        &ty("s > r")
    ));
}

#[test]
fn expansion_adds_to_both_sides() {
    let u = VectorFamily::singleton(Location::new("a"), vec![ty("t")]);
    assert!(type_eq(&expand(&ty("s > r"), &u), &ty("s a(t) > r a(t)")));
}

#[test]
fn unbound_variables_are_reported() {
    assert!(matches!(
        check(&ctx(), &t("x"), &ty(">")),
        Err(TypeError::UnboundVariable(_))
    ));
    let ctx = ctx().extend(fmc::syntax::Name::new("x"), ty("t > t"));
    assert!(check(&ctx, &t("x"), &ty("t > t")).is_ok());
}

#[test]
fn search_finds_types() {
    let (found, _) = find_type(&ctx(), &t("<x>.<y>.[x].[y]"), &CheckOptions::default()).unwrap();
    assert!(check(&ctx(), &t("<x>.<y>.[x].[y]"), &found).is_ok());
    assert!(find_type(
        &ctx(),
        &t("[<y>.[y].y].<x>.[x].x"),
        &CheckOptions::default()
    )
    .is_err());
}

#[test]
fn bottoms_inhabit() {
    for t in types(2, 2, &[Location::main(), Location::new("a")]) {
        let b = bottom(&t).unwrap_or_else(|| panic!("no bottom for {t}"));
        assert!(is_typeable(&ctx(), &b, &t), "{b} : {t}");
    }
}

#[test]
fn typed_terms_terminate() {
    // only literal base types have inhabitants to feed the machine
    assert!(!run_set_member(&t("<x>.[x]"), &ty("t > t"), 100));
    for (m, goal) in [
        ("<x>.[x].x", "(> Z) > (> Z) Z"),
        ("[<x>.[x]].<f>.f.f.f", "Z > Z"),
    ] {
        assert!(run_set_member(&t(m), &ty(goal), 10_000), "{m}");
    }
}

proptest! {
    /// Types are preserved along the leftmost-outermost reduction path.
    #[test]
    fn subject_reduction(seed in any::<u64>(), size in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locs = [Location::main(), Location::new("a")];
        let found = random_typed_term(&mut rng, size, &locs, 20);
        prop_assume!(found.is_some());
        let (m, goal) = found.unwrap();
        let opts = CheckOptions { budget: 1_000_000, ..CheckOptions::default() };
        for step in normalize(&m, Strategy::LeftmostOutermost, 20).steps {
            prop_assert!(check_with(&ctx(), &step.after, &goal, &opts).is_ok(), "{} : {}", step.after, goal);
        }
    }
}

mod common;

use common::adequacy::{cbn_verdict, Verdict};
use common::gen::random_lambda;
use common::{t, World};
use fmc::encodings::{
    encode, encode_arrow, encode_cbn, encode_cbpv, encode_cbv, encode_kappa, encode_types,
    parse_source, parse_source_type, EncodeError, Mode, SourceTerm,
};
use fmc::reduction::{normalize, Strategy};
use fmc::syntax::{alpha_eq, print, Features};
use fmc::types::{check, type_eq, TypingContext};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn src(s: &str) -> SourceTerm {
    parse_source(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn cbn(s: &str) -> String {
    print(&encode_cbn(&src(s)).unwrap())
}

fn normal(m: &fmc::syntax::Term) -> fmc::syntax::Term {
    let r = normalize(m, Strategy::LeftmostOutermost, 200);
    assert!(r.is_normal());
    r.term
}

#[test]
fn call_by_name_goldens() {
    assert_eq!(
        cbn("a := 2; ((\\x. !a) (a := 3; 0))"),
        "a<_>.[2]a.[a<_>.[3]a.0].<x>.a<y>.[y]a.y"
    );
    assert_eq!(cbn("\\x. x"), "<x>.x");
    assert_eq!(cbn("f 1 2"), "[2].[1].f");
    assert_eq!(cbn("write 1; 0"), "[1]out.0");
    assert_eq!(cbn("read"), "in<x>.x");
    assert_eq!(cbn("(1 (+) 2)"), "rnd<x>.[1].[2].x");
    let fst = encode_cbn(&src("fst (1, 2)")).unwrap();
    assert!(alpha_eq(&fst, &t("[2].[1].<x1>.<x2>.x1")));
    assert!(alpha_eq(&normal(&fst), &t("1")));
}

#[test]
fn call_by_value_goldens() {
    let v = |s: &str| normal(&encode_cbv(&src(s)).unwrap());
    assert!(alpha_eq(
        &v("a := 2; ((\\x. !a) (a := 3; 0))"),
        &t("a<_>.[3]a.[3]")
    ));
    assert!(alpha_eq(
        &v("a := 0; b := 1; ((\\x. !b) (!a))"),
        &t("a<_>.b<_>.[0]a.[1]b.[1]")
    ));
    assert_eq!(print(&encode_cbv(&src("1")).unwrap()), "[1]");
}

#[test]
fn metalanguage_goldens() {
    assert!(alpha_eq(&encode_cbn(&src("return 1")).unwrap(), &t("[1]")));
    let m = normal(&encode_cbn(&src("let x = return 1 in (x, x)")).unwrap());
    assert!(alpha_eq(&m, &t("[1].[1]")));
    let m = normal(&encode_cbpv(&src("return 1 to x. return x")).unwrap());
    assert!(alpha_eq(&m, &t("[1]")));
}

#[test]
fn thunk_based_encodings() {
    let m = encode_cbpv(&src("return (thunk (return 1)) to f. force f")).unwrap();
    assert!(alpha_eq(&m, &t("[!{[1]}].<f>.?f")));
    assert!(alpha_eq(&normal(&m), &t("[1]")));
    let m = encode_kappa(&src("push (mkthunk (push 1)) ; apply ; (kappa x. push x)")).unwrap();
    assert!(alpha_eq(&normal(&m), &t("[1]")));
    let m = normal(&encode_arrow(&src("arr (\\x. x) >>> arr (\\y. y)")).unwrap());
    assert!(alpha_eq(&m, &t("<x>.[x]")));
}

#[test]
fn foreign_constructs_are_rejected() {
    let e = encode_cbv(&src("(1, 2)")).unwrap_err();
    assert_eq!(
        e,
        EncodeError::Foreign {
            mode: Mode::Cbv,
            construct: "pair"
        }
    );
    assert!(matches!(
        encode_cbn(&src("force f")),
        Err(EncodeError::Foreign { .. })
    ));
    assert!(matches!(
        encode_arrow(&src("kappa x. x")),
        Err(EncodeError::Foreign { .. })
    ));
    assert_eq!(
        encode(Mode::Cbpv, &src("thunk (return 1)"), Features::CORE),
        Err(EncodeError::ThunksDisabled { mode: Mode::Cbpv })
    );
    assert!(encode(Mode::Kappa, &src("mkthunk (push 1)"), Features::ALL).is_ok());
    assert!(encode(Mode::Cbn, &src("\\x. x"), Features::CORE).is_ok());
}

#[test]
fn modes_parse() {
    for m in Mode::ALL {
        assert_eq!(m.name().parse::<Mode>(), Ok(m));
    }
    assert!("lazy".parse::<Mode>().is_err());
}

#[test]
fn type_translations() {
    let enc = |s: &str, mode| encode_types(&parse_source_type(s).unwrap(), mode).unwrap();
    let ty = |s: &str| fmc::types::parse_type(s).unwrap();
    assert!(type_eq(&enc("o", Mode::Cbn), &ty(">")));
    assert!(type_eq(&enc("o -> o", Mode::Cbn), &ty("(>) >")));
    assert!(type_eq(&enc("T Z", Mode::Cbn), &ty("> Z")));
    assert!(type_eq(&enc("T Z", Mode::Cbv), &ty("> Z")));
    assert!(encode_types(&parse_source_type("Z * Z").unwrap(), Mode::Cbv).is_err());
    let pair = enc("o * 1", Mode::Cbn);
    assert!(type_eq(&pair, &ty("> (>) (>)")));
    assert!(parse_source_type("o ->").is_err());
    assert!(encode_types(&parse_source_type("U o").unwrap(), Mode::Cbn).is_err());
}

#[test]
fn encoded_terms_have_encoded_types() {
    let ctx = TypingContext::new();
    let cases = [
        ("\\x. x", "o -> o", Mode::Cbn),
        ("\\f. \\x. f x", "(o -> o) -> o -> o", Mode::Cbn),
        ("(return 1, return 2)", "T Z * T Z", Mode::Cbn),
        ("\\x. x", "Z -> Z", Mode::Cbv),
    ];
    for (m, s, mode) in cases {
        let term = encode(mode, &src(m), Features::ALL).unwrap();
        let goal = encode_types(&parse_source_type(s).unwrap(), mode).unwrap();
        let goal = if mode == Mode::Cbv {
            fmc::encodings::cbv_computation_type(&parse_source_type(s).unwrap()).unwrap()
        } else {
            goal
        };
        assert!(
            check(&ctx, &term, &goal).is_ok(),
            "{m} : {s} encoded as {term} : {goal}"
        );
    }
}

proptest! {
    #[test]
    fn source_print_parse_roundtrip(seed in any::<u64>(), size in 1usize..12) {
        let m = random_lambda(&mut ChaCha8Rng::seed_from_u64(seed), size, 0, &["f", "g"]);
        let back = parse_source(&m.to_string());
        prop_assert_eq!(back.as_ref(), Ok(&m), "printed as {}", m);
    }

    /// Random pure programs agree with the call-by-name oracle.
    #[test]
    fn call_by_name_agrees(seed in any::<u64>(), size in 1usize..12) {
        let m = random_lambda(&mut ChaCha8Rng::seed_from_u64(seed), size, 0, &[]);
        let v = cbn_verdict(&m, &World::default());
        prop_assert!(!matches!(v, Verdict::Disagree(_)), "{}: {:?}", m, v);
    }
}

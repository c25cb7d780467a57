mod common;

use common::{sugar, t};
use fmc::enumerate::random_term;
use fmc::machine::{
    church, memory_from_json, render_table, run, run_composed_check, run_quiet, ChoicePolicy,
    ConfigError, Memory, Outcome, Sample, StuckReason, Supplier, Transition,
};
use fmc::syntax::{alpha_eq, compose, Features, Location, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main_loc() -> Location {
    Location::main()
}

#[test]
fn application_and_abstraction() {
    let trace = run(Memory::new(), t("[<y>.y].<x>.[*].x"), 100);
    assert!(trace.outcome.is_halted());
    assert_eq!(trace.len(), 4);
    let kinds: Vec<_> = trace.transitions.clone();
    assert_eq!(
        kinds,
        vec![
            Transition::Push(main_loc()),
            Transition::Pop(main_loc()),
            Transition::Push(main_loc()),
            Transition::Pop(main_loc()),
        ]
    );
    assert!(trace.final_state().memory.stack(&main_loc()).is_empty());
}

#[test]
fn variables_continue_as_their_value() {
    // <x>.x.x runs the popped term twice
    let m = t("[[*]a].<x>.x.x");
    let s = run_quiet(Memory::new(), m, 100);
    assert!(s.outcome.is_halted());
    assert_eq!(s.state.memory.stack(&Location::new("a")).len(), 2);
}

#[test]
fn stuck_on_empty_stack_and_open_variable() {
    let s = run_quiet(Memory::new(), t("a<x>.x"), 10);
    assert_eq!(
        s.outcome,
        Outcome::Stuck(StuckReason::EmptyStack(Location::new("a")))
    );
    let s = run_quiet(Memory::new(), t("[*].y"), 10);
    assert!(
        matches!(s.outcome, Outcome::Stuck(StuckReason::OpenVariable(ref y)) if y.as_str() == "y")
    );
}

#[test]
fn fuel_runs_out_on_omega() {
    let s = run_quiet(Memory::new(), t("[<x>.[x].x].<x>.[x].x"), 1000);
    assert_eq!(s.outcome, Outcome::FuelExhausted);
    assert_eq!(s.steps, 1000);
}

#[test]
fn arithmetic() {
    let s = run_quiet(Memory::new(), t("[4].[3].[2].+.×.[1].+"), 100);
    assert!(s.outcome.is_halted());
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&main_loc())),
        "ε·21"
    );
    // the top of the stack is the left operand
    let s = run_quiet(Memory::new(), t("[2].[5].-"), 100);
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&main_loc())),
        "ε·3"
    );
}

#[test]
fn input_output_and_cells() {
    let mem = Memory::new().with_supplier("in", Supplier::list(vec![Term::int(5), Term::int(6)]));
    let s = run_quiet(mem, sugar("read ; read ; + ; print"), 100);
    assert!(s.outcome.is_halted());
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&Location::new("out"))),
        "ε·11"
    );

    let mem = Memory::new().with_supplier("in", Supplier::list(vec![Term::int(5)]));
    let s = run_quiet(mem, sugar("read ; read"), 100);
    assert_eq!(
        s.outcome,
        Outcome::Stuck(StuckReason::SupplyExhausted(Location::new("in")))
    );

    let mem = Memory::from_stacks([("c", vec![Term::int(1)])]);
    let s = run_quiet(mem, sugar("[4] ; set c ; get c ; get c ; +"), 100);
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&main_loc())),
        "ε·8"
    );
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&Location::new("c"))),
        "ε·4"
    );
}

#[test]
fn choice_suppliers() {
    let coin = t("nd<b>.[[1]].[[2]].b");
    let s = run_quiet(
        Memory::new().with_supplier("nd", Supplier::nondet(ChoicePolicy::Leftmost)),
        coin.clone(),
        100,
    );
    // true runs the first of the two popped items, which is the top
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&main_loc())),
        "ε·2"
    );

    let draw = |seed| {
        let mem =
            Memory::new().with_supplier("rnd", Supplier::seeded(seed, Sample::Int { max: 1000 }));
        let s = run_quiet(mem, t("rnd<x>.rnd<y>.[x].[y]"), 100);
        fmc::machine::render_stack(s.state.memory.stack(&main_loc()))
    };
    assert_eq!(draw(7), draw(7));
    assert_ne!(draw(7), draw(8));
    assert!(alpha_eq(&church(true), &t("<x>.<y>.x")));
}

#[test]
fn table_shows_every_state() {
    let mem = Memory::from_stacks([("a", vec![Term::int(0)])]);
    let trace = run(mem, t("a<_>.[2]a.a<y>.[y]a.y"), 100);
    let table = render_table(&trace);
    assert_eq!(table.lines().count(), trace.states.len() + 1);
    assert!(table.contains("ε·2"));
}

#[test]
fn memory_from_config() {
    let json = r#"{"stacks": {"a": ["0", "<x>.x"]}, "suppliers": {"rnd": {"kind": "list", "items": ["6", "7"]}}}"#;
    let mem = memory_from_json(json, Features::ALL, 42).unwrap();
    assert_eq!(mem.stack(&Location::new("a")).len(), 2);
    let s = run_quiet(mem, t("rnd<x>.rnd<y>.[x].[y]"), 100);
    assert_eq!(
        fmc::machine::render_stack(s.state.memory.stack(&main_loc())),
        "ε·6·7"
    );

    let flat = memory_from_json(r#"{"λ": ["*"]}"#, Features::CORE, 42).unwrap();
    assert_eq!(flat.stack(&main_loc()).len(), 1);

    assert!(matches!(
        memory_from_json("[1]", Features::ALL, 0),
        Err(ConfigError::Json(_))
    ));
    assert!(matches!(
        memory_from_json(r#"{"a": ["<x"]}"#, Features::ALL, 0),
        Err(ConfigError::Term { .. })
    ));
    let bad = r#"{"suppliers": {"nd": {"kind": "nondet", "policy": "greedy"}}}"#;
    assert!(matches!(
        memory_from_json(bad, Features::ALL, 0),
        Err(ConfigError::Supplier { .. })
    ));
}

#[test]
fn composed_runs() {
    let r = Memory::from_stacks([(main_loc(), vec![Term::int(1)])]);
    assert_eq!(
        run_composed_check(&r, &t("<x>.[x].[x]"), &t("<y>.a<_>.[y]a"), 100),
        None
    );
    let r = Memory::from_stacks([
        (main_loc(), vec![Term::int(1)]),
        (Location::new("a"), vec![Term::Nil]),
    ]);
    assert_eq!(
        run_composed_check(&r, &t("<x>.[x].[x]"), &t("<y>.a<_>.[y]a"), 100),
        Some(true)
    );
}

proptest! {
    /// Running a composition is running one part after the other.
    #[test]
    fn runs_compose(seeds in any::<[u64; 2]>(), sizes in any::<[u8; 2]>()) {
        let locs = [main_loc(), Location::new("a")];
        let m = random_term(&mut ChaCha8Rng::seed_from_u64(seeds[0]), sizes[0] as usize % 7, 0, &locs);
        let n = random_term(&mut ChaCha8Rng::seed_from_u64(seeds[1]), sizes[1] as usize % 7, 0, &locs);
        let start = Memory::from_stacks([
            (main_loc(), vec![Term::Nil, t("<z>.z"), Term::Nil]),
            (Location::new("a"), vec![Term::Nil, Term::Nil]),
        ]);
        let first = run_quiet(start.clone(), m.clone(), 500);
        prop_assume!(first.outcome.is_halted() && first.state.term.is_nil());
        let second = run_quiet(first.state.memory, n.clone(), 500);
        prop_assume!(second.outcome.is_halted() && second.state.term.is_nil());
        let whole = run_quiet(start, compose(&m, &n), 1000);
        prop_assert!(whole.outcome.is_halted());
        prop_assert!(whole.state.memory.same_stacks(&second.state.memory));
    }
}

use ltl_rhc::ltl::{evaluate_word, parse_ltl, translate_to_nba, AtomSet, Label, LassoWord, Ltl};
use proptest::prelude::*;

fn formula(atoms: usize) -> impl Strategy<Value = Ltl> {
    let leaf = prop_oneof![
        Just(Ltl::True),
        Just(Ltl::False),
        (0..atoms).prop_map(Ltl::Atom),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Ltl::not),
            inner.clone().prop_map(Ltl::next),
            inner.clone().prop_map(Ltl::eventually),
            inner.clone().prop_map(Ltl::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::until(a, b)),
        ]
    })
}

fn lasso(atoms: usize) -> impl Strategy<Value = LassoWord> {
    let letter = (0u32..(1 << atoms)).prop_map(Label);
    (
        prop::collection::vec(letter.clone(), 0..4),
        prop::collection::vec(letter, 1..4),
    )
        .prop_map(|(p, c)| LassoWord::new(p, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn nba_agrees_with_semantics(f in formula(2), words in prop::collection::vec(lasso(2), 8)) {
        let atoms = AtomSet::new(["p", "q"]).unwrap();
        let nba = translate_to_nba(&f, &atoms);
        for w in &words {
            prop_assert_eq!(
                nba.accepts_lasso(w),
                evaluate_word(&f, w),
                "formula {} word {:?}", f.display(&atoms), w
            );
        }
    }

    #[test]
    fn json_roundtrip_preserves_language(f in formula(2), words in prop::collection::vec(lasso(2), 4)) {
        let atoms = AtomSet::new(["p", "q"]).unwrap();
        let nba = translate_to_nba(&f, &atoms);
        let again = ltl_rhc::ltl::Nba::from_json(&nba.to_json()).unwrap();
        for w in &words {
            prop_assert_eq!(nba.accepts_lasso(w), again.accepts_lasso(w));
        }
    }
}

#[test]
fn surveillance_task_translates_compactly() {
    let atoms = AtomSet::new(["Base", "Supply", "Report", "Obstacle", "Survey"]).unwrap();
    let text = "[]<> Base && [](Base -> X(!Base U Survey)) \
                && [](Survey -> X(!Survey U Report)) && [](Report -> X(!Report U Supply))";
    let f = parse_ltl(text, &atoms).unwrap();
    let nba = translate_to_nba(&f, &atoms);
    println!("states {} transitions {}", nba.num_states(), nba.num_transitions());
    assert!(nba.num_states() <= 64);
    let l = |names: &[&str]| atoms.label(names).unwrap();
    let good = LassoWord::new(
        vec![],
        vec![l(&["Base"]), l(&["Survey"]), l(&["Report"]), l(&["Supply"])],
    );
    assert!(nba.accepts_lasso(&good));
    let bad = LassoWord::new(vec![], vec![l(&["Base"]), l(&[]), l(&["Report"])]);
    assert!(!nba.accepts_lasso(&bad));
}

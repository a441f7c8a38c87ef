use proptest::prelude::*;

use omega_synth::aiger::{parse_aag, print_aag, AigerError};
use omega_synth::gen::{self, AutomatonShape};
use omega_synth::hoa::{parse_ehoa, print_ehoa, HoaError};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn automata_survive_print_parse(seed in any::<u64>(), states in 1usize..10, aps in 0usize..7, branching in 1usize..7) {
        let mut r = gen::rng(seed);
        let shape = AutomatonShape { states, aps, controllable: aps / 2, branching, drop: 0.1 };
        let a = gen::random_automaton(&mut r, shape);
        let text = print_ehoa(&a);
        let b = parse_ehoa(&text).unwrap();
        prop_assert_eq!(b.num_states(), a.num_states());
        prop_assert_eq!(&b.controllable, &a.controllable);
        for q in 0..a.num_states() {
            for val in 0..1u64 << aps {
                prop_assert_eq!(a.step(q, val), b.step(q, val));
            }
        }
        prop_assert_eq!(print_ehoa(&b), text);
    }

    #[test]
    fn circuits_survive_print_parse(seed in any::<u64>(), ni in 0usize..6, nl in 0usize..6, no in 1usize..4, na in 0usize..30) {
        let mut r = gen::rng(seed);
        let names: Vec<String> = (0..ni).map(|k| format!("x{k}")).collect();
        let c = gen::random_circuit(&mut r, &names, nl, no, na);
        let d = parse_aag(&print_aag(&c)).unwrap();
        prop_assert_eq!(&c, &d);
    }

    #[test]
    fn normalization_keeps_lasso_verdicts(seed in any::<u64>(), u in prop::collection::vec(0u64..8, 0..7), v in prop::collection::vec(0u64..8, 1..7)) {
        let mut r = gen::rng(seed);
        let a = gen::small_automaton(&mut r);
        let mask = (1u64 << a.num_aps()) - 1;
        let u: Vec<u64> = u.iter().map(|x| x & mask).collect();
        let v: Vec<u64> = v.iter().map(|x| x & mask).collect();
        let n = a.normalize_acceptance().unwrap();
        prop_assert_eq!(a.accepts_lasso(&u, &v), n.accepts_lasso(&u, &v));
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_ehoa(&text);
        let _ = parse_aag(&text);
    }
}

#[test]
fn binary_aiger_is_rejected() {
    assert!(matches!(
        parse_aag("aig 1 1 0 0 0\n"),
        Err(AigerError::BinaryUnsupported)
    ));
}

#[test]
fn undeclared_ap_is_rejected() {
    let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"a\"\ncontrollable-AP: 3\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[t] 0 {0}\n--END--\n";
    assert!(matches!(parse_ehoa(text), Err(HoaError::UndeclaredAp { .. })));
}

#[test]
fn max_odd_parity_is_normalized_to_min_even() {
    let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"a\"\ncontrollable-AP: 0\nacc-name: parity max odd 3\n\
                Acceptance: 3 Fin(2) & (Inf(1) | Fin(0))\n--BODY--\nState: 0\n[0] 0 {1}\n[!0] 0 {2}\n--END--\n";
    let a = parse_ehoa(text).unwrap();
    let n = a.normalize_acceptance().unwrap();
    // max odd: priority 1 alone accepts, 2 alone rejects
    assert!(a.accepts_lasso(&[], &[1]) && n.accepts_lasso(&[], &[1]));
    assert!(!a.accepts_lasso(&[], &[0]) && !n.accepts_lasso(&[], &[0]));
    assert!(!n.accepts_lasso(&[], &[0, 1]));
}

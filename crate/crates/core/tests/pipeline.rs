//! End-to-end use of the public API: parse a structure and a formula, reduce
//! with every strategy, round-trip the circuit through both file formats and
//! compare each verdict with the oracle at every state.

use qctl_core::kripke::parse_kri;
use qctl_core::oracle::holds;
use qctl_core::qbf::{decide, emit_qcir, emit_smt, parse_qcir, parse_smt};
use qctl_core::qctl::{parse_qctl, QctlError};
use qctl_core::reduce::{reduce, ReduceError, ReductionConfig, Strategy};
use qctl_core::sml::{check_sml, parse_sml};

const STRUCTURE: &str = "\
states: x0 x1 x2 x3
init: x0
labels: x1: a ; x2: a b
edges: x0->x1 x0->x2 x1->x2 x2->x3 x3->x0 x3->x3
";

const FORMULAS: &[&str] = &[
    "exists p. (p & A X ~p)",
    "forall p. (p -> E X p)",
    "exists p. (A G (p -> E X ~p) & E F p)",
    "E [a U b] & exists p. A [~p W a]",
    "exists1 p. (E F (p & b) & A G (p -> a))",
];

#[test]
fn every_strategy_matches_the_oracle_after_round_trip() {
    let k = parse_kri(STRUCTURE).unwrap();
    for text in FORMULAS {
        let f = parse_qctl(text).unwrap();
        for x in k.states() {
            let kx = k.with_init(x);
            let want = holds(&kx, &f).unwrap();
            for s in Strategy::ALL {
                let circuit = match reduce(&kx, x, &f, &ReductionConfig::with_strategy(s)) {
                    Ok(c) => c,
                    Err(ReduceError::Qctl(QctlError::NotPrenexable(_))) => continue,
                    Err(e) => panic!("{text} with {s}: {e}"),
                };
                assert_eq!(
                    decide(&circuit, None).unwrap(),
                    want,
                    "{text} at {} with {s}",
                    k.name(x)
                );
                let via_qcir = parse_qcir(&emit_qcir(&circuit).unwrap()).unwrap();
                let via_smt = parse_smt(&emit_smt(&circuit).unwrap()).unwrap();
                assert_eq!(
                    decide(&via_qcir, None).unwrap(),
                    want,
                    "{text} qcir with {s}"
                );
                assert_eq!(decide(&via_smt, None).unwrap(), want, "{text} smt with {s}");
            }
        }
    }
}

#[test]
fn sabotage_formulas_check_through_the_reduction() {
    let k = parse_kri(STRUCTURE).unwrap();
    let cfg = ReductionConfig::with_strategy(Strategy::Fp);
    let always = parse_sml("<>true").unwrap();
    assert!(check_sml(&k, k.init(), &always, &cfg).unwrap());
    let cut = parse_sml("[~][~][~][~][~][~]<>true").unwrap();
    assert!(!check_sml(&k, k.init(), &cut, &cfg).unwrap());
}

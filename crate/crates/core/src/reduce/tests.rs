use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

use super::*;
use crate::corpus::{instance, CorpusParams};
use crate::kripke::parse_kri;
use crate::oracle::{holds, mc_qctl, Environment};
use crate::qbf::{decide, Gate};
use crate::qctl::parse_qctl;

fn kri(text: &str) -> Kripke {
    parse_kri(text).unwrap()
}

fn f(s: &str) -> Formula {
    parse_qctl(s).unwrap()
}

fn chain() -> Kripke {
    kri("states: x0 x1\ninit: x0\nlabels: x1: b\nedges: x0->x1 x1->x1\n")
}

fn plain(k: &Kripke, phi: &Formula) -> QbfCircuit {
    hat_translate(
        k,
        k.init(),
        phi,
        &HatOptions::default(),
        CircuitMeta::default(),
    )
    .unwrap()
}

fn valid(c: &QbfCircuit) -> bool {
    decide(c, None).unwrap()
}

#[test]
fn successor_disjunction_folds_to_true() {
    assert_eq!(plain(&chain(), &f("E X b")).as_const(), Some(true));
}

#[test]
fn until_on_a_chain_folds_to_true() {
    assert_eq!(plain(&chain(), &f("E [true U b]")).as_const(), Some(true));
}

#[test]
fn universal_until_stops_on_back_edges() {
    let k = kri("states: x0\ninit: x0\nedges: x0->x0\n");
    assert_eq!(plain(&k, &f("A [true U b]")).as_const(), Some(false));
}

#[test]
fn untranslatable_shapes_are_rejected() {
    let k = chain();
    for s in ["A F b", "E G b", "E [a W b]", "A [a W b]", "exists1 p. p"] {
        let r = hat_translate(
            &k,
            k.init(),
            &f(s),
            &HatOptions::default(),
            CircuitMeta::default(),
        );
        assert!(matches!(r, Err(ReduceError::Shape(_))), "{s}");
    }
    let r = hat_translate(
        &k,
        StateId(7),
        &Formula::True,
        &HatOptions::default(),
        CircuitMeta::default(),
    );
    assert!(matches!(r, Err(ReduceError::UnknownState(7))));
}

#[test]
fn truth_gives_the_true_circuit() {
    let c = met_uu(
        &chain(),
        StateId(0),
        &Formula::True,
        &ReductionConfig::default(),
    )
    .unwrap();
    assert_eq!(c.as_const(), Some(true));
}

#[test]
fn quantifier_introduces_one_variable_per_state() {
    let k = chain();
    let c = met_uu(
        &k,
        StateId(0),
        &f("exists p. p"),
        &ReductionConfig::default(),
    )
    .unwrap();
    assert_eq!(c.var_names(), &["p__s0".to_string(), "p__s1".to_string()]);
    assert!(valid(&c));
    assert_eq!(c.meta.strategy.as_deref(), Some("uu"));
}

#[test]
fn duplicated_quantifiers_get_instance_names() {
    let k = kri("states: x0 x1\ninit: x0\nlabels: x0: a b ; x1: b\nedges: x0->x1 x1->x1\n");
    // the until visits the quantifier at two different states
    let c = met_uu(
        &k,
        StateId(0),
        &f("E [a U exists p. (p & b & E X ~p)]"),
        &ReductionConfig::default(),
    )
    .unwrap();
    let names = c.var_names();
    assert!(names.contains(&"p__s0".to_string()), "{names:?}");
    assert!(names.contains(&"p__i1__s1".to_string()), "{names:?}");
    assert!(valid(&c));
}

#[test]
fn bitvector_uniqueness_uses_state_numbers() {
    let k = kri("states: a b c d e\ninit: a\nedges: a->b b->c c->d d->e e->a\n");
    let cfg = ReductionConfig::default();
    let c = met_pnf(&k, StateId(0), &f("exists1 p. E F p"), &cfg).unwrap();
    let uniq_vars: Vec<_> = c
        .var_names()
        .iter()
        .filter(|n| n.starts_with("p__bv"))
        .collect();
    assert_eq!(uniq_vars.len(), 3);
    assert!(!c.var_names().iter().any(|n| n.starts_with("p__s")));
    assert!(valid(&c));
    let disj = ReductionConfig {
        uniq_encoding: UniqEncoding::Disjunction,
        ..cfg
    };
    let c = met_pnf(&k, StateId(0), &f("exists1 p. E F p"), &disj).unwrap();
    assert_eq!(
        c.var_names()
            .iter()
            .filter(|n| n.starts_with("p__s"))
            .count(),
        5
    );
}

#[test]
fn single_state_uniqueness_in_every_encoding() {
    let k = kri("states: x\ninit: x\nedges: x->x\n");
    for u in UniqEncoding::ALL {
        for s in Strategy::ALL {
            let cfg = ReductionConfig {
                strategy: s,
                uniq_encoding: u,
                ..Default::default()
            };
            let c = reduce(&k, StateId(0), &f("exists1 p. p"), &cfg).unwrap();
            assert!(valid(&c), "{s} {u}");
            let c = reduce(&k, StateId(0), &f("forall1 p. ~p"), &cfg).unwrap();
            assert!(!valid(&c), "{s} {u}");
        }
    }
}

#[test]
fn self_loop_detector_under_fixpoint_strategy() {
    let k = kri("states: x\ninit: x\nedges: x->x\n");
    let c = met_fp(
        &k,
        StateId(0),
        &f("forall p. (p -> E X p)"),
        &ReductionConfig::default(),
    )
    .unwrap();
    assert!(valid(&c));
}

#[test]
fn flat_strategies_reject_nested_quantifiers() {
    let k = chain();
    for s in [Strategy::Fpf, Strategy::Pnf, Strategy::Fbv] {
        let r = reduce(
            &k,
            StateId(0),
            &f("E X forall p. A X p"),
            &ReductionConfig::with_strategy(s),
        );
        assert!(
            matches!(r, Err(ReduceError::Qctl(QctlError::NotPrenexable(_)))),
            "{s}"
        );
    }
}

#[test]
fn fpf_matches_fp_on_basic_formulas() {
    let k = chain();
    let cfg = ReductionConfig::default();
    let a = met_fp(&k, StateId(0), &f("E X a"), &cfg).unwrap();
    let b = met_fpf(&k, StateId(0), &f("E X a"), &cfg).unwrap();
    assert_eq!(a.nodes(), b.nodes());
}

#[test]
fn bounded_vectors_reduce_until_to_its_goal() {
    let k = kri(
        "states: x0 x1 x2\ninit: x0\nlabels: x0: a ; x1: a ; x2: b\nedges: x0->x1 x1->x2 x2->x2\n",
    );
    let phi = f("E [a U b]");
    let bounded = ReductionConfig {
        fbv_bound: Some(1),
        ..ReductionConfig::with_strategy(Strategy::Fbv)
    };
    let exact = ReductionConfig::with_strategy(Strategy::Fbv);
    for x in k.states() {
        let c = met_fbv(&k, x, &phi, &bounded).unwrap();
        assert!(!c.meta.exact);
        assert_eq!(valid(&c), k.has_label(x, "b"), "state {x:?}");
        let c = met_fbv(&k, x, &phi, &exact).unwrap();
        assert!(c.meta.exact);
        assert!(valid(&c));
    }
    let zero = ReductionConfig {
        fbv_bound: Some(0),
        ..exact
    };
    assert!(matches!(
        met_fbv(&k, StateId(0), &phi, &zero),
        Err(ReduceError::BoundTooSmall)
    ));
}

#[test]
fn strategy_names_round_trip() {
    for s in Strategy::ALL {
        assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
    }
    for u in UniqEncoding::ALL {
        assert_eq!(u.to_string().parse::<UniqEncoding>().unwrap(), u);
    }
    assert!("xyz".parse::<Strategy>().is_err());
    assert_eq!(ReductionConfig::default().strategy, Strategy::Pnf);
    assert_eq!(
        ReductionConfig::default().uniq_encoding,
        UniqEncoding::Bitvector
    );
}

#[test]
fn gate_budget_is_enforced() {
    let k = kri("states: a b c\ninit: a\nedges: a->b a->c b->a b->c c->a c->b\n");
    let cfg = ReductionConfig {
        max_gates: Some(10),
        ..ReductionConfig::with_strategy(Strategy::Uu)
    };
    let r = reduce(
        &k,
        StateId(0),
        &f("exists p. A [E [p U E X p] U E [p U A X p]]"),
        &cfg,
    );
    assert!(matches!(r, Err(ReduceError::TooLarge { limit: 10 })));
}

fn temporal_ops(f: &Formula, out: &mut Vec<&'static str>) {
    let name = match f {
        Formula::Ex(_) => Some("EX"),
        Formula::Ax(_) => Some("AX"),
        Formula::Ef(_) => Some("EF"),
        Formula::Ag(_) => Some("AG"),
        Formula::Af(_) => Some("AF"),
        Formula::Eg(_) => Some("EG"),
        Formula::Eu(..) => Some("EU"),
        Formula::Au(..) => Some("AU"),
        Formula::Ew(..) => Some("EW"),
        Formula::Aw(..) => Some("AW"),
        _ => None,
    };
    out.extend(name);
    for c in f.children() {
        temporal_ops(c, out);
    }
}

fn quantified_vars(c: &QbfCircuit) -> usize {
    c.nodes()
        .iter()
        .map(|g| match g {
            Gate::Quant(_, vs, _) => vs.len(),
            _ => 0,
        })
        .sum()
}

fn count_quantifiers(f: &Formula) -> usize {
    usize::from(matches!(f, Formula::Quant(..)))
        + f.children()
            .into_iter()
            .map(count_quantifiers)
            .sum::<usize>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_strategy_agrees_with_the_oracle(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams::default());
        let k = &inst.kripke;
        let want = holds(k, &inst.formula).unwrap();
        for s in Strategy::ALL {
            let c = reduce(k, k.init(), &inst.formula, &ReductionConfig::with_strategy(s)).unwrap();
            prop_assert_eq!(valid(&c), want, "{} on {}", s, inst.formula);
        }
    }

    #[test]
    fn nested_quantifiers_agree_with_the_oracle(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams { prenex: false, ..CorpusParams::default() });
        let k = &inst.kripke;
        let want = holds(k, &inst.formula).unwrap();
        for s in [Strategy::Uu, Strategy::Fp] {
            let c = reduce(k, k.init(), &inst.formula, &ReductionConfig::with_strategy(s)).unwrap();
            prop_assert_eq!(valid(&c), want, "{} on {}", s, inst.formula);
        }
    }

    #[test]
    fn preprocessing_preserves_satisfaction(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams { max_states: 3, max_quantifiers: 1, ..CorpusParams::default() });
        let k = &inst.kripke;
        let want = mc_qctl(k, &inst.formula, &Environment::default()).unwrap();
        for s in [Strategy::Fp, Strategy::Fpf, Strategy::Pnf] {
            let pre = preprocess(k, &inst.formula, &ReductionConfig::with_strategy(s)).unwrap();
            let got = mc_qctl(k, &pre.formula, &Environment::default());
            if let Ok(got) = got {
                prop_assert_eq!(got, want.clone(), "{} on {}", s, inst.formula);
            }
        }
    }

    #[test]
    fn flat_outputs_are_prenex_and_restricted(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams::default());
        let k = &inst.kripke;
        for s in [Strategy::Pnf, Strategy::Fbv] {
            let c = reduce(k, k.init(), &inst.formula, &ReductionConfig::with_strategy(s)).unwrap();
            prop_assert!(c.is_prenex());
            prop_assert!(c.meta.prenex);
            let pre = preprocess(k, &inst.formula, &ReductionConfig::with_strategy(s)).unwrap();
            let mut ops = Vec::new();
            temporal_ops(&pre.formula, &mut ops);
            prop_assert!(ops.iter().all(|o| ["EX", "AX", "EF", "AG"].contains(o)), "{:?}", ops);
        }
        let pre = preprocess(k, &inst.formula, &ReductionConfig::with_strategy(Strategy::Fp)).unwrap();
        let mut ops = Vec::new();
        temporal_ops(&pre.formula, &mut ops);
        prop_assert!(ops.iter().all(|o| ["EX", "AX", "AG"].contains(o)), "{:?}", ops);
    }

    #[test]
    fn direct_unfolding_adds_no_extra_variables(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams { prenex: false, ..CorpusParams::default() });
        let k = &inst.kripke;
        let cfg = ReductionConfig { uniq_encoding: UniqEncoding::Disjunction, ..ReductionConfig::with_strategy(Strategy::Uu) };
        let c = met_uu(k, k.init(), &inst.formula, &cfg).unwrap();
        // one block per quantifier instance, each with one variable per state
        prop_assert_eq!(quantified_vars(&c), c.num_vars());
        prop_assert_eq!(c.num_vars() % k.num_states(), 0);
        if count_quantifiers(&inst.formula) == 0 {
            prop_assert_eq!(c.num_vars(), 0);
        }
    }

    #[test]
    fn uniqueness_encodings_agree(seed in any::<u64>()) {
        let inst = instance(seed, CorpusParams::default());
        let k = &inst.kripke;
        for s in [Strategy::Fp, Strategy::Pnf] {
            let verdicts: Vec<bool> = UniqEncoding::ALL
                .iter()
                .map(|&u| {
                    let cfg = ReductionConfig { uniq_encoding: u, ..ReductionConfig::with_strategy(s) };
                    valid(&reduce(k, k.init(), &inst.formula, &cfg).unwrap())
                })
                .collect();
            prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]), "{} {:?}", s, verdicts);
        }
    }
}

use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};

use super::*;
use crate::kripke::serialize_kri;
use crate::oracle::holds;

#[test]
fn reset_sizes_and_laws() {
    let big = gen_reset(10, 30, 12).unwrap();
    assert_eq!(big.kripke.num_states(), 301);
    assert!(big.expected.verdict);
    assert_eq!(big.name, "reset_n10_k30_m12");
    assert!(!gen_reset(6, 10, 5).unwrap().expected.verdict);
    assert_eq!(gen_reset(6, 10, 5).unwrap().kripke.num_states(), 61);
    let v23 = reset_structure(2, 3).unwrap();
    assert_eq!(v23.reach(v23.init()).len(), 7);
    assert!(!v23.has_edge(v23.init(), v23.init()));
    assert!(matches!(gen_reset(0, 3, 1), Err(BenchError::Params(_))));
}

#[test]
fn reset_law_under_the_oracle() {
    for n in 1..=3 {
        for k in 1..=3 {
            for m in 1..=n + 1 {
                let inst = gen_reset(n, k, m).unwrap();
                assert_eq!(
                    holds(&inst.kripke, &inst.formula).unwrap(),
                    m >= n,
                    "{}",
                    inst.name
                );
            }
        }
    }
}

#[test]
fn kconn_sizes_and_connectivity() {
    let s = kconn_structure(10, 5).unwrap();
    assert_eq!(s.num_states(), 200);
    let s32 = kconn_structure(3, 2).unwrap();
    let got =
        vertex_connectivity(&s32, s32.state("q1_1").unwrap(), s32.state("r3_3").unwrap()).unwrap();
    assert_eq!(got, Connectivity::Finite(2));
    for n in 2..=6 {
        for m in 1..=n {
            let inst = gen_kconn(n, m, 1, KconnFormula::Cut).unwrap();
            assert_eq!(inst.kripke.num_states(), 2 * n * n);
        }
    }
    assert!(matches!(kconn_structure(3, 4), Err(BenchError::Params(_))));
    assert!(
        gen_kconn(10, 5, 4, KconnFormula::Cut)
            .unwrap()
            .expected
            .verdict
    );
    assert!(
        !gen_kconn(10, 4, 5, KconnFormula::Cut)
            .unwrap()
            .expected
            .verdict
    );
    assert_eq!(
        gen_kconn(10, 5, 4, KconnFormula::Cut).unwrap().name,
        "kconn_n10_m5_psi4"
    );
}

#[test]
fn kconn_formulas_match_their_shape() {
    assert_eq!(
        kconn_formula(1, KconnFormula::Cut).to_string(),
        crate::qctl::parse_qctl("EX E[true U y]")
            .unwrap()
            .to_string()
    );
    let psi = kconn_formula(3, KconnFormula::Cut);
    let want = crate::qctl::parse_qctl("forall1 p1. forall1 p2. EX E[~p1 & ~p2 U y]").unwrap();
    assert_eq!(psi, want);
    let phi = kconn_formula(2, KconnFormula::Paths);
    let want = crate::qctl::parse_qctl("exists p1. (EX E[p1 U y] & EX E[~p1 U y])").unwrap();
    assert_eq!(phi, want);
}

#[test]
fn cut_formula_law_under_the_oracle() {
    for n in 2..=3 {
        for m in 1..=2.min(n) {
            for k in 1..=m + 1 {
                let inst = gen_kconn(n, m, k, KconnFormula::Cut).unwrap();
                assert_eq!(
                    holds(&inst.kripke, &inst.formula).unwrap(),
                    k <= m,
                    "{}",
                    inst.name
                );
            }
        }
    }
}

#[test]
fn nim_sizes() {
    // configuration states over both turns, intermediate states excluded
    let sizes: Vec<usize> = [&[3, 4, 5][..], &[2, 3, 4, 4], &[3, 4, 5, 6], &[2, 4, 8, 14]]
        .iter()
        .map(|h| gen_nim(h, 1).unwrap().nominal_size)
        .collect();
    assert_eq!(sizes, vec![96, 124, 330, 1566]);
    assert_eq!(nim_configurations(&[3, 4, 5]).len(), 48);
    assert_eq!(
        nim_configurations(&[5, 3, 4]),
        nim_configurations(&[3, 4, 5])
    );
}

#[test]
fn nim_structure_shape() {
    let (k, nominal) = nim_structure(&[1, 1], 1).unwrap();
    // configurations [0,0] [0,1] [1,1] per turn, one player-1 move from each of [0,1] and [1,1]
    assert_eq!(nominal, 6);
    assert_eq!(k.num_states(), 8);
    let start = k.state("c1_1_t1").unwrap();
    assert_eq!(k.init(), start);
    let mid = k.state("m1_1_to_0_1").unwrap();
    assert!(k.has_label(mid, "int"));
    assert_eq!(k.successors(start), &[mid]);
    let end = k.state("c0_0_t1").unwrap();
    assert!(k.has_label(end, "w2") && k.has_edge(end, end));
    assert!(matches!(gen_nim(&[], 1), Err(BenchError::Params(_))));
    assert!(matches!(gen_nim(&[2], 3), Err(BenchError::Params(_))));
}

#[test]
fn nim_expectations() {
    assert!(gen_nim(&[3, 4, 5], 1).unwrap().expected.verdict);
    assert!(!gen_nim(&[2, 4, 8, 14], 1).unwrap().expected.verdict);
    assert!(!gen_nim(&[3, 4, 5], 2).unwrap().expected.verdict);
    assert!(gen_nim(&[2, 2], 2).unwrap().expected.verdict);
}

#[test]
fn nim_law_under_the_oracle_for_tiny_games() {
    for heaps in [&[1][..], &[2], &[1, 1], &[1, 2]] {
        for player in [1, 2] {
            let inst = gen_nim(heaps, player).unwrap();
            assert_eq!(
                holds(&inst.kripke, &inst.formula).unwrap(),
                inst.expected.verdict,
                "{}",
                inst.name
            );
        }
    }
}

#[test]
fn resources_sizes_and_expectations() {
    let g = resources_structure(10, 10).unwrap();
    assert_eq!(g.num_states(), 100);
    assert!(g.states().all(|x| g.successors(x).len() == 10));
    assert_eq!(g.reach(g.init()).len(), 100);
    assert!(gen_resources(10, 10, 8, 6).unwrap().expected.verdict);
    // two columns of two: a target covers itself and the column behind it
    assert!(!gen_resources(2, 2, 1, 1).unwrap().expected.verdict);
    assert!(gen_resources(2, 2, 2, 1).unwrap().expected.verdict);
    assert_eq!(
        gen_resources(10, 10, 8, 6).unwrap().name,
        "resources_n10_m10_k8_d6"
    );
}

#[test]
fn column_search_matches_exhaustive_cover() {
    for rows in 1..=4 {
        for cols in 1..=4 {
            if rows * cols > 12 {
                continue;
            }
            let g = resources_structure(rows, cols).unwrap();
            for d in 1..=3 {
                let min = resources_min_targets(rows, cols, d).unwrap();
                for k in 1..=3 {
                    assert_eq!(
                        min <= k,
                        cover_exists(&g, k, d),
                        "{rows}x{cols} k={k} d={d}"
                    );
                }
            }
        }
    }
}

#[test]
fn resources_law_under_the_oracle() {
    for (rows, cols) in [(1, 2), (2, 2), (1, 3), (3, 1)] {
        for k in 1..=2 {
            for d in 1..=2 {
                let inst = gen_resources(rows, cols, k, d).unwrap();
                assert_eq!(
                    holds(&inst.kripke, &inst.formula).unwrap(),
                    inst.expected.verdict,
                    "{}",
                    inst.name
                );
            }
        }
    }
}

#[test]
fn generators_are_deterministic() {
    let a = serialize_kri(&gen_kconn(4, 3, 2, KconnFormula::Paths).unwrap().kripke);
    let b = serialize_kri(&gen_kconn(4, 3, 2, KconnFormula::Paths).unwrap().kripke);
    assert_eq!(a, b);
    let a = serialize_kri(&gen_nim(&[2, 3], 1).unwrap().kripke);
    assert_eq!(a, serialize_kri(&gen_nim(&[3, 2], 1).unwrap().kripke));
}

#[test]
fn expected_json_fields() {
    let v = gen_reset(2, 2, 2).unwrap().expected_json();
    assert_eq!(v["name"], "reset_n2_k2_m2");
    assert_eq!(v["expected"], true);
    assert_eq!(v["provenance"], "reset-law");
    assert_eq!(v["params"]["n"], 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kconn_max_flow_equals_connectors(n in 2usize..=7, m in 1usize..=7) {
        let m = m.min(n);
        let s = kconn_structure(n, m).unwrap();
        let dst = s.state(&format!("r{n}_{n}")).unwrap();
        prop_assert_eq!(vertex_connectivity(&s, s.init(), dst).unwrap(), Connectivity::Finite(m));
    }

    #[test]
    fn nim_xor_law_matches_game_search(heaps in proptest::collection::vec(1usize..=4, 1..=3)) {
        // backward induction on the configuration graph
        let configs = nim_configurations(&heaps);
        let mut wins: BTreeMap<Config, bool> = BTreeMap::new();
        let mut order = configs;
        order.sort_by_key(|c| c.iter().sum::<usize>());
        for c in order {
            let w = moves(&c).iter().any(|d| !wins[d]);
            wins.insert(c, w);
        }
        let mut start = heaps.clone();
        start.sort_unstable();
        prop_assert_eq!(wins[&start], gen_nim(&heaps, 1).unwrap().expected.verdict);
    }
}

#[test]
fn suites_have_the_published_rows() {
    let published = published_suite().unwrap();
    assert_eq!(published.len(), 16);
    let sizes: Vec<usize> = published.iter().map(|b| b.nominal_size).collect();
    assert_eq!(
        sizes,
        vec![301, 1501, 61, 200, 450, 450, 1800, 200, 96, 124, 330, 1566, 100, 144, 144, 400]
    );
    let verdicts: Vec<bool> = published.iter().map(|b| b.expected.verdict).collect();
    let want = [
        true, true, false, true, true, true, true, false, true, true, true, false, true, true,
        true, true,
    ];
    assert_eq!(verdicts, want);
    let desk: Vec<usize> = desk_suite()
        .unwrap()
        .iter()
        .map(|b| b.kripke.num_states())
        .collect();
    assert_eq!(desk, vec![5, 5, 7, 8, 8, 17, 21, 4, 4]);
}

//! Formula-level preprocessing: fixpoint characterization of untils,
//! uniqueness expansion, and the two clause rewritings of flat formulas.

use crate::qctl::{unique_f, CmpOp, Flat, Formula, FreshNames, Prop, QuantKind};
use Formula::*;

use super::bitvec::width_for;
use super::ReduceError;

fn and_t(a: Formula, b: Formula) -> Formula {
    match a {
        True => b,
        _ => Formula::and(a, b),
    }
}

/// `forall z. (AG(z <-> (goal | (stay & step z))) -> z)`.
fn fixpoint(stay: Formula, goal: Formula, universal: bool, z: Prop) -> Formula {
    let za = Atom(z.clone());
    let step = if universal {
        Formula::ax(za.clone())
    } else {
        Formula::ex(za.clone())
    };
    let unfold = Formula::or(goal, and_t(stay, step));
    Formula::forall(
        z.as_str(),
        Formula::implies(Formula::ag(Formula::iff(za.clone(), unfold)), za),
    )
}

/// Replaces every until-like modality by a universally quantified fixpoint
/// marker; the result uses only EX, AX and AG. Markers are named `z<n>` in
/// pre-order.
pub fn fpc(f: &Formula, names: &mut FreshNames) -> Formula {
    names.reserve_formula(f);
    go_fpc(f, names)
}

fn go_fpc(f: &Formula, names: &mut FreshNames) -> Formula {
    let fix = |a: &Formula, b: &Formula, universal: bool, names: &mut FreshNames| {
        let z = names.numbered("z", 1);
        let a = go_fpc(a, names);
        let b = go_fpc(b, names);
        fixpoint(a, b, universal, z)
    };
    match f {
        Eu(a, b) => fix(a, b, false, names),
        Au(a, b) => fix(a, b, true, names),
        Ef(a) => fix(&True, a, false, names),
        Af(a) => fix(&True, a, true, names),
        Eg(a) => Formula::not(fix(&True, &Formula::not((**a).clone()), true, names)),
        Ew(a, b) | Aw(a, b) => {
            let nb = Formula::not((**b).clone());
            let stop = Formula::and(nb.clone(), Formula::not((**a).clone()));
            Formula::not(fix(&nb, &stop, matches!(f, Ew(..)), names))
        }
        _ => f.map_children(|c| go_fpc(c, names)),
    }
}

/// Replaces `uniq(p)` by its definition with a fresh universal marker.
pub fn expand_uniq(f: &Formula, names: &mut FreshNames) -> Formula {
    names.reserve_formula(f);
    fn go(f: &Formula, names: &mut FreshNames) -> Formula {
        match f {
            Uniq(p) => unique_f(&Atom(p.clone()), names),
            _ => f.map_children(|c| go(c, names)),
        }
    }
    go(f, names)
}

fn closed(flat: &Flat, inner: Vec<(QuantKind, Prop, Option<u32>)>, body: Formula) -> Formula {
    let body = inner
        .into_iter()
        .rev()
        .fold(body, |acc, (kind, p, width)| match width {
            Some(w) => VecExists(p, w, Box::new(acc)),
            None => Quant(kind, p, Box::new(acc)),
        });
    flat.prefix.close(body)
}

fn require_implications(flat: &Flat) -> Result<(), ReduceError> {
    if flat.equivalence {
        return Err(ReduceError::Shape(
            "clause rewriting needs implication clauses".into(),
        ));
    }
    Ok(())
}

/// Rewrites implication clauses into EX, AX, EF and AG only, with one
/// universal marker shared by the least-fixpoint clauses.
pub fn replace_uw(flat: &Flat, names: &mut FreshNames) -> Result<Formula, ReduceError> {
    require_implications(flat)?;
    names.reserve_formula(&flat.to_formula());
    let needs_marker = flat
        .clauses
        .iter()
        .any(|(_, t)| matches!(t, Eu(..) | Au(..)));
    let chi = needs_marker.then(|| names.rename("chi"));
    let mut parts = vec![flat.top.clone()];
    for (k, theta) in &flat.clauses {
        let ka = Atom(k.clone());
        let guard = |rhs: Formula| Formula::ag(Formula::implies(ka.clone(), rhs));
        parts.push(match theta {
            Ex(_) | Ax(_) => guard(theta.clone()),
            Ew(a, b) | Aw(a, b) => {
                let step = if matches!(theta, Ew(..)) {
                    Formula::ex(ka.clone())
                } else {
                    Formula::ax(ka.clone())
                };
                guard(Formula::or((**b).clone(), and_t((**a).clone(), step)))
            }
            Eu(a, b) | Au(a, b) => {
                let chi = Atom(chi.clone().expect("marker allocated for until clauses"));
                let step = if matches!(theta, Eu(..)) {
                    Formula::ex(chi.clone())
                } else {
                    Formula::ax(chi.clone())
                };
                let unfold = Formula::or((**b).clone(), and_t((**a).clone(), step));
                Formula::or(
                    Formula::ef(Formula::and(unfold, Formula::not(chi.clone()))),
                    guard(chi),
                )
            }
            other => return Err(ReduceError::Shape(format!("unexpected clause {other}"))),
        });
    }
    let mut inner: Vec<_> = flat
        .kappas()
        .map(|k| (QuantKind::Exists, k.clone(), None))
        .collect();
    if let Some(chi) = chi {
        inner.push((QuantKind::Forall, chi, None));
    }
    Ok(closed(flat, inner, Formula::and_all(parts)))
}

fn substitute_vectors(f: &Formula, vectors: &[Prop], bound: u64) -> Formula {
    match f {
        Atom(p) if vectors.contains(p) => VecCmp(p.clone(), CmpOp::Lt, bound),
        _ => f.map_children(|c| substitute_vectors(c, vectors, bound)),
    }
}

/// Rewrites implication clauses using distance bit vectors for the
/// least-fixpoint clauses, valid for structures with at most `bound` states.
pub fn replace_uw2(flat: &Flat, bound: usize) -> Result<Formula, ReduceError> {
    require_implications(flat)?;
    if bound == 0 {
        return Err(ReduceError::BoundTooSmall);
    }
    let n = bound as u64;
    let width = width_for(n);
    let vectors: Vec<Prop> = flat
        .clauses
        .iter()
        .filter(|(_, t)| matches!(t, Eu(..) | Au(..)))
        .map(|(k, _)| k.clone())
        .collect();
    let tilde = |f: &Formula| substitute_vectors(f, &vectors, n);
    let mut parts = vec![tilde(&flat.top)];
    for (k, theta) in &flat.clauses {
        let ka = Atom(k.clone());
        let guard = |rhs: Formula| Formula::ag(Formula::implies(ka.clone(), rhs));
        parts.push(match theta {
            Ex(a) => guard(Formula::ex(tilde(a))),
            Ax(a) => guard(Formula::ax(tilde(a))),
            Ew(a, b) | Aw(a, b) => {
                let step = if matches!(theta, Ew(..)) {
                    Formula::ex(ka.clone())
                } else {
                    Formula::ax(ka.clone())
                };
                guard(Formula::or(tilde(b), and_t(tilde(a), step)))
            }
            Eu(a, b) | Au(a, b) => {
                let eq = |d: u64| VecCmp(k.clone(), CmpOp::Eq, d);
                let mut layers = vec![Formula::implies(eq(0), tilde(b))];
                for d in 1..n {
                    let step = if matches!(theta, Eu(..)) {
                        Formula::ex(eq(d - 1))
                    } else {
                        Formula::ax(VecCmp(k.clone(), CmpOp::Lt, d))
                    };
                    layers.push(Formula::implies(eq(d), and_t(tilde(a), step)));
                }
                Formula::ag(Formula::and_all(layers))
            }
            other => return Err(ReduceError::Shape(format!("unexpected clause {other}"))),
        });
    }
    let inner = flat
        .kappas()
        .map(|k| {
            (
                QuantKind::Exists,
                k.clone(),
                vectors.contains(k).then_some(width),
            )
        })
        .collect();
    Ok(closed(flat, inner, Formula::and_all(parts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qctl::{flat2, parse_qctl, prenex_boolean, to_nnf, Prenex};

    fn p(s: &str) -> Formula {
        parse_qctl(s).unwrap()
    }

    fn flat2_of(s: &str, names: &mut FreshNames) -> Flat {
        let pre = prenex_boolean(&p(s)).unwrap();
        let pre = Prenex {
            prefix: pre.prefix,
            body: to_nnf(&pre.body),
        };
        flat2(&pre, names).unwrap()
    }

    #[test]
    fn fpc_until_shape() {
        let got = fpc(&p("E [a U b]"), &mut FreshNames::default());
        assert_eq!(got, p("forall z1. (A G (z1 <-> (b | (a & E X z1))) -> z1)"));
        assert_eq!(fpc(&p("E X a"), &mut FreshNames::default()), p("E X a"));
    }

    #[test]
    fn fpc_height_grows_by_at_most_one() {
        use crate::qctl::temporal_height;
        let boolean_leaves = [
            "E [a U b]",
            "A [a U (b & ~c)]",
            "E F a",
            "E [a U b] & E X c",
        ];
        for s in boolean_leaves {
            let f = p(s);
            let got = temporal_height(&fpc(&f, &mut FreshNames::default()));
            assert_eq!(got, temporal_height(&f) + 1, "{s}");
        }
        let nested = [
            "E [a U E X b]",
            "E [a U E [b U c]]",
            "A X E [a U b]",
            "E X a",
        ];
        for s in nested {
            let f = p(s);
            let got = temporal_height(&fpc(&f, &mut FreshNames::default()));
            assert!(got <= temporal_height(&f) + 1, "{s}: {got}");
        }
    }

    #[test]
    fn fpc_numbers_markers_in_preorder() {
        let got = fpc(&p("E F (k1 & E [a U b])"), &mut FreshNames::default());
        let want = p(
            "forall z1. (A G (z1 <-> ((k1 & forall z2. (A G (z2 <-> (b | (a & E X z2))) -> z2)) | E X z1)) -> z1)",
        );
        assert_eq!(got, want);
    }

    #[test]
    fn replace_uw_worked_example() {
        let mut names = FreshNames::default();
        let flat = flat2_of("E F (E [a U b] & A [c W (E X d)])", &mut names);
        let got = replace_uw(&flat, &mut names).unwrap();
        let want = p(
            "exists k1. exists k2. exists k3. forall chi. (E F (k1 & k3) \
             & (E F ((b | (a & E X chi)) & ~chi) | A G (k1 -> chi)) \
             & A G (k2 -> E X d) & A G (k3 -> (k2 | (c & A X k3))))",
        );
        assert_eq!(got, want);
    }

    #[test]
    fn replace_uw_without_until_has_no_marker() {
        let mut names = FreshNames::default();
        let flat = flat2_of("E F (E X E X c)", &mut names);
        let got = replace_uw(&flat, &mut names).unwrap();
        assert!(!got.to_string().contains("chi"));
    }

    #[test]
    fn replace_uw2_until_layers() {
        let mut names = FreshNames::default();
        let flat = flat2_of("E X E [a U b]", &mut names);
        let got = replace_uw2(&flat, 2).unwrap();
        let k = Prop::new("k1");
        let cmp = |op, d| VecCmp(k.clone(), op, d);
        let layers = Formula::and(
            Formula::implies(cmp(CmpOp::Eq, 0), p("b")),
            Formula::implies(
                cmp(CmpOp::Eq, 1),
                Formula::and(p("a"), Formula::ex(cmp(CmpOp::Eq, 0))),
            ),
        );
        let want = VecExists(
            k.clone(),
            2,
            Box::new(Formula::and(
                Formula::ex(cmp(CmpOp::Lt, 2)),
                Formula::ag(layers),
            )),
        );
        assert_eq!(got, want);
    }
}

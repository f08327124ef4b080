//! Renaming and operator normalisations.

use std::collections::BTreeSet;

use super::{props_of, Formula, Prop, QuantKind};
use Formula::*;

/// Generator of names not yet in use.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    used: BTreeSet<String>,
}

impl FreshNames {
    pub fn new<'a>(used: impl IntoIterator<Item = &'a str>) -> Self {
        FreshNames {
            used: used.into_iter().map(str::to_string).collect(),
        }
    }

    /// Collects every proposition of `f`, bound or free.
    pub fn avoiding(f: &Formula, extra: impl IntoIterator<Item = Prop>) -> Self {
        let mut names = FreshNames::default();
        names.reserve_formula(f);
        for p in extra {
            names.reserve(p.as_str());
        }
        names
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn reserve_formula(&mut self, f: &Formula) {
        match f {
            Atom(p) | Uniq(p) | VecCmp(p, ..) | Quant(_, p, _) | VecExists(p, ..) => {
                self.used.insert(p.to_string());
            }
            _ => {}
        }
        for c in f.children() {
            self.reserve_formula(c);
        }
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    /// `stem` itself if free, else `stem_1`, `stem_2`, ...
    pub fn rename(&mut self, stem: &str) -> Prop {
        if self.used.insert(stem.to_string()) {
            return Prop::new(stem);
        }
        self.numbered(&format!("{stem}_"), 1)
    }

    /// First unused `<prefix><n>` with n counting from `start`.
    pub fn numbered(&mut self, prefix: &str, start: usize) -> Prop {
        let mut n = start;
        loop {
            let cand = format!("{prefix}{n}");
            if self.used.insert(cand.clone()) {
                return Prop::new(&cand);
            }
            n += 1;
        }
    }
}

/// Renames bound propositions so that each quantifier binds a distinct name
/// that is neither free in the formula nor in `reserved`.
pub fn freshen(f: &Formula, reserved: &BTreeSet<Prop>) -> Formula {
    let mut names = FreshNames::default();
    for p in reserved.iter().chain(props_of(f).iter()) {
        names.reserve(p.as_str());
    }
    fn go(f: &Formula, names: &mut FreshNames, scope: &mut Vec<(Prop, Prop)>) -> Formula {
        match f {
            Atom(p) | Uniq(p) | VecCmp(p, ..) => {
                let target = scope
                    .iter()
                    .rev()
                    .find(|(from, _)| from == p)
                    .map(|(_, to)| to.clone());
                match (f, target) {
                    (_, None) => f.clone(),
                    (Atom(_), Some(t)) => Atom(t),
                    (Uniq(_), Some(t)) => Uniq(t),
                    (VecCmp(_, op, d), Some(t)) => VecCmp(t, *op, *d),
                    _ => unreachable!(),
                }
            }
            Quant(k, p, body) => {
                let new = names.rename(p.as_str());
                scope.push((p.clone(), new.clone()));
                let body = go(body, names, scope);
                scope.pop();
                Quant(*k, new, Box::new(body))
            }
            VecExists(p, w, body) => {
                let new = names.rename(p.as_str());
                scope.push((p.clone(), new.clone()));
                let body = go(body, names, scope);
                scope.pop();
                VecExists(new, *w, Box::new(body))
            }
            _ => f.map_children(|c| go(c, names, scope)),
        }
    }
    go(f, &mut names, &mut Vec::new())
}

/// Replaces counting quantifiers by plain ones guarded with `Uniq`.
pub fn desugar_counting(f: &Formula) -> Formula {
    match f {
        Quant(QuantKind::Exists1, p, body) => Formula::exists(
            p.as_str(),
            Formula::and(Uniq(p.clone()), desugar_counting(body)),
        ),
        Quant(QuantKind::Forall1, p, body) => Formula::forall(
            p.as_str(),
            Formula::implies(Uniq(p.clone()), desugar_counting(body)),
        ),
        _ => f.map_children(desugar_counting),
    }
}

/// Rewrites to the modalities handled natively by the translation:
/// EX, AX, EF, AG, EU and AU.
pub fn normalize_core(f: &Formula) -> Formula {
    let n = |x: &Formula| normalize_core(x);
    match f {
        Af(a) => Formula::au(True, n(a)),
        Eg(a) => Formula::not(Formula::au(True, Formula::not(n(a)))),
        Ew(a, b) => {
            let (a, b) = (n(a), n(b));
            let nb = Formula::not(b);
            Formula::not(Formula::au(nb.clone(), Formula::and(nb, Formula::not(a))))
        }
        Aw(a, b) => {
            let (a, b) = (n(a), n(b));
            let nb = Formula::not(b);
            Formula::not(Formula::eu(nb.clone(), Formula::and(nb, Formula::not(a))))
        }
        _ => f.map_children(n),
    }
}

/// Negation normal form over literals, conjunction, disjunction, quantifiers,
/// EX, AX, EU, AU, EW and AW.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    let pos = |x: &Formula| nnf(x, false);
    let ng = |x: &Formula| nnf(x, true);
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(_) | Uniq(_) | VecCmp(..), false) => f.clone(),
        (Atom(_) | Uniq(_) | VecCmp(..), true) => Formula::not(f.clone()),
        (Not(a), _) => nnf(a, !neg),
        (And(a, b), false) | (Or(a, b), true) => Formula::and(nnf(a, neg), nnf(b, neg)),
        (Or(a, b), false) | (And(a, b), true) => Formula::or(nnf(a, neg), nnf(b, neg)),
        (Implies(a, b), false) => Formula::or(ng(a), pos(b)),
        (Implies(a, b), true) => Formula::and(pos(a), ng(b)),
        (Iff(a, b), false) => Formula::and(Formula::or(ng(a), pos(b)), Formula::or(pos(a), ng(b))),
        (Iff(a, b), true) => Formula::or(Formula::and(pos(a), ng(b)), Formula::and(ng(a), pos(b))),
        (Ex(a), false) | (Ax(a), true) => Formula::ex(nnf(a, neg)),
        (Ax(a), false) | (Ex(a), true) => Formula::ax(nnf(a, neg)),
        (Ef(a), false) | (Ag(a), true) => Formula::eu(True, nnf(a, neg)),
        (Af(a), false) | (Eg(a), true) => Formula::au(True, nnf(a, neg)),
        (Ag(a), false) | (Ef(a), true) => Formula::aw(nnf(a, neg), False),
        (Eg(a), false) | (Af(a), true) => Formula::ew(nnf(a, neg), False),
        (Eu(a, b), false) => Formula::eu(pos(a), pos(b)),
        (Au(a, b), false) => Formula::au(pos(a), pos(b)),
        (Ew(a, b), false) => Formula::ew(pos(a), pos(b)),
        (Aw(a, b), false) => Formula::aw(pos(a), pos(b)),
        // not E[a U b] is A[~b W (~b & ~a)], and the other three duals likewise
        (Eu(a, b), true) => Formula::aw(ng(b), Formula::and(ng(b), ng(a))),
        (Au(a, b), true) => Formula::ew(ng(b), Formula::and(ng(b), ng(a))),
        (Ew(a, b), true) => Formula::au(ng(b), Formula::and(ng(b), ng(a))),
        (Aw(a, b), true) => Formula::eu(ng(b), Formula::and(ng(b), ng(a))),
        (Quant(k, p, a), _) => {
            let k = if neg { k.dual() } else { *k };
            Quant(k, p.clone(), Box::new(nnf(a, neg)))
        }
        (VecExists(p, w, a), false) => VecExists(p.clone(), *w, Box::new(pos(a))),
        (VecExists(..), true) => Formula::not(f.clone()),
    }
}

/// Checks that negation only applies to atoms, `Uniq` and comparators, and
/// that no operator outside the NNF set occurs.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Not(a) => matches!(**a, Atom(_) | Uniq(_) | VecCmp(..)),
        Implies(..) | Iff(..) | Ef(..) | Af(..) | Eg(..) | Ag(..) => false,
        _ => f.children().into_iter().all(is_nnf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qctl::parse_qctl;

    fn p(s: &str) -> Formula {
        parse_qctl(s).unwrap()
    }

    #[test]
    fn freshen_capture_avoidance() {
        let none = BTreeSet::new();
        assert_eq!(
            freshen(&p("exists p. exists p. p"), &none),
            p("exists p. exists p_1. p_1")
        );
        assert_eq!(
            freshen(&p("exists p. (p & forall p. ~p)"), &none),
            p("exists p. (p & forall p_1. ~p_1)")
        );
        let plain = p("E X a & b");
        assert_eq!(freshen(&plain, &none), plain);
    }

    #[test]
    fn freshen_avoids_structure_props_and_free_props() {
        let reserved: BTreeSet<Prop> = [Prop::new("a")].into();
        assert_eq!(freshen(&p("exists a. a"), &reserved), p("exists a_1. a_1"));
        assert_eq!(
            freshen(&p("q & exists q. q"), &BTreeSet::new()),
            p("q & exists q_1. q_1")
        );
    }

    #[test]
    fn freshen_idempotent() {
        let f = freshen(
            &p("exists p. exists p. E X p & forall p. p"),
            &BTreeSet::new(),
        );
        assert_eq!(freshen(&f, &BTreeSet::new()), f);
    }

    #[test]
    fn nnf_duals() {
        assert_eq!(to_nnf(&p("~E X a")), p("A X ~a"));
        assert_eq!(to_nnf(&p("~A [a U b]")), p("E [~b W ~b & ~a]"));
        assert_eq!(to_nnf(&p("~exists q. q & a")), p("forall q. ~q | ~a"));
        assert_eq!(to_nnf(&p("~exists1 q. q")), p("forall1 q. ~q"));
        assert!(is_nnf(&to_nnf(&p("~(a <-> A G E F b)"))));
    }

    #[test]
    fn core_normalisation_removes_weak_and_derived() {
        let f = normalize_core(&p("A F a & E G b | E [a W b] | A [a W b]"));
        fn ok(f: &Formula) -> bool {
            !matches!(f, Af(_) | Eg(_) | Ew(..) | Aw(..)) && f.children().into_iter().all(ok)
        }
        assert!(ok(&f));
    }

    #[test]
    fn fresh_names_skip_used() {
        let mut n = FreshNames::new(["k1", "k3"]);
        assert_eq!(n.numbered("k", 1).as_str(), "k2");
        assert_eq!(n.numbered("k", 1).as_str(), "k4");
        assert_eq!(n.rename("z").as_str(), "z");
        assert_eq!(n.rename("z").as_str(), "z_1");
    }
}

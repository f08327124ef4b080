//! Counting abbreviations expressed with propositional quantification.

use super::{Formula, FreshNames};

fn fresh(names: &mut FreshNames, phi: &Formula, stem: &str) -> String {
    names.reserve_formula(phi);
    names.rename(stem).to_string()
}

/// Exactly one reachable state satisfies `phi`:
/// `EF phi & forall p. (EF (p & phi) -> AG (phi -> p))`.
pub fn unique_f(phi: &Formula, names: &mut FreshNames) -> Formula {
    let p = fresh(names, phi, "u");
    let pa = Formula::atom(&p);
    Formula::and(
        Formula::ef(phi.clone()),
        Formula::forall(
            &p,
            Formula::implies(
                Formula::ef(Formula::and(pa.clone(), phi.clone())),
                Formula::ag(Formula::implies(phi.clone(), pa)),
            ),
        ),
    )
}

/// Exactly one successor satisfies `phi`.
pub fn unique_x(phi: &Formula, names: &mut FreshNames) -> Formula {
    let p = fresh(names, phi, "u");
    let pa = Formula::atom(&p);
    Formula::and(
        Formula::ex(phi.clone()),
        Formula::forall(
            &p,
            Formula::implies(
                Formula::ex(Formula::and(phi.clone(), pa.clone())),
                Formula::ax(Formula::implies(phi.clone(), pa)),
            ),
        ),
    )
}

/// At least `k` successors satisfy `phi`. For `k = 0` this is `true`.
pub fn atleast_k_x(k: usize, phi: &Formula, names: &mut FreshNames) -> Formula {
    names.reserve_formula(phi);
    let ps: Vec<String> = (0..k).map(|_| names.numbered("c", 1).to_string()).collect();
    let marks = (0..k).map(|i| {
        let others = (0..k)
            .filter(|&j| j != i)
            .map(|j| Formula::not(Formula::atom(&ps[j])));
        Formula::ex(Formula::and_all(
            std::iter::once(Formula::atom(&ps[i])).chain(others),
        ))
    });
    let covered = Formula::ax(Formula::implies(
        Formula::or_all(ps.iter().map(|p| Formula::atom(p))),
        phi.clone(),
    ));
    let body = Formula::and(Formula::and_all(marks), covered);
    ps.iter().rev().fold(body, |acc, p| Formula::exists(p, acc))
}

/// Exactly `k` successors satisfy `phi`.
pub fn exactly_k_x(k: usize, phi: &Formula, names: &mut FreshNames) -> Formula {
    let lo = atleast_k_x(k, phi, names);
    let hi = atleast_k_x(k + 1, phi, names);
    Formula::and(lo, Formula::not(hi))
}

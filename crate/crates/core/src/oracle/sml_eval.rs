use std::collections::BTreeSet;

use crate::kripke::{Kripke, StateId};
use crate::sml::Sml;

/// Deleted edges.
pub type EdgeSet = BTreeSet<(StateId, StateId)>;

/// Direct sabotage semantics at `x` with the edges in `deleted` removed.
pub fn mc_sml(k: &Kripke, x: StateId, f: &Sml, deleted: &EdgeSet) -> bool {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || eval(k, x, f, deleted))
}

fn eval(k: &Kripke, x: StateId, f: &Sml, deleted: &EdgeSet) -> bool {
    let live = |a: StateId, b: StateId| !deleted.contains(&(a, b));
    let next = || k.successors(x).iter().copied().filter(move |&y| live(x, y));
    let removable = |local: bool| -> Vec<(StateId, StateId)> {
        k.edges()
            .filter(|&(a, b)| live(a, b) && (!local || a == x))
            .collect()
    };
    let with = |e: (StateId, StateId)| {
        let mut d = deleted.clone();
        d.insert(e);
        d
    };
    match f {
        Sml::True => true,
        Sml::Atom(p) => k.has_label(x, p.as_str()),
        Sml::Not(a) => !mc_sml(k, x, a, deleted),
        Sml::And(a, b) => mc_sml(k, x, a, deleted) && mc_sml(k, x, b, deleted),
        Sml::Diamond(a) => next().any(|y| mc_sml(k, y, a, deleted)),
        Sml::Square(a) => next().all(|y| mc_sml(k, y, a, deleted)),
        Sml::SabotageSome(a) => removable(false)
            .into_iter()
            .any(|e| mc_sml(k, x, a, &with(e))),
        Sml::SabotageEvery(a) => removable(false)
            .into_iter()
            .all(|e| mc_sml(k, x, a, &with(e))),
        Sml::LocalSabotageSome(a) => removable(true)
            .into_iter()
            .any(|e| mc_sml(k, x, a, &with(e))),
        Sml::LocalSabotageEvery(a) => removable(true)
            .into_iter()
            .all(|e| mc_sml(k, x, a, &with(e))),
    }
}

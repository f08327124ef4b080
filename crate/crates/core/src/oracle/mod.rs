//! Ground truth by enumeration: QCTL satisfaction sets, closed QBF validity
//! and sabotage modal logic.

mod qbf_eval;
mod sml_eval;

use std::collections::HashMap;

use thiserror::Error;

use crate::kripke::{Kripke, StateId, StateSet};
use crate::par::Exec;
use crate::qctl::{CmpOp, Formula, Prop, QuantKind};

pub use qbf_eval::{eval_qbf, eval_qbf_capped, DEFAULT_QBF_CAP};
pub use sml_eval::{mc_sml, EdgeSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle budget exceeded: about {estimate:.3e} evaluations, limit {limit:.3e}")]
    Budget { estimate: f64, limit: f64 },
    #[error("structure too large for labelling enumeration: {0} states")]
    TooManyStates(usize),
    #[error("vector proposition {0} is not bound")]
    UnboundVector(String),
}

/// Values of quantified propositions and bit vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    pub props: HashMap<Prop, StateSet>,
    pub vectors: HashMap<Prop, Vec<u64>>,
}

impl Environment {
    pub fn with_prop(&self, p: &Prop, set: StateSet) -> Environment {
        let mut e = self.clone();
        e.props.insert(p.clone(), set);
        e
    }

    fn with_vector(&self, p: &Prop, values: Vec<u64>) -> Environment {
        let mut e = self.clone();
        e.vectors.insert(p.clone(), values);
        e
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Upper bound on the estimated number of subformula evaluations.
    pub max_work: f64,
    pub exec: Exec,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_work: 1e8,
            exec: Exec::default(),
        }
    }
}

/// States satisfying `f` under `env`, with the default budget.
pub fn mc_qctl(k: &Kripke, f: &Formula, env: &Environment) -> Result<StateSet, OracleError> {
    mc_qctl_with(k, f, env, &OracleConfig::default())
}

/// Whether `f` holds at the initial state.
pub fn holds(k: &Kripke, f: &Formula) -> Result<bool, OracleError> {
    Ok(mc_qctl(k, f, &Environment::default())?.contains(k.init()))
}

pub fn mc_qctl_with(
    k: &Kripke,
    f: &Formula,
    env: &Environment,
    cfg: &OracleConfig,
) -> Result<StateSet, OracleError> {
    let estimate = work(f, k.num_states());
    if estimate > cfg.max_work {
        return Err(OracleError::Budget {
            estimate,
            limit: cfg.max_work,
        });
    }
    Checker { k, exec: cfg.exec }.sat(f, env)
}

/// Estimated evaluation count: labelling enumeration multiplies.
fn work(f: &Formula, n: usize) -> f64 {
    let n = n as f64;
    let inner: f64 = f.children().iter().map(|c| work(c, n as usize)).sum();
    match f {
        Formula::Quant(QuantKind::Exists | QuantKind::Forall, ..) => 2f64.powf(n) * inner,
        Formula::Quant(..) => n * inner,
        Formula::VecExists(_, w, _) => 2f64.powf(*w as f64 * n) * inner,
        _ => 1.0 + inner,
    }
}

struct Checker<'k> {
    k: &'k Kripke,
    exec: Exec,
}

impl Checker<'_> {
    fn n(&self) -> usize {
        self.k.num_states()
    }

    fn pre_exists(&self, s: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.n());
        for x in self.k.states() {
            if self.k.successors(x).iter().any(|&y| s.contains(y)) {
                out.insert(x);
            }
        }
        out
    }

    fn pre_forall(&self, s: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.n());
        for x in self.k.states() {
            if self.k.successors(x).iter().all(|&y| s.contains(y)) {
                out.insert(x);
            }
        }
        out
    }

    /// Fixpoint of `Z = b | (a & pre(Z))`, least from the empty set or
    /// greatest from the full set.
    fn fixpoint(&self, a: &StateSet, b: &StateSet, universal: bool, greatest: bool) -> StateSet {
        let mut z = if greatest {
            StateSet::full(self.n())
        } else {
            StateSet::empty(self.n())
        };
        loop {
            let mut next = if universal {
                self.pre_forall(&z)
            } else {
                self.pre_exists(&z)
            };
            next.intersect_with(a);
            next.union_with(b);
            if next == z {
                return z;
            }
            z = next;
        }
    }

    fn sat(&self, f: &Formula, env: &Environment) -> Result<StateSet, OracleError> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.sat_inner(f, env))
    }

    fn sat_inner(&self, f: &Formula, env: &Environment) -> Result<StateSet, OracleError> {
        use Formula::*;
        let n = self.n();
        let full = StateSet::full(n);
        Ok(match f {
            True => full,
            False => StateSet::empty(n),
            Atom(p) => match env.props.get(p) {
                Some(s) => s.clone(),
                None => self.k.label_set(p.as_str()),
            },
            Not(a) => self.sat(a, env)?.complement(),
            And(a, b) => {
                let mut s = self.sat(a, env)?;
                s.intersect_with(&self.sat(b, env)?);
                s
            }
            Or(a, b) => {
                let mut s = self.sat(a, env)?;
                s.union_with(&self.sat(b, env)?);
                s
            }
            Implies(a, b) => {
                let mut s = self.sat(a, env)?.complement();
                s.union_with(&self.sat(b, env)?);
                s
            }
            Iff(a, b) => {
                let (sa, sb) = (self.sat(a, env)?, self.sat(b, env)?);
                let mut out = StateSet::empty(n);
                for x in self.k.states() {
                    if sa.contains(x) == sb.contains(x) {
                        out.insert(x);
                    }
                }
                out
            }
            Ex(a) => self.pre_exists(&self.sat(a, env)?),
            Ax(a) => self.pre_forall(&self.sat(a, env)?),
            Ef(a) => self.fixpoint(&full, &self.sat(a, env)?, false, false),
            Af(a) => self.fixpoint(&full, &self.sat(a, env)?, true, false),
            Eg(a) => self.fixpoint(&self.sat(a, env)?, &StateSet::empty(n), false, true),
            Ag(a) => self.fixpoint(&self.sat(a, env)?, &StateSet::empty(n), true, true),
            Eu(a, b) => self.fixpoint(&self.sat(a, env)?, &self.sat(b, env)?, false, false),
            Au(a, b) => self.fixpoint(&self.sat(a, env)?, &self.sat(b, env)?, true, false),
            Ew(a, b) => self.fixpoint(&self.sat(a, env)?, &self.sat(b, env)?, false, true),
            Aw(a, b) => self.fixpoint(&self.sat(a, env)?, &self.sat(b, env)?, true, true),
            Uniq(p) => {
                let marked = match env.props.get(p) {
                    Some(s) => s.clone(),
                    None => self.k.label_set(p.as_str()),
                };
                let mut out = StateSet::empty(n);
                for x in self.k.states() {
                    let mut r = self.k.reach(x).clone();
                    r.intersect_with(&marked);
                    if r.len() == 1 {
                        out.insert(x);
                    }
                }
                out
            }
            VecCmp(p, op, d) => {
                let values = env
                    .vectors
                    .get(p)
                    .ok_or_else(|| OracleError::UnboundVector(p.to_string()))?;
                let mut out = StateSet::empty(n);
                for x in self.k.states() {
                    let v = values[x.index()];
                    if match op {
                        CmpOp::Eq => v == *d,
                        CmpOp::Lt => v < *d,
                    } {
                        out.insert(x);
                    }
                }
                out
            }
            Quant(kind, p, body) => self.quantifier(*kind, p, body, env)?,
            VecExists(p, w, body) => {
                let width = (*w as usize) * n;
                if width > 30 {
                    return Err(OracleError::TooManyStates(n));
                }
                let mask = (1u64 << *w) - 1;
                let sets = self.exec.map_range(1u64 << width, |code| {
                    let values = (0..n).map(|i| (code >> (i * *w as usize)) & mask).collect();
                    self.sat(body, &env.with_vector(p, values))
                });
                let mut out = StateSet::empty(n);
                for s in sets {
                    out.union_with(&s?);
                }
                out
            }
        })
    }

    fn quantifier(
        &self,
        kind: QuantKind,
        p: &Prop,
        body: &Formula,
        env: &Environment,
    ) -> Result<StateSet, OracleError> {
        let n = self.n();
        match kind {
            QuantKind::Exists | QuantKind::Forall => {
                if n > 24 {
                    return Err(OracleError::TooManyStates(n));
                }
                let sets = self.exec.map_range(1u64 << n, |mask| {
                    let mut v = StateSet::empty(n);
                    for i in 0..n {
                        if mask >> i & 1 == 1 {
                            v.insert(StateId(i));
                        }
                    }
                    self.sat(body, &env.with_prop(p, v))
                });
                let existential = kind == QuantKind::Exists;
                let mut out = if existential {
                    StateSet::empty(n)
                } else {
                    StateSet::full(n)
                };
                for s in sets {
                    let s = s?;
                    if existential {
                        out.union_with(&s);
                    } else {
                        out.intersect_with(&s);
                    }
                }
                Ok(out)
            }
            QuantKind::Exists1 | QuantKind::Forall1 => {
                // only the reachable part of a labelling matters, so the
                // candidates are the singletons of each reachable state
                let singles: Vec<StateId> = self.k.states().collect();
                let sets = self.exec.map(&singles, |&y| {
                    self.sat(body, &env.with_prop(p, StateSet::singleton(n, y)))
                });
                let sets = sets.into_iter().collect::<Result<Vec<_>, _>>()?;
                let existential = kind == QuantKind::Exists1;
                let mut out = StateSet::empty(n);
                for x in self.k.states() {
                    let mut reach = self.k.reach(x).iter();
                    let ok = if existential {
                        reach.any(|y| sets[y.index()].contains(x))
                    } else {
                        reach.all(|y| sets[y.index()].contains(x))
                    };
                    if ok {
                        out.insert(x);
                    }
                }
                Ok(out)
            }
        }
    }
}

//! The shared translation of a formula at a state into a circuit.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::kripke::{Kripke, StateId, StateSet};
use crate::qbf::{CircuitBuilder, CircuitMeta, NodeId, QbfCircuit, Quantifier, VarId};
use crate::qctl::{CmpOp, Formula, Prop, QuantKind};

use super::bitvec::{bitvec_eq, bitvec_lt, width_for};
use super::names::VarNamer;
use super::{ReduceError, UniqEncoding};

/// Options of the translation besides the structure and the state.
#[derive(Debug, Clone, Default)]
pub struct HatOptions {
    pub uniq: UniqEncoding,
    /// Propositions bound by counting quantifiers; with the bit-vector
    /// encoding they get a state number instead of one variable per state.
    pub uniq_props: BTreeSet<Prop>,
    pub max_gates: Option<usize>,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone)]
enum Binding {
    PerState(Vec<VarId>),
    /// Number of the single marked state, zero for none.
    Number(Vec<VarId>),
    /// One bit vector per state.
    Vector(Vec<Vec<VarId>>),
}

type Key = (usize, usize, Option<StateSet>, u32);

struct Hat<'a> {
    k: &'a Kripke,
    opts: &'a HatOptions,
    b: CircuitBuilder,
    scope: Vec<(Prop, Binding)>,
    env: u32,
    next_env: u32,
    memo: HashMap<Key, NodeId>,
    instances: HashMap<Prop, usize>,
    steps: usize,
}

/// Translates `f` at state `x`. Formulas must use only EX, AX, EF, AG, EU
/// and AU, and counting quantifiers must be desugared.
pub fn hat_translate(
    k: &Kripke,
    x: StateId,
    f: &Formula,
    opts: &HatOptions,
    meta: CircuitMeta,
) -> Result<QbfCircuit, ReduceError> {
    if x.index() >= k.num_states() {
        return Err(ReduceError::UnknownState(x.index()));
    }
    let mut h = Hat {
        k,
        opts,
        b: CircuitBuilder::new(),
        scope: Vec::new(),
        env: 0,
        next_env: 1,
        memo: HashMap::new(),
        instances: HashMap::new(),
        steps: 0,
    };
    let root = h.tr(f, x)?;
    Ok(h.b.finish(root, meta))
}

impl Hat<'_> {
    fn budget(&mut self) -> Result<(), ReduceError> {
        self.steps += 1;
        if let Some(limit) = self.opts.max_gates {
            if self.b.num_nodes() > limit {
                return Err(ReduceError::TooLarge { limit });
            }
        }
        if self.steps.is_multiple_of(1024) {
            if let Some(d) = self.opts.deadline {
                if Instant::now() >= d {
                    return Err(ReduceError::Timeout);
                }
            }
        }
        Ok(())
    }

    fn lookup(&self, p: &Prop) -> Option<&Binding> {
        self.scope
            .iter()
            .rev()
            .find(|(q, _)| q == p)
            .map(|(_, b)| b)
    }

    fn lits(&mut self, vars: &[VarId]) -> Vec<NodeId> {
        vars.iter().map(|&v| self.b.lit(v)).collect()
    }

    fn tr(&mut self, f: &Formula, x: StateId) -> Result<NodeId, ReduceError> {
        stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || {
            let key = (f as *const Formula as usize, x.index(), None, self.env);
            if let Some(&n) = self.memo.get(&key) {
                return Ok(n);
            }
            self.budget()?;
            let n = self.tr_inner(f, x)?;
            self.memo.insert(key, n);
            Ok(n)
        })
    }

    fn over<I>(&mut self, f: &Formula, states: I, conj: bool) -> Result<NodeId, ReduceError>
    where
        I: IntoIterator<Item = StateId>,
    {
        let mut parts = Vec::new();
        for y in states {
            parts.push(self.tr(f, y)?);
        }
        Ok(if conj {
            self.b.and(parts)
        } else {
            self.b.or(parts)
        })
    }

    fn tr_inner(&mut self, f: &Formula, x: StateId) -> Result<NodeId, ReduceError> {
        use Formula::*;
        let k = self.k;
        Ok(match f {
            True => self.b.constant(true),
            False => self.b.constant(false),
            Atom(p) => match self.lookup(p).cloned() {
                Some(Binding::PerState(vs)) => self.b.lit(vs[x.index()]),
                Some(Binding::Number(bits)) => {
                    let bits = self.lits(&bits);
                    bitvec_eq(&mut self.b, &bits, x.index() as u64 + 1)?
                }
                Some(Binding::Vector(_)) => {
                    return Err(ReduceError::Shape(format!(
                        "vector proposition {p} used as an atom"
                    )))
                }
                None => self.b.constant(k.has_label(x, p.as_str())),
            },
            Not(a) => {
                let a = self.tr(a, x)?;
                self.b.not(a)
            }
            And(a, c) | Or(a, c) | Implies(a, c) | Iff(a, c) => {
                let l = self.tr(a, x)?;
                let r = self.tr(c, x)?;
                match f {
                    And(..) => self.b.and2(l, r),
                    Or(..) => self.b.or2(l, r),
                    Implies(..) => self.b.implies(l, r),
                    _ => self.b.iff(l, r),
                }
            }
            Ex(a) => self.over(a, k.successors(x).to_vec(), false)?,
            Ax(a) => self.over(a, k.successors(x).to_vec(), true)?,
            Ef(a) => self.over(a, k.reach(x).iter().collect::<Vec<_>>(), false)?,
            Ag(a) => self.over(a, k.reach(x).iter().collect::<Vec<_>>(), true)?,
            Eu(a, c) | Au(a, c) => {
                let visited = StateSet::singleton(k.num_states(), x);
                self.until(f, a, c, x, visited, matches!(f, Au(..)))?
            }
            Af(..) | Eg(..) | Ew(..) | Aw(..) => {
                return Err(ReduceError::Shape(format!(
                    "modality must be normalized before translation: {f}"
                )))
            }
            Quant(kind @ (QuantKind::Exists | QuantKind::Forall), p, body) => {
                let q = if *kind == QuantKind::Exists {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let inst = self.instance(p);
                let n = k.num_states();
                let (binding, vars) = if self.opts.uniq == UniqEncoding::Bitvector
                    && self.opts.uniq_props.contains(p)
                {
                    let w = width_for(n as u64) as usize;
                    let vars = (0..w)
                        .map(|j| self.b.new_var(&VarNamer::uniq_bit(p, inst, j)))
                        .collect::<Result<Vec<_>, _>>()?;
                    (Binding::Number(vars.clone()), vars)
                } else {
                    let vars = (0..n)
                        .map(|i| self.b.new_var(&VarNamer::prop_at(p, inst, i)))
                        .collect::<Result<Vec<_>, _>>()?;
                    (Binding::PerState(vars.clone()), vars)
                };
                let body = self.scoped(p, binding, |h| h.tr(body, x))?;
                self.b.quant(q, vars, body)
            }
            Quant(..) => {
                return Err(ReduceError::Shape(
                    "counting quantifier must be desugared".into(),
                ))
            }
            VecExists(p, w, body) => {
                let inst = self.instance(p);
                let mut per_state = Vec::with_capacity(k.num_states());
                let mut all = Vec::new();
                for i in 0..k.num_states() {
                    let bits = (0..*w as usize)
                        .map(|j| self.b.new_var(&VarNamer::vector_bit(p, inst, j, i)))
                        .collect::<Result<Vec<_>, _>>()?;
                    all.extend(bits.iter().copied());
                    per_state.push(bits);
                }
                let body = self.scoped(p, Binding::Vector(per_state), |h| h.tr(body, x))?;
                self.b.quant(Quantifier::Exists, all, body)
            }
            VecCmp(p, op, d) => {
                let bits = match self.lookup(p) {
                    Some(Binding::Vector(v)) => v[x.index()].clone(),
                    Some(Binding::Number(v)) => v.clone(),
                    _ => {
                        return Err(ReduceError::Shape(format!(
                            "comparison on unbound vector {p}"
                        )))
                    }
                };
                let bits = self.lits(&bits);
                match op {
                    CmpOp::Eq => bitvec_eq(&mut self.b, &bits, *d)?,
                    CmpOp::Lt => bitvec_lt(&mut self.b, &bits, *d)?,
                }
            }
            Uniq(p) => self.uniq(p, x)?,
        })
    }

    fn instance(&mut self, p: &Prop) -> usize {
        let c = self.instances.entry(p.clone()).or_insert(0);
        *c += 1;
        *c - 1
    }

    fn scoped<R>(&mut self, p: &Prop, binding: Binding, body: impl FnOnce(&mut Self) -> R) -> R {
        let saved = self.env;
        self.env = self.next_env;
        self.next_env += 1;
        self.scope.push((p.clone(), binding));
        let r = body(self);
        self.scope.pop();
        self.env = saved;
        r
    }

    fn until(
        &mut self,
        f: &Formula,
        a: &Formula,
        c: &Formula,
        x: StateId,
        visited: StateSet,
        universal: bool,
    ) -> Result<NodeId, ReduceError> {
        stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || {
            let key = (
                f as *const Formula as usize,
                x.index(),
                Some(visited.clone()),
                self.env,
            );
            if let Some(&n) = self.memo.get(&key) {
                return Ok(n);
            }
            self.budget()?;
            let goal = self.tr(c, x)?;
            let succ = self.k.successors(x).to_vec();
            let n = if universal && succ.iter().any(|&y| visited.contains(y)) {
                goal
            } else {
                let mut parts = Vec::new();
                for y in succ {
                    if visited.contains(y) {
                        continue;
                    }
                    let mut next = visited.clone();
                    next.insert(y);
                    parts.push(self.until(f, a, c, y, next, universal)?);
                }
                let step = if universal {
                    self.b.and(parts)
                } else {
                    self.b.or(parts)
                };
                let here = self.tr(a, x)?;
                let cont = self.b.and2(here, step);
                self.b.or2(goal, cont)
            };
            self.memo.insert(key, n);
            Ok(n)
        })
    }

    fn uniq(&mut self, p: &Prop, x: StateId) -> Result<NodeId, ReduceError> {
        let reach: Vec<StateId> = self.k.reach(x).iter().collect();
        match self.lookup(p).cloned() {
            Some(Binding::PerState(vs)) => {
                let mut cases = Vec::new();
                for &y in &reach {
                    let mut conj = vec![self.b.lit(vs[y.index()])];
                    for &z in &reach {
                        if z != y {
                            let l = self.b.lit(vs[z.index()]);
                            conj.push(self.b.not(l));
                        }
                    }
                    cases.push(self.b.and(conj));
                }
                Ok(self.b.or(cases))
            }
            Some(Binding::Number(bits)) => {
                let bits = self.lits(&bits);
                let mut cases = Vec::new();
                for y in reach {
                    cases.push(bitvec_eq(&mut self.b, &bits, y.index() as u64 + 1)?);
                }
                Ok(self.b.or(cases))
            }
            Some(Binding::Vector(_)) => Err(ReduceError::Shape(format!(
                "uniqueness of vector proposition {p}"
            ))),
            None => {
                let count = reach
                    .iter()
                    .filter(|&&y| self.k.has_label(y, p.as_str()))
                    .count();
                Ok(self.b.constant(count == 1))
            }
        }
    }
}

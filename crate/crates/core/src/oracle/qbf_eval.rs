use std::collections::HashMap;

use crate::qbf::{Gate, NodeId, QbfCircuit, QbfError, Quantifier};

/// Default limit on circuit variables for [`eval_qbf`].
pub const DEFAULT_QBF_CAP: usize = 24;

/// Validity by quantifier expansion, memoized per gate and relevant assignment.
pub fn eval_qbf(c: &QbfCircuit) -> Result<bool, QbfError> {
    eval_qbf_capped(c, DEFAULT_QBF_CAP)
}

/// As [`eval_qbf`] with an explicit variable cap (at most 63).
pub fn eval_qbf_capped(c: &QbfCircuit, cap: usize) -> Result<bool, QbfError> {
    let cap = cap.min(63);
    if c.num_vars() > cap {
        return Err(QbfError::CapExceeded {
            vars: c.num_vars(),
            cap,
        });
    }
    c.validate()?;
    let mut free = vec![0u64; c.nodes().len()];
    for (i, g) in c.nodes().iter().enumerate() {
        free[i] = match g {
            Gate::Var(v) => 1 << v.0,
            Gate::Quant(_, vs, body) => vs.iter().fold(free[body.index()], |m, v| m & !(1 << v.0)),
            _ => g.children().iter().fold(0, |m, ch| m | free[ch.index()]),
        };
    }
    let mut ev = Evaluator {
        c,
        free,
        memo: HashMap::new(),
    };
    Ok(ev.eval(c.root(), 0))
}

struct Evaluator<'c> {
    c: &'c QbfCircuit,
    free: Vec<u64>,
    memo: HashMap<(u32, u64), bool>,
}

impl Evaluator<'_> {
    fn eval(&mut self, n: NodeId, assign: u64) -> bool {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.eval_inner(n, assign))
    }

    fn eval_inner(&mut self, n: NodeId, assign: u64) -> bool {
        let key = (n.0, assign & self.free[n.index()]);
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let c = self.c;
        let r = match c.gate(n) {
            Gate::Const(b) => *b,
            Gate::Var(v) => assign >> v.0 & 1 == 1,
            Gate::Not(a) => !self.eval(*a, assign),
            Gate::And(cs) => cs.iter().all(|&ch| self.eval(ch, assign)),
            Gate::Or(cs) => cs.iter().any(|&ch| self.eval(ch, assign)),
            Gate::Quant(q, vs, body) => {
                let cleared = vs.iter().fold(assign, |m, v| m & !(1 << v.0));
                let mut sub = (0..1u64 << vs.len()).map(|bits| {
                    vs.iter()
                        .enumerate()
                        .fold(cleared, |m, (j, v)| m | ((bits >> j & 1) << v.0))
                });
                match q {
                    Quantifier::Exists => sub.any(|a| self.eval(*body, a)),
                    Quantifier::Forall => sub.all(|a| self.eval(*body, a)),
                }
            }
        };
        self.memo.insert(key, r);
        r
    }
}

//! Quantified Boolean circuits with hash-consed sharing.

mod aig;
mod qcir;
mod smt;
mod solve;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use qcir::{emit_qcir, parse_qcir};
pub use smt::{emit_smt, parse_smt};
pub use solve::{solve_qbf, SolveStats};

/// Circuits with at most this many variables are decided by expansion.
pub const EXPANSION_LIMIT: usize = 14;

/// Validity by expansion for small circuits, otherwise by the game solver.
pub fn decide(c: &QbfCircuit, deadline: Option<std::time::Instant>) -> Result<bool, QbfError> {
    if c.num_vars() <= EXPANSION_LIMIT {
        crate::oracle::eval_qbf(c)
    } else {
        solve_qbf(c, deadline).map(|(v, _)| v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QbfError {
    #[error("variable `{0}` is free")]
    Open(String),
    #[error("variable `{0}` is bound more than once")]
    Rebound(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVar(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("solver deadline reached")]
    Timeout,
    #[error("{vars} variables exceed the evaluation cap of {cap}")]
    CapExceeded { vars: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Const(bool),
    Var(VarId),
    Not(NodeId),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    Quant(Quantifier, Vec<VarId>, NodeId),
}

impl Gate {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Gate::Const(_) | Gate::Var(_) => &[],
            Gate::Not(a) | Gate::Quant(_, _, a) => std::slice::from_ref(a),
            Gate::And(cs) | Gate::Or(cs) => cs,
        }
    }
}

const FALSE: NodeId = NodeId(0);
const TRUE: NodeId = NodeId(1);

/// Hash-consing constructor. Children always precede their parents, so node
/// index order is a topological order.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    vars: Vec<String>,
    var_index: HashMap<String, VarId>,
    nodes: Vec<Gate>,
    table: HashMap<Gate, NodeId>,
}

impl Default for CircuitBuilder {
    fn default() -> Self {
        let mut b = CircuitBuilder {
            vars: Vec::new(),
            var_index: HashMap::new(),
            nodes: Vec::new(),
            table: HashMap::new(),
        };
        b.intern(Gate::Const(false));
        b.intern(Gate::Const(true));
        b
    }
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, g: Gate) -> NodeId {
        if let Some(&id) = self.table.get(&g) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(g.clone());
        self.table.insert(g, id);
        id
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn gate(&self, n: NodeId) -> &Gate {
        &self.nodes[n.index()]
    }

    pub fn new_var(&mut self, name: &str) -> Result<VarId, QbfError> {
        if self.var_index.contains_key(name) {
            return Err(QbfError::DuplicateVar(name.to_string()));
        }
        let v = VarId(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_index.insert(name.to_string(), v);
        Ok(v)
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize]
    }

    pub fn constant(&mut self, b: bool) -> NodeId {
        if b {
            TRUE
        } else {
            FALSE
        }
    }

    pub fn lit(&mut self, v: VarId) -> NodeId {
        self.intern(Gate::Var(v))
    }

    pub fn as_const(&self, n: NodeId) -> Option<bool> {
        match self.nodes[n.index()] {
            Gate::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        match &self.nodes[a.index()] {
            Gate::Const(b) => self.constant(!b),
            Gate::Not(x) => *x,
            _ => self.intern(Gate::Not(a)),
        }
    }

    fn nary(&mut self, xs: Vec<NodeId>, conj: bool) -> NodeId {
        let (unit, zero) = (self.constant(conj), self.constant(!conj));
        let mut kept: Vec<NodeId> = Vec::with_capacity(xs.len());
        for x in xs {
            if x == zero {
                return zero;
            }
            if x != unit && !kept.contains(&x) {
                kept.push(x);
            }
        }
        match kept.len() {
            0 => unit,
            1 => kept[0],
            _ if conj => self.intern(Gate::And(kept)),
            _ => self.intern(Gate::Or(kept)),
        }
    }

    /// Conjunction keeping operand order; drops `true`, absorbs `false`.
    pub fn and(&mut self, xs: Vec<NodeId>) -> NodeId {
        self.nary(xs, true)
    }

    pub fn or(&mut self, xs: Vec<NodeId>) -> NodeId {
        self.nary(xs, false)
    }

    pub fn and2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.and(vec![a, b])
    }

    pub fn or2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.or(vec![a, b])
    }

    pub fn implies(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        self.or2(na, b)
    }

    /// `(~a | b) & (a | ~b)`, sharing both operands.
    pub fn iff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let l = self.implies(a, b);
        let r = self.implies(b, a);
        self.and2(l, r)
    }

    pub fn quant(&mut self, q: Quantifier, vars: Vec<VarId>, body: NodeId) -> NodeId {
        if vars.is_empty() || self.as_const(body).is_some() {
            return body;
        }
        self.intern(Gate::Quant(q, vars, body))
    }

    /// Freezes the circuit rooted at `root`, dropping unreachable nodes and
    /// unused variables.
    pub fn finish(&self, root: NodeId, meta: CircuitMeta) -> QbfCircuit {
        let mut reachable = vec![false; self.nodes.len()];
        reachable[root.index()] = true;
        for i in (0..self.nodes.len()).rev() {
            if reachable[i] {
                for c in self.nodes[i].children() {
                    reachable[c.index()] = true;
                }
            }
        }
        let mut var_map: Vec<Option<VarId>> = vec![None; self.vars.len()];
        let mut vars = Vec::new();
        let mut map_var = |v: VarId, vars: &mut Vec<String>| -> VarId {
            *var_map[v.0 as usize].get_or_insert_with(|| {
                vars.push(self.vars[v.0 as usize].clone());
                VarId(vars.len() as u32 - 1)
            })
        };
        let mut node_map = vec![NodeId(u32::MAX); self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, g) in self.nodes.iter().enumerate() {
            if !reachable[i] {
                continue;
            }
            let m = |n: &NodeId| node_map[n.index()];
            let ng = match g {
                Gate::Const(b) => Gate::Const(*b),
                Gate::Var(v) => Gate::Var(map_var(*v, &mut vars)),
                Gate::Not(a) => Gate::Not(m(a)),
                Gate::And(cs) => Gate::And(cs.iter().map(m).collect()),
                Gate::Or(cs) => Gate::Or(cs.iter().map(m).collect()),
                Gate::Quant(q, vs, a) => {
                    let vs = vs.iter().map(|v| map_var(*v, &mut vars)).collect();
                    Gate::Quant(*q, vs, m(a))
                }
            };
            node_map[i] = NodeId(nodes.len() as u32);
            nodes.push(ng);
        }
        QbfCircuit {
            vars,
            nodes,
            root: node_map[root.index()],
            meta,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CircuitMeta {
    pub strategy: Option<String>,
    pub instance: Option<String>,
    /// Set by strategies that promise a single prefix over a quantifier-free matrix.
    pub prenex: bool,
    /// False for bounded encodings whose invalidity is inconclusive.
    pub exact: bool,
}

/// A frozen circuit; node indices are topologically ordered.
#[derive(Clone, PartialEq, Eq)]
pub struct QbfCircuit {
    vars: Vec<String>,
    nodes: Vec<Gate>,
    root: NodeId,
    pub meta: CircuitMeta,
}

impl fmt::Debug for QbfCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QbfCircuit")
            .field("vars", &self.vars.len())
            .field("nodes", &self.nodes.len())
            .field("meta", &self.meta)
            .finish()
    }
}

/// Scope analysis: for each node, the binders of its free variables, given
/// as node indices in increasing order.
pub(crate) struct Scopes {
    pub free_binders: Vec<Vec<u32>>,
    pub binder_of: Vec<Option<NodeId>>,
}

const UNBOUND: u32 = u32::MAX;

impl QbfCircuit {
    pub fn constant(b: bool) -> QbfCircuit {
        let mut builder = CircuitBuilder::new();
        let root = builder.constant(b);
        builder.finish(
            root,
            CircuitMeta {
                exact: true,
                prenex: true,
                ..Default::default()
            },
        )
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn gate(&self, n: NodeId) -> &Gate {
        &self.nodes[n.index()]
    }

    pub fn nodes(&self) -> &[Gate] {
        &self.nodes
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize]
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    /// Root is a constant.
    pub fn as_const(&self) -> Option<bool> {
        match self.nodes[self.root.index()] {
            Gate::Const(b) => Some(b),
            _ => None,
        }
    }

    /// Number of And/Or/quantifier nodes.
    pub fn num_gates(&self) -> usize {
        self.nodes
            .iter()
            .filter(|g| matches!(g, Gate::And(_) | Gate::Or(_) | Gate::Quant(..)))
            .count()
    }

    /// Number of `g<n> = ...` lines in the QCIR text.
    pub fn gate_count(&self) -> usize {
        qcir::plan(self).gates.len()
    }

    pub(crate) fn scopes(&self) -> Scopes {
        let mut binder_of = vec![None; self.vars.len()];
        for (i, g) in self.nodes.iter().enumerate() {
            if let Gate::Quant(_, vs, _) = g {
                for v in vs {
                    binder_of[v.0 as usize] = Some(NodeId(i as u32));
                }
            }
        }
        let mut free_binders: Vec<Vec<u32>> = Vec::with_capacity(self.nodes.len());
        for (i, g) in self.nodes.iter().enumerate() {
            let set = match g {
                Gate::Const(_) => Vec::new(),
                Gate::Var(v) => vec![binder_of[v.0 as usize].map_or(UNBOUND, |b| b.0)],
                Gate::Not(a) => free_binders[a.index()].clone(),
                Gate::And(cs) | Gate::Or(cs) => {
                    let mut s: Vec<u32> = cs
                        .iter()
                        .flat_map(|c| free_binders[c.index()].iter().copied())
                        .collect();
                    s.sort_unstable();
                    s.dedup();
                    s
                }
                Gate::Quant(_, _, a) => free_binders[a.index()]
                    .iter()
                    .copied()
                    .filter(|&b| b != i as u32)
                    .collect(),
            };
            free_binders.push(set);
        }
        Scopes {
            free_binders,
            binder_of,
        }
    }

    /// Checks that the circuit is closed and that every variable is bound by
    /// exactly one quantifier node.
    pub fn validate(&self) -> Result<(), QbfError> {
        let mut seen = vec![false; self.vars.len()];
        for g in &self.nodes {
            if let Gate::Quant(_, vs, _) = g {
                for v in vs {
                    if std::mem::replace(&mut seen[v.0 as usize], true) {
                        return Err(QbfError::Rebound(self.var_name(*v).to_string()));
                    }
                }
            }
        }
        let scopes = self.scopes();
        if let Some(&b) = scopes.free_binders[self.root.index()].first() {
            let name = if b == UNBOUND {
                self.nodes
                    .iter()
                    .find_map(|g| match g {
                        Gate::Var(v) if scopes.binder_of[v.0 as usize].is_none() => {
                            Some(self.var_name(*v).to_string())
                        }
                        _ => None,
                    })
                    .unwrap_or_default()
            } else {
                format!("bound by gate {b} used outside its scope")
            };
            return Err(QbfError::Open(name));
        }
        // a variable node reachable outside its binder also shows up above
        Ok(())
    }

    /// The chain of quantifier nodes from the root and the matrix below it.
    pub fn prefix_chain(&self) -> (Vec<(Quantifier, Vec<VarId>)>, NodeId) {
        let mut blocks: Vec<(Quantifier, Vec<VarId>)> = Vec::new();
        let mut cur = self.root;
        while let Gate::Quant(q, vs, body) = &self.nodes[cur.index()] {
            match blocks.last_mut() {
                Some((lq, lvs)) if lq == q => lvs.extend(vs.iter().copied()),
                _ => blocks.push((*q, vs.clone())),
            }
            cur = *body;
        }
        (blocks, cur)
    }

    /// Structural prenexity: quantifier nodes occur only in the root chain.
    pub fn is_prenex(&self) -> bool {
        let (_, matrix) = self.prefix_chain();
        let mut has_quant = vec![false; self.nodes.len()];
        for (i, g) in self.nodes.iter().enumerate() {
            has_quant[i] =
                matches!(g, Gate::Quant(..)) || g.children().iter().any(|c| has_quant[c.index()]);
        }
        !has_quant[matrix.index()]
    }

    /// Evaluates a quantifier-free circuit, or the matrix under a full
    /// assignment of its variables.
    pub fn eval_with(&self, assignment: &dyn Fn(VarId) -> bool) -> bool {
        let mut val = vec![false; self.nodes.len()];
        for (i, g) in self.nodes.iter().enumerate() {
            val[i] = match g {
                Gate::Const(b) => *b,
                Gate::Var(v) => assignment(*v),
                Gate::Not(a) => !val[a.index()],
                Gate::And(cs) => cs.iter().all(|c| val[c.index()]),
                Gate::Or(cs) => cs.iter().any(|c| val[c.index()]),
                Gate::Quant(..) => panic!("eval_with on a quantified node"),
            };
        }
        val[self.root.index()]
    }

    /// Opens the circuit for extension with further nodes.
    pub fn to_builder(&self) -> (CircuitBuilder, NodeId) {
        let mut b = CircuitBuilder::new();
        for name in &self.vars {
            b.new_var(name).expect("variable names are unique");
        }
        let mut map = Vec::with_capacity(self.nodes.len());
        for g in &self.nodes {
            let m = |n: &NodeId| map[n.index()];
            let id = match g {
                Gate::Const(c) => b.constant(*c),
                Gate::Var(v) => b.lit(*v),
                Gate::Not(a) => {
                    let a = m(a);
                    b.not(a)
                }
                Gate::And(cs) => {
                    let cs = cs.iter().map(m).collect();
                    b.and(cs)
                }
                Gate::Or(cs) => {
                    let cs = cs.iter().map(m).collect();
                    b.or(cs)
                }
                Gate::Quant(q, vs, a) => {
                    let a = m(a);
                    b.quant(*q, vs.clone(), a)
                }
            };
            map.push(id);
        }
        let root = map[self.root.index()];
        (b, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_sharing() {
        let mut b = CircuitBuilder::new();
        let a = b.new_var("a").unwrap();
        let la = b.lit(a);
        let t = b.constant(true);
        assert_eq!(b.and(vec![t, la]), la);
        let f = b.constant(false);
        assert_eq!(b.and(vec![la, f]), f);
        assert_eq!(b.or(vec![]), f);
        let n = b.not(la);
        assert_eq!(b.not(n), la);
        let x = b.and(vec![la, n]);
        assert_eq!(b.and(vec![la, n]), x);
        assert_eq!(b.quant(Quantifier::Exists, vec![a], t), t);
    }

    #[test]
    fn finish_drops_unreachable() {
        let mut b = CircuitBuilder::new();
        let a = b.new_var("a").unwrap();
        let c = b.new_var("c").unwrap();
        let la = b.lit(a);
        let lc = b.lit(c);
        let _junk = b.and(vec![la, lc]);
        let root = b.quant(Quantifier::Exists, vec![a], la);
        let circ = b.finish(root, CircuitMeta::default());
        assert_eq!(circ.num_vars(), 1);
        assert!(circ.validate().is_ok());
        assert!(circ.is_prenex());
    }

    #[test]
    fn open_and_rebound_detected() {
        let mut b = CircuitBuilder::new();
        let a = b.new_var("a").unwrap();
        let la = b.lit(a);
        let open = b.finish(la, CircuitMeta::default());
        assert_eq!(open.validate(), Err(QbfError::Open("a".into())));

        let q1 = b.quant(Quantifier::Exists, vec![a], la);
        let na = b.not(la);
        let q2 = b.quant(Quantifier::Forall, vec![a], na);
        let root = b.and(vec![q1, q2]);
        let twice = b.finish(root, CircuitMeta::default());
        assert_eq!(twice.validate(), Err(QbfError::Rebound("a".into())));
    }

    #[test]
    fn prenex_detection() {
        let mut b = CircuitBuilder::new();
        let a = b.new_var("a").unwrap();
        let c = b.new_var("c").unwrap();
        let (la, lc) = (b.lit(a), b.lit(c));
        let inner = b.quant(Quantifier::Forall, vec![c], lc);
        let root_np = b.and(vec![la, inner]);
        let root_np = b.quant(Quantifier::Exists, vec![a], root_np);
        assert!(!b.finish(root_np, CircuitMeta::default()).is_prenex());
        let m = b.and(vec![la, lc]);
        let q = b.quant(Quantifier::Forall, vec![c], m);
        let q = b.quant(Quantifier::Exists, vec![a], q);
        let circ = b.finish(q, CircuitMeta::default());
        assert!(circ.is_prenex());
        assert_eq!(circ.prefix_chain().0.len(), 2);
    }
}

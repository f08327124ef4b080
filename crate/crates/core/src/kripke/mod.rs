//! Finite Kripke structures with a total transition relation.

mod flow;
mod format;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use flow::{vertex_connectivity, Connectivity};
pub use format::{parse_kri, serialize_kri};

use crate::qctl::Prop;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("state `{0}` has no successor")]
    NotTotal(String),
    #[error("structure has no states")]
    Empty,
    #[error("connectivity endpoints must differ")]
    SameEndpoints,
    #[error("invalid identifier `{0}`")]
    BadIdent(String),
}

/// Index of a state in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A set of states backed by a fixed-width bit set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        StateSet(b)
    }

    pub fn singleton(n: usize, s: StateId) -> Self {
        let mut set = Self::empty(n);
        set.insert(s);
        set
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, s: StateId) -> bool {
        let had = self.0.contains(s.0);
        self.0.insert(s.0);
        !had
    }

    pub fn remove(&mut self, s: StateId) {
        self.0.set(s.0, false);
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.0.contains(s.0)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.ones().map(StateId)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &StateSet) {
        self.0.difference_with(&other.0);
    }

    pub fn complement(&self) -> StateSet {
        let mut b = self.0.clone();
        b.toggle_range(..);
        StateSet(b)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

/// An immutable Kripke structure. Every state has at least one successor.
#[derive(Clone)]
pub struct Kripke {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    init: StateId,
    labels: Vec<BTreeSet<Prop>>,
    succ: Vec<Vec<StateId>>,
    pred: Vec<Vec<StateId>>,
    reach: Arc<OnceLock<Vec<StateSet>>>,
}

impl fmt::Debug for Kripke {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kripke")
            .field("states", &self.names)
            .field("init", &self.names[self.init.0])
            .field("labels", &self.labels)
            .field("succ", &self.succ)
            .finish()
    }
}

impl PartialEq for Kripke {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.init == other.init
            && self.labels == other.labels
            && self.succ == other.succ
    }
}

impl Eq for Kripke {}

pub(crate) fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !s.contains("__")
}

impl Kripke {
    pub fn builder() -> KripkeBuilder {
        KripkeBuilder::default()
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Size |V| + |E|.
    pub fn size(&self) -> usize {
        self.num_states() + self.num_edges()
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len()).map(StateId)
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<Prop> {
        &self.labels[s.0]
    }

    pub fn has_label(&self, s: StateId, p: &str) -> bool {
        self.labels[s.0].contains(p)
    }

    /// Successors sorted by state index.
    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.succ[s.0]
    }

    pub fn predecessors(&self, s: StateId) -> &[StateId] {
        &self.pred[s.0]
    }

    pub fn has_edge(&self, a: StateId, b: StateId) -> bool {
        self.succ[a.0].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (StateId(a), b)))
    }

    /// All propositions occurring in some label.
    pub fn props(&self) -> BTreeSet<Prop> {
        self.labels.iter().flatten().cloned().collect()
    }

    pub fn with_init(&self, init: StateId) -> Kripke {
        let mut k = self.clone();
        k.init = init;
        k
    }

    /// States labelled with `p`.
    pub fn label_set(&self, p: &str) -> StateSet {
        let mut set = StateSet::empty(self.num_states());
        for s in self.states() {
            if self.has_label(s, p) {
                set.insert(s);
            }
        }
        set
    }

    /// Reflexive-transitive successors of `s`, computed once for all states.
    pub fn reach(&self, s: StateId) -> &StateSet {
        &self.reach_all()[s.0]
    }

    pub fn reach_all(&self) -> &[StateSet] {
        self.reach.get_or_init(|| {
            let n = self.num_states();
            let mut out = Vec::with_capacity(n);
            let mut stack = Vec::new();
            for s in self.states() {
                let mut seen = StateSet::singleton(n, s);
                stack.push(s);
                while let Some(x) = stack.pop() {
                    for &y in &self.succ[x.0] {
                        if seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
                out.push(seen);
            }
            out
        })
    }
}

/// Incremental constructor; `build` validates totality.
#[derive(Default, Debug, Clone)]
pub struct KripkeBuilder {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    labels: Vec<BTreeSet<Prop>>,
    edges: Vec<BTreeSet<usize>>,
    init: Option<String>,
}

impl KripkeBuilder {
    pub fn state(&mut self, name: &str) -> Result<StateId, KripkeError> {
        if !valid_ident(name) {
            return Err(KripkeError::BadIdent(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(KripkeError::DuplicateState(name.to_string()));
        }
        let id = StateId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.labels.push(BTreeSet::new());
        self.edges.push(BTreeSet::new());
        Ok(id)
    }

    /// Returns the existing id or declares the state.
    pub fn state_or_existing(&mut self, name: &str) -> Result<StateId, KripkeError> {
        match self.index.get(name) {
            Some(&id) => Ok(id),
            None => self.state(name),
        }
    }

    pub fn id(&self, name: &str) -> Result<StateId, KripkeError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| KripkeError::UnknownState(name.to_string()))
    }

    pub fn label(&mut self, s: StateId, p: &str) -> Result<&mut Self, KripkeError> {
        if !valid_ident(p) {
            return Err(KripkeError::BadIdent(p.to_string()));
        }
        self.labels[s.0].insert(Prop::new(p));
        Ok(self)
    }

    pub fn edge(&mut self, a: StateId, b: StateId) -> &mut Self {
        self.edges[a.0].insert(b.0);
        self
    }

    pub fn edge_by_name(&mut self, a: &str, b: &str) -> Result<&mut Self, KripkeError> {
        let (a, b) = (self.id(a)?, self.id(b)?);
        Ok(self.edge(a, b))
    }

    pub fn init(&mut self, name: &str) -> &mut Self {
        self.init = Some(name.to_string());
        self
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn build(self) -> Result<Kripke, KripkeError> {
        if self.names.is_empty() {
            return Err(KripkeError::Empty);
        }
        let init = match &self.init {
            Some(n) => self.id(n)?,
            None => StateId(0),
        };
        let n = self.names.len();
        let mut succ = Vec::with_capacity(n);
        let mut pred = vec![Vec::new(); n];
        for (a, es) in self.edges.iter().enumerate() {
            if es.is_empty() {
                return Err(KripkeError::NotTotal(self.names[a].clone()));
            }
            let list: Vec<StateId> = es.iter().map(|&b| StateId(b)).collect();
            for &b in &list {
                pred[b.0].push(StateId(a));
            }
            succ.push(list);
        }
        Ok(Kripke {
            names: self.names,
            index: self.index,
            init,
            labels: self.labels,
            succ,
            pred,
            reach: Arc::new(OnceLock::new()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Kripke {
        let mut b = Kripke::builder();
        let x = b.state("x").unwrap();
        let y = b.state("y").unwrap();
        let z = b.state("z").unwrap();
        b.edge(x, y).edge(y, z).edge(z, z);
        b.label(z, "p").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn reach_is_reflexive_transitive() {
        let k = line();
        let r: Vec<_> = k.reach(StateId(0)).iter().collect();
        assert_eq!(r, vec![StateId(0), StateId(1), StateId(2)]);
        assert_eq!(k.reach(StateId(2)).len(), 1);
    }

    #[test]
    fn totality_enforced() {
        let mut b = Kripke::builder();
        b.state("a").unwrap();
        assert_eq!(b.build(), Err(KripkeError::NotTotal("a".into())));
    }

    #[test]
    fn identifiers_with_double_underscore_rejected() {
        let mut b = Kripke::builder();
        assert!(b.state("a__b").is_err());
        assert!(b.state("1a").is_err());
    }

    #[test]
    fn predecessors_mirror_edges() {
        let k = line();
        assert_eq!(k.predecessors(StateId(2)), &[StateId(1), StateId(2)]);
        assert_eq!(k.size(), 6);
    }
}

//! And-inverter graphs with structural hashing, and their Tseitin encoding.

use std::collections::HashMap;

/// Node index shifted left once, low bit set for negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    fn new(node: usize, neg: bool) -> Lit {
        Lit(((node as u32) << 1) | neg as u32)
    }

    pub fn node(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Zero,
    Input(u32),
    And(Lit, Lit),
}

#[derive(Debug, Default)]
pub(crate) struct Aig {
    nodes: Vec<Node>,
    strash: HashMap<(Lit, Lit), Lit>,
    inputs: HashMap<u32, Lit>,
    next_var: u32,
}

impl Aig {
    pub fn new() -> Self {
        Aig {
            nodes: vec![Node::Zero],
            ..Default::default()
        }
    }

    pub fn fresh_var(&mut self) -> u32 {
        let v = self.next_var;
        self.next_var += 1;
        v
    }

    pub fn input(&mut self, var: u32) -> Lit {
        if let Some(&l) = self.inputs.get(&var) {
            return l;
        }
        self.next_var = self.next_var.max(var + 1);
        let l = Lit::new(self.nodes.len(), false);
        self.nodes.push(Node::Input(var));
        self.inputs.insert(var, l);
        l
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if b == Lit::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&l) = self.strash.get(&key) {
            return l;
        }
        let l = Lit::new(self.nodes.len(), false);
        self.nodes.push(Node::And(key.0, key.1));
        self.strash.insert(key, l);
        l
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    fn fold(&mut self, mut xs: Vec<Lit>, conj: bool) -> Lit {
        let unit = if conj { Lit::TRUE } else { Lit::FALSE };
        if xs.is_empty() {
            return unit;
        }
        // balanced pairing keeps the graph shallow
        while xs.len() > 1 {
            let mut next = Vec::with_capacity(xs.len().div_ceil(2));
            for pair in xs.chunks(2) {
                next.push(match pair {
                    [a, b] if conj => self.and(*a, *b),
                    [a, b] => self.or(*a, *b),
                    [a] => *a,
                    _ => unreachable!(),
                });
            }
            xs = next;
        }
        xs[0]
    }

    pub fn and_all(&mut self, xs: Vec<Lit>) -> Lit {
        self.fold(xs, true)
    }

    pub fn or_all(&mut self, xs: Vec<Lit>) -> Lit {
        self.fold(xs, false)
    }

    /// Nodes of the cone of `root`, children before parents.
    fn cone(&self, root: Lit) -> Vec<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root.node()];
        let mut out = Vec::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            out.push(n);
            if let Node::And(a, b) = self.nodes[n] {
                stack.push(a.node());
                stack.push(b.node());
            }
        }
        out.sort_unstable();
        out
    }

    /// Replaces inputs according to `map`; other inputs stay.
    pub fn substitute(&mut self, root: Lit, map: &HashMap<u32, Lit>) -> Lit {
        let mut new: HashMap<usize, Lit> = HashMap::new();
        for n in self.cone(root) {
            let l = match self.nodes[n] {
                Node::Zero => Lit::FALSE,
                Node::Input(v) => map.get(&v).copied().unwrap_or(Lit::new(n, false)),
                Node::And(a, b) => {
                    let la = apply(new[&a.node()], a.is_neg());
                    let lb = apply(new[&b.node()], b.is_neg());
                    self.and(la, lb)
                }
            };
            new.insert(n, l);
        }
        apply(new[&root.node()], root.is_neg())
    }

    /// Inputs occurring in the cone of `root`.
    pub fn support(&self, root: Lit) -> Vec<u32> {
        self.cone(root)
            .into_iter()
            .filter_map(|n| match self.nodes[n] {
                Node::Input(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Equivalences `y <-> g` present in the cone of `root` for the given
    /// inputs, read off pairs of nodes `y & ~g` and `~y & g`.
    pub fn definitions(&self, root: Lit, vars: &[u32]) -> HashMap<u32, Lit> {
        let wanted: std::collections::HashSet<u32> = vars.iter().copied().collect();
        let input_var = |l: Lit| match self.nodes[l.node()] {
            Node::Input(v) if wanted.contains(&v) => Some(v),
            _ => None,
        };
        let mut defs = HashMap::new();
        for n in self.cone(root) {
            let Node::And(a, b) = self.nodes[n] else {
                continue;
            };
            for (y, h) in [(a, b), (b, a)] {
                let Some(v) = input_var(y) else { continue };
                if defs.contains_key(&v) || h.node() == y.node() {
                    continue;
                }
                let (lo, hi) = if !y < !h { (!y, !h) } else { (!h, !y) };
                if self.strash.contains_key(&(lo, hi)) {
                    // y & h and ~y & ~h both occur: y <-> ~h
                    let g = if y.is_neg() { h } else { !h };
                    defs.insert(v, g);
                }
            }
        }
        defs
    }

    /// Evaluates under an assignment of inputs.
    #[cfg(test)]
    pub fn eval(&self, root: Lit, value: &dyn Fn(u32) -> bool) -> bool {
        let mut val: HashMap<usize, bool> = HashMap::new();
        for n in self.cone(root) {
            let v = match self.nodes[n] {
                Node::Zero => false,
                Node::Input(x) => value(x),
                Node::And(a, b) => (val[&a.node()] ^ a.is_neg()) && (val[&b.node()] ^ b.is_neg()),
            };
            val.insert(n, v);
        }
        val[&root.node()] ^ root.is_neg()
    }
}

fn apply(l: Lit, neg: bool) -> Lit {
    if neg {
        !l
    } else {
        l
    }
}

/// Incremental Tseitin encoding of AIG cones into one SAT solver.
pub(crate) struct SatEncoder {
    solver: varisat::Solver<'static>,
    map: HashMap<usize, varisat::Lit>,
}

impl SatEncoder {
    pub fn new() -> Self {
        SatEncoder {
            solver: varisat::Solver::new(),
            map: HashMap::new(),
        }
    }

    pub fn encode(&mut self, aig: &Aig, root: Lit) -> varisat::Lit {
        use varisat::ExtendFormula;
        for n in aig.cone(root) {
            if self.map.contains_key(&n) {
                continue;
            }
            let x = self.solver.new_lit();
            match aig.nodes[n] {
                Node::Zero => self.solver.add_clause(&[!x]),
                Node::Input(_) => {}
                Node::And(a, b) => {
                    let la = self.map[&a.node()] ^ a.is_neg();
                    let lb = self.map[&b.node()] ^ b.is_neg();
                    self.solver.add_clause(&[!x, la]);
                    self.solver.add_clause(&[!x, lb]);
                    self.solver.add_clause(&[x, !la, !lb]);
                }
            }
            self.map.insert(n, x);
        }
        self.map[&root.node()] ^ root.is_neg()
    }

    pub fn assert(&mut self, aig: &Aig, root: Lit) {
        use varisat::ExtendFormula;
        let l = self.encode(aig, root);
        self.solver.add_clause(&[l]);
    }

    /// SAT literal of an input, if it has been encoded.
    pub fn input_lit(&self, aig: &Aig, var: u32) -> Option<varisat::Lit> {
        aig.inputs
            .get(&var)
            .and_then(|l| self.map.get(&l.node()).copied())
    }

    pub fn solve(&mut self, assumptions: &[varisat::Lit]) -> bool {
        self.solver.assume(assumptions);
        self.solver
            .solve()
            .expect("in-memory SAT solving does not fail")
    }

    /// Value of `var` in the last model; unconstrained inputs read false.
    pub fn value(&self, aig: &Aig, var: u32, model: &[varisat::Lit]) -> bool {
        match self.input_lit(aig, var) {
            Some(l) => model.binary_search(&l).is_ok(),
            None => false,
        }
    }

    pub fn model(&self) -> Vec<varisat::Lit> {
        let mut m = self.solver.model().unwrap_or_default();
        m.sort();
        m
    }
}

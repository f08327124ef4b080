//! Local vertex connectivity of the undirected view of a structure.

use std::collections::VecDeque;

use super::{Kripke, KripkeError, StateId};

/// Maximum number of internally vertex-disjoint paths between two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Finite(usize),
    /// The endpoints are adjacent, so arbitrarily many paths exist.
    Unbounded,
}

struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, a: usize, b: usize, c: i64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    /// Edmonds-Karp; capacities on split vertices are 1 so the flow is small.
    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut flow = 0;
        loop {
            let mut prev_edge = vec![usize::MAX; self.head.len()];
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e] > 0 {
                        seen[v] = true;
                        prev_edge[v] = e;
                        q.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            flow += 1;
        }
    }
}

pub fn vertex_connectivity(
    k: &Kripke,
    src: StateId,
    dst: StateId,
) -> Result<Connectivity, KripkeError> {
    let n = k.num_states();
    for s in [src, dst] {
        if s.0 >= n {
            return Err(KripkeError::UnknownState(format!("#{}", s.0)));
        }
    }
    if src == dst {
        return Err(KripkeError::SameEndpoints);
    }
    if k.has_edge(src, dst) || k.has_edge(dst, src) {
        return Ok(Connectivity::Unbounded);
    }
    // vertex v becomes v_in = 2v and v_out = 2v + 1
    let big = n as i64 + 1;
    let mut net = FlowNet::new(2 * n);
    for v in k.states() {
        let c = if v == src || v == dst { big } else { 1 };
        net.add(2 * v.0, 2 * v.0 + 1, c);
    }
    for (a, b) in k.edges() {
        if a != b {
            net.add(2 * a.0 + 1, 2 * b.0, big);
            net.add(2 * b.0 + 1, 2 * a.0, big);
        }
    }
    Ok(Connectivity::Finite(net.max_flow(2 * src.0 + 1, 2 * dst.0)))
}

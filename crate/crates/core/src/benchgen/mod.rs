//! Deterministic generators for the four scalable benchmark families.
//!
//! Every instance carries its expected verdict together with the rule
//! that produced it, so benchmark runs can cross-check solver answers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::kripke::{
    vertex_connectivity, Connectivity, Kripke, KripkeBuilder, KripkeError, StateId,
};
use crate::qctl::Formula;

#[cfg(test)]
mod tests;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("generated connectivity is {got:?}, expected {want}")]
    Connectivity { got: Connectivity, want: usize },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// Where an expected verdict comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// `m >= n` for the reset family.
    ResetLaw,
    /// Menger's theorem: `k <= m` for the double grid.
    MengerLaw,
    /// Nonzero heap XOR means the first mover wins.
    NimXor,
    /// Exact search for a covering target set.
    CoverSearch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub verdict: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    /// Canonical identifier such as `reset_n10_k30_m12`.
    pub name: String,
    pub params: Value,
    pub kripke: Kripke,
    pub formula: Formula,
    pub expected: Expected,
    /// The size reported for the family. Equal to the state count except
    /// for Nim, where only configuration states are counted.
    pub nominal_size: usize,
}

impl BenchInstance {
    /// The `expected.json` document written next to generated files.
    pub fn expected_json(&self) -> Value {
        json!({
            "name": self.name,
            "params": self.params,
            "expected": self.expected.verdict,
            "provenance": self.expected.provenance,
            "states": self.kripke.num_states(),
            "nominal_size": self.nominal_size,
        })
    }
}

fn positive(pairs: &[(&str, usize)]) -> Result<(), BenchError> {
    match pairs.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(BenchError::Params(format!("{name} must be at least 1"))),
        None => Ok(()),
    }
}

fn numbered(stem: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{stem}{i}")).collect()
}

/// A root with edges into `n` disjoint cycles of length `k`, checked
/// against "some `m` states are reachable from everywhere".
pub fn gen_reset(n: usize, k: usize, m: usize) -> Result<BenchInstance, BenchError> {
    positive(&[("n", n), ("k", k), ("m", m)])?;
    let kripke = reset_structure(n, k)?;
    let ps = numbered("p", m);
    let body = Formula::ag(Formula::ef(Formula::or_all(
        ps.iter().map(|p| Formula::atom(p)),
    )));
    let formula = ps.iter().rev().fold(body, |f, p| Formula::exists1(p, f));
    Ok(BenchInstance {
        name: format!("reset_n{n}_k{k}_m{m}"),
        params: json!({ "family": "reset", "n": n, "k": k, "m": m }),
        nominal_size: kripke.num_states(),
        kripke,
        formula,
        expected: Expected {
            verdict: m >= n,
            provenance: Provenance::ResetLaw,
        },
    })
}

pub fn reset_structure(n: usize, k: usize) -> Result<Kripke, BenchError> {
    let mut b = Kripke::builder();
    let root = b.state("r")?;
    for i in 1..=n {
        let cycle: Vec<StateId> = (1..=k)
            .map(|j| b.state(&format!("q{i}_{j}")))
            .collect::<Result<_, _>>()?;
        b.edge(root, cycle[0]);
        for j in 0..k {
            b.edge(cycle[j], cycle[(j + 1) % k]);
        }
    }
    b.init("r");
    Ok(b.build()?)
}

/// Which of the two equivalent connectivity formulas to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KconnFormula {
    /// Marks the inner states of `k` disjoint paths.
    Paths,
    /// Blocks `k - 1` single states and asks for a surviving path.
    Cut,
}

impl KconnFormula {
    fn tag(self) -> &'static str {
        match self {
            KconnFormula::Paths => "phi",
            KconnFormula::Cut => "psi",
        }
    }
}

/// Two bidirectional `n x n` grids joined by `m` connector edges; the
/// initial state is the corner `q1_1` and the far corner `r<n>_<n>`
/// carries `y`.
pub fn kconn_structure(n: usize, m: usize) -> Result<Kripke, BenchError> {
    positive(&[("n", n), ("m", m)])?;
    if m > n {
        return Err(BenchError::Params(format!("need m <= n, got m={m}, n={n}")));
    }
    if n < 2 {
        return Err(BenchError::Params(
            "need n >= 2 so the corners are not adjacent".into(),
        ));
    }
    let mut b = Kripke::builder();
    let grid = |b: &mut KripkeBuilder, stem: &str| -> Result<Vec<Vec<StateId>>, BenchError> {
        let ids: Vec<Vec<StateId>> = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| b.state(&format!("{stem}{i}_{j}")))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        for i in 0..n {
            for j in 0..n {
                if i + 1 < n {
                    link(b, ids[i][j], ids[i + 1][j]);
                }
                if j + 1 < n {
                    link(b, ids[i][j], ids[i][j + 1]);
                }
            }
        }
        Ok(ids)
    };
    let q = grid(&mut b, "q")?;
    let r = grid(&mut b, "r")?;
    let last = n - 1;
    for t in 0..n {
        // the start fans out to its row and column, the target gathers its own
        link(&mut b, q[0][0], q[0][t]);
        link(&mut b, q[0][0], q[t][0]);
        link(&mut b, r[last][last], r[last][t]);
        link(&mut b, r[last][last], r[t][last]);
    }
    for i in 0..m {
        link(&mut b, q[i][last], r[0][i]);
    }
    b.label(r[last][last], "y")?;
    b.init("q1_1");
    Ok(b.build()?)
}

fn link(b: &mut KripkeBuilder, x: StateId, y: StateId) {
    if x != y {
        b.edge(x, y);
        b.edge(y, x);
    }
}

fn kconn_formula(k: usize, which: KconnFormula) -> Formula {
    let ps = numbered("p", k.saturating_sub(1));
    let y = Formula::atom("y");
    let none = Formula::and_all(ps.iter().map(|p| Formula::not(Formula::atom(p))));
    match which {
        KconnFormula::Cut => {
            let body = Formula::ex(Formula::eu(none, y));
            ps.iter().rev().fold(body, |f, p| Formula::forall1(p, f))
        }
        KconnFormula::Paths => {
            let marked = ps.iter().map(|p| {
                let only = Formula::and_all(
                    std::iter::once(Formula::atom(p)).chain(
                        ps.iter()
                            .filter(|q| *q != p)
                            .map(|q| Formula::not(Formula::atom(q))),
                    ),
                );
                Formula::ex(Formula::eu(only, y.clone()))
            });
            let body = Formula::and_all(marked.chain([Formula::ex(Formula::eu(none, y.clone()))]));
            ps.iter().rev().fold(body, |f, p| Formula::exists(p, f))
        }
    }
}

/// Asks for `k` internally disjoint paths from `q1_1` to `y`. The
/// structure's connectivity is checked by max-flow before returning.
pub fn gen_kconn(
    n: usize,
    m: usize,
    k: usize,
    which: KconnFormula,
) -> Result<BenchInstance, BenchError> {
    positive(&[("k", k)])?;
    let kripke = kconn_structure(n, m)?;
    let src = kripke.init();
    let dst = kripke.state(&format!("r{n}_{n}")).expect("corner exists");
    let got = vertex_connectivity(&kripke, src, dst)?;
    if got != Connectivity::Finite(m) {
        return Err(BenchError::Connectivity { got, want: m });
    }
    Ok(BenchInstance {
        name: format!("kconn_n{n}_m{m}_{}{k}", which.tag()),
        params: json!({ "family": "kconn", "n": n, "m": m, "k": k, "formula": which }),
        nominal_size: kripke.num_states(),
        kripke,
        formula: kconn_formula(k, which),
        expected: Expected {
            verdict: k <= m,
            provenance: Provenance::MengerLaw,
        },
    })
}

type Config = Vec<usize>;

fn config_name(c: &Config) -> String {
    c.iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join("_")
}

fn moves(c: &Config) -> BTreeSet<Config> {
    let mut out = BTreeSet::new();
    for i in 0..c.len() {
        for left in 0..c[i] {
            let mut d = c.clone();
            d[i] = left;
            d.sort_unstable();
            out.insert(d);
        }
    }
    out
}

/// Every configuration reachable from `heaps`, heaps kept as sorted
/// multisets so that heap order does not matter.
pub fn nim_configurations(heaps: &[usize]) -> Vec<Config> {
    let mut start = heaps.to_vec();
    start.sort_unstable();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for d in moves(&c) {
            if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    seen.into_iter().collect()
}

/// The Nim game graph seen from `player` (1 or 2), with player 1 to move
/// first. States `c<heaps>_t<turn>` exist for every configuration and both
/// turns; moves of `player` pass through an `int` state that a strategy
/// can mark.
pub fn nim_structure(heaps: &[usize], player: u8) -> Result<(Kripke, usize), BenchError> {
    if heaps.is_empty() || heaps.contains(&0) {
        return Err(BenchError::Params(
            "heaps must be non-empty with positive counts".into(),
        ));
    }
    if !(1..=2).contains(&player) {
        return Err(BenchError::Params(format!(
            "player must be 1 or 2, got {player}"
        )));
    }
    let configs = nim_configurations(heaps);
    let name = |c: &Config, t: u8| format!("c{}_t{t}", config_name(c));
    let mut b = Kripke::builder();
    let mut ids = BTreeMap::new();
    for t in [1u8, 2] {
        for c in &configs {
            let id = b.state(&name(c, t))?;
            b.label(id, &format!("t{t}"))?;
            if c.iter().all(|&h| h == 0) {
                // the player who is not on turn took the last object
                b.label(id, &format!("w{}", 3 - t))?;
                b.edge(id, id);
            }
            ids.insert((c.clone(), t), id);
        }
    }
    let nominal = ids.len();
    for ((c, t), &from) in &ids {
        for d in moves(c) {
            let to = ids[&(d.clone(), 3 - t)];
            if *t == player {
                let mid = b.state(&format!("m{}_to_{}", config_name(c), config_name(&d)))?;
                b.label(mid, "int")?;
                b.edge(from, mid);
                b.edge(mid, to);
            } else {
                b.edge(from, to);
            }
        }
    }
    let mut start = heaps.to_vec();
    start.sort_unstable();
    b.init(&name(&start, 1));
    Ok((b.build()?, nominal))
}

/// "Player `player` has a winning strategy": a marking of intermediate
/// states that offers a move everywhere and forces a win.
pub fn nim_formula(player: u8) -> Formula {
    let choice = Formula::ag(Formula::implies(
        Formula::atom(&format!("t{player}")),
        Formula::ex(Formula::atom("m")),
    ));
    let outcome = Formula::af(Formula::or(
        Formula::atom(&format!("w{player}")),
        Formula::and(Formula::atom("int"), Formula::not(Formula::atom("m"))),
    ));
    Formula::exists("m", Formula::and(choice, outcome))
}

pub fn gen_nim(heaps: &[usize], player: u8) -> Result<BenchInstance, BenchError> {
    let (kripke, nominal) = nim_structure(heaps, player)?;
    let first_mover_wins = heaps.iter().fold(0, |acc, h| acc ^ h) != 0;
    Ok(BenchInstance {
        name: format!("nim_{}_j{player}", config_name(&heaps.to_vec())),
        params: json!({ "family": "nim", "heaps": heaps, "player": player }),
        kripke,
        formula: nim_formula(player),
        expected: Expected {
            verdict: first_mover_wins == (player == 1),
            provenance: Provenance::NimXor,
        },
        nominal_size: nominal,
    })
}

/// `rows x cols` states `q<i>_<j>`; each state points to every state of
/// the next column and the last column wraps around to the first.
pub fn resources_structure(rows: usize, cols: usize) -> Result<Kripke, BenchError> {
    positive(&[("n", rows), ("m", cols)])?;
    let mut b = Kripke::builder();
    let ids: Vec<Vec<StateId>> = (1..=rows)
        .map(|i| (1..=cols).map(|j| b.state(&format!("q{i}_{j}"))).collect())
        .collect::<Result<_, _>>()?;
    for j in 0..cols {
        let next = (j + 1) % cols;
        for row in &ids {
            for to in &ids {
                b.edge(row[j], to[next]);
            }
        }
    }
    b.init("q1_1");
    Ok(b.build()?)
}

/// At most `k` targets such that every reachable state is within `d`
/// steps of one of them.
pub fn resources_formula(k: usize, d: usize) -> Formula {
    let cs = numbered("c", k);
    let hit = || Formula::or_all(cs.iter().map(|c| Formula::atom(c)));
    let mut reach = hit();
    for _ in 0..d {
        reach = Formula::or(hit(), Formula::ex(reach));
    }
    let body = Formula::ag(reach);
    cs.iter().rev().fold(body, |f, c| Formula::exists1(c, f))
}

/// Minimum number of targets covering the column grid within `d` steps.
///
/// Rows are interchangeable, so a solution is described by the set of
/// columns holding a target; a column with no target in the `d` columns
/// ahead must be targeted in full. Returns `None` beyond 24 columns.
pub fn resources_min_targets(rows: usize, cols: usize, d: usize) -> Option<usize> {
    if cols > 24 {
        return None;
    }
    let mut best = usize::MAX;
    for mask in 1u32..(1 << cols) {
        let mut cost = 0;
        let mut ok = true;
        for j in 0..cols {
            let ahead = (1..=d).any(|t| mask & (1 << ((j + t) % cols)) != 0);
            let here = mask & (1 << j) != 0;
            match (ahead, here) {
                (true, true) => cost += 1,
                (false, true) => cost += rows,
                (true, false) => {}
                (false, false) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            best = best.min(cost);
        }
    }
    Some(best)
}

/// Exhaustive check over target sets drawn from the states reachable
/// from the initial state, for arbitrary structures.
pub fn cover_exists(k: &Kripke, targets: usize, d: usize) -> bool {
    let reach: Vec<StateId> = k.reach(k.init()).iter().collect();
    let n = k.num_states();
    // within[x] = states reachable from x in at most d steps
    let within: Vec<Vec<bool>> = (0..n)
        .map(|x| {
            let mut dist = vec![usize::MAX; n];
            dist[x] = 0;
            let mut q = VecDeque::from([StateId(x)]);
            while let Some(s) = q.pop_front() {
                if dist[s.0] == d {
                    continue;
                }
                for &t in k.successors(s) {
                    if dist[t.0] == usize::MAX {
                        dist[t.0] = dist[s.0] + 1;
                        q.push_back(t);
                    }
                }
            }
            dist.iter().map(|&v| v != usize::MAX).collect()
        })
        .collect();
    let size = targets.min(reach.len());
    let mut chosen = Vec::with_capacity(size);
    fn search(
        reach: &[StateId],
        within: &[Vec<bool>],
        size: usize,
        from: usize,
        chosen: &mut Vec<StateId>,
    ) -> bool {
        if chosen.len() == size {
            return reach
                .iter()
                .all(|x| chosen.iter().any(|t| within[x.0][t.0]));
        }
        (from..reach.len()).any(|i| {
            chosen.push(reach[i]);
            let hit = search(reach, within, size, i + 1, chosen);
            chosen.pop();
            hit
        })
    }
    search(&reach, &within, size, 0, &mut chosen)
}

/// The `rows x cols` grid with "at most `k` targets within `d` steps".
pub fn gen_resources(
    rows: usize,
    cols: usize,
    k: usize,
    d: usize,
) -> Result<BenchInstance, BenchError> {
    positive(&[("k", k), ("d", d)])?;
    let kripke = resources_structure(rows, cols)?;
    let verdict = match resources_min_targets(rows, cols, d) {
        Some(min) => min <= k,
        None => cover_exists(&kripke, k, d),
    };
    Ok(BenchInstance {
        name: format!("resources_n{rows}_m{cols}_k{k}_d{d}"),
        params: json!({ "family": "resources", "n": rows, "m": cols, "k": k, "d": d }),
        nominal_size: kripke.num_states(),
        kripke,
        formula: resources_formula(k, d),
        expected: Expected {
            verdict,
            provenance: Provenance::CoverSearch,
        },
    })
}

/// Small members of every family, each decided in well under a second by
/// the built-in solver.
pub fn desk_suite() -> Result<Vec<BenchInstance>, BenchError> {
    Ok(vec![
        gen_reset(2, 2, 1)?,
        gen_reset(2, 2, 2)?,
        gen_reset(3, 2, 3)?,
        gen_kconn(2, 1, 1, KconnFormula::Cut)?,
        gen_kconn(2, 1, 2, KconnFormula::Cut)?,
        gen_nim(&[1, 2], 1)?,
        gen_nim(&[2, 2], 1)?,
        gen_resources(2, 2, 1, 1)?,
        gen_resources(2, 2, 2, 1)?,
    ])
}

/// The sixteen published benchmark rows.
pub fn published_suite() -> Result<Vec<BenchInstance>, BenchError> {
    let mut out = vec![
        gen_reset(10, 30, 12)?,
        gen_reset(15, 100, 16)?,
        gen_reset(6, 10, 5)?,
    ];
    for (n, m, k) in [(10, 5, 4), (15, 5, 4), (15, 7, 6), (30, 6, 4), (10, 4, 5)] {
        out.push(gen_kconn(n, m, k, KconnFormula::Cut)?);
    }
    for heaps in [&[3, 4, 5][..], &[2, 3, 4, 4], &[3, 4, 5, 6], &[2, 4, 8, 14]] {
        out.push(gen_nim(heaps, 1)?);
    }
    for (n, k, d) in [(10, 8, 6), (12, 8, 6), (12, 6, 8), (20, 6, 8)] {
        out.push(gen_resources(n, n, k, d)?);
    }
    Ok(out)
}

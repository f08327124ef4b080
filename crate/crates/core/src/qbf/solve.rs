//! Built-in QBF solver: polarity-aware prenexing into an and-inverter graph,
//! then recursive counterexample-guided abstraction refinement.

use std::collections::HashMap;
use std::time::Instant;

use super::aig::{Aig, Lit, SatEncoder};
use super::{Gate, NodeId, QbfCircuit, QbfError, Quantifier};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Quantifier blocks after prenexing.
    pub levels: usize,
    /// Variables after duplicating quantifiers used under both polarities.
    pub vars: usize,
    pub refinements: usize,
}

struct Prenexer<'a> {
    c: &'a QbfCircuit,
    aig: Aig,
    free_binders: Vec<Vec<u32>>,
    has_quant: Vec<bool>,
    dual: Vec<bool>,
    /// Current instance and level of each binder node.
    binder_env: HashMap<u32, (u32, usize)>,
    var_env: Vec<u32>,
    memo: HashMap<(u32, bool, Vec<u32>), Lit>,
    levels: Vec<Vec<u32>>,
    instances: u32,
}

impl Prenexer<'_> {
    fn conv(&mut self, n: NodeId, pos: bool) -> Lit {
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.conv_inner(n, pos))
    }

    fn conv_inner(&mut self, n: NodeId, pos: bool) -> Lit {
        let i = n.index();
        let pol = if self.has_quant[i] { pos } else { true };
        let ctx: Vec<u32> = self.free_binders[i]
            .iter()
            .filter(|&&b| self.dual[b as usize])
            .map(|b| self.binder_env[b].0)
            .collect();
        let key = (n.0, pol, ctx);
        if let Some(&l) = self.memo.get(&key) {
            return l;
        }
        let l = match self.c.gate(n) {
            Gate::Const(b) => {
                if *b {
                    Lit::TRUE
                } else {
                    Lit::FALSE
                }
            }
            Gate::Var(v) => self.aig.input(self.var_env[v.0 as usize]),
            Gate::Not(a) => !self.conv(*a, !pos),
            Gate::And(cs) | Gate::Or(cs) => {
                let lits: Vec<Lit> = cs.iter().map(|&ch| self.conv(ch, pos)).collect();
                if matches!(self.c.gate(n), Gate::And(_)) {
                    self.aig.and_all(lits)
                } else {
                    self.aig.or_all(lits)
                }
            }
            Gate::Quant(q, vs, body) => {
                let q = if pos { *q } else { q.dual() };
                let base = self.free_binders[i]
                    .iter()
                    .map(|b| self.binder_env[b].1)
                    .max()
                    .unwrap_or(0);
                let parity = usize::from(q == Quantifier::Forall);
                let level = if base % 2 == parity { base } else { base + 1 };
                if self.levels.len() <= level {
                    self.levels.resize(level + 1, Vec::new());
                }
                self.instances += 1;
                let saved_binder = self.binder_env.insert(n.0, (self.instances, level));
                let mut saved_vars = Vec::with_capacity(vs.len());
                for v in vs {
                    let fresh = self.aig.fresh_var();
                    self.levels[level].push(fresh);
                    saved_vars.push(std::mem::replace(&mut self.var_env[v.0 as usize], fresh));
                }
                let r = self.conv(*body, pos);
                for (v, old) in vs.iter().zip(saved_vars) {
                    self.var_env[v.0 as usize] = old;
                }
                match saved_binder {
                    Some(old) => self.binder_env.insert(n.0, old),
                    None => self.binder_env.remove(&n.0),
                };
                r
            }
        };
        self.memo.insert(key, l);
        l
    }
}

/// Blocks alternate starting with an existential one.
struct Game {
    blocks: Vec<Vec<u32>>,
    matrix: Lit,
}

fn prenex(c: &QbfCircuit) -> Result<(Aig, Game), QbfError> {
    c.validate()?;
    let scopes = c.scopes();
    let n = c.nodes().len();
    let mut has_quant = vec![false; n];
    for (i, g) in c.nodes().iter().enumerate() {
        has_quant[i] =
            matches!(g, Gate::Quant(..)) || g.children().iter().any(|ch| has_quant[ch.index()]);
    }
    // polarity bits: 1 = reached positively, 2 = negatively
    let mut pols = vec![0u8; n];
    pols[c.root().index()] = 1;
    for i in (0..n).rev() {
        let p = pols[i];
        if p == 0 {
            continue;
        }
        let flip = matches!(c.gate(NodeId(i as u32)), Gate::Not(_));
        let cp = if flip {
            ((p & 1) << 1) | ((p & 2) >> 1)
        } else {
            p
        };
        for ch in c.gate(NodeId(i as u32)).children() {
            pols[ch.index()] |= cp;
        }
    }
    let dual = pols.iter().map(|&p| p == 3).collect();
    let mut pre = Prenexer {
        c,
        aig: Aig::new(),
        free_binders: scopes.free_binders,
        has_quant,
        dual,
        binder_env: HashMap::new(),
        var_env: vec![u32::MAX; c.num_vars()],
        memo: HashMap::new(),
        levels: vec![Vec::new()],
        instances: 0,
    };
    let matrix = pre.conv(c.root(), true);
    // drop empty inner levels by merging their neighbours
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let mut parity_of_last = None;
    for (lvl, vars) in pre.levels.into_iter().enumerate() {
        if vars.is_empty() && lvl > 0 {
            continue;
        }
        match parity_of_last {
            Some(p) if p == lvl % 2 => blocks.last_mut().unwrap().extend(vars),
            _ => {
                if blocks.is_empty() && lvl % 2 == 1 {
                    blocks.push(Vec::new());
                }
                blocks.push(vars);
            }
        }
        parity_of_last = Some(lvl % 2);
    }
    Ok((pre.aig, Game { blocks, matrix }))
}

struct Solver {
    deadline: Option<Instant>,
    refinements: usize,
}

type Move = HashMap<u32, bool>;

impl Solver {
    fn check_time(&self) -> Result<(), QbfError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(QbfError::Timeout),
            _ => Ok(()),
        }
    }

    /// Winning move of the first block's player, who wants `matrix` true.
    fn solve(
        &mut self,
        aig: &mut Aig,
        blocks: &[Vec<u32>],
        matrix: Lit,
    ) -> Result<Option<Move>, QbfError> {
        self.check_time()?;
        if matrix == Lit::TRUE {
            return Ok(Some(Move::new()));
        }
        if matrix == Lit::FALSE {
            return Ok(None);
        }
        match blocks.len() {
            0 => unreachable!("closed matrix without variables is constant"),
            1 => Ok(self.sat(aig, &blocks[0], matrix)),
            _ if blocks[0].is_empty() => {
                let opp = self.solve(aig, &blocks[1..], !matrix)?;
                Ok(if opp.is_none() {
                    Some(Move::new())
                } else {
                    None
                })
            }
            2 => self.two_level(aig, &blocks[0], &blocks[1], matrix),
            _ => self.general(aig, blocks, matrix),
        }
    }

    fn sat(&mut self, aig: &mut Aig, xs: &[u32], matrix: Lit) -> Option<Move> {
        let mut enc = SatEncoder::new();
        enc.assert(aig, matrix);
        if !enc.solve(&[]) {
            return None;
        }
        let m = enc.model();
        Some(xs.iter().map(|&x| (x, enc.value(aig, x, &m))).collect())
    }

    fn two_level(
        &mut self,
        aig: &mut Aig,
        xs: &[u32],
        ys: &[u32],
        matrix: Lit,
    ) -> Result<Option<Move>, QbfError> {
        let mut abs = SatEncoder::new();
        let mut cex = SatEncoder::new();
        cex.assert(aig, !matrix);
        let support: Vec<u32> = {
            let s: std::collections::HashSet<u32> = aig.support(matrix).into_iter().collect();
            xs.iter().copied().filter(|x| s.contains(x)).collect()
        };
        let defs = aig.definitions(matrix, ys);
        loop {
            self.check_time()?;
            if !abs.solve(&[]) {
                return Ok(None);
            }
            let m = abs.model();
            let tau: Move = xs.iter().map(|&x| (x, abs.value(aig, x, &m))).collect();
            let assumptions: Vec<varisat::Lit> = support
                .iter()
                .filter_map(|&x| cex.input_lit(aig, x).map(|l| if tau[&x] { l } else { !l }))
                .collect();
            if !cex.solve(&assumptions) {
                return Ok(Some(tau));
            }
            let cm = cex.model();
            let values: HashMap<u32, bool> =
                ys.iter().map(|&y| (y, cex.value(aig, y, &cm))).collect();
            let mu = instantiate(aig, &defs, &values);
            let refined = aig.substitute(matrix, &mu);
            abs.assert(aig, refined);
            // the constant counterexample always excludes the candidate; the
            // terms need not, and without it the loop could stall
            let at_tau: HashMap<u32, Lit> = tau
                .iter()
                .map(|(&x, &b)| (x, if b { Lit::TRUE } else { Lit::FALSE }))
                .collect();
            if aig.substitute(refined, &at_tau) != Lit::FALSE {
                let constants: HashMap<u32, Lit> = values
                    .iter()
                    .map(|(&y, &b)| (y, if b { Lit::TRUE } else { Lit::FALSE }))
                    .collect();
                let plain = aig.substitute(matrix, &constants);
                abs.assert(aig, plain);
            }
            self.refinements += 1;
        }
    }

    fn general(
        &mut self,
        aig: &mut Aig,
        blocks: &[Vec<u32>],
        matrix: Lit,
    ) -> Result<Option<Move>, QbfError> {
        let xs = &blocks[0];
        let ys = &blocks[1];
        let rest = &blocks[2..];
        // abstraction: the first player's variables plus copies of deeper blocks
        let mut abs_blocks: Vec<Vec<u32>> = vec![xs.clone()];
        abs_blocks.extend((1..rest.len()).map(|_| Vec::new()));
        let mut abs_matrix = Lit::TRUE;
        loop {
            self.check_time()?;
            let Some(cand) = self.solve(aig, &abs_blocks, abs_matrix)? else {
                return Ok(None);
            };
            let tau: HashMap<u32, Lit> = xs
                .iter()
                .map(|&x| {
                    (
                        x,
                        if cand.get(&x).copied().unwrap_or(false) {
                            Lit::TRUE
                        } else {
                            Lit::FALSE
                        },
                    )
                })
                .collect();
            let restricted = aig.substitute(matrix, &tau);
            let Some(counter) = self.solve(aig, &blocks[1..], !restricted)? else {
                return Ok(Some(
                    xs.iter().map(|&x| (x, tau[&x] == Lit::TRUE)).collect(),
                ));
            };
            let mut map: HashMap<u32, Lit> = ys
                .iter()
                .map(|&y| {
                    (
                        y,
                        if counter.get(&y).copied().unwrap_or(false) {
                            Lit::TRUE
                        } else {
                            Lit::FALSE
                        },
                    )
                })
                .collect();
            for (j, block) in rest.iter().enumerate() {
                for &v in block {
                    let fresh = aig.fresh_var();
                    let lit = aig.input(fresh);
                    map.insert(v, lit);
                    abs_blocks[j].push(fresh);
                }
            }
            let copy = aig.substitute(matrix, &map);
            abs_matrix = aig.and(abs_matrix, copy);
            self.refinements += 1;
        }
    }
}

/// Terms for the universal variables of a refinement. Any terms over the
/// outer variables are a sound instantiation; a variable with an equivalence
/// `y <-> g` in the matrix gets `g` with the other universals substituted in
/// turn, so that markers defined by a fixpoint equation follow the candidate.
/// Undefined variables, and variables met again on a definition cycle, take
/// their counterexample value.
fn instantiate(
    aig: &mut Aig,
    defs: &HashMap<u32, Lit>,
    values: &HashMap<u32, bool>,
) -> HashMap<u32, Lit> {
    fn term(
        aig: &mut Aig,
        y: u32,
        defs: &HashMap<u32, Lit>,
        values: &HashMap<u32, bool>,
        done: &mut HashMap<u32, Lit>,
        open: &mut std::collections::HashSet<u32>,
    ) -> Lit {
        if let Some(&t) = done.get(&y) {
            return t;
        }
        let constant = if values[&y] { Lit::TRUE } else { Lit::FALSE };
        let Some(&g) = defs.get(&y) else {
            done.insert(y, constant);
            return constant;
        };
        if !open.insert(y) {
            return constant;
        }
        let mut map = HashMap::new();
        for v in aig.support(g) {
            if values.contains_key(&v) {
                let t = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || {
                    term(aig, v, defs, values, done, open)
                });
                map.insert(v, t);
            }
        }
        open.remove(&y);
        let t = aig.substitute(g, &map);
        done.insert(y, t);
        t
    }
    let mut done = HashMap::new();
    let mut open = std::collections::HashSet::new();
    let mut ys: Vec<u32> = values.keys().copied().collect();
    ys.sort_unstable();
    for y in ys {
        term(aig, y, defs, values, &mut done, &mut open);
    }
    done
}

/// Decides validity of a closed circuit of any shape.
pub fn solve_qbf(
    c: &QbfCircuit,
    deadline: Option<Instant>,
) -> Result<(bool, SolveStats), QbfError> {
    let (mut aig, game) = prenex(c)?;
    let mut stats = SolveStats {
        levels: game.blocks.iter().filter(|b| !b.is_empty()).count(),
        vars: game.blocks.iter().map(Vec::len).sum(),
        refinements: 0,
    };
    let mut s = Solver {
        deadline,
        refinements: 0,
    };
    let blocks = if game.blocks.is_empty() {
        vec![Vec::new()]
    } else {
        game.blocks
    };
    let valid = s.solve(&mut aig, &blocks, game.matrix)?.is_some();
    stats.refinements = s.refinements;
    Ok((valid, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::{CircuitBuilder, CircuitMeta};

    fn build(f: impl FnOnce(&mut CircuitBuilder) -> NodeId) -> QbfCircuit {
        let mut b = CircuitBuilder::new();
        let r = f(&mut b);
        b.finish(r, CircuitMeta::default())
    }

    /// `exists m. ~(m1 & .. & mn) & forall z. (AND z_i <-> (m_i & z_(i+1))) -> z_1`:
    /// invalid, and each constant counterexample excludes a single candidate.
    fn defined_chain(n: usize) -> QbfCircuit {
        build(|b| {
            let ms: Vec<_> = (0..n)
                .map(|i| b.new_var(&format!("m{i}")).unwrap())
                .collect();
            let zs: Vec<_> = (0..n)
                .map(|i| b.new_var(&format!("z{i}")).unwrap())
                .collect();
            let mut defs = Vec::new();
            for i in 0..n {
                let (m, z) = (b.lit(ms[i]), b.lit(zs[i]));
                let rhs = if i + 1 < n {
                    let next = b.lit(zs[i + 1]);
                    b.and2(m, next)
                } else {
                    m
                };
                defs.push(b.iff(z, rhs));
            }
            let d = b.and(defs);
            let z0 = b.lit(zs[0]);
            let body = b.implies(d, z0);
            let fixed = b.quant(Quantifier::Forall, zs.clone(), body);
            let lits: Vec<_> = ms.iter().map(|&m| b.lit(m)).collect();
            let all = b.and(lits);
            let not_all = b.not(all);
            let m = b.and2(not_all, fixed);
            b.quant(Quantifier::Exists, ms, m)
        })
    }

    #[test]
    fn defined_universals_follow_the_candidate() {
        let (valid, stats) = solve_qbf(&defined_chain(16), None).unwrap();
        assert!(!valid);
        assert!(stats.refinements <= 4, "{stats:?}");
        assert_eq!(
            solve_qbf(&defined_chain(4), None).unwrap().0,
            crate::oracle::eval_qbf(&defined_chain(4)).unwrap()
        );
    }

    #[test]
    fn basic_validity() {
        let c = build(|b| {
            let a = b.new_var("a").unwrap();
            let la = b.lit(a);
            b.quant(Quantifier::Exists, vec![a], la)
        });
        assert!(solve_qbf(&c, None).unwrap().0);
        let c = build(|b| {
            let a = b.new_var("a").unwrap();
            let la = b.lit(a);
            b.quant(Quantifier::Forall, vec![a], la)
        });
        assert!(!solve_qbf(&c, None).unwrap().0);
    }

    #[test]
    fn forall_exists_iff() {
        let mk = |outer: Quantifier| {
            build(|b| {
                let a = b.new_var("a").unwrap();
                let x = b.new_var("x").unwrap();
                let (la, lx) = (b.lit(a), b.lit(x));
                let m = b.iff(la, lx);
                let inner = b.quant(outer.dual(), vec![x], m);
                b.quant(outer, vec![a], inner)
            })
        };
        assert!(solve_qbf(&mk(Quantifier::Forall), None).unwrap().0);
        assert!(!solve_qbf(&mk(Quantifier::Exists), None).unwrap().0);
    }

    #[test]
    fn dual_polarity_quantifier_is_copied() {
        // (forall x. x | a) <-> false, under exists a: the shared gate appears
        // with both polarities
        let c = build(|b| {
            let a = b.new_var("a").unwrap();
            let x = b.new_var("x").unwrap();
            let (la, lx) = (b.lit(a), b.lit(x));
            let body = b.or(vec![lx, la]);
            let q = b.quant(Quantifier::Forall, vec![x], body);
            let nq = b.not(q);
            let both = b.iff(q, la);
            let t = b.constant(true);
            let m = b.and(vec![both, t, nq]);
            b.quant(Quantifier::Exists, vec![a], m)
        });
        // q == a, so q <-> a holds, and ~q needs a false: valid with a = false
        let (valid, stats) = solve_qbf(&c, None).unwrap();
        assert!(valid);
        assert!(stats.vars >= 3);
    }

    #[test]
    fn three_levels() {
        // exists a forall x exists y. (y <-> (a ^ x)) & (a | ~a)
        let c = build(|b| {
            let a = b.new_var("a").unwrap();
            let x = b.new_var("x").unwrap();
            let y = b.new_var("y").unwrap();
            let (la, lx, ly) = (b.lit(a), b.lit(x), b.lit(y));
            let ax = b.iff(la, lx);
            let nax = b.not(ax);
            let m = b.iff(ly, nax);
            let qy = b.quant(Quantifier::Exists, vec![y], m);
            let qx = b.quant(Quantifier::Forall, vec![x], qy);
            b.quant(Quantifier::Exists, vec![a], qx)
        });
        assert!(solve_qbf(&c, None).unwrap().0);
    }
}

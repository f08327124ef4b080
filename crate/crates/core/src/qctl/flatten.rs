//! Extraction of nested temporal subformulas into fresh propositions.

use super::{is_nnf, Formula, FreshNames, Prenex, Prop, QctlError, QuantKind, QuantifierPrefix};
use Formula::*;

/// `prefix. exists k1..km. (top & AND_i AG(k_i op theta_i))` where `op` is
/// equivalence after [`flat1`] and implication after [`flat2`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flat {
    pub prefix: QuantifierPrefix,
    pub top: Formula,
    pub clauses: Vec<(Prop, Formula)>,
    pub equivalence: bool,
}

impl Flat {
    pub fn kappas(&self) -> impl Iterator<Item = &Prop> {
        self.clauses.iter().map(|(k, _)| k)
    }

    /// The `AG(k op theta)` conjunct for clause `i`.
    pub fn clause_formula(&self, i: usize) -> Formula {
        let (k, theta) = &self.clauses[i];
        let k = Atom(k.clone());
        let link = if self.equivalence {
            Formula::iff(k, theta.clone())
        } else {
            Formula::implies(k, theta.clone())
        };
        Formula::ag(link)
    }

    pub fn to_formula(&self) -> Formula {
        if self.clauses.is_empty() {
            return self.prefix.close(self.top.clone());
        }
        let conj = (0..self.clauses.len()).map(|i| self.clause_formula(i));
        let body = Formula::and_all(std::iter::once(self.top.clone()).chain(conj));
        let mut prefix = self.prefix.clone();
        for k in self.kappas() {
            prefix.push(QuantKind::Exists, k.clone());
        }
        prefix.close(body)
    }
}

struct Extractor<'a> {
    names: &'a mut FreshNames,
    clauses: Vec<(Prop, Formula)>,
    keep_top_level_until: bool,
}

impl Extractor<'_> {
    fn extract(&mut self, theta: Formula) -> Formula {
        let k = self.names.numbered("k", 1);
        self.clauses.push((k.clone(), theta));
        Atom(k)
    }

    fn walk(&mut self, f: &Formula, depth: usize) -> Formula {
        if !f.is_temporal() {
            return f.map_children(|c| self.walk(c, depth));
        }
        if depth == 0 && !self.keep_top_level_until {
            // EF and AG written as until forms stay in the top-level part
            match f {
                Eu(a, b) if **a == True => return Formula::ef(self.walk(b, 1)),
                Aw(a, b) if **b == False => return Formula::ag(self.walk(a, 1)),
                Eu(..) | Au(..) | Ew(..) | Aw(..) => {
                    let basic = f.map_children(|c| self.walk(c, 1));
                    return self.extract(basic);
                }
                _ => {}
            }
        }
        let basic = f.map_children(|c| self.walk(c, depth + 1));
        if depth == 0 {
            basic
        } else {
            self.extract(basic)
        }
    }
}

/// Flattening with equivalences. The body must be quantifier free; temporal
/// nodes below the top level are replaced innermost-leftmost first.
pub fn flat1(p: &Prenex, names: &mut FreshNames) -> Result<Flat, QctlError> {
    if !p.body.is_quantifier_free() {
        return Err(QctlError::Shape(
            "flattening needs a quantifier-free body".into(),
        ));
    }
    names.reserve_formula(&p.to_formula());
    let mut ex = Extractor {
        names,
        clauses: Vec::new(),
        keep_top_level_until: true,
    };
    let top = ex.walk(&p.body, 0);
    Ok(Flat {
        prefix: p.prefix.clone(),
        top,
        clauses: ex.clauses,
        equivalence: true,
    })
}

/// Flattening with implications for bodies in negation normal form. The
/// top-level part keeps only EX, AX, EF and AG.
pub fn flat2(p: &Prenex, names: &mut FreshNames) -> Result<Flat, QctlError> {
    if !p.body.is_quantifier_free() {
        return Err(QctlError::Shape(
            "flattening needs a quantifier-free body".into(),
        ));
    }
    if !is_nnf(&p.body) {
        return Err(QctlError::NotNnf(p.body.to_string()));
    }
    names.reserve_formula(&p.to_formula());
    let mut ex = Extractor {
        names,
        clauses: Vec::new(),
        keep_top_level_until: false,
    };
    let top = ex.walk(&p.body, 0);
    Ok(Flat {
        prefix: p.prefix.clone(),
        top,
        clauses: ex.clauses,
        equivalence: false,
    })
}

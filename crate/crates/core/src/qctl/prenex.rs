//! Hoisting quantifiers out of Boolean contexts.

use super::{freshen, Formula, Prop, QctlError, QuantKind};
use Formula::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub kind: QuantKind,
    pub prop: Prop,
}

/// Ordered quantifier block, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantifierPrefix(pub Vec<PrefixEntry>);

impl QuantifierPrefix {
    pub fn push(&mut self, kind: QuantKind, prop: Prop) {
        self.0.push(PrefixEntry { kind, prop });
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrefixEntry> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn flipped(mut self) -> Self {
        for e in &mut self.0 {
            e.kind = e.kind.dual();
        }
        self
    }

    /// Wraps `body` in the prefix.
    pub fn close(&self, body: Formula) -> Formula {
        self.0.iter().rev().fold(body, |acc, e| {
            Formula::Quant(e.kind, e.prop.clone(), Box::new(acc))
        })
    }
}

/// A prefix over a quantifier-free body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prenex {
    pub prefix: QuantifierPrefix,
    pub body: Formula,
}

impl Prenex {
    pub fn to_formula(&self) -> Formula {
        self.prefix.close(self.body.clone())
    }
}

/// Splits a freshened formula into prefix and quantifier-free body, moving
/// quantifiers through negation, conjunction, disjunction, implication and
/// equivalence. Quantifiers below a temporal modality are rejected.
pub fn prenex_boolean(f: &Formula) -> Result<Prenex, QctlError> {
    let (prefix, body) = hoist(f)?;
    Ok(Prenex { prefix, body })
}

fn hoist(f: &Formula) -> Result<(QuantifierPrefix, Formula), QctlError> {
    match f {
        Quant(k, p, a) => {
            let (mut pre, body) = hoist(a)?;
            pre.0.insert(
                0,
                PrefixEntry {
                    kind: *k,
                    prop: p.clone(),
                },
            );
            Ok((pre, body))
        }
        Not(a) => {
            let (pre, body) = hoist(a)?;
            Ok((pre.flipped(), Formula::not(body)))
        }
        And(a, b) | Or(a, b) | Implies(a, b) => {
            let (pa, ba) = hoist(a)?;
            let (pb, bb) = hoist(b)?;
            let mut pre = if matches!(f, Implies(..)) {
                pa.flipped()
            } else {
                pa
            };
            pre.0.extend(pb.0);
            let body = match f {
                And(..) => Formula::and(ba, bb),
                Or(..) => Formula::or(ba, bb),
                _ => Formula::implies(ba, bb),
            };
            Ok((pre, body))
        }
        Iff(a, b) => {
            if a.is_quantifier_free() && b.is_quantifier_free() {
                return Ok((QuantifierPrefix::default(), f.clone()));
            }
            // both operands occur twice; the second copies get fresh binders
            let mut reserved = super::props_of(f);
            collect_bound(f, &mut reserved);
            let a2 = freshen(a, &reserved);
            collect_bound(&a2, &mut reserved);
            let b2 = freshen(b, &reserved);
            let split = Formula::and(
                Formula::implies((**a).clone(), (**b).clone()),
                Formula::implies(b2, a2),
            );
            hoist(&split)
        }
        VecExists(..) => Err(QctlError::Shape(
            "vector quantifier before prenexing".into(),
        )),
        _ if f.is_temporal() => {
            if f.is_quantifier_free() {
                Ok((QuantifierPrefix::default(), f.clone()))
            } else {
                Err(QctlError::NotPrenexable(f.to_string()))
            }
        }
        _ => Ok((QuantifierPrefix::default(), f.clone())),
    }
}

fn collect_bound(f: &Formula, out: &mut std::collections::BTreeSet<Prop>) {
    if let Quant(_, p, _) | VecExists(p, ..) = f {
        out.insert(p.clone());
    }
    for c in f.children() {
        collect_bound(c, out);
    }
}

/// Downgrades counting quantifiers and gathers their uniqueness guards:
/// `Q~. (AND uniq(forall1 props) -> (AND uniq(exists1 props) & body))`.
pub fn gather_uniq(p: &Prenex) -> Prenex {
    let mut prefix = QuantifierPrefix::default();
    let mut ex1 = Vec::new();
    let mut all1 = Vec::new();
    for e in p.prefix.iter() {
        match e.kind {
            QuantKind::Exists1 => {
                ex1.push(Uniq(e.prop.clone()));
                prefix.push(QuantKind::Exists, e.prop.clone());
            }
            QuantKind::Forall1 => {
                all1.push(Uniq(e.prop.clone()));
                prefix.push(QuantKind::Forall, e.prop.clone());
            }
            k => prefix.push(k, e.prop.clone()),
        }
    }
    let mut body = p.body.clone();
    if !ex1.is_empty() {
        body = Formula::and(Formula::and_all(ex1), body);
    }
    if !all1.is_empty() {
        body = Formula::implies(Formula::and_all(all1), body);
    }
    Prenex { prefix, body }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qctl::parse_qctl;

    fn p(s: &str) -> Formula {
        parse_qctl(s).unwrap()
    }

    #[test]
    fn hoists_through_conjunction() {
        let r = prenex_boolean(&p("(exists p. A G p) & E F b")).unwrap();
        assert_eq!(r.prefix.0.len(), 1);
        assert_eq!(r.prefix.0[0].kind, QuantKind::Exists);
        assert_eq!(r.body, p("A G p & E F b"));
    }

    #[test]
    fn negation_and_implication_flip() {
        let r = prenex_boolean(&p("~(exists p. p) | ((forall q. q) -> a)")).unwrap();
        let kinds: Vec<_> = r.prefix.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![QuantKind::Forall, QuantKind::Exists]);
    }

    #[test]
    fn temporal_scope_is_rejected() {
        let err = prenex_boolean(&p("E X (forall p. A X p)")).unwrap_err();
        assert!(matches!(err, QctlError::NotPrenexable(_)));
    }

    #[test]
    fn already_prenex_is_split_unchanged() {
        let f = p("exists1 p1. exists1 p2. A G E F (p1 | p2)");
        let r = prenex_boolean(&f).unwrap();
        assert_eq!(r.to_formula(), f);
    }

    #[test]
    fn iff_with_quantifier_duplicates_with_fresh_binders() {
        let r = prenex_boolean(&p("(exists p. p) <-> a")).unwrap();
        let props: Vec<&str> = r.prefix.iter().map(|e| e.prop.as_str()).collect();
        assert_eq!(props, vec!["p", "p_1"]);
        assert_eq!(r.prefix.0[0].kind, QuantKind::Forall);
        assert_eq!(r.prefix.0[1].kind, QuantKind::Exists);
    }

    #[test]
    fn gather_examples() {
        let g = gather_uniq(&prenex_boolean(&p("exists1 p. a")).unwrap());
        assert_eq!(
            g.to_formula(),
            Formula::exists("p", Formula::and(Uniq(Prop::new("p")), p("a")))
        );
        let g = gather_uniq(&prenex_boolean(&p("forall1 p. a")).unwrap());
        assert_eq!(
            g.to_formula(),
            Formula::forall("p", Formula::implies(Uniq(Prop::new("p")), p("a")))
        );
        let g = gather_uniq(&prenex_boolean(&p("exists1 p. forall1 q. a")).unwrap());
        let want = Formula::exists(
            "p",
            Formula::forall(
                "q",
                Formula::implies(
                    Uniq(Prop::new("q")),
                    Formula::and(Uniq(Prop::new("p")), p("a")),
                ),
            ),
        );
        assert_eq!(g.to_formula(), want);
    }
}

//! QCTL formulas: syntax tree, surface parser, normal forms and flattening.

mod flatten;
mod macros;
mod metrics;
mod parse;
mod prenex;
mod transform;

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use flatten::{flat1, flat2, Flat};
pub use macros::{atleast_k_x, exactly_k_x, unique_f, unique_x};
pub use metrics::{formula_size, props_of, temporal_depths, temporal_height};
pub use parse::parse_qctl;
pub use prenex::{gather_uniq, prenex_boolean, PrefixEntry, Prenex, QuantifierPrefix};
pub use transform::{desugar_counting, freshen, is_nnf, normalize_core, to_nnf, FreshNames};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QctlError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("quantifier under a temporal modality at {0}; use the uu or fp strategy")]
    NotPrenexable(String),
    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),
    #[error("unexpected formula shape: {0}")]
    Shape(String),
}

/// An atomic proposition name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop(Arc<str>);

impl Prop {
    pub fn new(s: &str) -> Self {
        Prop(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Prop {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Prop {
    fn from(s: &str) -> Self {
        Prop::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantKind {
    Exists,
    Forall,
    /// Exists exactly one state carrying the proposition.
    Exists1,
    Forall1,
}

impl QuantKind {
    pub fn dual(self) -> Self {
        match self {
            QuantKind::Exists => QuantKind::Forall,
            QuantKind::Forall => QuantKind::Exists,
            QuantKind::Exists1 => QuantKind::Forall1,
            QuantKind::Forall1 => QuantKind::Exists1,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            QuantKind::Exists => "exists",
            QuantKind::Forall => "forall",
            QuantKind::Exists1 => "exists1",
            QuantKind::Forall1 => "forall1",
        }
    }

    pub fn is_existential(self) -> bool {
        matches!(self, QuantKind::Exists | QuantKind::Exists1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Prop),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Ex(Box<Formula>),
    Ax(Box<Formula>),
    Ef(Box<Formula>),
    Af(Box<Formula>),
    Eg(Box<Formula>),
    Ag(Box<Formula>),
    Eu(Box<Formula>, Box<Formula>),
    Au(Box<Formula>, Box<Formula>),
    Ew(Box<Formula>, Box<Formula>),
    Aw(Box<Formula>, Box<Formula>),
    Quant(QuantKind, Prop, Box<Formula>),
    /// Exactly one reachable state carries the proposition.
    Uniq(Prop),
    /// Existential quantification of a per-state bit vector of the given width.
    VecExists(Prop, u32, Box<Formula>),
    /// Compares the current state's bit vector value with a constant.
    VecCmp(Prop, CmpOp, u64),
}

use Formula::*;

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn atom(p: &str) -> Formula {
        Atom(Prop::new(p))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Not(bx(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(bx(a), bx(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(bx(a), bx(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(bx(a), bx(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Iff(bx(a), bx(b))
    }

    pub fn ex(f: Formula) -> Formula {
        Ex(bx(f))
    }

    pub fn ax(f: Formula) -> Formula {
        Ax(bx(f))
    }

    pub fn ef(f: Formula) -> Formula {
        Ef(bx(f))
    }

    pub fn af(f: Formula) -> Formula {
        Af(bx(f))
    }

    pub fn eg(f: Formula) -> Formula {
        Eg(bx(f))
    }

    pub fn ag(f: Formula) -> Formula {
        Ag(bx(f))
    }

    pub fn eu(a: Formula, b: Formula) -> Formula {
        Eu(bx(a), bx(b))
    }

    pub fn au(a: Formula, b: Formula) -> Formula {
        Au(bx(a), bx(b))
    }

    pub fn ew(a: Formula, b: Formula) -> Formula {
        Ew(bx(a), bx(b))
    }

    pub fn aw(a: Formula, b: Formula) -> Formula {
        Aw(bx(a), bx(b))
    }

    pub fn quant(k: QuantKind, p: &str, f: Formula) -> Formula {
        Quant(k, Prop::new(p), bx(f))
    }

    pub fn exists(p: &str, f: Formula) -> Formula {
        Self::quant(QuantKind::Exists, p, f)
    }

    pub fn forall(p: &str, f: Formula) -> Formula {
        Self::quant(QuantKind::Forall, p, f)
    }

    pub fn exists1(p: &str, f: Formula) -> Formula {
        Self::quant(QuantKind::Exists1, p, f)
    }

    pub fn forall1(p: &str, f: Formula) -> Formula {
        Self::quant(QuantKind::Forall1, p, f)
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::and).unwrap_or(True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::or).unwrap_or(False)
    }

    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            Ex(_) | Ax(_) | Ef(_) | Af(_) | Eg(_) | Ag(_) | Eu(..) | Au(..) | Ew(..) | Aw(..)
        )
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            True | False | Atom(_) | Uniq(_) | VecCmp(..) => vec![],
            Not(a) | Ex(a) | Ax(a) | Ef(a) | Af(a) | Eg(a) | Ag(a) => vec![a],
            Quant(_, _, a) | VecExists(_, _, a) => vec![a],
            And(a, b)
            | Or(a, b)
            | Implies(a, b)
            | Iff(a, b)
            | Eu(a, b)
            | Au(a, b)
            | Ew(a, b)
            | Aw(a, b) => vec![a, b],
        }
    }

    /// Rebuilds this node with children produced by `f`, in order.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            True | False | Atom(_) | Uniq(_) | VecCmp(..) => self.clone(),
            Not(a) => Not(bx(f(a))),
            Ex(a) => Ex(bx(f(a))),
            Ax(a) => Ax(bx(f(a))),
            Ef(a) => Ef(bx(f(a))),
            Af(a) => Af(bx(f(a))),
            Eg(a) => Eg(bx(f(a))),
            Ag(a) => Ag(bx(f(a))),
            Quant(k, p, a) => Quant(*k, p.clone(), bx(f(a))),
            VecExists(p, w, a) => VecExists(p.clone(), *w, bx(f(a))),
            And(a, b) => {
                let a = f(a);
                And(bx(a), bx(f(b)))
            }
            Or(a, b) => {
                let a = f(a);
                Or(bx(a), bx(f(b)))
            }
            Implies(a, b) => {
                let a = f(a);
                Implies(bx(a), bx(f(b)))
            }
            Iff(a, b) => {
                let a = f(a);
                Iff(bx(a), bx(f(b)))
            }
            Eu(a, b) => {
                let a = f(a);
                Eu(bx(a), bx(f(b)))
            }
            Au(a, b) => {
                let a = f(a);
                Au(bx(a), bx(f(b)))
            }
            Ew(a, b) => {
                let a = f(a);
                Ew(bx(a), bx(f(b)))
            }
            Aw(a, b) => {
                let a = f(a);
                Aw(bx(a), bx(f(b)))
            }
        }
    }

    /// True when no quantifier of any kind occurs.
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Quant(..) | VecExists(..) => false,
            _ => self.children().iter().all(|c| c.is_quantifier_free()),
        }
    }
}

// Binding strength used by the printer: higher binds tighter.
fn prec(f: &Formula) -> u8 {
    match f {
        Iff(..) => 1,
        Implies(..) => 2,
        Or(..) => 3,
        And(..) => 4,
        Quant(..) | VecExists(..) => 0,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if prec(child) < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unary = |f: &mut fmt::Formatter<'_>, op: &str, a: &Formula| {
            f.write_str(op)?;
            write_child(f, a, 5)
        };
        let bin =
            |f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula, lp: u8, rp: u8| {
                write_child(f, a, lp)?;
                write!(f, " {op} ")?;
                write_child(f, b, rp)
            };
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Atom(p) => write!(f, "{p}"),
            Not(a) => unary(f, "~", a),
            // same-operator chains are printed with explicit grouping on the right
            And(a, b) => bin(f, a, "&", b, 4, 5),
            Or(a, b) => bin(f, a, "|", b, 3, 4),
            Implies(a, b) => bin(f, a, "->", b, 3, 2),
            Iff(a, b) => bin(f, a, "<->", b, 2, 2),
            Ex(a) => unary(f, "E X ", a),
            Ax(a) => unary(f, "A X ", a),
            Ef(a) => unary(f, "E F ", a),
            Af(a) => unary(f, "A F ", a),
            Eg(a) => unary(f, "E G ", a),
            Ag(a) => unary(f, "A G ", a),
            Eu(a, b) => write!(f, "E [{a} U {b}]"),
            Au(a, b) => write!(f, "A [{a} U {b}]"),
            Ew(a, b) => write!(f, "E [{a} W {b}]"),
            Aw(a, b) => write!(f, "A [{a} W {b}]"),
            Quant(k, p, a) => write!(f, "{} {p}. {a}", k.keyword()),
            Uniq(p) => write!(f, "uniq({p})"),
            VecExists(p, w, a) => write!(f, "existsvec {p}:{w}. {a}"),
            VecCmp(p, CmpOp::Eq, d) => write!(f, "[{p} = {d}]"),
            VecCmp(p, CmpOp::Lt, d) => write!(f, "[{p} < {d}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_through_parser() {
        let texts = [
            "exists p. A G (p -> E X p)",
            "E [a U b] & ~E X (a | b)",
            "(a -> b) -> c",
            "a -> b -> c",
            "a <-> (b <-> c)",
            "forall1 q. E F q & A [q W ~a]",
            "~(exists p. p) | a",
        ];
        for t in texts {
            let f = parse_qctl(t).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_qctl(&printed).unwrap(), f, "{t} printed as {printed}");
        }
    }
}

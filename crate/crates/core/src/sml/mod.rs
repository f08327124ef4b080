//! Sabotage modal logic: syntax, the edge-split structure and the
//! translation into QCTL.

mod parse;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::kripke::{valid_ident, Kripke, KripkeError, StateId};
use crate::qbf::{decide, QbfError};
use crate::qctl::{Formula, Prop, QctlError};
use crate::reduce::{reduce, ReduceError, ReductionConfig};

pub use parse::parse_sml;

/// Label of the midpoint states of the expanded structure.
pub const INTER: &str = "inter";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmlError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("proposition `{0}` is reserved by the translation")]
    Reserved(String),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Qctl(#[from] QctlError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Qbf(#[from] QbfError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sml {
    True,
    Atom(Prop),
    Not(Box<Sml>),
    And(Box<Sml>, Box<Sml>),
    /// Some successor satisfies the argument.
    Diamond(Box<Sml>),
    /// Every successor satisfies the argument.
    Square(Box<Sml>),
    /// After deleting some edge anywhere.
    SabotageSome(Box<Sml>),
    /// After deleting any edge anywhere.
    SabotageEvery(Box<Sml>),
    /// After deleting some outgoing edge of the current state.
    LocalSabotageSome(Box<Sml>),
    LocalSabotageEvery(Box<Sml>),
}

impl Sml {
    pub fn atom(p: &str) -> Sml {
        Sml::Atom(Prop::new(p))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Sml) -> Sml {
        Sml::Not(Box::new(a))
    }

    pub fn and(a: Sml, b: Sml) -> Sml {
        Sml::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Sml, b: Sml) -> Sml {
        Sml::not(Sml::and(Sml::not(a), Sml::not(b)))
    }

    pub fn diamond(a: Sml) -> Sml {
        Sml::Diamond(Box::new(a))
    }

    pub fn square(a: Sml) -> Sml {
        Sml::Square(Box::new(a))
    }

    pub fn sabotage_some(a: Sml) -> Sml {
        Sml::SabotageSome(Box::new(a))
    }

    pub fn sabotage_every(a: Sml) -> Sml {
        Sml::SabotageEvery(Box::new(a))
    }

    pub fn local_some(a: Sml) -> Sml {
        Sml::LocalSabotageSome(Box::new(a))
    }

    pub fn local_every(a: Sml) -> Sml {
        Sml::LocalSabotageEvery(Box::new(a))
    }

    fn children(&self) -> Vec<&Sml> {
        match self {
            Sml::True | Sml::Atom(_) => vec![],
            Sml::And(a, b) => vec![a, b],
            Sml::Not(a)
            | Sml::Diamond(a)
            | Sml::Square(a)
            | Sml::SabotageSome(a)
            | Sml::SabotageEvery(a)
            | Sml::LocalSabotageSome(a)
            | Sml::LocalSabotageEvery(a) => vec![a],
        }
    }

    fn is_sabotage(&self) -> bool {
        matches!(
            self,
            Sml::SabotageSome(_)
                | Sml::SabotageEvery(_)
                | Sml::LocalSabotageSome(_)
                | Sml::LocalSabotageEvery(_)
        )
    }

    /// Maximal nesting of edge-deleting modalities.
    pub fn sabotage_height(&self) -> usize {
        let inner = self
            .children()
            .into_iter()
            .map(Sml::sabotage_height)
            .max()
            .unwrap_or(0);
        inner + usize::from(self.is_sabotage())
    }

    /// Propositions occurring in the formula.
    pub fn props(&self) -> Vec<Prop> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let Sml::Atom(p) = f {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            stack.extend(f.children());
        }
        out
    }
}

impl fmt::Display for Sml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unary = |f: &mut fmt::Formatter<'_>, op: &str, a: &Sml| match a {
            Sml::And(..) => write!(f, "{op}({a})"),
            _ => write!(f, "{op}{a}"),
        };
        match self {
            Sml::True => f.write_str("true"),
            Sml::Atom(p) => write!(f, "{p}"),
            Sml::Not(a) => unary(f, "~", a),
            Sml::And(a, b) => {
                write!(f, "{a} & ")?;
                match **b {
                    Sml::And(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            Sml::Diamond(a) => unary(f, "<>", a),
            Sml::Square(a) => unary(f, "[]", a),
            Sml::SabotageSome(a) => unary(f, "<~>", a),
            Sml::SabotageEvery(a) => unary(f, "[~]", a),
            Sml::LocalSabotageSome(a) => unary(f, "<~l>", a),
            Sml::LocalSabotageEvery(a) => unary(f, "[~l]", a),
        }
    }
}

/// Whether `name` is taken by the translation (`inter`, `del<i>`).
pub fn is_reserved(name: &str) -> bool {
    name == INTER
        || name
            .strip_prefix("del")
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Name of the proposition marking the edge deleted at nesting level `i`.
pub fn del(i: usize) -> String {
    format!("del{i}")
}

/// Splits every edge through a fresh `inter` midpoint and adds all edges
/// between original states, self-loops included. Original states keep their
/// indices; midpoints follow in edge order.
pub fn expand_structure(k: &Kripke) -> Result<Kripke, SmlError> {
    if let Some(p) = k.props().into_iter().find(|p| is_reserved(p.as_str())) {
        return Err(SmlError::Reserved(p.to_string()));
    }
    let mut b = Kripke::builder();
    let mut taken: HashSet<String> = HashSet::new();
    for x in k.states() {
        let id = b.state(k.name(x))?;
        for p in k.labels(x) {
            b.label(id, p.as_str())?;
        }
        taken.insert(k.name(x).to_string());
    }
    let edges: Vec<(StateId, StateId)> = k.edges().collect();
    for (i, &(x, y)) in edges.iter().enumerate() {
        let mut name = format!("mid_{}_{}", k.name(x), k.name(y));
        if !valid_ident(&name) || taken.contains(&name) {
            name = format!("mid{i}");
        }
        let mut n = 0;
        while taken.contains(&name) {
            n += 1;
            name = format!("mid{i}_{n}");
        }
        taken.insert(name.clone());
        let v = b.state(&name)?;
        b.label(v, INTER)?;
        b.edge(x, v);
        b.edge(v, y);
    }
    for x in k.states() {
        for y in k.states() {
            b.edge(x, y);
        }
    }
    b.init(k.name(k.init()));
    Ok(b.build()?)
}

/// `inter & ~del0 & ... & ~del<n-1> & last`.
fn live_midpoint(n: usize, last: Formula) -> Formula {
    let fresh = (0..n).map(|i| Formula::not(Formula::atom(&del(i))));
    Formula::and_all(
        std::iter::once(Formula::atom(INTER))
            .chain(fresh)
            .chain([last]),
    )
}

/// Translation at sabotage depth `n`, to be checked on the expanded structure.
pub fn translate_sml(f: &Sml, n: usize) -> Formula {
    let diamond = |a: &Sml| Formula::ex(live_midpoint(n, Formula::ex(translate_sml(a, n))));
    let sabotage = |a: &Sml, local: bool| {
        let chosen = live_midpoint(n, Formula::atom(&del(n)));
        let reach = if local {
            Formula::ex(chosen)
        } else {
            Formula::ex(Formula::ex(chosen))
        };
        Formula::exists1(&del(n), Formula::and(reach, translate_sml(a, n + 1)))
    };
    match f {
        Sml::True => Formula::True,
        Sml::Atom(p) => Formula::Atom(p.clone()),
        Sml::Not(a) => Formula::not(translate_sml(a, n)),
        Sml::And(a, b) => Formula::and(translate_sml(a, n), translate_sml(b, n)),
        Sml::Diamond(a) => diamond(a),
        Sml::Square(a) => Formula::not(diamond(&Sml::not((**a).clone()))),
        Sml::SabotageSome(a) => sabotage(a, false),
        Sml::SabotageEvery(a) => Formula::not(sabotage(&Sml::not((**a).clone()), false)),
        Sml::LocalSabotageSome(a) => sabotage(a, true),
        Sml::LocalSabotageEvery(a) => Formula::not(sabotage(&Sml::not((**a).clone()), true)),
    }
}

/// The expanded structure and the QCTL formula equivalent to `f`; original
/// states keep their indices.
pub fn sml_to_qctl(k: &Kripke, f: &Sml) -> Result<(Kripke, Formula), SmlError> {
    if let Some(p) = f.props().into_iter().find(|p| is_reserved(p.as_str())) {
        return Err(SmlError::Reserved(p.to_string()));
    }
    Ok((expand_structure(k)?, translate_sml(f, 0)))
}

/// Decides `k, x |= f` through expansion, translation and the configured
/// reduction.
pub fn check_sml(k: &Kripke, x: StateId, f: &Sml, cfg: &ReductionConfig) -> Result<bool, SmlError> {
    let (expanded, phi) = sml_to_qctl(k, f)?;
    let c = reduce(&expanded, x, &phi, cfg)?;
    Ok(decide(&c, cfg.deadline)?)
}

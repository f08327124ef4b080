//! The five reductions from QCTL model checking to QBF validity.
//!
//! Every strategy is a formula-level preprocessing step followed by the
//! shared translation [`hat_translate`].

mod bitvec;
mod hat;
mod names;
mod rewrite;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{Kripke, StateId};
use crate::qbf::{CircuitMeta, QbfCircuit, QbfError};
use crate::qctl::{
    desugar_counting, flat1, flat2, freshen, gather_uniq, normalize_core, prenex_boolean, to_nnf,
    Formula, FreshNames, Prenex, Prop, QctlError, QuantKind,
};

pub use bitvec::{bitvec_eq, bitvec_lt, width_for};
pub use hat::{hat_translate, HatOptions};
pub use names::VarNamer;
pub use rewrite::{expand_uniq, fpc, replace_uw, replace_uw2};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Qctl(#[from] QctlError),
    #[error(transparent)]
    Qbf(#[from] QbfError),
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("the vector bound must be at least 1")]
    BoundTooSmall,
    #[error("constant {value} does not fit in {width} bits")]
    OutOfRange { value: u64, width: usize },
    #[error("circuit exceeds {limit} gates")]
    TooLarge { limit: usize },
    #[error("translation deadline reached")]
    Timeout,
    #[error("unsupported formula shape: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Direct unfolding of the until modalities.
    Uu,
    /// Fixpoint markers for untils.
    Fp,
    /// Flattening with equivalences, then fixpoint markers.
    Fpf,
    /// Flattening with implications and one universal marker; prenex output.
    Pnf,
    /// Flattening with distance bit vectors; prenex output.
    Fbv,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Uu,
        Strategy::Fp,
        Strategy::Fpf,
        Strategy::Pnf,
        Strategy::Fbv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uu => "uu",
            Strategy::Fp => "fp",
            Strategy::Fpf => "fpf",
            Strategy::Pnf => "pnf",
            Strategy::Fbv => "fbv",
        }
    }

    /// Whether the strategy needs quantifiers outside temporal modalities.
    pub fn needs_prenex_input(self) -> bool {
        matches!(self, Strategy::Fpf | Strategy::Pnf | Strategy::Fbv)
    }

    /// Whether the produced circuit is prenex.
    pub fn prenex_output(self) -> bool {
        matches!(self, Strategy::Pnf | Strategy::Fbv)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy {s:?}; expected uu, fp, fpf, pnf or fbv"))
    }
}

/// How `uniq(p)` and the propositions of counting quantifiers are encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniqEncoding {
    /// Expand into `EF p & forall u. (EF (u & p) -> AG (p -> u))`.
    Qctl,
    /// One disjunct per reachable state over the per-state variables.
    Disjunction,
    /// A binary state number per proposition.
    #[default]
    Bitvector,
}

impl UniqEncoding {
    pub const ALL: [UniqEncoding; 3] = [
        UniqEncoding::Qctl,
        UniqEncoding::Disjunction,
        UniqEncoding::Bitvector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UniqEncoding::Qctl => "qctl",
            UniqEncoding::Disjunction => "disjunction",
            UniqEncoding::Bitvector => "bitvector",
        }
    }
}

impl fmt::Display for UniqEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UniqEncoding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        UniqEncoding::ALL
            .into_iter()
            .find(|u| u.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown uniq encoding {s:?}; expected qctl, disjunction or bitvector")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionConfig {
    pub strategy: Strategy,
    pub uniq_encoding: UniqEncoding,
    /// Vector bound for [`Strategy::Fbv`]; the number of states when unset.
    pub fbv_bound: Option<usize>,
    pub max_gates: Option<usize>,
    pub deadline: Option<Instant>,
    /// Recorded in the circuit metadata.
    pub instance: String,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            strategy: Strategy::Pnf,
            uniq_encoding: UniqEncoding::Bitvector,
            fbv_bound: None,
            max_gates: None,
            deadline: None,
            instance: String::new(),
        }
    }
}

impl ReductionConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        ReductionConfig {
            strategy,
            ..Default::default()
        }
    }
}

/// Result of the formula-level step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub formula: Formula,
    pub uniq_props: BTreeSet<Prop>,
    /// False for vector bounds below the number of states.
    pub exact: bool,
}

fn counting_props(prefix: impl IntoIterator<Item = (QuantKind, Prop)>) -> BTreeSet<Prop> {
    prefix
        .into_iter()
        .filter(|(k, _)| matches!(k, QuantKind::Exists1 | QuantKind::Forall1))
        .map(|(_, p)| p)
        .collect()
}

fn counting_props_in(f: &Formula, out: &mut BTreeSet<Prop>) {
    if let Formula::Quant(QuantKind::Exists1 | QuantKind::Forall1, p, _) = f {
        out.insert(p.clone());
    }
    for c in f.children() {
        counting_props_in(c, out);
    }
}

/// Prenex form with counting guards gathered, uniqueness expanded when the
/// encoding asks for it.
fn guarded_prenex(
    f: &Formula,
    cfg: &ReductionConfig,
    names: &mut FreshNames,
) -> Result<(Prenex, BTreeSet<Prop>), ReduceError> {
    let pre = prenex_boolean(f)?;
    let uniq = counting_props(pre.prefix.iter().map(|e| (e.kind, e.prop.clone())));
    let gathered = gather_uniq(&pre);
    if cfg.uniq_encoding == UniqEncoding::Qctl {
        let expanded = expand_uniq(&gathered.to_formula(), names);
        return Ok((prenex_boolean(&expanded)?, BTreeSet::new()));
    }
    Ok((gathered, uniq))
}

/// The formula-level step of the configured strategy.
pub fn preprocess(
    k: &Kripke,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<Preprocessed, ReduceError> {
    let f = freshen(phi, &k.props());
    let mut names = FreshNames::avoiding(&f, k.props());
    let mut exact = true;
    let (formula, uniq_props) = match cfg.strategy {
        Strategy::Uu | Strategy::Fp => {
            let mut uniq = BTreeSet::new();
            counting_props_in(&f, &mut uniq);
            let mut g = desugar_counting(&f);
            if cfg.uniq_encoding == UniqEncoding::Qctl {
                g = expand_uniq(&g, &mut names);
                uniq.clear();
            }
            let g = if cfg.strategy == Strategy::Uu {
                normalize_core(&g)
            } else {
                fpc(&g, &mut names)
            };
            (g, uniq)
        }
        Strategy::Fpf => {
            let (pre, uniq) = guarded_prenex(&f, cfg, &mut names)?;
            let flat = flat1(&pre, &mut names)?;
            (fpc(&flat.to_formula(), &mut names), uniq)
        }
        Strategy::Pnf | Strategy::Fbv => {
            let (pre, uniq) = guarded_prenex(&f, cfg, &mut names)?;
            let pre = Prenex {
                prefix: pre.prefix,
                body: to_nnf(&pre.body),
            };
            let flat = flat2(&pre, &mut names)?;
            if cfg.strategy == Strategy::Pnf {
                (replace_uw(&flat, &mut names)?, uniq)
            } else {
                let bound = cfg.fbv_bound.unwrap_or(k.num_states());
                exact = bound >= k.num_states();
                (replace_uw2(&flat, bound)?, uniq)
            }
        }
    };
    Ok(Preprocessed {
        formula,
        uniq_props,
        exact,
    })
}

/// Builds the closed circuit that is valid iff `phi` holds at `x`.
pub fn reduce(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    let pre = preprocess(k, phi, cfg)?;
    let opts = HatOptions {
        uniq: cfg.uniq_encoding,
        uniq_props: pre.uniq_props,
        max_gates: cfg.max_gates,
        deadline: cfg.deadline,
    };
    let meta = CircuitMeta {
        strategy: Some(cfg.strategy.name().to_string()),
        instance: (!cfg.instance.is_empty()).then(|| cfg.instance.clone()),
        prenex: false,
        exact: pre.exact,
    };
    let mut c = hat_translate(k, x, &pre.formula, &opts, meta)?;
    c.meta.prenex = c.is_prenex();
    if cfg.strategy.prenex_output() && !c.meta.prenex {
        return Err(ReduceError::Shape(format!(
            "{} output is not prenex",
            cfg.strategy
        )));
    }
    Ok(c)
}

fn with(cfg: &ReductionConfig, strategy: Strategy) -> ReductionConfig {
    ReductionConfig {
        strategy,
        ..cfg.clone()
    }
}

pub fn met_uu(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    reduce(k, x, phi, &with(cfg, Strategy::Uu))
}

pub fn met_fp(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    reduce(k, x, phi, &with(cfg, Strategy::Fp))
}

pub fn met_fpf(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    reduce(k, x, phi, &with(cfg, Strategy::Fpf))
}

pub fn met_pnf(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    reduce(k, x, phi, &with(cfg, Strategy::Pnf))
}

pub fn met_fbv(
    k: &Kripke,
    x: StateId,
    phi: &Formula,
    cfg: &ReductionConfig,
) -> Result<QbfCircuit, ReduceError> {
    reduce(k, x, phi, &with(cfg, Strategy::Fbv))
}

#[cfg(test)]
mod tests;

//! Seeded random structures and formulas for agreement testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kripke::Kripke;
use crate::qctl::{Formula, Prop, QuantKind};

/// Shape limits of generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusParams {
    pub min_states: usize,
    pub max_states: usize,
    pub max_props: usize,
    pub max_quantifiers: usize,
    pub max_height: usize,
    /// Quantifiers only in Boolean context, so that the formula can be
    /// put in prenex form.
    pub prenex: bool,
    /// Nesting depth of the syntax tree.
    pub max_depth: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            min_states: 2,
            max_states: 4,
            max_props: 3,
            max_quantifiers: 2,
            max_height: 3,
            prenex: true,
            max_depth: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub name: String,
    pub kripke: Kripke,
    pub formula: Formula,
}

const PROPS: [&str; 3] = ["a", "b", "c"];

/// A total structure with states `s0..` and initial state `s0`.
pub fn random_kripke(rng: &mut impl Rng, states: usize, props: usize) -> Kripke {
    let mut b = Kripke::builder();
    let ids: Vec<_> = (0..states)
        .map(|i| b.state(&format!("s{i}")).expect("fresh name"))
        .collect();
    for &x in &ids {
        let mut any = false;
        for &y in &ids {
            if rng.gen_bool(0.4) {
                b.edge(x, y);
                any = true;
            }
        }
        if !any {
            b.edge(x, *ids.choose(rng).expect("non-empty"));
        }
        for p in PROPS.iter().take(props) {
            if rng.gen_bool(0.5) {
                b.label(x, p).expect("valid name");
            }
        }
    }
    b.build().expect("total by construction")
}

struct Gen<'r, R> {
    rng: &'r mut R,
    params: CorpusParams,
    props: Vec<Prop>,
    bound: Vec<Prop>,
    quantifiers: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self) -> Formula {
        let roll = self.rng.gen_range(0..10);
        if roll == 0 {
            return if self.rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            };
        }
        if !self.bound.is_empty() && roll < 6 {
            return Formula::Atom(self.bound.choose(self.rng).expect("non-empty").clone());
        }
        Formula::Atom(self.props.choose(self.rng).expect("non-empty").clone())
    }

    /// `boolean` tells whether the position is outside every modality.
    fn formula(&mut self, depth: usize, height: usize, boolean: bool) -> Formula {
        if depth == 0 {
            return self.leaf();
        }
        let may_quantify =
            self.quantifiers < self.params.max_quantifiers && (boolean || !self.params.prenex);
        let d = depth - 1;
        loop {
            match self.rng.gen_range(0..20) {
                0..=2 => return self.leaf(),
                3..=4 => return Formula::not(self.formula(d, height, boolean)),
                5..=6 => {
                    return Formula::and(
                        self.formula(d, height, boolean),
                        self.formula(d, height, boolean),
                    )
                }
                7 => {
                    return Formula::or(
                        self.formula(d, height, boolean),
                        self.formula(d, height, boolean),
                    )
                }
                8 => {
                    return Formula::implies(
                        self.formula(d, height, boolean),
                        self.formula(d, height, boolean),
                    )
                }
                9 => {
                    // both sides are duplicated when prenexing, so keep them closed
                    let saved = self.quantifiers;
                    self.quantifiers = self.params.max_quantifiers;
                    let f = Formula::iff(
                        self.formula(d, height, false),
                        self.formula(d, height, false),
                    );
                    self.quantifiers = saved;
                    return f;
                }
                10..=16 if height > 0 => return self.temporal(d, height - 1),
                17..=19 if may_quantify => {
                    let p = Prop::new(&format!("q{}", self.quantifiers));
                    self.quantifiers += 1;
                    let kind = *[
                        QuantKind::Exists,
                        QuantKind::Forall,
                        QuantKind::Exists1,
                        QuantKind::Forall1,
                    ]
                    .choose(self.rng)
                    .expect("non-empty");
                    self.bound.push(p.clone());
                    let body = self.formula(d, height, boolean);
                    self.bound.pop();
                    return Formula::Quant(kind, p, Box::new(body));
                }
                _ => continue,
            }
        }
    }

    fn temporal(&mut self, d: usize, h: usize) -> Formula {
        let sub = |g: &mut Self| g.formula(d, h, false);
        match self.rng.gen_range(0..10) {
            0 => Formula::ex(sub(self)),
            1 => Formula::ax(sub(self)),
            2 => Formula::ef(sub(self)),
            3 => Formula::af(sub(self)),
            4 => Formula::eg(sub(self)),
            5 => Formula::ag(sub(self)),
            6 => Formula::eu(sub(self), sub(self)),
            7 => Formula::au(sub(self), sub(self)),
            8 => Formula::ew(sub(self), sub(self)),
            _ => Formula::aw(sub(self), sub(self)),
        }
    }
}

/// A formula over the first `props` structure propositions.
pub fn random_formula(rng: &mut impl Rng, params: CorpusParams, props: usize) -> Formula {
    let props = PROPS
        .iter()
        .take(props.max(1))
        .map(|p| Prop::new(p))
        .collect();
    let mut g = Gen {
        rng,
        params,
        props,
        bound: Vec::new(),
        quantifiers: 0,
    };
    g.formula(params.max_depth, params.max_height, true)
}

/// The instance with the given seed; identical seeds give identical instances.
pub fn instance(seed: u64, params: CorpusParams) -> CorpusInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(params.min_states..=params.max_states);
    let props = rng.gen_range(1..=params.max_props.clamp(1, PROPS.len()));
    let kripke = random_kripke(&mut rng, states, props);
    let formula = random_formula(&mut rng, params, props);
    CorpusInstance {
        name: format!("rand_{seed}"),
        kripke,
        formula,
    }
}

/// `count` consecutive instances starting at `seed`.
pub fn corpus(seed: u64, count: usize, params: CorpusParams) -> Vec<CorpusInstance> {
    (0..count as u64)
        .map(|i| instance(seed.wrapping_add(i), params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qctl::{prenex_boolean, temporal_height};

    fn quantifiers(f: &Formula) -> usize {
        usize::from(matches!(f, Formula::Quant(..)))
            + f.children().into_iter().map(quantifiers).sum::<usize>()
    }

    #[test]
    fn deterministic_and_within_limits() {
        let p = CorpusParams::default();
        for seed in 0..200 {
            let a = instance(seed, p);
            let b = instance(seed, p);
            assert_eq!(a.kripke, b.kripke);
            assert_eq!(a.formula, b.formula);
            assert!((2..=4).contains(&a.kripke.num_states()));
            assert!(temporal_height(&a.formula) <= 3);
            assert!(quantifiers(&a.formula) <= 2, "{}", a.formula);
            prenex_boolean(&a.formula).unwrap();
        }
    }

    #[test]
    fn nested_mode_places_quantifiers_under_modalities() {
        let p = CorpusParams {
            prenex: false,
            ..CorpusParams::default()
        };
        let nested = (0..300).any(|s| prenex_boolean(&instance(s, p).formula).is_err());
        assert!(nested);
    }
}

use std::collections::BTreeSet;

use super::{Formula, Prop};

/// Number of syntax nodes; every operator, atom and constant counts one.
pub fn formula_size(f: &Formula) -> usize {
    1 + f.children().into_iter().map(formula_size).sum::<usize>()
}

/// Maximum number of nested temporal modalities. Quantifiers add nothing.
pub fn temporal_height(f: &Formula) -> usize {
    let below = f
        .children()
        .into_iter()
        .map(temporal_height)
        .max()
        .unwrap_or(0);
    below + usize::from(f.is_temporal())
}

/// Temporal depth of every node, in pre-order, paired with its child-index path.
pub fn temporal_depths(f: &Formula) -> Vec<(Vec<usize>, usize)> {
    fn go(f: &Formula, path: &mut Vec<usize>, depth: usize, out: &mut Vec<(Vec<usize>, usize)>) {
        out.push((path.clone(), depth));
        let inner = depth + usize::from(f.is_temporal());
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, inner, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), 0, &mut out);
    out
}

/// Free propositions: atoms not bound by an enclosing quantifier.
pub fn props_of(f: &Formula) -> BTreeSet<Prop> {
    fn go(f: &Formula, bound: &mut Vec<Prop>, out: &mut BTreeSet<Prop>) {
        match f {
            Formula::Atom(p) | Formula::Uniq(p) | Formula::VecCmp(p, ..) => {
                if !bound.contains(p) {
                    out.insert(p.clone());
                }
            }
            Formula::Quant(_, p, a) | Formula::VecExists(p, _, a) => {
                bound.push(p.clone());
                go(a, bound, out);
                bound.pop();
            }
            _ => {
                for c in f.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qctl::parse_qctl;

    #[test]
    fn height_examples() {
        assert_eq!(temporal_height(&Formula::atom("q")), 0);
        assert_eq!(temporal_height(&parse_qctl("E [a U E X b]").unwrap()), 2);
        assert_eq!(
            temporal_height(&parse_qctl("exists p. E X (a <-> A F p)").unwrap()),
            2
        );
    }

    #[test]
    fn size_examples() {
        assert_eq!(formula_size(&Formula::atom("q")), 1);
        assert_eq!(formula_size(&parse_qctl("E X q").unwrap()), 2);
    }

    #[test]
    fn free_props_skip_bound() {
        let f = parse_qctl("exists p. p & q & E X (forall r. r | p)").unwrap();
        let got: Vec<String> = props_of(&f).into_iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["q"]);
    }

    #[test]
    fn depths_follow_nesting() {
        let f = parse_qctl("E X (a & A X b)").unwrap();
        let d = temporal_depths(&f);
        assert_eq!(d.last().unwrap(), &(vec![0, 1, 0], 2));
    }
}

use crate::qbf::{CircuitBuilder, NodeId};

use super::ReduceError;

fn check(width: usize, d: u64) -> Result<(), ReduceError> {
    if width < 64 && d >> width != 0 {
        return Err(ReduceError::OutOfRange { value: d, width });
    }
    Ok(())
}

fn bit_is(b: &mut CircuitBuilder, bit: NodeId, value: bool) -> NodeId {
    if value {
        bit
    } else {
        b.not(bit)
    }
}

/// `[v = d]` for the little-endian bit vector `bits`.
pub fn bitvec_eq(b: &mut CircuitBuilder, bits: &[NodeId], d: u64) -> Result<NodeId, ReduceError> {
    check(bits.len(), d)?;
    let lits = bits
        .iter()
        .enumerate()
        .map(|(j, &bit)| bit_is(b, bit, d >> j & 1 == 1))
        .collect();
    Ok(b.and(lits))
}

/// `[v < d]`: some bit set in `d` is clear in `v` while all higher bits agree.
pub fn bitvec_lt(b: &mut CircuitBuilder, bits: &[NodeId], d: u64) -> Result<NodeId, ReduceError> {
    check(bits.len(), d)?;
    let mut cases = Vec::new();
    for m in 0..bits.len() {
        if d >> m & 1 == 0 {
            continue;
        }
        let mut conj = vec![b.not(bits[m])];
        for (j, &bit) in bits.iter().enumerate().skip(m + 1) {
            conj.push(bit_is(b, bit, d >> j & 1 == 1));
        }
        cases.push(b.and(conj));
    }
    Ok(b.or(cases))
}

/// Number of bits needed to write `n` in binary, at least one.
pub fn width_for(n: u64) -> u32 {
    (64 - n.leading_zeros()).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::CircuitMeta;

    fn truth(width: usize, f: impl Fn(&mut CircuitBuilder, &[NodeId]) -> NodeId) -> Vec<bool> {
        let mut b = CircuitBuilder::new();
        let bits: Vec<_> = (0..width)
            .map(|j| {
                let v = b.new_var(&format!("v{j}")).unwrap();
                b.lit(v)
            })
            .collect();
        let root = f(&mut b, &bits);
        let c = b.finish(root, CircuitMeta::default());
        (0..1u32 << width)
            .map(|val| {
                c.eval_with(&|v| {
                    let j: usize = c.var_name(v)[1..].parse().unwrap();
                    val >> j & 1 == 1
                })
            })
            .collect()
    }

    #[test]
    fn comparators_match_arithmetic() {
        for width in 1..=3usize {
            for d in 0..1u64 << width {
                let eq = truth(width, |b, bits| bitvec_eq(b, bits, d).unwrap());
                let lt = truth(width, |b, bits| bitvec_lt(b, bits, d).unwrap());
                for v in 0..1u64 << width {
                    assert_eq!(eq[v as usize], v == d, "eq width {width} d {d} v {v}");
                    assert_eq!(lt[v as usize], v < d, "lt width {width} d {d} v {v}");
                }
            }
        }
    }

    #[test]
    fn small_cases() {
        let mut b = CircuitBuilder::new();
        let bits: Vec<_> = (0..2)
            .map(|j| {
                let v = b.new_var(&format!("k{j}")).unwrap();
                b.lit(v)
            })
            .collect();
        let lt2 = bitvec_lt(&mut b, &bits, 2).unwrap();
        assert_eq!(lt2, b.not(bits[1]));
        let lt0 = bitvec_lt(&mut b, &bits, 0).unwrap();
        assert_eq!(b.as_const(lt0), Some(false));
        assert!(matches!(
            bitvec_eq(&mut b, &bits, 4),
            Err(ReduceError::OutOfRange { .. })
        ));
    }

    #[test]
    fn widths() {
        assert_eq!(width_for(5), 3);
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(3), 2);
        assert_eq!(width_for(4), 3);
    }
}

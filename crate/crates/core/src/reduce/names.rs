use crate::qctl::Prop;

/// Deterministic circuit variable names.
///
/// The first copy of a quantified proposition uses the plain forms; later
/// copies, made when a quantifier is translated more than once, insert
/// `__i<copy>` after the proposition name.
pub struct VarNamer;

impl VarNamer {
    fn stem(p: &Prop, copy: usize) -> String {
        if copy == 0 {
            p.to_string()
        } else {
            format!("{p}__i{copy}")
        }
    }

    /// `p__s<i>`: the proposition at state `i`.
    pub fn prop_at(p: &Prop, copy: usize, state: usize) -> String {
        format!("{}__s{state}", Self::stem(p, copy))
    }

    /// `p__b<j>__s<i>`: bit `j` of a per-state vector at state `i`.
    pub fn vector_bit(p: &Prop, copy: usize, bit: usize, state: usize) -> String {
        format!("{}__b{bit}__s{state}", Self::stem(p, copy))
    }

    /// `p__bv<j>`: bit `j` of the number of the state a unique proposition marks.
    pub fn uniq_bit(p: &Prop, copy: usize, bit: usize) -> String {
        format!("{}__bv{bit}", Self::stem(p, copy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naming_contract() {
        let p = Prop::new("p");
        assert_eq!(VarNamer::prop_at(&p, 0, 3), "p__s3");
        assert_eq!(
            VarNamer::vector_bit(&Prop::new("k2"), 0, 1, 4),
            "k2__b1__s4"
        );
        assert_eq!(VarNamer::uniq_bit(&p, 0, 0), "p__bv0");
        assert_eq!(VarNamer::prop_at(&Prop::new("chi"), 0, 0), "chi__s0");
        assert_eq!(VarNamer::prop_at(&p, 2, 1), "p__i2__s1");
    }
}

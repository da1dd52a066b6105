use crate::error::{Error, Result};
use crate::ledger::ConstantLedger;
use crate::rational::{display, floor_u128, int, pow, Rational};
use crate::setcalc::{convolution, inverse_set, product_set, MSet};

/// `S = {x : |A ∩ A·x| > |A|/2K}`.
#[derive(Clone, Debug)]
pub struct SymmetricCore {
    pub s: MSet,
    pub source: MSet,
    pub k: Rational,
    /// `|A|/2K`; membership is the strict test `|A ∩ A·x| > threshold`.
    pub threshold: Rational,
}

/// Builds `S` and records `2K|S| ≥ |A|` and `|A·Sⁿ·A⁻¹| ≤ 2ⁿK^{2n+1}|A|`
/// for `n = 1..=n_max`, together with the energy steps of the argument.
pub fn symmetric_core(a: &MSet, k: &Rational, n_max: usize) -> Result<(SymmetricCore, ConstantLedger)> {
    let ai = inverse_set(a);
    let aai = product_set(a, &ai)?;
    let na = int(a.len());
    if int(aai.len()) > k * &na {
        return Err(Error::hypothesis(
            "|A A^-1| <= K|A|",
            aai.len(),
            format!("{}*{}", display(k), a.len()),
        ));
    }
    // |A ∩ A·x| = #{(a', a) : a'⁻¹·a = x} = 1_{A⁻¹} ∗ 1_A(x).
    let overlap = convolution(&ai, a)?;
    let threshold = &na / (int(2) * k);
    let cut = floor_u128(&threshold);
    let g = a.group();
    let s = MSet::new(g, (0..g.order() as u32).filter(|&x| overlap.get(x) as u128 > cut)).map_err(|_| Error::EmptyStage("S".into()))?;
    let energy = overlap.sum_of_squares();
    let energy_on_s: u128 = s.iter().map(|x| (overlap.get(x) as u128).pow(2)).sum();
    let a_len = a.len() as u128;

    let mut l = ConstantLedger::new();
    l.hard("|A A^-1| <= K|A|", int(aai.len()), k * &na, "K*|A|");
    l.hard(
        "|A|^4 <= E(A^-1,A) |A A^-1|",
        int(a_len.pow(4)),
        int(energy) * int(aai.len()),
        "E(A^-1,A)*|A A^-1|",
    );
    l.hard(
        "|A|^3 <= 2K sum_S |A cap Ax|^2",
        int(a_len.pow(3)),
        int(2) * k * int(energy_on_s),
        "2K*sum_S",
    );
    l.hard("|A| <= 2K|S|", na.clone(), int(2) * k * int(s.len()), "2K*|S|");
    let mut as_n = a.clone();
    for n in 1..=n_max {
        as_n = product_set(&as_n, &s)?;
        let lhs = product_set(&as_n, &ai)?.len();
        l.hard(
            &format!("|A S^{n} A^-1| <= 2^{n} K^{} |A|", 2 * n + 1),
            int(lhs),
            int(1u64 << n) * pow(k, 2 * n as u32 + 1) * &na,
            &format!("2^{n}*K^{}*|A|", 2 * n + 1),
        );
    }
    Ok((
        SymmetricCore {
            s,
            source: a.clone(),
            k: k.clone(),
            threshold,
        },
        l,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::rational::ratio;

    #[test]
    fn cyclic_8_instance() {
        let g = FiniteGroup::parse("cyclic(8)").unwrap();
        let a = MSet::new(&g, 0..4).unwrap();
        let (core, l) = symmetric_core(&a, &ratio(7, 4), 3).unwrap();
        assert_eq!(core.s.ids(), vec![0, 1, 2, 6, 7]);
        assert_eq!(core.threshold, ratio(8, 7));
        let r1 = l.get("|A S^1 A^-1| <= 2^1 K^3 |A|").unwrap();
        assert_eq!(r1.lhs, int(8));
        assert_eq!(r1.rhs, ratio(343, 8));
        assert!(l.passes());
        assert!(core.s.is_symmetric() && core.s.contains(0));
    }

    #[test]
    fn subgroup_core_is_itself() {
        let g = FiniteGroup::parse("symmetric(4)").unwrap();
        let h = MSet::new(&g, crate::group::subgroup_closure(&g, &[1, 6]).unwrap().iter()).unwrap();
        let (core, l) = symmetric_core(&h, &int(1), 3).unwrap();
        assert_eq!(core.s, h);
        assert!(l.passes());
    }

    #[test]
    fn hypothesis_checked() {
        let g = FiniteGroup::parse("cyclic(8)").unwrap();
        let a = MSet::new(&g, 0..4).unwrap();
        assert!(matches!(symmetric_core(&a, &ratio(3, 2), 1), Err(Error::Hypothesis { .. })));
    }
}

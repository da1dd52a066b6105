//! Small doubling `|A·B|² ≤ K²|A||B|` and the local tripling criterion.
//!
//! Constant audit for [`classify_small_doubling`] (write `K_s = K²`):
//!
//! * `|A·A⁻¹|·|B| ≤ |A·B|·|B⁻¹·A⁻¹|`, so `|A·A⁻¹| ≤ K_s|A|`.
//! * The symmetric core `S` of `A` at `K_s` has `|S| ≥ |A|/2K_s` and
//!   `|A·Sⁿ·A⁻¹| ≤ 2ⁿK_s^{2n+1}|A|`. Since `|Sⁿ| ≤ |A·Sⁿ·A⁻¹|`, this gives
//!   `|S³| ≤ 16K_s⁸|S|` and `|S⁷| ≤ 2⁸K_s^{16}|S|`.
//! * `S` is symmetric and contains 1, so the tripling construction gives
//!   `H = S³` with covering set `X_H`, `|X_H| ≤ 2|S⁷|/|S| ≤ 2⁹K^{32}`, and
//!   `|H| ≤ 8K_s⁷|A| = 8K^{14}|A|`.
//! * `Y`: disjoint translates `y·H`, `y ∈ A`, inside `A·H`; `|A·H| ≤ |A·S³·A⁻¹|`
//!   so `|Y| ≤ 16K^{16}`, and `A ⊆ Y·H² ⊆ (Y·X_H)·H =: Z·H`.
//! * `W₀`: disjoint translates `w·H`, `w ∈ B⁻¹`; `|B⁻¹·H|·|A| ≤ |A·B|·|A·H|`
//!   and `|B| ≤ K²|A|` give `|W₀| ≤ 16K^{18}`, and `B⁻¹ ⊆ (W₀·X_H)·H =: W·H`.
//! * `X = Z ∪ W⁻¹`: `|X| ≤ (16K^{16} + 16K^{18})·2⁹K^{32} ≤ 2^{14}K^{50}` and
//!   `|H|² ≤ 64K^{30}|A||B|`.
//!
//! For [`local_tripling_check`] (hypotheses `|A·a·A| ≤ K|A|`, `|A²| ≤ K|A|`),
//! with `X₁ = {x ∈ X : x·H ∩ A ≠ ∅}`, `X₂ = {x ∈ X : H·x ∩ A ≠ ∅}` and a chosen
//! `a_x ∈ x·H ∩ A` (so `A ⊆ ⋃ a_x·H²`):
//!
//! ```text
//! |A³|          ≤ |X₁||X₂|·|H·A·H|
//! |H·A·H|       ≤ |X₁|·max_x |H·a_x·H³|
//! |H·a·A|·|A|   ≤ |H·A⁻¹|·|A·a·A|          (triangle through A)
//! |H·a·H³|·|A|  ≤ |H·a·A|·|A⁻¹·H³|         (triangle through A⁻¹)
//! |A·H|         ≤ |X₁||X_H||H|,   |H³·A| ≤ |X_H|³|H||X₂|
//! ```
//!
//! hence `|A³| ≤ |X₁|³|X₂|²|X_H|⁴·K·|H|²/|A| ≤ 2^{112}K^{407}|A|`.

use super::approx::ApproxGroupWitness;
use super::core_set::{symmetric_core, SymmetricCore};
use super::cover::{ruzsa_cover, Side};
use super::tripling::approx_group_from_tripling;
use super::{check_k_at_least_one, products_of};
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::ledger::ConstantLedger;
use crate::rational::{display, int, pow, Rational};
use crate::setcalc::{inverse_set, power, product_set, same_group, MSet};

/// `log₂` of the constant and the exponent in `|A³| ≤ 2^{112}K^{407}|A|`.
pub const CORRUZ_CONSTANT_LOG2: u32 = 112;
pub const CORRUZ_EXPONENT: u32 = 407;

#[derive(Clone, Debug)]
pub struct DoublingClassification {
    /// The approximate group `H = S³` with its covering set.
    pub h: ApproxGroupWitness,
    /// `X = Z ∪ W⁻¹` with `A ⊆ X·H` and `B ⊆ H·X` (sorted).
    pub x: Vec<Elem>,
    pub z: Vec<Elem>,
    pub w: Vec<Elem>,
    pub core: SymmetricCore,
    pub ledger: ConstantLedger,
}

/// Runs the small-doubling classification: symmetric core, tripling
/// construction on it, then two covering steps.
pub fn classify_small_doubling(a: &MSet, b: &MSet, k: &Rational) -> Result<DoublingClassification> {
    same_group(a, b)?;
    check_k_at_least_one(k)?;
    let g = a.group();
    let (na, nb) = (a.len(), b.len());
    let ab = product_set(a, b)?.len();
    let k2 = pow(k, 2);
    if int(ab * ab) > &k2 * int(na * nb) {
        return Err(Error::hypothesis(
            "|AB|^2 <= K^2|A||B|",
            ab * ab,
            format!("{}*{}", display(&k2), na * nb),
        ));
    }
    let mut l = ConstantLedger::new();
    l.hard("|AB|^2 <= K^2|A||B|", int(ab * ab), &k2 * int(na * nb), "K^2*|A||B|");
    let ai = inverse_set(a);
    let aai = product_set(a, &ai)?.len();
    l.hard("|A A^-1||B| <= |AB|^2", int(aai * nb), int(ab * ab), "|AB|^2");

    let ks = k2.clone();
    let (core, core_ledger) = symmetric_core(a, &ks, 7)?;
    l.extend(core_ledger);
    let s = core.s.clone();
    let s3 = power(&s, 3)?;
    l.hard(
        "|S^3| <= 16 K^16 |S|",
        int(s3.len()),
        int(16) * pow(k, 16) * int(s.len()),
        "16*K^16*|S|",
    );
    let kt = int(16) * pow(&ks, 8);
    let trip = approx_group_from_tripling(&s, &kt)?;
    l.extend(trip.ledger.clone());
    let hw = trip.witness.clone();
    let h = hw.h.clone();
    let xh = hw.x.clone();
    let s7 = power(&s, 7)?.len();
    l.hard("|Y_H||S| <= |S^7|", int(trip.y.len() * s.len()), int(s7), "|S^7|");
    l.hard(
        "|S^7| <= 2^8 K^32 |S|",
        int(s7),
        int(256) * pow(k, 32) * int(s.len()),
        "2^8*K^32*|S|",
    );
    l.hard("|X_H| <= 2^9 K^32", int(xh.len()), int(512) * pow(k, 32), "2^9*K^32");
    l.hard("|H| <= 8 K^14 |A|", int(h.len()), int(8) * pow(k, 14) * int(na), "8*K^14*|A|");
    l.hard(
        "|H|^2 <= 64 K^30 |A||B|",
        int(h.len() * h.len()),
        int(64) * pow(k, 30) * int(na * nb),
        "64*K^30*|A||B|",
    );

    let ah = product_set(a, &h)?.len();
    let y = ruzsa_cover(&h, a, Side::Right)?;
    l.hard("|Y||H| <= |AH|", int(y.len() * h.len()), int(ah), "|AH|");
    l.hard("|AH| <= 8 K^14 |A|", int(ah), int(8) * pow(k, 14) * int(na), "8*K^14*|A|");
    l.hard("|Y| <= 16 K^16", int(y.len()), int(16) * pow(k, 16), "16*K^16");
    let z = products_of(g, &y, &xh);

    let bi = inverse_set(b);
    let bih = product_set(&bi, &h)?.len();
    let w0 = ruzsa_cover(&h, &bi, Side::Right)?;
    l.hard("|W0||H| <= |B^-1 H|", int(w0.len() * h.len()), int(bih), "|B^-1 H|");
    l.hard("|B^-1 H||A| <= |AB||AH|", int(bih * na), int(ab * ah), "|AB|*|AH|");
    l.hard("|W0| <= 16 K^18", int(w0.len()), int(16) * pow(k, 18), "16*K^18");
    let w = products_of(g, &w0, &xh);

    let mut x: Vec<Elem> = z.iter().copied().chain(w.iter().map(|&e| g.inv(e))).collect();
    x.sort_unstable();
    x.dedup();
    l.hard("|X| <= 2^14 K^50", int(x.len()), int(1u64 << 14) * pow(k, 50), "2^14*K^50");

    let xset = MSet::new(g, x.iter().copied())?;
    if !a.is_subset(&product_set(&xset, &h)?) {
        return Err(Error::InvalidWitness("A is not covered by X·H".into()));
    }
    if !b.is_subset(&product_set(&h, &xset)?) {
        return Err(Error::InvalidWitness("B is not covered by H·X".into()));
    }
    l.soft("measured |X|", int(x.len()), int(1u64 << 14) * pow(k, 50), "2^14*K^50");
    l.soft("measured |H|/|A|", int(h.len()), int(8) * pow(k, 14) * int(na), "8*K^14*|A|");
    Ok(DoublingClassification {
        h: hw,
        x,
        z,
        w,
        core,
        ledger: l,
    })
}

/// Checks `|A³| ≤ 2^{112}K^{407}|A|` from the local hypotheses, recording each
/// step of the chain with the measured sets.
pub fn local_tripling_check(a: &MSet, k: &Rational) -> Result<ConstantLedger> {
    check_k_at_least_one(k)?;
    let g = a.group();
    let na = a.len();
    let a2 = power(a, 2)?;
    if int(a2.len()) > k * int(na) {
        return Err(Error::hypothesis("|A^2| <= K|A|", a2.len(), format!("{}*{}", display(k), na)));
    }
    let ids = a.ids();
    let local: Vec<usize> = crate::par::map(&ids, |&x| product_set(&a.right_translate(x), a).map(|s| s.len()).unwrap_or(0));
    let sup = *local.iter().max().expect("nonempty");
    if int(sup) > k * int(na) {
        return Err(Error::hypothesis("sup_a |A a A| <= K|A|", sup, format!("{}*{}", display(k), na)));
    }
    let mut l = ConstantLedger::new();
    l.hard("|A^2| <= K|A|", int(a2.len()), k * int(na), "K*|A|");
    l.hard("sup_a |A a A| <= K|A|", int(sup), k * int(na), "K*|A|");

    let cls = classify_small_doubling(a, a, k)?;
    l.extend(cls.ledger.clone());
    let h = &cls.h.h;
    let xh = cls.h.x.len();
    let x1: Vec<Elem> = cls
        .x
        .iter()
        .copied()
        .filter(|&x| h.iter().any(|e| a.contains(g.mul(x, e))))
        .collect();
    let x2: Vec<Elem> = cls
        .x
        .iter()
        .copied()
        .filter(|&x| h.iter().any(|e| a.contains(g.mul(e, x))))
        .collect();
    let (n1, n2) = (x1.len(), x2.len());

    let a3 = power(a, 3)?.len();
    let hah = product_set(&product_set(h, a)?, h)?.len();
    l.hard("|A^3| <= |X1||X2||HAH|", int(a3), int(n1 * n2 * hah), "|X1|*|X2|*|HAH|");

    let ai = inverse_set(a);
    let h3 = power(h, 3)?;
    let hai = product_set(h, &ai)?.len();
    let aih3 = product_set(&ai, &h3)?.len();
    let mut max_hah3 = 0usize;
    for &x in &x1 {
        let ax = h
            .iter()
            .map(|e| g.mul(x, e))
            .filter(|&c| a.contains(c))
            .min()
            .expect("x in X1 meets A");
        let ha = h.right_translate(ax);
        let haa = product_set(&ha, a)?.len();
        let aaa = product_set(&a.right_translate(ax), a)?.len();
        let hah3 = product_set(&ha, &h3)?.len();
        max_hah3 = max_hah3.max(hah3);
        l.hard(
            &format!("|H a A||A| <= |H A^-1||A a A| (a={ax})"),
            int(haa * na),
            int(hai * aaa),
            "|HA^-1|*|AaA|",
        );
        l.hard(
            &format!("|H a H^3||A| <= |H a A||A^-1 H^3| (a={ax})"),
            int(hah3 * na),
            int(haa * aih3),
            "|HaA|*|A^-1 H^3|",
        );
    }
    l.hard("|HAH| <= |X1| max_x |H a_x H^3|", int(hah), int(n1 * max_hah3), "|X1|*max|H a H^3|");
    let ahl = product_set(a, h)?.len();
    let h3a = product_set(&h3, a)?.len();
    l.hard("|AH| <= |X1||X_H||H|", int(ahl), int(n1 * xh * h.len()), "|X1|*|X_H|*|H|");
    l.hard(
        "|H^3 A| <= |X_H|^3|H||X2|",
        int(h3a),
        int(xh.pow(3) * h.len() * n2),
        "|X_H|^3*|H|*|X2|",
    );
    let chain = int(n1.pow(3) * n2.pow(2) * xh.pow(4)) * k * int(h.len() * h.len()) / int(na);
    l.hard(
        "|A^3| <= |X1|^3|X2|^2|X_H|^4 K |H|^2/|A|",
        int(a3),
        chain,
        "|X1|^3|X2|^2|X_H|^4*K*|H|^2/|A|",
    );
    let bound = int(num_bigint::BigInt::from(1) << CORRUZ_CONSTANT_LOG2) * pow(k, CORRUZ_EXPONENT) * int(na);
    l.hard("|A^3| <= 2^112 K^407 |A|", int(a3), bound, "2^112*K^407*|A|");
    l.soft("measured |A^3|/|A|", int(a3), k * int(na), "K*|A|");
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::rational::ratio;

    #[test]
    fn subgroup_pair() {
        let g = FiniteGroup::parse("dihedral(6)").unwrap();
        let h = MSet::new(&g, [0, 2, 4]).unwrap();
        let c = classify_small_doubling(&h, &h, &int(1)).unwrap();
        assert_eq!(c.x, vec![0]);
        assert!(h.is_subset(&c.h.h));
        assert!(c.ledger.passes());
    }

    #[test]
    fn interval_pair() {
        let g = FiniteGroup::parse("cyclic(1000)").unwrap();
        let a = MSet::new(&g, 0..10).unwrap();
        let c = classify_small_doubling(&a, &a, &ratio(19, 10)).unwrap();
        assert!(c.ledger.passes(), "{:?}", c.ledger.failures().collect::<Vec<_>>());
    }

    #[test]
    fn subgroup_and_coset() {
        let g = FiniteGroup::parse("symmetric(3)").unwrap();
        let h0 = MSet::new(&g, [0, 1]).unwrap();
        let coset = h0.right_translate(3);
        let c = classify_small_doubling(&h0, &coset, &int(1)).unwrap();
        assert!(c.ledger.passes());
    }

    #[test]
    fn local_tripling_on_interval_and_subgroup() {
        let g = FiniteGroup::parse("cyclic(1000)").unwrap();
        let a = MSet::new(&g, 0..10).unwrap();
        let l = local_tripling_check(&a, &ratio(28, 10)).unwrap();
        assert!(l.passes());
        assert_eq!(l.get("sup_a |A a A| <= K|A|").unwrap().lhs, int(19));
        let s4 = FiniteGroup::parse("symmetric(4)").unwrap();
        let h = MSet::new(&s4, crate::group::subgroup_closure(&s4, &[1, 6]).unwrap().iter()).unwrap();
        let l = local_tripling_check(&h, &int(1)).unwrap();
        assert!(l.passes());
        assert_eq!(l.get("measured |A^3|/|A|").unwrap().measured_ratio(), 1.0);
    }
}

use approx_groups::bsg::{bsg_extract, infer_bsg_k};
use approx_groups::rational::{infer_k, int, ratio};
use approx_groups::setcalc::{power, product_set};
use approx_groups::structure::{
    approx_group_from_tripling, classify_small_doubling, cover_contains, local_tripling_check, ruzsa_cover, tripling_chain, Side,
};
use approx_groups::{Elem, FiniteGroup, MSet};
use num_bigint::BigUint;
use proptest::prelude::*;

const GROUPS: [&str; 4] = ["cyclic(18)", "dihedral(6)", "symmetric(4)", "sl2(3)"];

fn arb_group() -> impl Strategy<Value = FiniteGroup> {
    prop::sample::select(GROUPS.to_vec()).prop_map(|s| FiniteGroup::parse(s).unwrap())
}

fn arb_subset(g: &FiniteGroup, max: usize) -> impl Strategy<Value = MSet> {
    let g = g.clone();
    let n = g.order();
    prop::collection::btree_set(0..n as Elem, 1..=max).prop_map(move |s| MSet::new(&g, s).unwrap())
}

fn arb_pair() -> impl Strategy<Value = (MSet, MSet)> {
    arb_group().prop_flat_map(|g| (arb_subset(&g, 6), arb_subset(&g, 6)))
}

/// Measured tripling constant `|A³|/|A|`.
fn tripling_k(a: &MSet) -> approx_groups::Rational {
    ratio(power(a, 3).unwrap().len() as u64, a.len() as u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tripling_chain_holds_at_measured_k((a, _) in arb_pair()) {
        let l = tripling_chain(&a, &tripling_k(&a), 3).unwrap();
        prop_assert!(l.passes(), "{:?}", l.failures().collect::<Vec<_>>());
    }

    #[test]
    fn tripling_construction_is_an_approximate_group((a, _) in arb_pair()) {
        let t = approx_group_from_tripling(&a, &tripling_k(&a)).unwrap();
        prop_assert!(t.ledger.passes(), "{:?}", t.ledger.failures().collect::<Vec<_>>());
        prop_assert!(a.is_subset(&t.witness.h));
        prop_assert!(t.witness.h_is_symmetric());
        let x = t.witness.x_set();
        let h2 = product_set(&t.witness.h, &t.witness.h).unwrap();
        prop_assert!(h2.is_subset(&product_set(&x, &t.witness.h).unwrap()));
    }

    #[test]
    fn ruzsa_cover_covers((a, b) in arb_pair()) {
        for side in [Side::Left, Side::Right] {
            let x = ruzsa_cover(&a, &b, side).unwrap();
            prop_assert!(cover_contains(&a, &b, &x, side).unwrap());
            let ab = match side {
                Side::Left => product_set(&a, &b).unwrap().len(),
                Side::Right => product_set(&b, &a).unwrap().len(),
            };
            prop_assert!(x.len() * a.len() <= ab);
        }
    }

    #[test]
    fn doubling_classification_at_inferred_k((a, b) in arb_pair()) {
        let ab = product_set(&a, &b).unwrap().len();
        let order = BigUint::from(a.group().order());
        let k = infer_k(&BigUint::from(ab * ab), &BigUint::from(a.len() * b.len()), &(&order * &order));
        let c = classify_small_doubling(&a, &b, &k).unwrap();
        prop_assert!(c.ledger.passes(), "{:?}", c.ledger.failures().collect::<Vec<_>>());
        let x = MSet::new(a.group(), c.x.iter().copied()).unwrap();
        let xh = product_set(&x, &c.h.h).unwrap();
        let hx = product_set(&c.h.h, &x).unwrap();
        prop_assert!(a.is_subset(&xh) && b.is_subset(&hx));
    }

    #[test]
    fn local_tripling_at_measured_k((a, _) in arb_pair()) {
        let a2 = power(&a, 2).unwrap().len();
        let sup = a.iter().map(|x| product_set(&a.right_translate(x), &a).unwrap().len()).max().unwrap();
        let k = ratio(a2.max(sup) as u64, a.len() as u64);
        let l = local_tripling_check(&a, &k).unwrap();
        prop_assert!(l.passes(), "{:?}", l.failures().collect::<Vec<_>>());
    }

    #[test]
    fn bsg_extraction_at_inferred_k((a, b) in arb_pair()) {
        let k = infer_bsg_k(&a, &b).unwrap();
        prop_assert!(k >= int(1));
        let r = bsg_extract(&a, &b, &k).unwrap();
        prop_assert!(r.ledger.passes(), "{:?}", r.ledger.failures().collect::<Vec<_>>());
        prop_assert!(r.a3.is_subset(&a) && r.b3.is_subset(&b));
    }
}

use std::collections::{BTreeSet, HashMap};

use approx_groups::setcalc::{convolution, energy, inverse_set, power, product_set, ruzsa_distance};
use approx_groups::{Elem, FiniteGroup, MSet};
use proptest::prelude::*;

const GROUPS: [&str; 5] = [
    "cyclic(15)",
    "dihedral(7)",
    "symmetric(4)",
    "sl2(3)",
    "product(cyclic(2),cyclic(6))",
];

fn arb_group() -> impl Strategy<Value = FiniteGroup> {
    prop::sample::select(GROUPS.to_vec()).prop_map(|s| FiniteGroup::parse(s).unwrap())
}

fn arb_subset(g: &FiniteGroup) -> impl Strategy<Value = MSet> {
    let g = g.clone();
    let n = g.order();
    prop::collection::btree_set(0..n as Elem, 1..=n.min(10)).prop_map(move |s| MSet::new(&g, s).unwrap())
}

fn arb_pair() -> impl Strategy<Value = (MSet, MSet)> {
    arb_group().prop_flat_map(|g| (arb_subset(&g), arb_subset(&g)))
}

fn arb_triple() -> impl Strategy<Value = (MSet, MSet, MSet)> {
    arb_group().prop_flat_map(|g| (arb_subset(&g), arb_subset(&g), arb_subset(&g)))
}

fn naive_product(a: &MSet, b: &MSet) -> BTreeSet<Elem> {
    let g = a.group();
    a.iter().flat_map(|x| b.iter().map(move |y| g.mul(x, y))).collect()
}

fn naive_energy(a: &MSet, b: &MSet) -> u128 {
    let g = a.group();
    let mut r: HashMap<Elem, u128> = HashMap::new();
    for x in a.iter() {
        for y in b.iter() {
            *r.entry(g.mul(x, y)).or_default() += 1;
        }
    }
    r.values().map(|c| c * c).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_matches_naive((a, b) in arb_pair()) {
        let ab = product_set(&a, &b).unwrap();
        prop_assert_eq!(ab.ids(), naive_product(&a, &b).into_iter().collect::<Vec<_>>());
        prop_assert!(ab.len() >= a.len().max(b.len()));
        prop_assert!(ab.len() <= a.len() * b.len());
    }

    #[test]
    fn product_is_associative((a, b, c) in arb_triple()) {
        let left = product_set(&product_set(&a, &b).unwrap(), &c).unwrap();
        let right = product_set(&a, &product_set(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_reverses_products((a, b) in arb_pair()) {
        let lhs = inverse_set(&product_set(&a, &b).unwrap());
        let rhs = product_set(&inverse_set(&b), &inverse_set(&a)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn convolution_accounts_for_every_pair((a, b) in arb_pair()) {
        let conv = convolution(&a, &b).unwrap();
        prop_assert_eq!(conv.total(), (a.len() * b.len()) as u64);
        prop_assert_eq!(conv.support(a.group()), product_set(&a, &b).unwrap());
        prop_assert!(conv.check_invariants(&product_set(&a, &b).unwrap()).is_ok());
    }

    #[test]
    fn energy_bounds((a, b) in arb_pair()) {
        let e = energy(&a, &b).unwrap().value();
        prop_assert_eq!(e, naive_energy(&a, &b));
        let (na, nb) = (a.len() as u128, b.len() as u128);
        let ab = product_set(&a, &b).unwrap().len() as u128;
        // Cauchy-Schwarz and the trivial count of (b, a, a') with b' determined.
        prop_assert!((na * nb).pow(2) <= e * ab);
        prop_assert!(e <= na * nb * na.min(nb));
        prop_assert!(e >= na * nb);
    }

    #[test]
    fn ruzsa_triangle((a, b, c) in arb_triple()) {
        // |A C⁻¹||B| ≤ |A B⁻¹||B C⁻¹|.
        let ac = ruzsa_distance(&a, &c).unwrap().numerator as u128;
        let ab = ruzsa_distance(&a, &b).unwrap().numerator as u128;
        let bc = ruzsa_distance(&b, &c).unwrap().numerator as u128;
        prop_assert!(ac * b.len() as u128 <= ab * bc);
        prop_assert!(ruzsa_distance(&a, &b).unwrap().nonnegative());
    }

    #[test]
    fn powers_grow_monotonically((a, _b) in arb_pair()) {
        let a = a.symmetrize();
        let mut prev = 0;
        for n in 1..=4 {
            let p = power(&a, n).unwrap().len();
            prop_assert!(p >= prev);
            prev = p;
        }
    }
}

use approx_groups::group::{quotient_map, subgroup_closure, Pairing, PairingSpec};
use approx_groups::heisenberg::{
    build_heisenberg, exact_split_oracle, heisen_inverse, split_approximate, verify_inverse_converse, HeisenbergGroup,
};
use approx_groups::rational::ratio;
use approx_groups::setcalc::power;
use approx_groups::{Elem, FiniteGroup, MSet, Rational};
use proptest::prelude::*;

fn heis(p: u32) -> HeisenbergGroup {
    build_heisenberg(&PairingSpec {
        z: vec![p, p],
        w: vec![p],
        pairing: Pairing::Symplectic,
    })
    .unwrap()
}

fn tripling_k(a: &MSet) -> Rational {
    ratio(power(a, 3).unwrap().len() as u64, a.len() as u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inverse_theorem_on_random_sets(p in prop::sample::select(vec![3u32, 5]), ids in prop::collection::btree_set(0u32..125, 1..8)) {
        let hg = heis(p);
        let n = hg.group.order() as Elem;
        let a = MSet::new(&hg.group, ids.into_iter().map(|x| x % n)).unwrap();
        let w = heisen_inverse(&hg, &a, &tripling_k(&a)).unwrap();
        prop_assert!(w.ledger.passes(), "{:?}", w.ledger.failures().collect::<Vec<_>>());
        prop_assert!(hg.iota_set(&a).is_subset(&w.a_tilde));
        let conv = verify_inverse_converse(&hg, &w, &a).unwrap();
        prop_assert!(conv.passes(), "{:?}", conv.failures().collect::<Vec<_>>());
    }

    #[test]
    fn split_agrees_with_exact_oracle_on_subgroups(
        spec in prop::sample::select(vec![("cyclic(30)", 5u32), ("cyclic(30)", 3), ("dihedral(6)", 1), ("dihedral(6)", 2)]),
        seed in prop::collection::vec(0u32..30, 1..3),
    ) {
        let (name, h_gen) = spec;
        let g = FiniteGroup::parse(name).unwrap();
        let n = g.order() as Elem;
        let h = quotient_map(&g, &[h_gen]).unwrap();
        let seed: Vec<Elem> = seed.into_iter().map(|x| x % n).collect();
        let a = MSet::from_bitset(&g, subgroup_closure(&g, &seed).unwrap()).unwrap();
        let exact = exact_split_oracle(&a, &h).unwrap();
        prop_assert!(exact.passes());
        prop_assert_eq!(exact.c.len() * exact.b.len(), a.len());
        let s = split_approximate(&a, &h, &tripling_k(&a)).unwrap();
        prop_assert!(s.ledger.passes(), "{:?}", s.ledger.failures().collect::<Vec<_>>());
        for b in &s.b {
            prop_assert_eq!(b, &exact.b);
        }
        prop_assert_eq!(&s.c, &exact.c);
    }
}

#[test]
fn commutator_identity_on_standard_groups() {
    for p in [3, 5, 7] {
        let hg = heis(p);
        assert_eq!(hg.group.order(), (p * p * p) as usize);
        let n = hg.group.order() as Elem;
        for x in 0..n {
            for y in (0..n).step_by(7) {
                assert!(hg.commutator_identity_holds(x, y));
            }
        }
    }
}

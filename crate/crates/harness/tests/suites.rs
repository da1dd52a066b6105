use agkit::{generate_set, random_subsets, run_one, run_suite, SetFamilySpec, SuiteConfig, SuiteSpec, SUITES};
use approx_groups::{FiniteGroup, RowClass};
use proptest::prelude::*;

#[test]
fn every_suite_runs_clean_on_a_small_group() {
    for name in SUITES {
        let mut s = SuiteSpec::new(name);
        match name {
            "entropy" => {
                s.metrics = vec!["torus(1)".into()];
                s.points = 60;
                s.seeds = vec![1];
                s.samples = Some(20_000);
            }
            "heisenberg" => {
                s.primes = vec![3];
                s.instances = 2;
                s.max_size = 4;
                s.seeds = vec![1];
            }
            "splitting" => {
                s.groups = vec!["dihedral(6)".into()];
                s.normal = vec![1];
                s.families = vec![SetFamilySpec::parse("subgroup(gens=2+6)").unwrap()];
            }
            _ => {
                s.groups = vec!["dihedral(5)".into()];
                s.instances = 4;
                s.max_size = 5;
                s.seeds = vec![7];
            }
        }
        let rows = run_one(&s).unwrap();
        assert!(!rows.is_empty(), "{name} produced no rows");
        let bad: Vec<_> = rows.iter().filter(|r| r.class == RowClass::Hard && !r.holds).collect();
        assert!(bad.is_empty(), "{name}: {:?}", bad.first().map(|r| &r.inequality));
    }
}

#[test]
fn suite_reports_are_sorted_and_repeatable() {
    let cfg = SuiteConfig::parse("[suite]\nname = covering\ngroups = sl2(3); cyclic(9)\ninstances = 5\nseeds = 2\n").unwrap();
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    let keys: Vec<_> = a.rows.iter().map(|r| (r.suite.clone(), r.group.clone(), r.instance)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn hypothesis_failures_are_soft() {
    // A = H ∪ {x} in symmetric(4) with K = 1 breaks the local hypotheses.
    let mut s = SuiteSpec::new("tripling");
    s.groups = vec!["symmetric(4)".into()];
    s.families = vec![SetFamilySpec::parse("subgroup_plus_point(gens=2+6)").unwrap()];
    s.k = Some(approx_groups::rational::ratio(1, 1));
    let rows = run_one(&s).unwrap();
    let hyp: Vec<_> = rows.iter().filter(|r| r.inequality.starts_with("hypothesis:")).collect();
    assert!(!hyp.is_empty());
    assert!(hyp.iter().all(|r| r.class == RowClass::Soft && !r.holds));
}

#[test]
fn family_specs_round_trip() {
    for text in [
        "subgroup(gens=1+2)",
        "coset(x=3,gens=1,side=right)",
        "geometric_progression(base=2,len=5)",
        "subgroup_plus_point(gens=1)",
        "subgroup_plus_point(gens=1,x=4)",
        "union_of_cosets(gens=1,count=3)",
        "random_dense(density=0.25,seed=9)",
        "ball(gens=1+5,radius=2)",
    ] {
        let f = SetFamilySpec::parse(text).unwrap();
        assert_eq!(SetFamilySpec::parse(&f.to_string()).unwrap(), f, "{text}");
    }
    assert!(SetFamilySpec::parse("subgroup(gens=)").is_err());
    assert!(SetFamilySpec::parse("pyramid(len=3)").is_err());
}

#[test]
fn coset_unions_have_expected_size() {
    let g = FiniteGroup::parse("symmetric(4)").unwrap();
    let a = generate_set(&g, &SetFamilySpec::parse("union_of_cosets(gens=1,count=3)").unwrap()).unwrap();
    assert_eq!(a.len(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_subsets_are_bounded_and_seeded(seed in any::<u64>(), max in 1usize..10, count in 1usize..6) {
        let g = FiniteGroup::parse("dihedral(7)").unwrap();
        let a = random_subsets(&g, max, count, seed);
        let b = random_subsets(&g, max, count, seed);
        prop_assert_eq!(a.len(), count);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(!x.is_empty() && x.len() <= max);
            prop_assert_eq!(x.ids(), y.ids());
        }
    }

    #[test]
    fn geometric_progressions_are_powers(base in 0u32..24, len in 1usize..8) {
        let g = FiniteGroup::parse("symmetric(4)").unwrap();
        let a = generate_set(&g, &SetFamilySpec::parse(&format!("geometric_progression(base={base},len={len})")).unwrap()).unwrap();
        let mut x = 0;
        for _ in 0..len {
            prop_assert!(a.contains(x));
            x = g.mul(x, base);
        }
        prop_assert!(a.len() <= len);
    }
}

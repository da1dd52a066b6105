use super::{Elem, FiniteGroup};
use crate::bitset::Bitset;
use crate::error::{Error, Result};

/// Smallest subgroup containing `seed`, by closing under right
/// multiplication with the seed elements.
pub fn subgroup_closure(g: &FiniteGroup, seed: &[Elem]) -> Result<Bitset> {
    for &s in seed {
        g.check_id(s)?;
    }
    let mut members = Bitset::new(g.order());
    members.insert(0);
    let mut queue = vec![0 as Elem];
    while let Some(x) = queue.pop() {
        for &s in seed {
            let y = g.mul(x, s);
            if members.insert(y) {
                queue.push(y);
            }
        }
    }
    Ok(members)
}

/// A normal subgroup `H ⊴ G` with its quotient `G/H`.
///
/// Cosets are numbered by their smallest parent id in ascending order, so the
/// coset of the identity is quotient id 0 and each representative is the
/// smallest element of its coset.
#[derive(Clone, Debug)]
pub struct NormalSubgroupView {
    parent: FiniteGroup,
    members: Bitset,
    generators: Vec<Elem>,
    quotient: FiniteGroup,
}

impl NormalSubgroupView {
    pub fn parent(&self) -> &FiniteGroup {
        &self.parent
    }

    pub fn members(&self) -> &Bitset {
        &self.members
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.contains(x)
    }

    pub fn order(&self) -> usize {
        self.members.count()
    }

    pub fn quotient(&self) -> &FiniteGroup {
        &self.quotient
    }

    #[inline]
    pub fn project(&self, x: Elem) -> Elem {
        self.quotient.quotient_parts().expect("quotient group").1[x as usize]
    }

    #[inline]
    pub fn representative(&self, q: Elem) -> Elem {
        self.quotient.quotient_parts().expect("quotient group").2[q as usize]
    }

    /// `π` is a homomorphism: exhaustive for order ≤ 512, sampled above.
    pub fn check_homomorphism(&self, samples: usize, seed: u64) -> std::result::Result<(), String> {
        use rand::SeedableRng;
        let g = &self.parent;
        let q = &self.quotient;
        let ok = |x: Elem, y: Elem| self.project(g.mul(x, y)) == q.mul(self.project(x), self.project(y));
        if g.order() <= 512 {
            for x in g.elements() {
                for y in g.elements() {
                    if !ok(x, y) {
                        return Err(format!("π(x·y) ≠ π(x)·π(y) at ({x}, {y})"));
                    }
                }
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let (x, y) = (g.random_elem(&mut rng), g.random_elem(&mut rng));
                if !ok(x, y) {
                    return Err(format!("π(x·y) ≠ π(x)·π(y) at ({x}, {y})"));
                }
            }
        }
        for x in g.elements() {
            if (self.project(x) == 0) != self.contains(x) {
                return Err(format!("kernel mismatch at {x}"));
            }
        }
        Ok(())
    }
}

/// Quotient of `g` by the normal subgroup generated by `generators`.
///
/// Normality is verified for every parent element against every generator
/// (conjugation is an automorphism, so this is equivalent to checking every
/// member); a failure reports the offending pair.
pub fn quotient_map(g: &FiniteGroup, generators: &[Elem]) -> Result<NormalSubgroupView> {
    let members = subgroup_closure(g, generators)?;
    let gens: Vec<Elem> = if generators.is_empty() { vec![0] } else { generators.to_vec() };
    let bad = crate::par::find_first(g.order(), |x| gens.iter().any(|&h| !members.contains(g.conj(x as Elem, h))));
    if let Some(x) = bad {
        let h = *gens.iter().find(|&&h| !members.contains(g.conj(x as Elem, h))).unwrap();
        return Err(Error::NotNormal { g: x as Elem, h });
    }
    let n = g.order();
    let mut proj = vec![u32::MAX; n];
    let mut reps = Vec::new();
    let hs = members.to_vec();
    for x in 0..n as Elem {
        if proj[x as usize] != u32::MAX {
            continue;
        }
        let q = reps.len() as Elem;
        reps.push(x);
        for &h in &hs {
            proj[g.mul(x, h) as usize] = q;
        }
    }
    let gen_label: Vec<String> = gens.iter().map(|h| h.to_string()).collect();
    let label = format!("{}/<{}>", g.label(), gen_label.join(","));
    let quotient = FiniteGroup::quotient_group(g, label, proj, reps);
    Ok(NormalSubgroupView {
        parent: g.clone(),
        members,
        generators: gens,
        quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FiniteGroup {
        FiniteGroup::parse(s).unwrap()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(subgroup_closure(&g("cyclic(5)"), &[0]).unwrap().to_vec(), vec![0]);
        assert_eq!(subgroup_closure(&g("cyclic(8)"), &[2]).unwrap().to_vec(), vec![0, 2, 4, 6]);
        let s3 = g("symmetric(3)");
        // [0,2,1] is the transposition (1 2), [1,2,0] a 3-cycle.
        assert_eq!(subgroup_closure(&s3, &[1, 3]).unwrap().count(), 6);
        let c = subgroup_closure(&s3, &[1]).unwrap();
        assert_eq!(subgroup_closure(&s3, &c.to_vec()).unwrap(), c);
    }

    #[test]
    fn cyclic_quotient() {
        let v = quotient_map(&g("cyclic(6)"), &[3]).unwrap();
        assert_eq!(v.quotient().order(), 3);
        assert_eq!(v.project(4), 1);
        assert_eq!(v.representative(2), 2);
        v.check_homomorphism(0, 0).unwrap();
    }

    #[test]
    fn trivial_kernel_is_identity_renumbering() {
        let grp = g("symmetric(3)");
        let v = quotient_map(&grp, &[0]).unwrap();
        assert_eq!(v.quotient().order(), 6);
        for x in grp.elements() {
            assert_eq!(v.project(x), x);
        }
        v.check_homomorphism(0, 0).unwrap();
    }

    #[test]
    fn heisenberg_centre_quotient_is_z() {
        let grp = g("heisenberg(z=Z3^2;w=Z3)");
        let h = grp.heisenberg().unwrap();
        let gens: Vec<Elem> = (0..3).map(|w| h.join(0, w)).collect();
        let v = quotient_map(&grp, &gens).unwrap();
        assert_eq!(v.quotient().order(), 9);
        for x in grp.elements() {
            assert_eq!(v.project(x) as u64, h.split(x).0);
        }
        assert!(v.quotient().is_abelian());
        v.check_homomorphism(0, 0).unwrap();
    }

    #[test]
    fn non_normal_reports_counterexample() {
        let s3 = g("symmetric(3)");
        match quotient_map(&s3, &[1]) {
            Err(Error::NotNormal { g: x, h }) => assert!(!subgroup_closure(&s3, &[1]).unwrap().contains(s3.conj(x, h))),
            other => panic!("expected NotNormal, got {other:?}"),
        }
    }
}

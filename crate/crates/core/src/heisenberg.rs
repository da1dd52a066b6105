//! Heisenberg groups, the splitting lemmas along a normal subgroup, and the
//! inverse theorem for sets of small tripling in a Heisenberg group whose
//! centre `W` has no 2-torsion.
//!
//! Ids follow [`crate::group`]: `(z, w) ↦ w + |W|·z`, so the central subgroup
//! `{0} × W` is the id range `0..|W|`, the quotient by it is numbered by `z`,
//! and `ι` is the identity on ids into the additive carrier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::{quotient_map, subgroup_closure, Elem, FiniteGroup, GroupSpec, HeisenbergLaw, NormalSubgroupView, PairingSpec};
use crate::ledger::ConstantLedger;
use crate::rational::{int, Rational};
use crate::setcalc::{inverse_set, power, product_set, MSet};
use crate::structure::{approx_group_from_tripling, tripling_bound_sum, ApproxGroupWitness};

/// Triple checks are exhaustive up to this `|C|`, sampled above.
pub const TRIPLE_EXHAUSTIVE_LIMIT: usize = 64;
const TRIPLE_SAMPLES: usize = 50_000;
/// Pairwise group-law checks are exhaustive up to this order.
const PAIR_EXHAUSTIVE_LIMIT: usize = 2048;

fn abelian_spec(moduli: &[u32]) -> GroupSpec {
    match moduli {
        [] => GroupSpec::Cyclic(1),
        [m] => GroupSpec::Cyclic(*m),
        ms => GroupSpec::Product(ms.iter().map(|&m| GroupSpec::Cyclic(m)).collect()),
    }
}

#[derive(Clone, Debug)]
pub struct HeisenbergGroup {
    pub group: FiniteGroup,
    /// The additive group `Z × W` with the same ids.
    pub carrier: FiniteGroup,
    pub z_group: FiniteGroup,
    pub w_group: FiniteGroup,
    /// `{0} × W` with quotient `Z`.
    pub center: NormalSubgroupView,
}

impl HeisenbergGroup {
    pub fn law(&self) -> &HeisenbergLaw {
        self.group.heisenberg().expect("built from a pairing spec")
    }

    /// `π(g)`, the `Z` coordinate.
    pub fn pi(&self, g: Elem) -> Elem {
        self.law().split(g).0 as Elem
    }

    /// `ι(g)` as an id of the carrier.
    pub fn iota(&self, g: Elem) -> Elem {
        g
    }

    /// `{z, z'}` as a `W` id.
    pub fn pair(&self, z: Elem, z2: Elem) -> Elem {
        self.law().pair(z as u64, z2 as u64) as Elem
    }

    pub fn join(&self, z: Elem, w: Elem) -> Elem {
        self.law().join(z as u64, w as u64)
    }

    pub fn w_of(&self, g: Elem) -> Elem {
        self.law().split(g).1 as Elem
    }

    /// `ι(A)` in the carrier.
    pub fn iota_set(&self, a: &MSet) -> MSet {
        MSet::new(&self.carrier, a.iter()).expect("same ids")
    }

    /// The commutator `(z,w)(z',w')(z,w)⁻¹(z',w')⁻¹` equals `(0, 2{z,z'})`.
    pub fn commutator_identity_holds(&self, x: Elem, y: Elem) -> bool {
        let g = &self.group;
        let c = g.mul(g.mul(x, y), g.mul(g.inv(x), g.inv(y)));
        let p = self.pair(self.pi(x), self.pi(y));
        c == self.join(0, self.w_group.mul(p, p))
    }
}

fn malformed(msg: String) -> Error {
    Error::MalformedPairing(msg)
}

/// Builds the group and checks antisymmetry (exhaustive for `|Z| ≤ 10⁴`),
/// bi-additivity (exhaustive for `|Z|³ ≤ 10⁵`, sampled above), the inverse
/// law, centrality of `{0} × W` and the commutator identity.
pub fn build_heisenberg(spec: &PairingSpec) -> Result<HeisenbergGroup> {
    let group = FiniteGroup::new(&GroupSpec::Heisenberg(spec.clone()))?;
    let carrier = FiniteGroup::new(&GroupSpec::additive_carrier(spec))?;
    let z_group = FiniteGroup::new(&abelian_spec(&spec.z))?;
    let w_group = FiniteGroup::new(&abelian_spec(&spec.w))?;
    let law = group.heisenberg().expect("heisenberg law");
    let (nz, nw) = (law.z_order() as u64, law.w_order() as u64);

    if nz <= 10_000 {
        for x in 0..nz {
            for y in 0..nz {
                if law.pair(x, y) != law.w_neg(law.pair(y, x)) {
                    return Err(malformed(format!("{{x,y}} ≠ −{{y,x}} at z ids ({x}, {y})")));
                }
            }
        }
    }
    let additive = |x: u64, y: u64, z: u64| {
        law.pair(law.z_add(x, y), z) == law.w_add(law.pair(x, z), law.pair(y, z))
            && law.pair(z, law.z_add(x, y)) == law.w_add(law.pair(z, x), law.pair(z, y))
    };
    if nz.pow(3) <= 100_000 {
        for x in 0..nz {
            for y in 0..nz {
                for z in 0..nz {
                    if !additive(x, y, z) {
                        return Err(malformed(format!("not bi-additive at z ids ({x}, {y}, {z})")));
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20_000 {
            let (x, y, z) = (rng.gen_range(0..nz), rng.gen_range(0..nz), rng.gen_range(0..nz));
            if !additive(x, y, z) {
                return Err(malformed(format!("not bi-additive at z ids ({x}, {y}, {z})")));
            }
        }
    }

    let n = group.order();
    for g in group.elements() {
        let (z, w) = law.split(g);
        if group.inv(g) != law.join(law.z_neg(z), law.w_neg(w)) || group.mul(g, group.inv(g)) != 0 {
            return Err(malformed(format!("inverse law fails at {}", group.elem_name(g))));
        }
    }
    if n <= 10_000 {
        for c in 0..nw as Elem {
            if let Some(g) = group.elements().find(|&g| group.mul(c, g) != group.mul(g, c)) {
                return Err(malformed(format!(
                    "{} is not central (fails against {})",
                    group.elem_name(c),
                    group.elem_name(g)
                )));
            }
        }
    }
    let center_gens: Vec<Elem> = (0..nw as Elem).collect();
    let center = quotient_map(&group, &center_gens)?;
    let hg = HeisenbergGroup {
        group,
        carrier,
        z_group,
        w_group,
        center,
    };
    let pair_ok = |x: Elem, y: Elem| hg.commutator_identity_holds(x, y);
    if n <= PAIR_EXHAUSTIVE_LIMIT {
        for x in 0..n as Elem {
            if let Some(y) = (0..n as Elem).find(|&y| !pair_ok(x, y)) {
                return Err(malformed(format!("commutator identity fails at ({x}, {y})")));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20_000 {
            let (x, y) = (hg.group.random_elem(&mut rng), hg.group.random_elem(&mut rng));
            if !pair_ok(x, y) {
                return Err(malformed(format!("commutator identity fails at ({x}, {y})")));
            }
        }
    }
    Ok(hg)
}

/// Output of [`split_approximate`].
#[derive(Clone, Debug)]
pub struct SplitWitness {
    /// `A ∪ {1} ∪ A⁻¹`, the set the construction runs on.
    pub a_sym: MSet,
    /// `C = π(A_s)` and `C³`, in the quotient group.
    pub c: MSet,
    pub c3: MSet,
    /// `B₁ = (A_s² ∩ H)³`, `B₂ = (A_s⁸ ∩ H)³`, `B₃ = (A_s²⁶ ∩ H)³`.
    pub b: [MSet; 3],
    /// Approximate-group witnesses for `B₁, B₂, B₃`.
    pub b_witness: [ApproxGroupWitness; 3],
    /// `φ` on `C³`, indexed by quotient id.
    pub phi: Vec<Option<Elem>>,
    /// Involutions `x ∈ C³` whose fiber has no admissible element of order two.
    pub exceptions: Vec<Elem>,
    pub ledger: ConstantLedger,
}

impl SplitWitness {
    pub fn phi(&self, x: Elem) -> Option<Elem> {
        self.phi.get(x as usize).copied().flatten()
    }

    /// `(x, φ(x))` in ascending `x`.
    pub fn phi_pairs(&self) -> Vec<(Elem, Elem)> {
        self.phi.iter().enumerate().filter_map(|(x, p)| p.map(|p| (x as Elem, p))).collect()
    }
}

fn cap_h(a: &MSet, h: &NormalSubgroupView) -> MSet {
    let mut bits = a.bits().clone();
    bits.intersect_with(h.members());
    MSet::from_bitset(a.group(), bits).expect("contains the identity")
}

fn project_set(a: &MSet, h: &NormalSubgroupView) -> MSet {
    let q = h.quotient();
    MSet::from_bitset(q, Bitset::from_ids(q.order(), a.iter().map(|x| h.project(x)))).expect("nonempty")
}

/// Sizes `|A_s^n|` for `n = 0..=n_max`, and the sets at the requested exponents.
fn power_ladder(a_s: &MSet, n_max: usize, keep: &[usize]) -> Result<(Vec<usize>, Vec<(usize, MSet)>)> {
    let mut sizes = vec![1, a_s.len()];
    let mut kept = Vec::new();
    let mut cur = a_s.clone();
    if keep.contains(&1) {
        kept.push((1, cur.clone()));
    }
    for n in 2..=n_max {
        let next = product_set(&cur, a_s)?;
        // A_s contains 1, so a stable power is the generated subgroup.
        let stable = next.len() == cur.len();
        cur = next;
        sizes.push(cur.len());
        if keep.contains(&n) {
            kept.push((n, cur.clone()));
        }
        if stable {
            for m in n + 1..=n_max {
                sizes.push(cur.len());
                if keep.contains(&m) {
                    kept.push((m, cur.clone()));
                }
            }
            break;
        }
    }
    Ok((sizes, kept))
}

fn get_kept(kept: &[(usize, MSet)], n: usize) -> &MSet {
    &kept.iter().find(|(m, _)| *m == n).expect("requested power").1
}

/// Approximate splitting along a normal subgroup `H`, under `|A³| ≤ K|A|`.
pub fn split_approximate(a: &MSet, h: &NormalSubgroupView, k: &Rational) -> Result<SplitWitness> {
    let g = a.group();
    if h.parent() != g {
        return Err(Error::GroupMismatch {
            left: g.label().to_string(),
            right: h.parent().label().to_string(),
        });
    }
    let a3_len = power(a, 3)?.len();
    if int(a3_len) > k * int(a.len()) {
        return Err(Error::hypothesis(
            "|A^3| <= K|A|",
            a3_len,
            format!("{}*{}", crate::rational::display(k), a.len()),
        ));
    }
    let mut l = ConstantLedger::new();
    l.hard("|A^3| <= K|A|", int(a3_len), k * int(a.len()), "K*|A|");

    let a_s = a.symmetrize();
    let keep = [2, 3, 4, 6, 7, 8, 26, 78];
    let (sizes, kept) = power_ladder(&a_s, 79, &keep)?;
    let q = h.quotient();
    let c = project_set(&a_s, h);
    let c3 = power(&c, 3)?;
    let hn = |n: usize| cap_h(get_kept(&kept, n), h);
    let (h2, h4, h6, h8, h26) = (hn(2), hn(4), hn(6), hn(8), hn(26));

    l.hard(
        "|A_s| <= |C||A_s^2 cap H|",
        int(a_s.len()),
        int(c.len() * h2.len()),
        "|C|*|A_s^2 cap H|",
    );
    for (n, hs) in [(1, &h2), (2, &h4), (3, &h6)] {
        l.hard(
            &format!("|C||A_s^{} cap H| <= |A_s^{}|", 2 * n, 2 * n + 1),
            int(c.len() * hs.len()),
            int(sizes[2 * n + 1]),
            &format!("|A_s^{}|", 2 * n + 1),
        );
    }

    let mut b_sets = Vec::new();
    let mut b_wit = Vec::new();
    for (i, d) in [&h2, &h8, &h26].into_iter().enumerate() {
        let kd = Rational::new(power(d, 3)?.len().into(), d.len().into());
        let t = approx_group_from_tripling(d, &kd)?;
        let mut sub = t.ledger.clone();
        for r in &mut sub.rows {
            r.inequality = format!("B{}: {}", i + 1, r.inequality);
        }
        l.extend(sub);
        l.soft(
            &format!("K(B{}) = |X|", i + 1),
            int(t.witness.x.len()),
            int(2) * tripling_bound_sum(&kd, 7),
            "2*T(7)",
        );
        b_sets.push(t.witness.h.clone());
        b_wit.push(t.witness);
    }
    let nested = b_sets[0].is_subset(&b_sets[1]) && b_sets[1].is_subset(&b_sets[2]) && b_sets[2].iter().all(|x| h.contains(x));
    l.hard("B1 subset B2 subset B3 subset H (violations)", int(!nested as u8), int(0), "0");
    let (b1, b3) = (&b_sets[0], &b_sets[2]);
    let a78h = hn(78);
    l.hard("|B3| <= |A_s^78 cap H|", int(b3.len()), int(a78h.len()), "|A_s^78 cap H|");
    l.hard(
        "|C||A_s^78 cap H| <= |A_s^79|",
        int(c.len() * a78h.len()),
        int(sizes[79]),
        "|A_s^79|",
    );
    l.hard(
        "|B3||A_s| <= |A_s^79||B1|",
        int(b3.len() * a_s.len()),
        int(sizes[79] * b1.len()),
        "|A_s^79|*|B1|",
    );
    l.soft("measured |B3|/|B1|", int(b3.len()), int(b1.len()), "|B1|");
    l.hard("|B1||C| <= |A_s^7|", int(b1.len() * c.len()), int(sizes[7]), "|A_s^7|");
    l.hard(
        "|A_s^7| <= T(7)|A|",
        int(sizes[7]),
        tripling_bound_sum(k, 7) * int(a.len()),
        "sum_{j<=7} 2^j K^cbar(j) * |A|",
    );
    l.soft("measured |B1||C|/|A|", int(b1.len() * c.len()), int(a.len()), "|A|");

    // φ: smallest admissible id per fiber, inside A_s over C and inside A_s³ over C³.
    let a3s = get_kept(&kept, 3);
    let nq = q.order();
    let (mut rep1, mut rep3) = (vec![None::<Elem>; nq], vec![None::<Elem>; nq]);
    let (mut inv1, mut inv3) = (vec![None::<Elem>; nq], vec![None::<Elem>; nq]);
    for e in a3s.iter() {
        let x = h.project(e) as usize;
        let involution = g.mul(e, e) == 0;
        rep3[x].get_or_insert(e);
        if involution {
            inv3[x].get_or_insert(e);
        }
        if a_s.contains(e) {
            rep1[x].get_or_insert(e);
            if involution {
                inv1[x].get_or_insert(e);
            }
        }
    }
    let mut phi = vec![None::<Elem>; nq];
    let mut exceptions = Vec::new();
    for x in c3.iter() {
        if phi[x as usize].is_some() {
            continue;
        }
        let xi = q.inv(x);
        let in_c = c.contains(x);
        let rep = if in_c { rep1[x as usize] } else { rep3[x as usize] }.expect("fiber meets A_s^3");
        if x == 0 {
            phi[0] = Some(0);
        } else if xi != x {
            phi[x as usize] = Some(rep);
            phi[xi as usize] = Some(g.inv(rep));
        } else {
            match if in_c { inv1[x as usize] } else { inv3[x as usize] } {
                Some(r) => phi[x as usize] = Some(r),
                None => {
                    phi[x as usize] = Some(rep);
                    exceptions.push(x);
                }
            }
        }
    }
    let ph = |x: Elem| phi[x as usize].expect("φ defined on C³");

    let mut bad_section = 0usize;
    for x in c3.iter() {
        let p = ph(x);
        let ok_pi = h.project(p) == x;
        let ok_inv = exceptions.contains(&x) || ph(q.inv(x)) == g.inv(p);
        let ok_range = if c.contains(x) { a_s.contains(p) } else { a3s.contains(p) };
        bad_section += (!(ok_pi && ok_inv && ok_range)) as usize;
    }
    bad_section += (ph(0) != 0) as usize;
    l.hard(
        "phi section, phi(1)=1, phi(x^-1)=phi(x)^-1 (violations)",
        int(bad_section),
        int(0),
        "0",
    );
    l.soft("2-torsion fibers without an involution", int(exceptions.len()), int(0), "0");

    let mut bad_conj = 0usize;
    for x in c.iter() {
        let p = ph(x);
        for i in 0..2 {
            let (bi, bn) = (&b_sets[i], &b_sets[i + 1]);
            if !bi.left_translate(p).is_subset(&bn.right_translate(p)) {
                bad_conj += 1;
            }
            if !bi.right_translate(p).is_subset(&bn.left_translate(p)) {
                bad_conj += 1;
            }
        }
    }
    l.hard("phi(x)B_i subset B_{i+1}phi(x) and mirror (violations)", int(bad_conj), int(0), "0");

    let cs = c.ids();
    let triple_bad = |x: Elem, y: Elem, z: Elem| {
        let xyz = q.mul(q.mul(x, y), z);
        let lhs = g.mul(g.mul(ph(x), ph(y)), ph(z));
        !b3.contains(g.mul(g.inv(ph(xyz)), lhs))
    };
    let bad_triples: usize = if cs.len() <= TRIPLE_EXHAUSTIVE_LIMIT {
        crate::par::map(&cs, |&x| {
            cs.iter()
                .map(|&y| cs.iter().filter(|&&z| triple_bad(x, y, z)).count())
                .sum::<usize>()
        })
        .into_iter()
        .sum()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        (0..TRIPLE_SAMPLES)
            .filter(|_| {
                let (x, y, z) = (
                    cs[rng.gen_range(0..cs.len())],
                    cs[rng.gen_range(0..cs.len())],
                    cs[rng.gen_range(0..cs.len())],
                );
                triple_bad(x, y, z)
            })
            .count()
    };
    l.hard("phi(x)phi(y)phi(z) in phi(xyz)B3 (violations)", int(bad_triples), int(0), "0");

    let uncovered = a_s.iter().filter(|&e| !b1.contains(g.mul(g.inv(ph(h.project(e))), e))).count();
    l.hard("A_s subset U_{x in C} phi(x)B1 (violations)", int(uncovered), int(0), "0");

    let [b1, b2, b3]: [MSet; 3] = b_sets.try_into().expect("three sets");
    let b_witness: [ApproxGroupWitness; 3] = b_wit.try_into().expect("three witnesses");
    Ok(SplitWitness {
        a_sym: a_s,
        c,
        c3,
        b: [b1, b2, b3],
        b_witness,
        phi,
        exceptions,
        ledger: l,
    })
}

/// Output of [`exact_split_oracle`].
#[derive(Clone, Debug)]
pub struct ExactSplit {
    pub b: MSet,
    pub c: MSet,
    /// `(x, φ(x))` over `C`, `φ(x)` the smallest id of `A` in the fiber.
    pub phi: Vec<(Elem, Elem)>,
    pub ledger: ConstantLedger,
}

impl ExactSplit {
    pub fn passes(&self) -> bool {
        self.ledger.passes()
    }
}

/// The splitting of a genuine subgroup `A`: `B = A ∩ H`, `C = π(A)` and a
/// section `φ`, with `φ(x)B = Bφ(x)`, `φ(xy) ∈ φ(x)φ(y)B` and `|A| = |C||B|`.
pub fn exact_split_oracle(a: &MSet, h: &NormalSubgroupView) -> Result<ExactSplit> {
    if !a.is_subgroup() {
        return Err(Error::NotSubgroup("not closed under products and inverses".into()));
    }
    let g = a.group();
    let q = h.quotient();
    let b = cap_h(a, h);
    let c = project_set(a, h);
    let mut rep = vec![None::<Elem>; q.order()];
    for e in a.iter() {
        rep[h.project(e) as usize].get_or_insert(e);
    }
    let ph = |x: Elem| rep[x as usize].expect("x ∈ C");
    let mut l = ConstantLedger::new();
    let bad_normal = c.iter().filter(|&x| b.left_translate(ph(x)) != b.right_translate(ph(x))).count();
    l.hard("phi(x)B = B phi(x) (violations)", int(bad_normal), int(0), "0");
    let cs = c.ids();
    let bad_hom: usize = cs
        .iter()
        .map(|&x| {
            cs.iter()
                .filter(|&&y| !b.contains(g.mul(g.inv(g.mul(ph(x), ph(y))), ph(q.mul(x, y)))))
                .count()
        })
        .sum();
    l.hard("phi(xy) in phi(x)phi(y)B (violations)", int(bad_hom), int(0), "0");
    l.hard("|A| <= |C||B|", int(a.len()), int(c.len() * b.len()), "|C||B|");
    l.hard("|C||B| <= |A|", int(c.len() * b.len()), int(a.len()), "|A|");
    let phi = cs.iter().map(|&x| (x, ph(x))).collect();
    Ok(ExactSplit { b, c, phi, ledger: l })
}

/// Output of [`heisen_inverse`].
#[derive(Clone, Debug)]
pub struct AbelianApproxWitness {
    /// `Ã = 3(ι(A') ∪ {0} ∪ −ι(A'))` in the carrier.
    pub a_tilde: MSet,
    pub cover: Vec<Elem>,
    /// `K̃ = |X̃|`.
    pub k_tilde: Rational,
    /// `f(z)` for `z ∈ C³`, as `(z, w)` ids of `Z` and `W`.
    pub f: Vec<(Elem, Elem)>,
    /// `B̃ = (B₃ − B₃) ∩ 2W` and `B' = {b : 2b ∈ 3B̃}`, as `W` sets.
    pub b_tilde: MSet,
    pub b_prime: MSet,
    /// `A' = {(z, w) : z ∈ C, w ∈ f(z) + 9B' + B₁}` in the carrier.
    pub a_prime: MSet,
    pub split: SplitWitness,
    pub ledger: ConstantLedger,
}

fn w_set(hg: &HeisenbergGroup, s: &MSet) -> MSet {
    MSet::new(&hg.w_group, s.iter().map(|e| hg.w_of(e))).expect("nonempty")
}

fn doubled(s: &MSet) -> MSet {
    let g = s.group();
    MSet::from_bitset(g, Bitset::from_ids(g.order(), s.iter().map(|x| g.mul(x, x)))).expect("nonempty")
}

/// `W` has no 2-torsion: `2w = 0` forces `w = 0`.
pub fn check_no_two_torsion(hg: &HeisenbergGroup) -> Result<()> {
    let w = &hg.w_group;
    match w.elements().find(|&x| x != 0 && w.mul(x, x) == 0) {
        Some(x) => Err(Error::TwoTorsion(x)),
        None => Ok(()),
    }
}

/// The inverse theorem: from `|A³| ≤ K|A|` build an additive approximate group
/// `Ã ⊆ Z × W` with `ι(A) ⊆ Ã` and `{π(Ã), π(Ã)} ⊆ Ã`.
pub fn heisen_inverse(hg: &HeisenbergGroup, a: &MSet, k: &Rational) -> Result<AbelianApproxWitness> {
    if a.group() != &hg.group {
        return Err(Error::GroupMismatch {
            left: a.group().label().to_string(),
            right: hg.group.label().to_string(),
        });
    }
    check_no_two_torsion(hg)?;
    let split = split_approximate(a, &hg.center, k)?;
    let mut l = split.ledger.clone();
    let wg = &hg.w_group;
    let f: Vec<(Elem, Elem)> = split.phi_pairs().into_iter().map(|(z, p)| (z, hg.w_of(p))).collect();
    let f_of = |z: Elem| f.iter().find(|&&(x, _)| x == z).expect("z ∈ C³").1;

    let b1 = w_set(hg, &split.b[0]);
    let b3 = w_set(hg, &split.b[2]);
    let diff = product_set(&b3, &inverse_set(&b3))?;
    let two_w = doubled(&MSet::whole(wg));
    let b_tilde = diff.intersection(&two_w).expect("contains 0");
    let b_tilde3 = power(&b_tilde, 3)?;
    let b_prime = MSet::new(wg, wg.elements().filter(|&x| b_tilde3.contains(wg.mul(x, x)))).expect("contains 0");

    let cs = split.c.ids();
    let (mut bad_comm, mut bad_fuzz) = (0usize, 0usize);
    for &z1 in &cs {
        for &z2 in &cs {
            let p = hg.pair(z1, z2);
            bad_comm += (!diff.contains(wg.mul(p, p))) as usize;
            bad_fuzz += (!b_prime.contains(p)) as usize;
        }
    }
    l.hard("2{z1,z2} in B3 - B3 for z1,z2 in C (violations)", int(bad_comm), int(0), "0");
    l.hard("{C,C} subset B' (violations)", int(bad_fuzz), int(0), "0");

    let fuzz = product_set(&power(&b_prime, 9)?, &b1)?;
    let a_prime = MSet::new(
        &hg.carrier,
        cs.iter()
            .flat_map(|&z| {
                let fz = f_of(z);
                fuzz.iter().map(move |w| (z, wg.mul(fz, w)))
            })
            .map(|(z, w)| hg.join(z, w)),
    )?;
    let iota_a = hg.iota_set(a);
    l.hard(
        "iota(A) subset A' (violations)",
        int(iota_a.len() - iota_a.intersection_len(&a_prime)),
        int(0),
        "0",
    );

    let three_ap = power(&a_prime, 3)?.len();
    let c3 = split.c3.len();
    let spread = product_set(&power(&b_prime, 30)?, &power(&b3, 4)?)?.len();
    l.hard(
        "|3 iota(A')| <= |C^3||30B' + 4B3|",
        int(three_ap),
        int(c3 * spread),
        "|C^3|*|30B'+4B3|",
    );

    let kt = Rational::new(three_ap.into(), a_prime.len().into());
    let tri = approx_group_from_tripling(&a_prime, &kt)?;
    let mut sub = tri.ledger.clone();
    for r in &mut sub.rows {
        r.inequality = format!("A~: {}", r.inequality);
    }
    l.extend(sub);
    let a_tilde = tri.witness.h.clone();
    l.hard(
        "iota(A) subset A~ (violations)",
        int(iota_a.len() - iota_a.intersection_len(&a_tilde)),
        int(0),
        "0",
    );

    let zs: Vec<Elem> = {
        let mut v: Vec<Elem> = a_tilde.iter().map(|e| hg.pi(e)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let bad_pi = crate::par::map(&zs, |&z1| {
        zs.iter().filter(|&&z2| !a_tilde.contains(hg.join(0, hg.pair(z1, z2)))).count()
    })
    .into_iter()
    .sum::<usize>();
    l.hard("{pi(A~), pi(A~)} subset A~ (violations)", int(bad_pi), int(0), "0");
    l.soft("measured |A~|/|A|", int(a_tilde.len()), int(a.len()), "|A|");
    l.soft(
        "measured K~ = |X~|",
        int(tri.witness.x.len()),
        int(2) * tripling_bound_sum(&kt, 7),
        "2*T(7)",
    );

    Ok(AbelianApproxWitness {
        k_tilde: int(tri.witness.x.len()),
        cover: tri.witness.x.clone(),
        a_tilde,
        f,
        b_tilde,
        b_prime,
        a_prime,
        split,
        ledger: l,
    })
}

/// `ι(A³) ⊆ 3Ã + 3{π(Ã),π(Ã)} ⊆ 6Ã`, plus the measured size ratios.
pub fn verify_inverse_converse(hg: &HeisenbergGroup, w: &AbelianApproxWitness, a: &MSet) -> Result<ConstantLedger> {
    let mut l = ConstantLedger::new();
    let a3 = hg.iota_set(&power(a, 3)?);
    let six = power(&w.a_tilde, 6)?;
    let zs: Vec<Elem> = {
        let mut v: Vec<Elem> = w.a_tilde.iter().map(|e| hg.pi(e)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let brackets = MSet::new(
        &hg.carrier,
        zs.iter().flat_map(|&x| zs.iter().map(move |&y| hg.join(0, hg.pair(x, y)))),
    )?;
    let mixed = product_set(&power(&w.a_tilde, 3)?, &power(&brackets, 3)?)?;
    l.hard(
        "iota(A^3) subset 3A~ + 3{pi(A~),pi(A~)} (violations)",
        int(a3.len() - a3.intersection_len(&mixed)),
        int(0),
        "0",
    );
    l.hard(
        "iota(A^3) subset 6A~ (violations)",
        int(a3.len() - a3.intersection_len(&six)),
        int(0),
        "0",
    );
    l.hard("|A^3| <= |6A~|", int(a3.len()), int(six.len()), "|6A~|");
    l.soft("measured |A^3|/|A~|", int(a3.len()), int(w.a_tilde.len()), "|A~|");
    l.soft("|A^3| <= 6|A~|", int(a3.len()), int(6 * w.a_tilde.len()), "6*|A~|");
    Ok(l)
}

/// For a genuine subgroup `A`: with `C = π(A)` and `Ã = ι(A) + ⟨{C,C}⟩`,
/// checks that `Ã` is an additive subgroup and
/// `2·(Ã + ⟨{π(Ã),π(Ã)}⟩) ⊆ ι(A) ⊆ Ã + ⟨{π(Ã),π(Ã)}⟩`.
pub fn subgroup_sandwich(hg: &HeisenbergGroup, a: &MSet) -> Result<ConstantLedger> {
    if !a.is_subgroup() {
        return Err(Error::NotSubgroup("not closed under products and inverses".into()));
    }
    let cg = &hg.carrier;
    let bracket_span = |zs: &[Elem]| -> Result<MSet> {
        let seeds: Vec<Elem> = zs
            .iter()
            .flat_map(|&x| zs.iter().map(move |&y| hg.join(0, hg.pair(x, y))))
            .collect();
        MSet::from_bitset(cg, subgroup_closure(cg, &seeds)?)
    };
    let distinct = |s: &MSet| {
        let mut v: Vec<Elem> = s.iter().map(|e| hg.pi(e)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let iota_a = hg.iota_set(a);
    let span_c = bracket_span(&distinct(&iota_a))?;
    let a_tilde = product_set(&iota_a, &span_c)?;
    let mut l = ConstantLedger::new();
    l.hard(
        "A~ is an additive subgroup (violations)",
        int(!a_tilde.is_subgroup() as u8),
        int(0),
        "0",
    );
    let outer = product_set(&a_tilde, &bracket_span(&distinct(&a_tilde))?)?;
    let inner = doubled(&outer);
    l.hard(
        "2(A~ + <{pi A~, pi A~}>) subset iota(A) (violations)",
        int(inner.len() - inner.intersection_len(&iota_a)),
        int(0),
        "0",
    );
    l.hard(
        "iota(A) subset A~ + <{pi A~, pi A~}> (violations)",
        int(iota_a.len() - iota_a.intersection_len(&outer)),
        int(0),
        "0",
    );
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Pairing;
    use crate::rational::int;

    fn heis(p: u32) -> HeisenbergGroup {
        build_heisenberg(&PairingSpec {
            z: vec![p, p],
            w: vec![p],
            pairing: Pairing::Symplectic,
        })
        .unwrap()
    }

    fn ratio_k(a: &MSet) -> Rational {
        Rational::new(power(a, 3).unwrap().len().into(), a.len().into())
    }

    #[test]
    fn order_and_center() {
        let hg = heis(3);
        assert_eq!(hg.group.order(), 27);
        assert_eq!(hg.center.order(), 3);
        assert_eq!(hg.center.quotient().order(), 9);
        assert!(!hg.group.is_abelian());
        let z = build_heisenberg(&PairingSpec {
            z: vec![3, 3],
            w: vec![3],
            pairing: Pairing::Zero,
        })
        .unwrap();
        assert!(z.group.is_abelian());
    }

    #[test]
    fn central_subgroup_split() {
        let hg = heis(3);
        let w = MSet::new(&hg.group, 0..3).unwrap();
        let s = split_approximate(&w, &hg.center, &int(1)).unwrap();
        assert_eq!(s.c.ids(), vec![0]);
        for b in &s.b {
            assert_eq!(b, &w);
        }
        assert_eq!(s.phi(0), Some(0));
        assert!(s.ledger.passes());
    }

    #[test]
    fn full_group_inverse() {
        let hg = heis(3);
        let a = MSet::whole(&hg.group);
        let w = heisen_inverse(&hg, &a, &int(1)).unwrap();
        assert_eq!(w.a_tilde.len(), 27);
        assert!(w.ledger.passes(), "{:?}", w.ledger.failures().collect::<Vec<_>>());
        assert!(verify_inverse_converse(&hg, &w, &a).unwrap().passes());
    }

    #[test]
    fn identity_inverse() {
        let hg = heis(3);
        let a = MSet::identity(&hg.group);
        let w = heisen_inverse(&hg, &a, &int(1)).unwrap();
        assert_eq!(w.a_tilde.ids(), vec![0]);
    }

    #[test]
    fn center_plus_point_p5() {
        let hg = heis(5);
        let z0 = hg.join(1, 0);
        let a = MSet::new(&hg.group, (0..5).chain([z0])).unwrap();
        let k = ratio_k(&a);
        let w = heisen_inverse(&hg, &a, &k).unwrap();
        assert!(w.ledger.passes(), "{:?}", w.ledger.failures().collect::<Vec<_>>());
        assert!(verify_inverse_converse(&hg, &w, &a).unwrap().passes());
    }

    #[test]
    fn z_section_split() {
        let hg = heis(3);
        let a = MSet::new(&hg.group, (0..9).map(|z| hg.join(z, 0))).unwrap();
        let s = split_approximate(&a, &hg.center, &ratio_k(&a)).unwrap();
        assert!(s.ledger.passes());
        assert_eq!(s.c.len(), 9);
    }

    #[test]
    fn exact_oracle_on_cyclic_12() {
        let g = FiniteGroup::parse("cyclic(12)").unwrap();
        let h = quotient_map(&g, &[4]).unwrap();
        let a = MSet::new(&g, [0, 2, 4, 6, 8, 10]).unwrap();
        let e = exact_split_oracle(&a, &h).unwrap();
        assert_eq!(e.c.len(), 2);
        assert_eq!(e.b.ids(), vec![0, 4, 8]);
        assert!(e.passes());
        let s = split_approximate(&a, &h, &int(1)).unwrap();
        for b in &s.b {
            assert_eq!(b, &e.b);
        }
        assert!(exact_split_oracle(&MSet::new(&g, [0, 1]).unwrap(), &h).is_err());
    }

    #[test]
    fn sandwich_for_subgroups() {
        let hg = heis(3);
        for seed in [vec![hg.join(1, 0)], vec![hg.join(1, 0), hg.join(3, 0)], vec![1]] {
            let a = MSet::from_bitset(&hg.group, subgroup_closure(&hg.group, &seed).unwrap()).unwrap();
            assert!(subgroup_sandwich(&hg, &a).unwrap().passes());
        }
    }

    #[test]
    fn two_torsion_rejected() {
        let hg = build_heisenberg(&PairingSpec {
            z: vec![2, 2],
            w: vec![2],
            pairing: Pairing::Symplectic,
        })
        .unwrap();
        let a = MSet::whole(&hg.group);
        assert!(matches!(heisen_inverse(&hg, &a, &int(1)), Err(Error::TwoTorsion(_))));
    }
}

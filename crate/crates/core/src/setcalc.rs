//! Product sets, convolution, energy and Ruzsa distance over a [`FiniteGroup`].

use std::fmt;

use serde::{Serialize, Serializer};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::par;

/// Default cap on sign-pattern length for [`iterated_product`].
pub const SIGN_CAP: usize = 30;

/// A finite nonempty subset of a group.
#[derive(Clone, PartialEq, Eq)]
pub struct MSet {
    group: FiniteGroup,
    bits: Bitset,
    card: usize,
}

impl fmt::Debug for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MSet{:?}", self.bits)
    }
}

impl Serialize for MSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.bits.iter())
    }
}

impl MSet {
    pub fn new(group: &FiniteGroup, ids: impl IntoIterator<Item = Elem>) -> Result<Self> {
        let mut bits = Bitset::new(group.order());
        for id in ids {
            group.check_id(id)?;
            bits.insert(id);
        }
        Self::from_bitset(group, bits)
    }

    pub fn from_bitset(group: &FiniteGroup, bits: Bitset) -> Result<Self> {
        debug_assert_eq!(bits.capacity(), group.order());
        let card = bits.count();
        if card == 0 {
            return Err(Error::EmptySet);
        }
        Ok(MSet {
            group: group.clone(),
            bits,
            card,
        })
    }

    pub fn singleton(group: &FiniteGroup, x: Elem) -> Self {
        Self::new(group, [x]).expect("valid id")
    }

    pub fn identity(group: &FiniteGroup) -> Self {
        Self::singleton(group, 0)
    }

    pub fn whole(group: &FiniteGroup) -> Self {
        Self::from_bitset(group, Bitset::full(group.order())).expect("groups are nonempty")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.card
    }

    /// Always false: an `MSet` is nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.bits.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.bits.iter()
    }

    /// Members in ascending id order.
    pub fn ids(&self) -> Vec<Elem> {
        self.bits.to_vec()
    }

    pub fn min(&self) -> Elem {
        self.bits.first().expect("nonempty")
    }

    pub fn is_subset(&self, other: &MSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &MSet) -> MSet {
        let bits = self.bits.union(&other.bits);
        MSet::from_bitset(&self.group, bits).expect("union of nonempty sets")
    }

    /// `None` when the intersection is empty.
    pub fn intersection(&self, other: &MSet) -> Option<MSet> {
        MSet::from_bitset(&self.group, self.bits.intersection(&other.bits)).ok()
    }

    pub fn intersection_len(&self, other: &MSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    /// `x·A`.
    pub fn left_translate(&self, x: Elem) -> MSet {
        let bits = Bitset::from_ids(self.group.order(), self.iter().map(|a| self.group.mul(x, a)));
        MSet::from_bitset(&self.group, bits).expect("translate of nonempty set")
    }

    /// `A·x`.
    pub fn right_translate(&self, x: Elem) -> MSet {
        let bits = Bitset::from_ids(self.group.order(), self.iter().map(|a| self.group.mul(a, x)));
        MSet::from_bitset(&self.group, bits).expect("translate of nonempty set")
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|a| self.contains(self.group.inv(a)))
    }

    /// `A ∪ {1} ∪ A⁻¹`.
    pub fn symmetrize(&self) -> MSet {
        let mut bits = self.bits.clone();
        bits.insert(0);
        for a in self.iter() {
            bits.insert(self.group.inv(a));
        }
        MSet::from_bitset(&self.group, bits).expect("nonempty")
    }

    /// True when the set is closed under multiplication (hence a subgroup).
    pub fn is_subgroup(&self) -> bool {
        let ids = self.ids();
        self.contains(0) && ids.iter().all(|&a| ids.iter().all(|&b| self.contains(self.group.mul(a, b))))
    }
}

pub(crate) fn same_group(a: &MSet, b: &MSet) -> Result<()> {
    if a.group == b.group {
        Ok(())
    } else {
        Err(Error::GroupMismatch {
            left: a.group.label().to_string(),
            right: b.group.label().to_string(),
        })
    }
}

/// `A·B`.
pub fn product_set(a: &MSet, b: &MSet) -> Result<MSet> {
    same_group(a, b)?;
    let g = &a.group;
    let bs = b.ids();
    let bits = par::union_over(g.order(), &a.ids(), |&x, acc| match g.row(x) {
        Some(row) => {
            for &y in &bs {
                acc.insert(row[y as usize] as Elem);
            }
        }
        None => {
            for &y in &bs {
                acc.insert(g.mul(x, y));
            }
        }
    });
    MSet::from_bitset(g, bits)
}

/// `A⁻¹`.
pub fn inverse_set(a: &MSet) -> MSet {
    let g = &a.group;
    MSet::from_bitset(g, Bitset::from_ids(g.order(), a.iter().map(|x| g.inv(x)))).expect("nonempty")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_i8(s: i8) -> Option<Sign> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Renders a sign pattern as `+-+`.
pub fn pattern_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| if *s == Sign::Plus { '+' } else { '-' }).collect()
}

/// `A^{ε₁}⋯A^{ε_n}`, left to right, with the default length cap.
pub fn iterated_product(a: &MSet, signs: &[Sign]) -> Result<MSet> {
    iterated_product_capped(a, signs, SIGN_CAP)
}

pub fn iterated_product_capped(a: &MSet, signs: &[Sign], cap: usize) -> Result<MSet> {
    if signs.is_empty() {
        return Err(Error::InvalidParameter("sign pattern must be nonempty".into()));
    }
    if signs.len() > cap {
        return Err(Error::SignCap { len: signs.len(), cap });
    }
    let inv = inverse_set(a);
    let factor = |s: Sign| if s == Sign::Plus { a } else { &inv };
    let mut acc = factor(signs[0]).clone();
    for &s in &signs[1..] {
        acc = product_set(&acc, factor(s))?;
    }
    Ok(acc)
}

/// `Aⁿ` for `n ≥ 1`.
pub fn power(a: &MSet, n: usize) -> Result<MSet> {
    iterated_product_capped(a, &vec![Sign::Plus; n], n.max(1))
}

/// Sequence `A, A², ..., Aⁿ`.
pub fn powers(a: &MSet, n: usize) -> Result<Vec<MSet>> {
    let mut out = vec![a.clone()];
    for _ in 1..n {
        let next = product_set(out.last().unwrap(), a)?;
        out.push(next);
    }
    Ok(out)
}

/// The counts `1_A ∗ 1_B(x) = #{(a,b) ∈ A×B : a·b = x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvolutionProfile {
    counts: Vec<u64>,
    total: u64,
    a_len: usize,
    b_len: usize,
}

impl ConvolutionProfile {
    #[inline]
    pub fn get(&self, x: Elem) -> u64 {
        self.counts[x as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Nonzero `(id, count)` pairs in id order.
    pub fn sparse(&self) -> Vec<(Elem, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as Elem, c))
            .collect()
    }

    pub fn support(&self, g: &FiniteGroup) -> MSet {
        MSet::new(g, self.sparse().into_iter().map(|(x, _)| x)).expect("nonempty profile")
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }

    /// Total mass `|A||B|`, pointwise bound `min(|A|,|B|)`, support inside `ab`.
    pub fn check_invariants(&self, ab: &MSet) -> std::result::Result<(), String> {
        if self.total != (self.a_len * self.b_len) as u64 {
            return Err(format!("total {} ≠ |A||B| = {}", self.total, self.a_len * self.b_len));
        }
        let m = self.a_len.min(self.b_len) as u64;
        for (x, c) in self.sparse() {
            if c > m {
                return Err(format!("count {c} at {x} exceeds min(|A|,|B|) = {m}"));
            }
            if !ab.contains(x) {
                return Err(format!("{x} in support but not in A·B"));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["id", "count"])?;
        for (x, c) in self.sparse() {
            wr.write_record([x.to_string(), c.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn convolution(a: &MSet, b: &MSet) -> Result<ConvolutionProfile> {
    same_group(a, b)?;
    let g = &a.group;
    let bs = b.ids();
    let counts = par::sum_counts(g.order(), &a.ids(), |&x, acc| match g.row(x) {
        Some(row) => {
            for &y in &bs {
                acc[row[y as usize] as usize] += 1;
            }
        }
        None => {
            for &y in &bs {
                acc[g.mul(x, y) as usize] += 1;
            }
        }
    });
    Ok(ConvolutionProfile {
        counts,
        total: (a.len() * b.len()) as u64,
        a_len: a.len(),
        b_len: b.len(),
    })
}

/// Multiplicative energy, a count of quadruples (units of `μ³`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EnergyValue(pub u128);

impl EnergyValue {
    pub fn value(&self) -> u128 {
        self.0
    }
}

/// Sets up to this size are cross-checked against [`energy_quadruples`] in debug builds.
pub const ENERGY_ORACLE_LIMIT: usize = 64;

/// `E(A,B) = Σ_x (1_A ∗ 1_B(x))²`.
pub fn energy(a: &MSet, b: &MSet) -> Result<EnergyValue> {
    let e = EnergyValue(convolution(a, b)?.sum_of_squares());
    if cfg!(debug_assertions) && a.len() <= ENERGY_ORACLE_LIMIT && b.len() <= ENERGY_ORACLE_LIMIT {
        debug_assert_eq!(e, energy_quadruples(a, b)?);
    }
    Ok(e)
}

/// `#{(a,b,a',b') ∈ A×B×A×B : a·b = a'·b'}` by enumerating `(a,b,a')` and
/// testing the forced `b' = a'⁻¹·a·b` for membership.
pub fn energy_quadruples(a: &MSet, b: &MSet) -> Result<EnergyValue> {
    same_group(a, b)?;
    let g = &a.group;
    let (aa, bb) = (a.ids(), b.ids());
    let n: u64 = par::map(&aa, |&x| {
        let mut n = 0u64;
        for &y in &bb {
            let xy = g.mul(x, y);
            for &x2 in &aa {
                if b.contains(g.mul(g.inv(x2), xy)) {
                    n += 1;
                }
            }
        }
        n
    })
    .into_iter()
    .sum();
    Ok(EnergyValue(n as u128))
}

/// `d(A,B) = log(|A·B⁻¹| / sqrt(|A||B|))`, kept as exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuzsaDistanceValue {
    pub numerator: u64,
    pub denominator_sq: u64,
}

impl RuzsaDistanceValue {
    /// Display value only.
    pub fn log_value(&self) -> f64 {
        (self.numerator as f64).ln() - 0.5 * (self.denominator_sq as f64).ln()
    }

    /// `d(A,B) ≥ 0` in the form `numerator² ≥ |A||B|`.
    pub fn nonnegative(&self) -> bool {
        (self.numerator as u128).pow(2) >= self.denominator_sq as u128
    }
}

pub fn ruzsa_distance(a: &MSet, b: &MSet) -> Result<RuzsaDistanceValue> {
    let ab = product_set(a, &inverse_set(b))?;
    Ok(RuzsaDistanceValue {
        numerator: ab.len() as u64,
        denominator_sq: (a.len() * b.len()) as u64,
    })
}

/// `A ·_E B = {a·b : (a,b) ∈ E}`.
pub fn partial_product(a: &MSet, b: &MSet, e: &[(Elem, Elem)]) -> Result<MSet> {
    same_group(a, b)?;
    if e.is_empty() {
        return Err(Error::InvalidRelation("E is empty".into()));
    }
    if let Some(&(x, y)) = e.iter().find(|&&(x, y)| !a.contains(x) || !b.contains(y)) {
        return Err(Error::InvalidRelation(format!("pair ({x}, {y}) is not in A × B")));
    }
    let g = &a.group;
    MSet::from_bitset(g, Bitset::from_ids(g.order(), e.iter().map(|&(x, y)| g.mul(x, y))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FiniteGroup {
        FiniteGroup::parse(s).unwrap()
    }

    fn set(grp: &FiniteGroup, ids: &[Elem]) -> MSet {
        MSet::new(grp, ids.iter().copied()).unwrap()
    }

    #[test]
    fn empty_sets_rejected() {
        assert_eq!(MSet::new(&g("cyclic(3)"), []), Err(Error::EmptySet));
        assert!(matches!(MSet::new(&g("cyclic(3)"), [3]), Err(Error::ElementOutOfRange { .. })));
    }

    #[test]
    fn product_examples() {
        let c5 = g("cyclic(5)");
        let p = product_set(&set(&c5, &[0, 1]), &set(&c5, &[0, 2])).unwrap();
        assert_eq!(p.ids(), vec![0, 1, 2, 3]);
        let a = set(&c5, &[1, 3]);
        assert_eq!(product_set(&MSet::identity(&c5), &a).unwrap(), a);
        let c8 = g("cyclic(8)");
        let h = set(&c8, &[0, 2, 4, 6]);
        assert_eq!(product_set(&h, &h).unwrap(), h);
        let other = set(&g("cyclic(8)"), &[1]);
        assert!(product_set(&h, &other).is_ok());
        assert!(matches!(product_set(&h, &set(&c5, &[1])), Err(Error::GroupMismatch { .. })));
    }

    #[test]
    fn inverse_examples() {
        let c7 = g("cyclic(7)");
        assert_eq!(inverse_set(&set(&c7, &[1, 2])).ids(), vec![5, 6]);
        let s = set(&c7, &[0, 1, 6]);
        assert_eq!(inverse_set(&s), s);
    }

    #[test]
    fn iterated_examples() {
        let c100 = g("cyclic(100)");
        let a = set(&c100, &[99, 0, 1]);
        assert_eq!(iterated_product(&a, &[Sign::Plus]).unwrap(), a);
        let a3 = iterated_product(&a, &[Sign::Plus; 3]).unwrap();
        assert_eq!(a3.ids(), vec![0, 1, 2, 3, 97, 98, 99]);
        assert!(matches!(iterated_product(&a, &[Sign::Plus; 31]), Err(Error::SignCap { .. })));
        let h = set(&g("cyclic(8)"), &[0, 4]);
        assert_eq!(iterated_product(&h, &[Sign::Minus, Sign::Plus, Sign::Minus]).unwrap(), h);
    }

    #[test]
    fn convolution_examples() {
        let c5 = g("cyclic(5)");
        let a = set(&c5, &[0, 1, 2]);
        let p = convolution(&a, &a).unwrap();
        assert_eq!(p.counts(), &[1, 2, 3, 2, 1]);
        assert_eq!(p.total(), 9);
        p.check_invariants(&product_set(&a, &a).unwrap()).unwrap();
        let e = MSet::identity(&c5);
        assert_eq!(convolution(&e, &e).unwrap().sparse(), vec![(0, 1)]);
    }

    #[test]
    fn energy_examples() {
        let c5 = g("cyclic(5)");
        let a = set(&c5, &[0, 1, 2]);
        assert_eq!(energy(&a, &a).unwrap(), EnergyValue(19));
        assert_eq!(energy_quadruples(&a, &a).unwrap(), EnergyValue(19));
        let e = MSet::identity(&c5);
        assert_eq!(energy(&e, &e).unwrap(), EnergyValue(1));
        let c12 = g("cyclic(12)");
        let h = set(&c12, &[0, 3, 6, 9]);
        assert_eq!(energy(&h, &h).unwrap(), EnergyValue(64));
    }

    #[test]
    fn ruzsa_examples() {
        let c7 = g("cyclic(7)");
        let a = set(&c7, &[0, 1]);
        let d = ruzsa_distance(&a, &a).unwrap();
        assert_eq!(d.numerator, 3);
        assert!((d.log_value() - (1.5f64).ln()).abs() < 1e-12);
        let h = set(&g("cyclic(8)"), &[0, 2, 4, 6]);
        let dh = ruzsa_distance(&h, &h).unwrap();
        assert_eq!(dh.numerator, 4);
        assert_eq!(dh.log_value(), 0.0);
    }

    #[test]
    fn partial_product_examples() {
        let c5 = g("cyclic(5)");
        let a = set(&c5, &[0, 1, 2]);
        let diag: Vec<_> = a.iter().map(|x| (x, x)).collect();
        assert_eq!(partial_product(&a, &a, &diag).unwrap().ids(), vec![0, 2, 4]);
        let full: Vec<_> = a.iter().flat_map(|x| a.iter().map(move |y| (x, y))).collect();
        assert_eq!(partial_product(&a, &a, &full).unwrap(), product_set(&a, &a).unwrap());
        assert_eq!(partial_product(&a, &a, &[(1, 2)]).unwrap().ids(), vec![3]);
        assert!(partial_product(&a, &a, &[]).is_err());
        assert!(partial_product(&a, &a, &[(3, 0)]).is_err());
    }
}

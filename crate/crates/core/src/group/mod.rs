//! Concrete finite groups with dense element ids.
//!
//! Every group numbers its elements `0..order` with `0` the identity.
//! Numbering per family:
//!
//! * `cyclic(n)`: `k ↦ k`, the law is addition mod `n`.
//! * `product(G_1, ..., G_r)`: mixed radix, first factor least significant,
//!   `id = x_1 + |G_1|·(x_2 + |G_2|·(...))`.
//! * `dihedral(n)`: `r^a s^e ↦ a + n·e`, with `r^a s^e · r^b s^f = r^{a+(−1)^e b} s^{e+f}`.
//! * `symmetric(n)`: permutations of `0..n` in lexicographic order of their
//!   one-line notation; `(σ·τ)(i) = σ(τ(i))`.
//! * `sl2(p)`: the identity, then all other determinant-one matrices
//!   `(a, b; c, d)` in lexicographic order of `(a, b, c, d)`.
//! * `heisenberg(Z, W, {,})`: `(z, w) ↦ w_index + |W|·z_index`, where both
//!   indices are mixed radix with the first coordinate least significant.
//!   The additive group `Z × W` built by [`GroupSpec::additive_carrier`]
//!   uses the same ids, so the identification `ι` is the identity on ids.
//!
//! Groups up to order 4096 carry a full multiplication table; larger groups
//! multiply in coordinates.

mod families;
mod quotient;
pub mod spec;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use families::HeisenbergLaw;
pub use quotient::{quotient_map, subgroup_closure, NormalSubgroupView};
pub use spec::{GroupSpec, Pairing, PairingSpec};

use crate::error::{Error, Result};
use families::Law;

pub type Elem = u32;

pub const DEFAULT_ORDER_CAP: usize = 50_000;
pub const TABLE_LIMIT: usize = 4096;

struct Inner {
    label: String,
    spec: Option<GroupSpec>,
    order: usize,
    law: Law,
    table: Option<Vec<u16>>,
    inv: Vec<Elem>,
}

/// An immutable, cheaply clonable finite group.
#[derive(Clone)]
pub struct FiniteGroup(Arc<Inner>);

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.0.label, self.0.order)
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.order == other.0.order && self.0.label == other.0.label)
    }
}

impl Eq for FiniteGroup {}

/// Builds the group described by `spec` under the default order cap.
pub fn construct_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    FiniteGroup::with_cap(spec, DEFAULT_ORDER_CAP)
}

impl FiniteGroup {
    pub fn new(spec: &GroupSpec) -> Result<Self> {
        construct_group(spec)
    }

    pub fn parse(s: &str) -> Result<Self> {
        construct_group(&s.parse()?)
    }

    pub fn with_cap(spec: &GroupSpec, cap: usize) -> Result<Self> {
        let order = spec.order().ok_or(Error::OrderCap { order: u128::MAX, cap })?;
        if order > cap as u128 {
            return Err(Error::OrderCap { order, cap });
        }
        if order == 0 {
            return Err(Error::InvalidParameter(format!("{spec} has order zero")));
        }
        let law = Law::build(spec, cap)?;
        Ok(Self::from_law(spec.to_string(), Some(spec.clone()), order as usize, law))
    }

    fn from_law(label: String, spec: Option<GroupSpec>, order: usize, law: Law) -> Self {
        let table = (order <= TABLE_LIMIT).then(|| {
            let rows: Vec<Vec<u16>> = crate::par::map_range(order, |a| (0..order).map(|b| law.mul(a as Elem, b as Elem) as u16).collect());
            rows.concat()
        });
        let inv = crate::par::map_range(order, |a| law.inv(a as Elem));
        let g = FiniteGroup(Arc::new(Inner {
            label,
            spec,
            order,
            law,
            table,
            inv,
        }));
        debug_assert!(g.check_identity_and_inverses().is_ok(), "{:?}", g.check_identity_and_inverses());
        g
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.order
    }

    #[inline]
    pub fn identity(&self) -> Elem {
        0
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn spec(&self) -> Option<&GroupSpec> {
        self.0.spec.as_ref()
    }

    pub fn has_table(&self) -> bool {
        self.0.table.is_some()
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.table {
            Some(t) => t[a as usize * self.0.order + b as usize] as Elem,
            None => self.0.law.mul(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.0.inv[a as usize]
    }

    /// Row `a` of the multiplication table, when one is stored.
    #[inline]
    pub fn row(&self, a: Elem) -> Option<&[u16]> {
        let n = self.0.order;
        self.0.table.as_ref().map(|t| &t[a as usize * n..(a as usize + 1) * n])
    }

    pub fn conj(&self, g: Elem, h: Elem) -> Elem {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.0.order as Elem
    }

    pub fn check_id(&self, id: Elem) -> Result<()> {
        if (id as usize) < self.0.order {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange { id, order: self.0.order })
        }
    }

    /// Human-readable name of an element in family coordinates.
    pub fn elem_name(&self, id: Elem) -> String {
        self.0.law.name(id)
    }

    pub fn heisenberg(&self) -> Option<&HeisenbergLaw> {
        match &self.0.law {
            Law::Heisenberg(h) => Some(h),
            _ => None,
        }
    }

    /// For a quotient group: the parent, the projection and the coset representatives.
    pub fn quotient_parts(&self) -> Option<(&FiniteGroup, &[Elem], &[Elem])> {
        match &self.0.law {
            Law::Quotient { parent, proj, reps } => Some((parent, proj, reps)),
            _ => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.0.order as Elem;
        crate::par::find_first(n as usize, |a| (0..n).any(|b| self.mul(a as Elem, b) != self.mul(b, a as Elem))).is_none()
    }

    pub fn random_elem<R: Rng>(&self, rng: &mut R) -> Elem {
        rng.gen_range(0..self.0.order as Elem)
    }

    /// Identity and inverse laws for every element.
    pub fn check_identity_and_inverses(&self) -> std::result::Result<(), String> {
        for x in self.elements() {
            if self.mul(0, x) != x || self.mul(x, 0) != x {
                return Err(format!("0 is not an identity for {x}"));
            }
            let y = self.inv(x);
            if self.mul(x, y) != 0 || self.mul(y, x) != 0 || self.inv(y) != x {
                return Err(format!("inverse law fails at {x}"));
            }
        }
        Ok(())
    }

    /// Associativity: exhaustive for order ≤ 512, otherwise `samples` random
    /// triples drawn with the given seed.
    pub fn check_associativity(&self, samples: usize, seed: u64) -> std::result::Result<(), String> {
        let n = self.0.order;
        let check = |x: Elem, y: Elem, z: Elem| self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z));
        if n <= 512 {
            let bad = crate::par::find_first(n, |x| (0..n as Elem).any(|y| (0..n as Elem).any(|z| !check(x as Elem, y, z))));
            return match bad {
                None => Ok(()),
                Some(x) => Err(format!("associativity fails with x = {x}")),
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (x, y, z) = (self.random_elem(&mut rng), self.random_elem(&mut rng), self.random_elem(&mut rng));
            if !check(x, y, z) {
                return Err(format!("associativity fails at ({x}, {y}, {z})"));
            }
        }
        Ok(())
    }

    /// All group axioms (associativity sampled with 10⁵ triples above order 512).
    pub fn check_axioms(&self) -> std::result::Result<(), String> {
        self.check_identity_and_inverses()?;
        self.check_associativity(100_000, 0x5eed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FiniteGroup {
        FiniteGroup::parse(s).unwrap()
    }

    #[test]
    fn trivial_and_cyclic() {
        let c1 = g("cyclic(1)");
        assert_eq!(c1.order(), 1);
        assert_eq!(c1.mul(0, 0), 0);
        let c5 = g("cyclic(5)");
        assert_eq!(c5.mul(1, 1), 2);
        assert_eq!(c5.inv(2), 3);
    }

    #[test]
    fn family_orders() {
        assert_eq!(g("sl2(3)").order(), 24);
        assert_eq!(g("sl2(5)").order(), 120);
        assert_eq!(g("symmetric(4)").order(), 24);
        assert_eq!(g("dihedral(5)").order(), 10);
        assert_eq!(g("product(cyclic(2),cyclic(3))").order(), 6);
        assert_eq!(g("heisenberg(z=Z3^2;w=Z3)").order(), 27);
    }

    #[test]
    fn caps_and_errors() {
        assert!(matches!(FiniteGroup::parse("cyclic(60000)"), Err(Error::OrderCap { .. })));
        assert!(matches!(FiniteGroup::parse("sl2(4)"), Err(Error::InvalidParameter(_))));
        assert!(FiniteGroup::parse("sl2(17)").is_err());
        assert!(FiniteGroup::parse("symmetric(8)").is_err());
        assert!(matches!(
            FiniteGroup::parse("heisenberg(z=Z3^3;w=Z3)"),
            Err(Error::MalformedPairing(_))
        ));
    }

    #[test]
    fn axioms_hold_for_every_family() {
        for s in [
            "cyclic(12)",
            "product(cyclic(2),dihedral(3))",
            "dihedral(7)",
            "symmetric(4)",
            "sl2(3)",
            "sl2(5)",
            "heisenberg(z=Z3^2;w=Z3)",
            "heisenberg(z=Z5^2;w=Z5)",
        ] {
            let grp = g(s);
            grp.check_axioms().unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn large_groups_sampled() {
        for s in ["symmetric(7)", "product(cyclic(100),cyclic(100))", "heisenberg(z=Z7^4;w=Z7)"] {
            let grp = g(s);
            assert!(!grp.has_table());
            grp.check_identity_and_inverses().unwrap();
            grp.check_associativity(10_000, 1).unwrap();
        }
    }

    #[test]
    fn deterministic_numbering() {
        let a = g("symmetric(3)");
        let b = g("symmetric(3)");
        for x in a.elements() {
            for y in a.elements() {
                assert_eq!(a.mul(x, y), b.mul(x, y));
            }
        }
        assert_eq!(a.elem_name(0), "[0,1,2]");
        assert_eq!(a.elem_name(1), "[0,2,1]");
        let s = g("sl2(3)");
        assert_eq!(s.elem_name(0), "[[1,0],[0,1]]");
    }

    #[test]
    fn abelian_flags() {
        assert!(g("cyclic(9)").is_abelian());
        assert!(!g("symmetric(3)").is_abelian());
        assert!(!g("heisenberg(z=Z3^2;w=Z3)").is_abelian());
        assert!(g("heisenberg(z=Z3^2;w=Z3;pairing=zero)").is_abelian());
    }
}

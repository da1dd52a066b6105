use serde::Serialize;

use crate::group::Elem;
use crate::ledger::ConstantLedger;
use crate::rational::{int, Rational};
use crate::setcalc::{inverse_set, power, product_set, MSet};

/// The clauses of a `K`-approximate group `(H, X)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ApproxClause {
    /// `H⁻¹ = H`.
    HSymmetric,
    /// `X ⊆ H·H`.
    XInsideH2,
    /// `X⁻¹ = X`.
    XSymmetric,
    /// `|X| ≤ K`.
    XCardinality,
    /// `H·H ⊆ X·H`.
    Covering,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseFailure {
    pub clause: ApproxClause,
    /// An element witnessing the failure, when the clause is a containment.
    pub element: Option<Elem>,
}

/// Every violated clause, in definition order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxViolation {
    pub failures: Vec<ClauseFailure>,
}

impl ApproxViolation {
    pub fn has(&self, clause: ApproxClause) -> bool {
        self.failures.iter().any(|f| f.clause == clause)
    }

    pub fn first(&self) -> &ClauseFailure {
        &self.failures[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxGroupWitness {
    pub h: MSet,
    /// Sorted covering set.
    pub x: Vec<Elem>,
    pub k: Rational,
    /// `H·H ⊆ H·X`, which follows from the other clauses by inversion.
    pub right_covering: bool,
}

/// Checks the clauses of an approximate group exactly; on failure every
/// violated clause is reported with a counterexample element.
pub fn verify_approx_group(h: &MSet, x: &[Elem], k: &Rational) -> Result<ApproxGroupWitness, ApproxViolation> {
    let g = h.group();
    let mut failures = Vec::new();
    let mut fail = |clause, element| failures.push(ClauseFailure { clause, element });
    if let Some(e) = h.iter().find(|&e| !h.contains(g.inv(e))) {
        fail(ApproxClause::HSymmetric, Some(e));
    }
    let h2 = product_set(h, h).expect("same group");
    let mut xs: Vec<Elem> = x.iter().copied().filter(|&e| (e as usize) < g.order()).collect();
    xs.sort_unstable();
    xs.dedup();
    if let Some(&e) = x.iter().find(|&&e| (e as usize) >= g.order() || !h2.contains(e)) {
        fail(ApproxClause::XInsideH2, Some(e));
    }
    if let Some(&e) = xs.iter().find(|&&e| xs.binary_search(&g.inv(e)).is_err()) {
        fail(ApproxClause::XSymmetric, Some(e));
    }
    if int(xs.len()) > *k {
        fail(ApproxClause::XCardinality, None);
    }
    let mut right_covering = false;
    match MSet::new(g, xs.iter().copied()) {
        Err(_) => fail(ApproxClause::Covering, Some(h2.min())),
        Ok(xset) => {
            let xh = product_set(&xset, h).expect("same group");
            if let Some(e) = h2.bits().first_not_in(xh.bits()) {
                fail(ApproxClause::Covering, Some(e));
            }
            right_covering = h2.is_subset(&product_set(h, &xset).expect("same group"));
        }
    }
    if !failures.is_empty() {
        return Err(ApproxViolation { failures });
    }
    Ok(ApproxGroupWitness {
        h: h.clone(),
        x: xs,
        k: k.clone(),
        right_covering,
    })
}

impl ApproxGroupWitness {
    pub fn x_set(&self) -> MSet {
        MSet::new(self.h.group(), self.x.iter().copied()).expect("verified witness has nonempty X")
    }

    /// `Hⁿ ⊆ Xⁿ⁻¹·H` for `2 ≤ n ≤ n_max`.
    pub fn iterated_covering(&self, n_max: usize) -> bool {
        let x = self.x_set();
        let mut hn = self.h.clone();
        let mut xh = self.h.clone();
        for _ in 2..=n_max {
            hn = product_set(&hn, &self.h).expect("same group");
            xh = product_set(&x, &xh).expect("same group");
            if !hn.is_subset(&xh) {
                return false;
            }
        }
        true
    }

    /// For `A ⊆ H`: `|A³| ≤ |X|²·|H²| ≤ |X|³·|H|`.
    pub fn tripling_consequence(&self, a: &MSet) -> ConstantLedger {
        let mut l = ConstantLedger::new();
        let a3 = power(a, 3).expect("cap").len();
        let h2 = product_set(&self.h, &self.h).expect("same group").len();
        let x = self.x.len();
        l.hard("|A^3| <= |X|^2 |H^2|", int(a3), int(x * x * h2), "|X|^2*|H^2|");
        l.hard("|H^2| <= |X| |H|", int(h2), int(x * self.h.len()), "|X|*|H|");
        l
    }

    /// `H⁻¹ = H` in set form (for reports).
    pub fn h_is_symmetric(&self) -> bool {
        inverse_set(&self.h) == self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::rational::int;

    #[test]
    fn subgroup_is_one_approximate() {
        let g = FiniteGroup::parse("cyclic(12)").unwrap();
        let h = MSet::new(&g, [0, 4, 8]).unwrap();
        let w = verify_approx_group(&h, &[0], &int(1)).unwrap();
        assert!(w.right_covering);
        assert!(w.iterated_covering(4));
    }

    #[test]
    fn interval_three_approximate() {
        let g = FiniteGroup::parse("cyclic(100)").unwrap();
        let h = MSet::new(&g, [97, 98, 99, 0, 1, 2, 3]).unwrap();
        let w = verify_approx_group(&h, &[96, 0, 4], &int(3)).unwrap();
        assert!(w.iterated_covering(4));
        let v = verify_approx_group(&h, &[96, 0, 4], &int(2)).unwrap_err();
        assert_eq!(v.failures.len(), 1);
        assert_eq!(v.first().clause, ApproxClause::XCardinality);
        assert!(w.tripling_consequence(&h).passes());
    }

    #[test]
    fn non_closed_pair_fails_covering() {
        let g = FiniteGroup::parse("symmetric(3)").unwrap();
        // Two transpositions: symmetric, but their product is a 3-cycle outside H.
        let h = MSet::new(&g, [0, 1, 2]).unwrap();
        let v = verify_approx_group(&h, &[0], &int(1)).unwrap_err();
        assert_eq!(v.failures.len(), 1);
        assert_eq!(v.first().clause, ApproxClause::Covering);
        // A 3-cycle c has c² ∉ {1, c}.
        let c = 3;
        // The pair {1, c} itself: not symmetric, and H·H ⊄ X·H with c² the witness.
        let bare = MSet::new(&g, [0, c]).unwrap();
        let v = verify_approx_group(&bare, &[0], &int(1)).unwrap_err();
        assert!(v.has(ApproxClause::HSymmetric));
        let cover = v.failures.iter().find(|f| f.clause == ApproxClause::Covering).unwrap();
        assert_eq!(cover.element, Some(g.mul(c, c)));
    }
}

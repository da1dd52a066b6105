//! Sets of small tripling.
//!
//! Exponents: under `|A³| ≤ K|A|`, every pattern `w` of length `n` satisfies
//! `|A^w| ≤ K^{c(w)}|A|`. Lengths one and two and the eight length-three
//! patterns are handled directly (`+++`, `---`: 1; `++-`, `+--`, `-++`, `--+`:
//! 2; `+-+`, `-+-`: 3; `++`, `--`: 1; `+-`, `-+`: 2). For `n ≥ 4` write
//! `w = P·Q` with `2 ≤ |P| ≤ n−2` and apply the Ruzsa triangle inequality
//! through `A^y`:
//!
//! ```text
//! |A^P A^Q|·|A| ≤ |A^P A^{−y}|·|A^y A^Q|,   so   c(w) ≤ c(P,−y) + c(y,Q).
//! ```
//!
//! Taking the best split gives the table `c̄(n) = max_{|w|=n} c(w)`:
//! `0, 2, 3, 5, 7, 9, 11` for `n = 1..7` (that is, `2n − 3` for `n ≥ 3`).

use std::collections::HashMap;

use super::approx::{verify_approx_group, ApproxGroupWitness};
use super::cover::{ruzsa_cover, Side};
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::ledger::ConstantLedger;
use crate::rational::{display, int, pow, Rational};
use crate::setcalc::{inverse_set, pattern_string, power, product_set, MSet, Sign};

/// `c̄(n)`, indexed by pattern length `n` (entry 0 is the empty product `{1}`).
pub const TRIPLING_EXPONENTS: [u32; 8] = [0, 0, 2, 3, 5, 7, 9, 11];

fn base_exponent(w: &[Sign]) -> Option<u32> {
    use Sign::{Minus as M, Plus as P};
    Some(match w {
        [] | [_] => 0,
        [P, P] | [M, M] => 1,
        [P, M] | [M, P] => 2,
        [P, P, P] | [M, M, M] => 1,
        [P, P, M] | [P, M, M] | [M, P, P] | [M, M, P] => 2,
        [P, M, P] | [M, P, M] => 3,
        _ => return None,
    })
}

/// `c(w)` from the splitting recursion above.
pub fn pattern_exponent(w: &[Sign]) -> u32 {
    fn rec(w: &[Sign], memo: &mut HashMap<Vec<Sign>, u32>) -> u32 {
        if let Some(c) = base_exponent(w) {
            return c;
        }
        if let Some(&c) = memo.get(w) {
            return c;
        }
        let n = w.len();
        let mut best = u32::MAX;
        for p in 2..=n - 2 {
            for y in [Sign::Plus, Sign::Minus] {
                let mut left = w[..p].to_vec();
                left.push(y.flip());
                let mut right = vec![y];
                right.extend_from_slice(&w[p..]);
                best = best.min(rec(&left, memo) + rec(&right, memo));
            }
        }
        memo.insert(w.to_vec(), best);
        best
    }
    rec(w, &mut HashMap::new())
}

pub fn all_patterns(len: usize) -> Vec<Vec<Sign>> {
    (0..1u32 << len)
        .map(|mask| {
            (0..len)
                .map(|i| if mask >> (len - 1 - i) & 1 == 0 { Sign::Plus } else { Sign::Minus })
                .collect()
        })
        .collect()
}

/// `max_{|w|=n} c(w)` for `n = 0..=n_max`, recomputed from the recursion.
pub fn derive_max_exponents(n_max: usize) -> Vec<u32> {
    (0..=n_max)
        .map(|n| all_patterns(n).iter().map(|w| pattern_exponent(w)).max().unwrap_or(0))
        .collect()
}

/// `T(m) = Σ_{j=0}^{m} 2^j K^{c̄(j)}`, so that `|(A ∪ {1} ∪ A⁻¹)^m| ≤ T(m)|A|`
/// (each word over `{A, 1, A⁻¹}` collapses to a sign pattern of length ≤ m).
pub fn tripling_bound_sum(k: &Rational, m: usize) -> Rational {
    assert!(m < TRIPLING_EXPONENTS.len(), "exponent table covers m ≤ 7");
    (0..=m).fold(Rational::from_integer(0.into()), |acc, j| {
        acc + int(1u64 << j) * pow(k, TRIPLING_EXPONENTS[j])
    })
}

fn check_tripling(a: &MSet, k: &Rational) -> Result<usize> {
    let a3 = power(a, 3)?.len();
    if int(a3) > k * int(a.len()) {
        return Err(Error::hypothesis("|A^3| <= K|A|", a3, format!("{}*{}", display(k), a.len())));
    }
    Ok(a3)
}

/// Records `|A^w| ≤ K^{c̄(|w|)}|A|` for every sign pattern of length `1..=n`.
pub fn tripling_chain(a: &MSet, k: &Rational, n: usize) -> Result<ConstantLedger> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidParameter(format!("pattern length must be in 1..=6, got {n}")));
    }
    let a3 = check_tripling(a, k)?;
    let mut ledger = ConstantLedger::new();
    ledger.hard("|A^3| <= K|A|", int(a3), k * int(a.len()), "K*|A|");
    let inv = inverse_set(a);
    // Depth-first over patterns so each prefix product is computed once.
    let mut stack: Vec<(Vec<Sign>, MSet)> = vec![(vec![Sign::Minus], inv.clone()), (vec![Sign::Plus], a.clone())];
    let mut rows: Vec<(Vec<Sign>, usize)> = Vec::new();
    while let Some((w, set)) = stack.pop() {
        rows.push((w.clone(), set.len()));
        if w.len() < n {
            for s in [Sign::Minus, Sign::Plus] {
                let next = product_set(&set, if s == Sign::Plus { a } else { &inv })?;
                let mut w2 = w.clone();
                w2.push(s);
                stack.push((w2, next));
            }
        }
    }
    rows.sort_by(|x, y| {
        x.0.len()
            .cmp(&y.0.len())
            .then_with(|| pattern_string(&x.0).cmp(&pattern_string(&y.0)))
    });
    for (w, size) in rows {
        let c = TRIPLING_EXPONENTS[w.len()];
        ledger.hard(
            &format!("|A^[{}]| <= K^{c}|A|", pattern_string(&w)),
            int(size),
            pow(k, c) * int(a.len()),
            &format!("K^{c}*|A|"),
        );
    }
    Ok(ledger)
}

/// Output of [`approx_group_from_tripling`].
#[derive(Clone, Debug)]
pub struct TriplingApprox {
    /// `H = (A ∪ {1} ∪ A⁻¹)³` with its symmetric covering set `X = Y ∪ Y⁻¹`.
    pub witness: ApproxGroupWitness,
    pub h0: MSet,
    /// Greedy cover of `H²` by disjoint translates `y·H₀`.
    pub y: Vec<Elem>,
    pub ledger: ConstantLedger,
}

/// `H := (A ∪ {1} ∪ A⁻¹)³` and a covering set for it.
///
/// With `H₀ = A ∪ {1} ∪ A⁻¹`, the greedy right cover `Y ⊆ H²` has disjoint
/// translates `y·H₀` inside `H²·H₀ = H₀⁷`, so `|Y| ≤ |H₀⁷|/|H₀| ≤ T(7)`, and
/// `H² ⊆ Y·H₀·H₀⁻¹ ⊆ Y·H`. Then `X = Y ∪ Y⁻¹` satisfies every clause with
/// `K' = |X| ≤ 2T(7)`.
pub fn approx_group_from_tripling(a: &MSet, k: &Rational) -> Result<TriplingApprox> {
    let a3 = check_tripling(a, k)?;
    let g = a.group();
    let h0 = a.symmetrize();
    let h = power(&h0, 3)?;
    let h2 = product_set(&h, &h)?;
    let h7 = product_set(&h2, &h0)?;
    let y = ruzsa_cover(&h0, &h2, Side::Right)?;
    let mut x: Vec<Elem> = y.iter().flat_map(|&e| [e, g.inv(e)]).collect();
    x.sort_unstable();
    x.dedup();
    let kx = int(x.len());
    let witness = verify_approx_group(&h, &x, &kx).map_err(|v| Error::InvalidWitness(format!("tripling construction failed: {v:?}")))?;
    if !a.is_subset(&h) {
        return Err(Error::InvalidWitness("A is not contained in H".into()));
    }
    let t7 = tripling_bound_sum(k, 7);
    let mut ledger = ConstantLedger::new();
    ledger.hard("|A^3| <= K|A|", int(a3), k * int(a.len()), "K*|A|");
    ledger.hard("|Y||H0| <= |H0^7|", int(y.len() * h0.len()), int(h7.len()), "|H0^7|");
    ledger.hard(
        "|H0^7| <= T(7)|A|",
        int(h7.len()),
        &t7 * int(a.len()),
        "sum_{j<=7} 2^j K^cbar(j) * |A|",
    );
    ledger.hard("|X| <= 2 T(7)", kx.clone(), int(2) * &t7, "2*sum_{j<=7} 2^j K^cbar(j)");
    ledger.hard(
        "|H| <= T(3)|A|",
        int(h.len()),
        tripling_bound_sum(k, 3) * int(a.len()),
        "sum_{j<=3} 2^j K^cbar(j) * |A|",
    );
    ledger.soft("measured K' = |X|", kx, int(2) * t7, "2*T(7)");
    ledger.extend(witness.tripling_consequence(a));
    Ok(TriplingApprox { witness, h0, y, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::rational::ratio;

    #[test]
    fn exponent_table_matches_recursion() {
        assert_eq!(derive_max_exponents(7), TRIPLING_EXPONENTS.to_vec());
        for n in 3..=7 {
            assert_eq!(TRIPLING_EXPONENTS[n] as usize, 2 * n - 3);
        }
    }

    #[test]
    fn subgroup_gives_trivial_witness() {
        let g = FiniteGroup::parse("cyclic(12)").unwrap();
        let a = MSet::new(&g, [0, 3, 6, 9]).unwrap();
        let t = approx_group_from_tripling(&a, &int(1)).unwrap();
        assert_eq!(t.witness.h, a);
        assert_eq!(t.witness.x, vec![0]);
        assert!(t.ledger.passes());
    }

    #[test]
    fn interval_in_cyclic_100() {
        let g = FiniteGroup::parse("cyclic(100)").unwrap();
        let a = MSet::new(&g, [0, 1]).unwrap();
        let t = approx_group_from_tripling(&a, &int(2)).unwrap();
        assert_eq!(t.witness.h.ids(), vec![0, 1, 2, 3, 97, 98, 99]);
        assert_eq!(t.y, vec![0, 3, 6, 94, 97]);
        assert_eq!(t.witness.x, vec![0, 3, 6, 94, 97]);
        assert!(t.ledger.passes());
    }

    #[test]
    fn chain_on_interval() {
        let g = FiniteGroup::parse("cyclic(1000)").unwrap();
        let a = MSet::new(&g, 0..10).unwrap();
        let l = tripling_chain(&a, &ratio(14, 5), 4).unwrap();
        assert!(l.passes());
        assert_eq!(l.get("|A^[+++]| <= K^3|A|").unwrap().lhs, int(28));
        assert_eq!(l.rows.len(), 1 + 2 + 4 + 8 + 16);
        assert!(tripling_chain(&a, &ratio(27, 10), 4).is_err());
    }
}

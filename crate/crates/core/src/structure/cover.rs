use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::Elem;
use crate::setcalc::{inverse_set, product_set, same_group, MSet};

/// Which translates are kept disjoint.
///
/// `Left`: the sets `A·x` (hypothesis `|A·B| ≤ K|A|`), giving `B ⊆ A⁻¹·A·X`.
/// `Right`: the sets `x·A` (hypothesis `|B·A| ≤ K|A|`), giving `B ⊆ X·A·A⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Greedy maximal `X ⊆ B` with pairwise disjoint translates of `A`, scanning
/// `B` in ascending id order. Maximality gives the containment and
/// disjointness gives `|X|·|A| ≤ |A·B|` (resp. `|B·A|`).
pub fn ruzsa_cover(a: &MSet, b: &MSet, side: Side) -> Result<Vec<Elem>> {
    same_group(a, b)?;
    let g = a.group();
    let aa = a.ids();
    let mut covered = crate::Bitset::new(g.order());
    let mut xs = Vec::new();
    let translate = |y: Elem, s: Elem| match side {
        Side::Left => g.mul(s, y),
        Side::Right => g.mul(y, s),
    };
    for y in b.iter() {
        if aa.iter().all(|&s| !covered.contains(translate(y, s))) {
            for &s in &aa {
                covered.insert(translate(y, s));
            }
            xs.push(y);
        }
    }
    Ok(xs)
}

/// Checks `B ⊆ A⁻¹·A·X` (left) or `B ⊆ X·A·A⁻¹` (right).
pub fn cover_contains(a: &MSet, b: &MSet, x: &[Elem], side: Side) -> Result<bool> {
    same_group(a, b)?;
    let Ok(xs) = MSet::new(a.group(), x.iter().copied()) else {
        return Ok(false);
    };
    let ai = inverse_set(a);
    let big = match side {
        Side::Left => product_set(&product_set(&ai, a)?, &xs)?,
        Side::Right => product_set(&product_set(&xs, a)?, &ai)?,
    };
    Ok(b.is_subset(&big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    #[test]
    fn interval_example() {
        let g = FiniteGroup::parse("cyclic(12)").unwrap();
        let a = MSet::new(&g, 0..4).unwrap();
        let b = MSet::new(&g, 0..8).unwrap();
        let x = ruzsa_cover(&a, &b, Side::Left).unwrap();
        assert_eq!(x, vec![0, 4]);
        assert!(x.len() * a.len() <= product_set(&a, &b).unwrap().len());
        assert!(cover_contains(&a, &b, &x, Side::Left).unwrap());
    }

    #[test]
    fn subgroup_and_coset() {
        let g = FiniteGroup::parse("symmetric(3)").unwrap();
        let h = MSet::new(&g, [0, 1]).unwrap();
        assert_eq!(ruzsa_cover(&h, &h, Side::Left).unwrap(), vec![0]);
        let coset = h.right_translate(3);
        let x = ruzsa_cover(&h, &coset, Side::Left).unwrap();
        assert_eq!(x.len(), 1);
        assert!(cover_contains(&h, &coset, &x, Side::Left).unwrap());
        let lcoset = h.left_translate(3);
        let xr = ruzsa_cover(&h, &lcoset, Side::Right).unwrap();
        assert_eq!(xr.len(), 1);
        assert!(cover_contains(&h, &lcoset, &xr, Side::Right).unwrap());
    }
}

use std::collections::HashSet;

use super::metric::{MetricCloud, TOL};
use super::net::{check_scale, within};
use crate::error::{Error, Result};

/// Default cap on the number of candidate quadruples `(|A||B|)²`.
pub const ENERGY_QUADRUPLE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxEnergy {
    /// `|Q_ε(A, B)|`.
    pub quadruples: usize,
    /// `E_ε(A, B) = 𝒩_ε(Q_ε(A, B))` under the sum metric on `G⁴`.
    pub value: u64,
}

pub fn approx_energy(a: &MetricCloud, b: &MetricCloud, eps: f64) -> Result<ApproxEnergy> {
    approx_energy_capped(a, b, eps, ENERGY_QUADRUPLE_CAP)
}

/// `Q_ε(A, B) = {(a, b, a', b') : d(ab, a'b') ≤ ε}` enumerated in
/// lexicographic index order, then covered greedily by open `ε`-balls of
/// `d_{G⁴}(x, y) = Σ d(x_i, y_i)` centred in `Q_ε`.
pub fn approx_energy_capped(a: &MetricCloud, b: &MetricCloud, eps: f64, cap: u128) -> Result<ApproxEnergy> {
    check_scale(eps)?;
    let g = a.group();
    if g.label() != b.group().label() {
        return Err(Error::GroupMismatch {
            left: g.label(),
            right: b.group().label(),
        });
    }
    let (na, nb) = (a.len(), b.len());
    let pairs = na * nb;
    let count = (pairs as u128).pow(2);
    if count > cap {
        return Err(Error::EnergyCap { count, cap });
    }
    let (pa, pb) = (a.points(), b.points());
    let da: Vec<Vec<f64>> = crate::par::map_range(na, |i| pa.iter().map(|q| g.distance(&pa[i], q)).collect());
    let db: Vec<Vec<f64>> = crate::par::map_range(nb, |i| pb.iter().map(|q| g.distance(&pb[i], q)).collect());
    let products: Vec<_> = (0..pairs).map(|u| g.mul(&pa[u / nb], &pb[u % nb])).collect();
    let q: Vec<(u32, u32)> = crate::par::map_range(pairs, |u| {
        (0..pairs)
            .filter(|&v| g.distance(&products[u], &products[v]) <= eps + TOL)
            .map(|v| (u as u32, v as u32))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let split = |(u, v): (u32, u32)| {
        let (u, v) = (u as usize, v as usize);
        [u / nb, u % nb, v / nb, v % nb]
    };
    let near = |d: &[Vec<f64>]| -> Vec<Vec<(usize, f64)>> {
        d.iter()
            .map(|row| row.iter().copied().enumerate().filter(|&(_, x)| within(x, eps)).collect())
            .collect()
    };
    let (na_near, nb_near) = (near(&da), near(&db));
    let dist = |x: [usize; 4], y: [usize; 4]| da[x[0]][y[0]] + db[x[1]][y[1]] + da[x[2]][y[2]] + db[x[3]][y[3]];

    let mut centers: Vec<[usize; 4]> = Vec::new();
    let mut center_set: HashSet<[usize; 4]> = HashSet::new();
    for &quad in &q {
        let x = split(quad);
        let lists = [&na_near[x[0]], &nb_near[x[1]], &na_near[x[2]], &nb_near[x[3]]];
        let enum_cost: u128 = lists.iter().map(|l| l.len() as u128).product();
        let covered = if enum_cost <= centers.len() as u128 {
            any_center_near(&lists, &center_set, eps)
        } else {
            centers.iter().any(|&c| within(dist(x, c), eps))
        };
        if !covered {
            centers.push(x);
            center_set.insert(x);
        }
    }
    Ok(ApproxEnergy {
        quadruples: q.len(),
        value: centers.len() as u64,
    })
}

/// Enumerates index tuples coordinatewise within `ε`, pruning on the partial
/// sum of distances, and looks each up among the centers.
fn any_center_near(lists: &[&Vec<(usize, f64)>; 4], centers: &HashSet<[usize; 4]>, eps: f64) -> bool {
    fn rec(lists: &[&Vec<(usize, f64)>; 4], centers: &HashSet<[usize; 4]>, eps: f64, k: usize, acc: f64, cur: &mut [usize; 4]) -> bool {
        if k == 4 {
            return centers.contains(cur);
        }
        for &(i, d) in lists[k].iter() {
            if within(acc + d, eps) {
                cur[k] = i;
                if rec(lists, centers, eps, k + 1, acc + d, cur) {
                    return true;
                }
            }
        }
        false
    }
    rec(lists, centers, eps, 0, 0.0, &mut [0; 4])
}

#[cfg(test)]
mod tests {
    use super::super::metric::{MetricGroup, Point, Region, WordMetric};
    use super::*;
    use crate::group::FiniteGroup;
    use crate::setcalc::{energy, MSet};

    #[test]
    fn identity_point() {
        let g = MetricGroup::UnitQuaternions;
        let a = MetricCloud::singleton(&g, g.identity()).unwrap();
        for eps in [1e-6, 0.3, 5.0] {
            assert_eq!(approx_energy(&a, &a, eps).unwrap().value, 1);
        }
    }

    #[test]
    fn embedded_cyclic_5() {
        let cg = FiniteGroup::parse("cyclic(5)").unwrap();
        let w = WordMetric::new(&cg, &[1]).unwrap();
        let s = MSet::new(&cg, [0, 1, 2]).unwrap();
        let a = MetricCloud::from_set(&w, &s).unwrap();
        let e = approx_energy(&a, &a, 0.5).unwrap();
        assert_eq!(e.value, 19);
        assert_eq!(e.value as u128, energy(&s, &s).unwrap().value());

        let t = MetricGroup::torus(1).unwrap();
        let a = MetricCloud::new(&t, [0.0, 0.2, 0.4].map(|x| Point::torus(&[x])), Region::Whole).unwrap();
        assert_eq!(approx_energy(&a, &a, 0.1).unwrap().value, 19);
    }

    #[test]
    fn huge_scale_collapses() {
        let t = MetricGroup::torus(2).unwrap();
        let a = MetricCloud::random_in_region(&t, Region::Whole, 6, 3).unwrap();
        let b = MetricCloud::random_in_region(&t, Region::Whole, 5, 4).unwrap();
        let diam = a.diameter().max(b.diameter()).max(1.0);
        let e = approx_energy(&a, &b, 4.0 * diam + 0.1).unwrap();
        assert_eq!(e.value, 1);
        assert_eq!(e.quadruples, 900);
    }

    #[test]
    fn cap_is_enforced() {
        let a = MetricCloud::torus_grid(1, 40, Region::Whole).unwrap();
        let b = MetricCloud::torus_grid(1, 30, Region::Whole).unwrap();
        assert!(matches!(
            approx_energy(&a, &b, 0.01),
            Err(Error::EnergyCap { count: 1_440_000, .. })
        ));
    }

    #[test]
    fn enumeration_and_scan_agree() {
        // Mid-range scales exercise both lookup strategies.
        let t = MetricGroup::torus(1).unwrap();
        let a = MetricCloud::torus_grid(1, 12, Region::Whole).unwrap();
        for eps in [0.05, 0.1, 0.2, 0.4] {
            let e = approx_energy(&a, &a, eps).unwrap();
            let pts = a.points();
            let n = pts.len();
            let quads: Vec<[usize; 4]> = (0..n * n * n * n)
                .map(|i| [i / (n * n * n), i / (n * n) % n, i / n % n, i % n])
                .filter(|x| {
                    let l = t.mul(&pts[x[0]], &pts[x[1]]);
                    let r = t.mul(&pts[x[2]], &pts[x[3]]);
                    t.distance(&l, &r) <= eps + TOL
                })
                .collect();
            let mut centers: Vec<[usize; 4]> = Vec::new();
            for x in &quads {
                let close = centers.iter().any(|c| {
                    let d: f64 = (0..4).map(|k| t.distance(&pts[x[k]], &pts[c[k]])).sum();
                    within(d, eps)
                });
                if !close {
                    centers.push(*x);
                }
            }
            assert_eq!(e.quadruples, quads.len());
            assert_eq!(e.value, centers.len() as u64, "eps = {eps}");
        }
    }
}

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::metric::{MetricCloud, MetricGroup, Point, Region};
use super::net::{check_scale, covering_number, within, NetIndex};
use crate::error::{Error, Result};
use crate::ledger::{format_float, RowClass};
use crate::structure::TRIPLING_EXPONENTS;

/// A measured float quantity against an optional upper bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub class: RowClass,
}

impl MetricRow {
    pub fn holds(&self) -> bool {
        self.bound.is_none_or(|b| self.value <= b)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    value: String,
    bound: String,
    class: RowClass,
    holds: bool,
}

impl MetricReport {
    fn push(&mut self, class: RowClass, name: String, value: f64, bound: Option<f64>) {
        self.rows.push(MetricRow { name, value, bound, class });
    }

    pub fn hard(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(RowClass::Hard, name.into(), value, Some(bound));
    }

    pub fn soft(&mut self, name: impl Into<String>, value: f64, bound: Option<f64>) {
        self.push(RowClass::Soft, name.into(), value, bound);
    }

    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.class == RowClass::Soft || r.holds())
    }

    pub fn failures(&self) -> impl Iterator<Item = &MetricRow> {
        self.rows.iter().filter(|r| r.class == RowClass::Hard && !r.holds())
    }

    pub fn get(&self, name: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// CSV with columns `name, value, bound, class, holds`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wr.write_record(["name", "value", "bound", "class", "holds"])?;
        }
        for r in &self.rows {
            wr.serialize(CsvRow {
                name: &r.name,
                value: format_float(r.value),
                bound: r.bound.map(format_float).unwrap_or_default(),
                class: r.class,
                holds: r.holds(),
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory CSV write");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions {
    /// Monte-Carlo samples for ball volumes.
    pub samples: usize,
    /// Monte-Carlo samples for `μ(X·B(1, ε))`.
    pub measure_samples: usize,
    /// Random triples and pairs for the metric axioms and Lipschitz ratios.
    pub axiom_samples: usize,
    pub seed: u64,
    /// Relative tolerance attached to every Monte-Carlo assertion.
    pub tolerance: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            measure_samples: 200_000,
            axiom_samples: 2_000,
            seed: 0x5eed,
            tolerance: 0.05,
        }
    }
}

const MC_CHUNKS: usize = 64;

/// Fraction of `samples` Haar-random points satisfying each predicate. The
/// stream is split into fixed chunks with their own ChaCha streams, so the
/// counts do not depend on the thread count.
fn monte_carlo<const N: usize, F>(g: &MetricGroup, samples: usize, seed: u64, pred: F) -> [f64; N]
where
    F: Fn(&Point) -> [bool; N] + Send + Sync,
{
    let per = samples.div_ceil(MC_CHUNKS);
    let counts = crate::par::map_range(MC_CHUNKS, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let n = per.min(samples.saturating_sub(c * per));
        let mut acc = [0usize; N];
        for _ in 0..n {
            let p = g.random_point(&mut rng);
            for (a, hit) in acc.iter_mut().zip(pred(&p)) {
                *a += hit as usize;
            }
        }
        acc
    });
    let mut total = [0usize; N];
    for c in counts {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    total.map(|t| t as f64 / samples as f64)
}

/// Exact `μ(X·B(1, ε))` on `T¹`: the union of the arcs `(x − ε, x + ε)`.
fn circle_union_measure(x: &MetricCloud, eps: f64) -> f64 {
    let mut xs: Vec<f64> = x.points().iter().map(|p| p.0[0]).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    (0..n)
        .map(|i| {
            let gap = if i + 1 < n { xs[i + 1] - xs[i] } else { xs[0] + 1.0 - xs[n - 1] };
            gap.min(2.0 * eps)
        })
        .sum::<f64>()
        .min(1.0)
}

/// `μ(X·B(1, ε))` and whether the value is exact.
fn thickened_measure(x: &MetricCloud, eps: f64, opts: &ProfileOptions) -> (f64, bool) {
    let g = x.group();
    match g {
        MetricGroup::Torus { dim: 1 } => (circle_union_measure(x, eps), true),
        MetricGroup::Word(w) => {
            let mut idx = NetIndex::new(g, eps);
            for p in x.points() {
                idx.insert(*p);
            }
            let n = w.group().order();
            let hit = (0..n as u32).filter(|&e| idx.any_within(&Point::elem(e))).count();
            (hit as f64 / n as f64, true)
        }
        _ => {
            let mut idx = NetIndex::new(g, eps);
            for p in x.points() {
                idx.insert(*p);
            }
            let [m] = monte_carlo(g, opts.measure_samples, opts.seed ^ 0x7e1c, |p| [idx.any_within(p)]);
            (m, false)
        }
    }
}

fn sample_axioms(g: &MetricGroup, opts: &ProfileOptions, report: &mut MetricReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut violation: f64 = 0.0;
    let (mut left, mut right): (f64, f64) = (0.0, 0.0);
    for _ in 0..opts.axiom_samples {
        let [x, y, z, h] = std::array::from_fn(|_| g.random_point(&mut rng));
        let dxy = g.distance(&x, &y);
        violation = violation
            .max(g.distance(&x, &x))
            .max((dxy - g.distance(&y, &x)).abs())
            .max(g.distance(&x, &z) - dxy - g.distance(&y, &z));
        if dxy > 1e-9 {
            left = left.max(g.distance(&g.mul(&h, &x), &g.mul(&h, &y)) / dxy);
            right = right.max(g.distance(&g.mul(&x, &h), &g.mul(&y, &h)) / dxy);
        }
    }
    let prof = g.profile();
    report.hard("metric axioms: max violation", violation, 1e-12);
    report.hard("left Lipschitz ratio d(gx,gy)/d(x,y)", left, prof.left_lipschitz * (1.0 + 1e-9));
    report.hard("right Lipschitz ratio d(xg,yg)/d(x,y)", right, prof.right_lipschitz * (1.0 + 1e-9));
}

fn sample_doubling(g: &MetricGroup, grid: &[f64], opts: &ProfileOptions, report: &mut MetricReport) {
    let prof = g.profile();
    let radii: Vec<f64> = grid.iter().copied().filter(|&r| r <= prof.max_radius).collect();
    match g {
        MetricGroup::UnitQuaternions => {
            let id = g.identity();
            for &r in &radii {
                let [small, large] = monte_carlo(g, opts.samples, opts.seed, |p| {
                    let d = g.distance(&id, p);
                    [within(d, r), within(d, 2.0 * r)]
                });
                let mc = large / small;
                let exact = g.ball_measure(2.0 * r).unwrap() / g.ball_measure(r).unwrap();
                report.soft(
                    format!("doubling mu(B(2r))/mu(B(r)) at r={} (Monte-Carlo)", format_float(r)),
                    mc,
                    Some(prof.doubling * (1.0 + opts.tolerance)),
                );
                report.soft(
                    format!("doubling relative error vs closed form at r={}", format_float(r)),
                    ((mc - exact) / exact).abs(),
                    Some(opts.tolerance),
                );
            }
        }
        _ => {
            for &r in &radii {
                let ratio = g.ball_measure(2.0 * r).unwrap() / g.ball_measure(r).unwrap();
                report.hard(
                    format!("doubling mu(B(2r))/mu(B(r)) at r={}", format_float(r)),
                    ratio,
                    prof.doubling * (1.0 + 1e-12),
                );
            }
        }
    }
}

/// Samples the metric axioms, Lipschitz ratios and ball doubling of the
/// group of `x`, then measures `𝒩_ε(X)/𝒩_{2ε}(X)` and the comparison of
/// `𝒩_ε(X)` with `μ(X·B(1, ε))/μ(B(1, ε))` on every scale of the grid.
///
/// Bounds. The greedy net `S` is maximal `ε`-separated, so the balls
/// `B(s, ε/2)` are disjoint and lie in `X·B(1, ε)`, while the balls
/// `B(s, 2ε)` cover it: `|S|μ(B_{ε/2}) ≤ μ(X·B_ε) ≤ |S|μ(B_{2ε})`. Inside
/// one `2ε`-ball at most `μ(B_{5ε/2})/μ(B_{ε/2})` points are `ε`-separated,
/// so `𝒩_ε ≤ 𝒩_{2ε}·μ(B_{5ε/2})/μ(B_{ε/2})`. On `T^d` this is `5^d`.
pub fn metric_profile_check(x: &MetricCloud, grid: &[f64], opts: &ProfileOptions) -> Result<MetricReport> {
    for &e in grid {
        check_scale(e)?;
    }
    let g = x.group();
    let mut report = MetricReport::default();
    sample_axioms(g, opts, &mut report);
    sample_doubling(g, grid, opts, &mut report);

    let mut eps: Vec<f64> = grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let counts = crate::par::map(&eps, |&e| -> Result<(usize, usize)> {
        Ok((covering_number(x, e)?.count(), covering_number(x, 2.0 * e)?.count()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for (&e, &(n, n2)) in eps.iter().zip(&counts) {
        let tag = format_float(e);
        report.hard(format!("N_2eps <= N_eps at eps={tag}"), n2 as f64, n as f64);
        let packing = match (g.ball_measure(2.5 * e), g.ball_measure(0.5 * e)) {
            (Some(big), Some(small)) if small > 0.0 => Some(big / small),
            _ => None,
        };
        let ratio = n as f64 / n2 as f64;
        match packing {
            Some(p) => report.hard(format!("N_eps/N_2eps at eps={tag}"), ratio, p * (1.0 + 1e-12)),
            None => report.soft(format!("N_eps/N_2eps at eps={tag}"), ratio, None),
        }

        let (Some(v_half), Some(v_double)) = (g.ball_measure(0.5 * e), g.ball_measure(2.0 * e)) else {
            continue;
        };
        let (m, exact) = thickened_measure(x, e, opts);
        let slack = if exact { 1e-12 } else { opts.tolerance };
        let lower = format!("N_eps mu(B(eps/2)) <= mu(X B(eps)) at eps={tag}");
        let upper = format!("mu(X B(eps)) <= N_eps mu(B(2eps)) at eps={tag}");
        let (lv, lb) = (n as f64 * v_half, m * (1.0 + slack));
        let (uv, ub) = (m, n as f64 * v_double * (1.0 + slack));
        if exact {
            report.hard(lower, lv, lb);
            report.hard(upper, uv, ub);
        } else {
            report.soft(lower, lv, Some(lb));
            report.soft(upper, uv, Some(ub));
        }
        if let Some(v) = g.ball_measure(e) {
            report.soft(format!("N_eps / (mu(X B(eps))/mu(B(eps))) at eps={tag}"), n as f64 * v / m, None);
        }
    }
    Ok(report)
}

/// Default cap on every thinned product cloud.
pub const PRODUCT_CLOUD_CAP: usize = 100_000;

/// Greedy `r`-net of `{x·y : x ∈ X, y ∈ Y}` scanned in `(x, y)` order.
fn thinned_product(g: &MetricGroup, xs: &[Point], ys: &[Point], r: f64, cap: usize) -> Result<Vec<Point>> {
    let mut idx = NetIndex::new(g, r);
    for x in xs {
        for y in ys {
            if idx.offer(g.mul(x, y)) && idx.len() > cap {
                return Err(Error::CloudCap { count: idx.len(), cap });
            }
        }
    }
    Ok(idx.into_points())
}

fn thin(g: &MetricGroup, pts: impl IntoIterator<Item = Point>, r: f64) -> Vec<Point> {
    let mut idx = NetIndex::new(g, r);
    for p in pts {
        idx.offer(p);
    }
    idx.into_points()
}

fn cloud(g: &MetricGroup, pts: Vec<Point>) -> Result<MetricCloud> {
    MetricCloud::new(g, pts, Region::Whole)
}

#[derive(Clone, Debug)]
pub struct EntropyTripling {
    pub eps: f64,
    pub n_a: usize,
    pub n_a3: usize,
    /// `𝒩_ε(A³)/𝒩_ε(A)`.
    pub k: f64,
    /// Thinned `(A ∪ {1} ∪ A⁻¹)³`.
    pub h: MetricCloud,
    pub n_h: usize,
    /// Symmetric covering set with `H² ⊆ X·H` up to `ε`.
    pub x: Vec<Point>,
    pub report: MetricReport,
}

/// `T(m) = Σ_{j ≤ m} 2^j K^{c̄(j)}` in floating point.
fn tripling_sum(k: f64, m: usize) -> f64 {
    (0..=m).map(|j| (1u64 << j) as f64 * k.powi(TRIPLING_EXPONENTS[j] as i32)).sum()
}

pub fn entropy_tripling_check(a: &MetricCloud, eps: f64) -> Result<EntropyTripling> {
    entropy_tripling_check_capped(a, eps, PRODUCT_CLOUD_CAP)
}

/// Measures `𝒩_ε(A³)` on thinned pointwise products and builds the
/// approximate-group candidate `H = (A ∪ {1} ∪ A⁻¹)³` (every product thinned
/// to an `ε/2`-net) with a greedy covering set `X ⊆ H²` such that every point
/// of `H²` is within `ε` of `X·H`.
pub fn entropy_tripling_check_capped(a: &MetricCloud, eps: f64, cap: usize) -> Result<EntropyTripling> {
    check_scale(eps)?;
    let g = a.group();
    let r = eps / 2.0;
    if a.len() > cap {
        return Err(Error::CloudCap { count: a.len(), cap });
    }
    let n_a = covering_number(a, eps)?.count();
    let t = thin(g, a.points().iter().copied(), r);
    let a2 = thinned_product(g, &t, &t, r, cap)?;
    let a3 = thinned_product(g, &a2, &t, r, cap)?;
    let n_a3 = covering_number(&cloud(g, a3)?, eps)?.count();
    let k = n_a3 as f64 / n_a as f64;

    let sym = thin(
        g,
        std::iter::once(g.identity()).chain(a.points().iter().flat_map(|p| [*p, g.inv(p)])),
        r,
    );
    let s2 = thinned_product(g, &sym, &sym, r, cap)?;
    let h_pts = thinned_product(g, &s2, &sym, r, cap)?;
    let h = cloud(g, h_pts)?;
    let n_h = covering_number(&h, eps)?.count();
    // H² = S⁶, built one factor of S at a time and thinned at scale ε: the
    // covering set only has to reach each point of H² within ε.
    let mut h2 = h.points().to_vec();
    for _ in 0..3 {
        h2 = thinned_product(g, &h2, &sym, eps, cap)?;
    }

    let mut xh = NetIndex::new(g, eps);
    let mut x: Vec<Point> = Vec::new();
    for p in &h2 {
        if !xh.any_within(p) {
            x.push(*p);
            if x.len() * h.len() > cap.saturating_mul(100) {
                return Err(Error::CloudCap {
                    count: x.len() * h.len(),
                    cap: cap.saturating_mul(100),
                });
            }
            for q in h.points() {
                xh.insert(g.mul(p, q));
            }
        }
    }
    let mut x_sym: Vec<Point> = x.iter().flat_map(|p| [*p, g.inv(p)]).collect();
    x_sym.sort_by(Point::total_cmp);
    x_sym.dedup();

    // Independent check of both containments with fresh indices.
    let mut h_idx = NetIndex::new(g, eps);
    for p in h.points() {
        h_idx.insert(*p);
    }
    let a_outside = a.points().iter().filter(|p| !h_idx.any_within(p)).count();
    let mut cover_idx = NetIndex::new(g, eps);
    for p in &x_sym {
        for q in h.points() {
            cover_idx.insert(g.mul(p, q));
        }
    }
    let h2_outside = h2.iter().filter(|p| !cover_idx.any_within(p)).count();

    let mut report = MetricReport::default();
    report.soft("N_eps(A)", n_a as f64, None);
    report.soft("N_eps(A^3)", n_a3 as f64, None);
    report.soft("measured K = N_eps(A^3)/N_eps(A)", k, None);
    report.hard("points of A not within eps of H", a_outside as f64, 0.0);
    report.hard("points of H^2 not within eps of X H", h2_outside as f64, 0.0);
    report.soft("N_eps(H)/N_eps(A) <= T(3)", n_h as f64 / n_a as f64, Some(tripling_sum(k, 3)));
    report.soft("|X| <= 2 T(7)", x_sym.len() as f64, Some(2.0 * tripling_sum(k, 7)));
    if k > 1.0 + 1e-9 {
        report.soft("log N_eps(H)/N_eps(A) / log K", (n_h as f64 / n_a as f64).ln() / k.ln(), None);
        report.soft("log |X| / log K", (x_sym.len() as f64).ln() / k.ln(), None);
    }
    Ok(EntropyTripling {
        eps,
        n_a,
        n_a3,
        k,
        h,
        n_h,
        x: x_sym,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    fn small_opts() -> ProfileOptions {
        ProfileOptions {
            samples: 200_000,
            measure_samples: 20_000,
            axiom_samples: 500,
            ..ProfileOptions::default()
        }
    }

    #[test]
    fn circle_doubling_is_exact() {
        let x = MetricCloud::torus_grid(1, 200, Region::Whole).unwrap();
        let r = metric_profile_check(&x, &[0.1, 0.05, 0.02], &small_opts()).unwrap();
        assert!(r.passes(), "{:?}", r.failures().collect::<Vec<_>>());
        for tag in ["1.00000000000e-1", "5.00000000000e-2"] {
            assert_eq!(r.get(&format!("doubling mu(B(2r))/mu(B(r)) at r={tag}")).unwrap().value, 2.0);
        }
        assert!(r.get("N_eps mu(B(eps/2)) <= mu(X B(eps)) at eps=5.00000000000e-2").unwrap().class == RowClass::Hard);
    }

    #[test]
    fn disk_in_two_torus() {
        let region = Region::Ball {
            center: Point::torus(&[0.5, 0.5]),
            radius: 0.2,
        };
        let x = MetricCloud::torus_grid(2, 100, region).unwrap();
        let r = metric_profile_check(&x, &[0.1, 0.05, 0.025], &small_opts()).unwrap();
        assert!(r.passes(), "{:?}", r.failures().collect::<Vec<_>>());
        for e in ["1.00000000000e-1", "5.00000000000e-2", "2.50000000000e-2"] {
            let row = r.get(&format!("N_eps/N_2eps at eps={e}")).unwrap();
            assert_eq!(row.class, RowClass::Hard);
            assert!(row.value <= 25.0);
        }
    }

    #[test]
    fn quaternion_doubling_monte_carlo() {
        let g = MetricGroup::UnitQuaternions;
        let x = MetricCloud::random_in_region(&g, Region::Whole, 300, 5).unwrap();
        let opts = ProfileOptions {
            measure_samples: 20_000,
            axiom_samples: 500,
            ..ProfileOptions::default()
        };
        let r = metric_profile_check(&x, &[0.4, 0.25], &opts).unwrap();
        assert!(r.passes(), "{:?}", r.failures().collect::<Vec<_>>());
        let mc = r.get("doubling mu(B(2r))/mu(B(r)) at r=2.50000000000e-1 (Monte-Carlo)").unwrap();
        assert!((mc.value - 8.0).abs() <= 0.4, "{}", mc.value);
        let err = r.get("doubling relative error vs closed form at r=2.50000000000e-1").unwrap();
        assert!(err.holds());
    }

    #[test]
    fn word_metric_profile() {
        let cg = FiniteGroup::parse("cyclic(30)").unwrap();
        let g = MetricGroup::word(&cg, &[1]).unwrap();
        let x = MetricCloud::new(&g, (0..30).step_by(2).map(Point::elem), Region::Whole).unwrap();
        let r = metric_profile_check(&x, &[1.0, 2.0, 3.0], &small_opts()).unwrap();
        assert!(r.passes(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn singleton_tripling() {
        let g = MetricGroup::torus(2).unwrap();
        let a = MetricCloud::singleton(&g, Point::torus(&[0.3, 0.7])).unwrap();
        let t = entropy_tripling_check(&a, 0.05).unwrap();
        assert_eq!((t.n_a, t.n_a3, t.k), (1, 1, 1.0));
        assert!(t.report.passes());
    }

    #[test]
    fn circle_subgroup_has_tripling_one() {
        let g = MetricGroup::torus(2).unwrap();
        let a = MetricCloud::new(&g, (0..40).map(|i| Point::torus(&[i as f64 / 40.0, 0.0])), Region::Whole).unwrap();
        let t = entropy_tripling_check(&a, 0.05).unwrap();
        assert!(t.report.passes());
        assert!((t.k - 1.0).abs() <= 0.1, "K = {}", t.k);
        assert!(t.n_h as f64 / t.n_a as f64 <= 1.1);
        assert!(t.h.points().iter().all(|p| p.0[1] == 0.0));
    }

    #[test]
    fn quaternion_ball_triples_like_volume() {
        // A³ fills the ball of radius 3ρ, whose volume is about 3³ times larger.
        let g = MetricGroup::UnitQuaternions;
        let region = Region::Ball {
            center: g.identity(),
            radius: 0.1,
        };
        let a = MetricCloud::random_in_region(&g, region, 2000, 17).unwrap();
        let t = entropy_tripling_check(&a, 0.05).unwrap();
        assert!(t.report.passes(), "{:?}", t.report.failures().collect::<Vec<_>>());
        let volume = g.ball_measure(0.3).unwrap() / g.ball_measure(0.1).unwrap();
        assert!(t.k > volume / 3.0 && t.k < volume * 3.0, "K = {}, volume ratio = {volume}", t.k);
    }

    #[test]
    fn monte_carlo_is_thread_independent() {
        let g = MetricGroup::UnitQuaternions;
        let id = g.identity();
        let f = |p: &Point| [g.distance(&id, p) < 0.5];
        let a = monte_carlo(&g, 10_000, 9, f);
        let b = monte_carlo(&g, 10_000, 9, f);
        assert_eq!(a, b);
    }
}

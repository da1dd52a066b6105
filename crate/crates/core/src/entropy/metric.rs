use std::cmp::Ordering;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::setcalc::MSet;

/// Slack used by every distance comparison in this module.
pub const TOL: f64 = 1e-12;

/// A point of a metric group. Torus points use the first `d` coordinates in
/// `[0, 1)`; unit quaternions use all four as `(w, x, y, z)`; word-metric
/// points store the element id in coordinate 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point(pub [f64; 4]);

impl Point {
    pub fn torus(coords: &[f64]) -> Point {
        let mut c = [0.0; 4];
        for (dst, &x) in c.iter_mut().zip(coords) {
            *dst = wrap_unit(x);
        }
        Point(c)
    }

    pub fn quaternion(w: f64, x: f64, y: f64, z: f64) -> Point {
        Point([w, x, y, z])
    }

    pub fn elem(id: Elem) -> Point {
        Point([id as f64, 0.0, 0.0, 0.0])
    }

    pub fn as_elem(&self) -> Elem {
        self.0[0] as Elem
    }

    /// Lexicographic total order on coordinates.
    pub fn total_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 || r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Word metric `d(x, y) = |x⁻¹y|` over a generating set of a finite group.
#[derive(Clone, Debug)]
pub struct WordMetric {
    group: FiniteGroup,
    gens: Vec<Elem>,
    lengths: Arc<Vec<u32>>,
}

impl WordMetric {
    /// Breadth-first word lengths over `gens ∪ gens⁻¹`.
    pub fn new(group: &FiniteGroup, gens: &[Elem]) -> Result<Self> {
        let n = group.order();
        for &g in gens {
            group.check_id(g)?;
        }
        let mut steps: Vec<Elem> = gens.iter().flat_map(|&g| [g, group.inv(g)]).collect();
        steps.sort_unstable();
        steps.dedup();
        let mut lengths = vec![u32::MAX; n];
        lengths[0] = 0;
        let mut queue = VecDeque::from([0 as Elem]);
        while let Some(x) = queue.pop_front() {
            for &s in &steps {
                let y = group.mul(x, s);
                if lengths[y as usize] == u32::MAX {
                    lengths[y as usize] = lengths[x as usize] + 1;
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = lengths.iter().position(|&l| l == u32::MAX) {
            return Err(Error::InvalidParameter(format!(
                "generators {gens:?} do not reach element {missing} of {}",
                group.label()
            )));
        }
        Ok(Self {
            group: group.clone(),
            gens: gens.to_vec(),
            lengths: Arc::new(lengths),
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn generators(&self) -> &[Elem] {
        &self.gens
    }

    pub fn length(&self, x: Elem) -> u32 {
        self.lengths[x as usize]
    }

    pub fn diameter(&self) -> u32 {
        self.lengths.iter().copied().max().unwrap_or(0)
    }

    /// `|{x : |x| ≤ k}|` for `k = 0..=diameter`.
    pub fn cumulative_ball_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.diameter() as usize + 1];
        for &l in self.lengths.iter() {
            counts[l as usize] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        counts
    }

    /// Elements of the open ball `{x : |x| < r}`.
    pub fn ball(&self, r: f64) -> Vec<Elem> {
        (0..self.lengths.len() as Elem)
            .filter(|&x| (self.lengths[x as usize] as f64) < r - TOL)
            .collect()
    }
}

/// Profile constants of a locally reasonable metric group on the radii
/// `0 < r ≤ max_radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricProfile {
    /// Bound on `d(g·x, g·y)/d(x, y)`.
    pub left_lipschitz: f64,
    /// Bound on `d(x·g, y·g)/d(x, y)`.
    pub right_lipschitz: f64,
    /// Bound on `μ(B(1, 2r))/μ(B(1, r))`.
    pub doubling: f64,
    pub max_radius: f64,
}

#[derive(Clone, Debug)]
pub enum MetricGroup {
    /// `T^d = R^d/Z^d` with the quotient Euclidean metric, `1 ≤ d ≤ 3`.
    Torus {
        dim: usize,
    },
    /// Unit quaternions (`SU(2)`) with the chordal metric of `R⁴`.
    UnitQuaternions,
    Word(WordMetric),
}

impl MetricGroup {
    pub fn torus(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("torus dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(MetricGroup::Torus { dim })
    }

    pub fn word(group: &FiniteGroup, gens: &[Elem]) -> Result<Self> {
        Ok(MetricGroup::Word(WordMetric::new(group, gens)?))
    }

    pub fn label(&self) -> String {
        match self {
            MetricGroup::Torus { dim } => format!("torus({dim})"),
            MetricGroup::UnitQuaternions => "quaternions".into(),
            MetricGroup::Word(w) => format!("word({}; {:?})", w.group.label(), w.gens),
        }
    }

    /// Topological dimension; zero for finite groups.
    pub fn dimension(&self) -> usize {
        match self {
            MetricGroup::Torus { dim } => *dim,
            MetricGroup::UnitQuaternions => 3,
            MetricGroup::Word(_) => 0,
        }
    }

    pub fn identity(&self) -> Point {
        match self {
            MetricGroup::UnitQuaternions => Point([1.0, 0.0, 0.0, 0.0]),
            _ => Point([0.0; 4]),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self {
            MetricGroup::Torus { dim } => p.0[..*dim]
                .iter()
                .zip(&q.0[..*dim])
                .map(|(a, b)| {
                    let t = (a - b).abs().rem_euclid(1.0);
                    let t = t.min(1.0 - t);
                    t * t
                })
                .sum::<f64>()
                .sqrt(),
            MetricGroup::UnitQuaternions => p.0.iter().zip(&q.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            MetricGroup::Word(w) => {
                let g = &w.group;
                w.length(g.mul(g.inv(p.as_elem()), q.as_elem())) as f64
            }
        }
    }

    pub fn mul(&self, p: &Point, q: &Point) -> Point {
        match self {
            MetricGroup::Torus { dim } => {
                let mut c = [0.0; 4];
                for i in 0..*dim {
                    c[i] = wrap_unit(p.0[i] + q.0[i]);
                }
                Point(c)
            }
            MetricGroup::UnitQuaternions => {
                let [a1, b1, c1, d1] = p.0;
                let [a2, b2, c2, d2] = q.0;
                normalized([
                    a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                    a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                    a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                    a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
                ])
            }
            MetricGroup::Word(w) => Point::elem(w.group.mul(p.as_elem(), q.as_elem())),
        }
    }

    pub fn inv(&self, p: &Point) -> Point {
        match self {
            MetricGroup::Torus { dim } => {
                let mut c = [0.0; 4];
                for i in 0..*dim {
                    c[i] = wrap_unit(-p.0[i]);
                }
                Point(c)
            }
            MetricGroup::UnitQuaternions => Point([p.0[0], -p.0[1], -p.0[2], -p.0[3]]),
            MetricGroup::Word(w) => Point::elem(w.group.inv(p.as_elem())),
        }
    }

    /// Brings a point to canonical form, rejecting points outside the group.
    pub fn canonical(&self, p: &Point) -> Result<Point> {
        let bad = |why: &str| Error::InvalidParameter(format!("point {:?} is not in {}: {why}", p.0, self.label()));
        if p.0.iter().any(|x| !x.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        match self {
            MetricGroup::Torus { dim } => Ok(Point::torus(&p.0[..*dim])),
            MetricGroup::UnitQuaternions => {
                let norm = p.0.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(bad("norm differs from 1"));
                }
                Ok(normalized(p.0))
            }
            MetricGroup::Word(w) => {
                let x = p.0[0];
                if x.fract() != 0.0 || x < 0.0 || x >= w.group.order() as f64 || p.0[1..].iter().any(|&c| c != 0.0) {
                    return Err(bad("not an element id"));
                }
                Ok(Point::elem(x as Elem))
            }
        }
    }

    /// Uniform sample from the Haar probability measure.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            MetricGroup::Torus { dim } => {
                let mut c = [0.0; 4];
                for x in c.iter_mut().take(*dim) {
                    *x = rng.gen::<f64>();
                }
                Point(c)
            }
            MetricGroup::UnitQuaternions => loop {
                let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let n2: f64 = v.iter().map(|x| x * x).sum();
                if n2 <= 1.0 && n2 > 1e-6 {
                    break normalized(v);
                }
            },
            MetricGroup::Word(w) => Point::elem(w.group.random_elem(rng)),
        }
    }

    /// Haar probability of the open ball `B(1, r)`, when a closed form is
    /// known: tori for `r ≤ 1/2`, quaternions for every `r`, finite groups
    /// by counting.
    pub fn ball_measure(&self, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return Some(0.0);
        }
        match self {
            MetricGroup::Torus { dim } => {
                if r > 0.5 {
                    return None;
                }
                Some(match dim {
                    1 => 2.0 * r,
                    2 => PI * r * r,
                    _ => 4.0 / 3.0 * PI * r * r * r,
                })
            }
            MetricGroup::UnitQuaternions => {
                // Chord r subtends the angle θ = 2 asin(r/2); on S³ the cap of
                // angular radius θ has normalised volume (2θ − sin 2θ)/2π.
                let theta = 2.0 * (r.min(2.0) / 2.0).asin();
                Some((2.0 * theta - (2.0 * theta).sin()) / (2.0 * PI))
            }
            MetricGroup::Word(w) => Some(w.ball(r).len() as f64 / w.group.order() as f64),
        }
    }

    pub fn profile(&self) -> MetricProfile {
        match self {
            MetricGroup::Torus { dim } => MetricProfile {
                left_lipschitz: 1.0,
                right_lipschitz: 1.0,
                doubling: (1u32 << dim) as f64,
                max_radius: 0.25,
            },
            MetricGroup::UnitQuaternions => MetricProfile {
                left_lipschitz: 1.0,
                right_lipschitz: 1.0,
                doubling: 8.0,
                max_radius: 0.5,
            },
            MetricGroup::Word(w) => {
                // Open balls on integer lengths: for r in (k, k+1] the ratio
                // is |B≤2k+1| / |B≤k| at worst.
                let cum = w.cumulative_ball_sizes();
                let top = cum.len() - 1;
                let doubling = (0..=top)
                    .map(|k| cum[(2 * k + 1).min(top)] as f64 / cum[k] as f64)
                    .fold(1.0, f64::max);
                MetricProfile {
                    left_lipschitz: 1.0,
                    right_lipschitz: w.conjugation_stretch(),
                    doubling,
                    max_radius: w.diameter().max(1) as f64,
                }
            }
        }
    }
}

impl WordMetric {
    /// `max |g⁻¹hg|/|h|`: exact up to order 4096, otherwise the diameter.
    fn conjugation_stretch(&self) -> f64 {
        let g = &self.group;
        let n = g.order();
        if n > 4096 {
            return self.diameter().max(1) as f64;
        }
        let rows = crate::par::map_range(n, |x| {
            let x = x as Elem;
            let xi = g.inv(x);
            (1..n as Elem)
                .map(|h| self.length(g.mul(g.mul(xi, h), x)) as f64 / self.length(h) as f64)
                .fold(1.0, f64::max)
        });
        rows.into_iter().fold(1.0, f64::max)
    }
}

fn normalized(v: [f64; 4]) -> Point {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut c = v.map(|x| x / n);
    for x in c.iter_mut() {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    Point(c)
}

/// The compact region a cloud is confined to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Whole,
    /// Closed ball `{p : d(center, p) ≤ radius}`.
    Ball {
        center: Point,
        radius: f64,
    },
}

impl Region {
    pub fn contains(&self, g: &MetricGroup, p: &Point) -> bool {
        match self {
            Region::Whole => true,
            Region::Ball { center, radius } => g.distance(center, p) <= radius + TOL,
        }
    }
}

/// A finite point set in a metric group, sorted and deduplicated.
#[derive(Clone, Debug)]
pub struct MetricCloud {
    group: MetricGroup,
    points: Vec<Point>,
    region: Region,
}

impl MetricCloud {
    pub fn new(group: &MetricGroup, points: impl IntoIterator<Item = Point>, region: Region) -> Result<Self> {
        let mut pts = points.into_iter().map(|p| group.canonical(&p)).collect::<Result<Vec<_>>>()?;
        if pts.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(p) = pts.iter().find(|p| !region.contains(group, p)) {
            return Err(Error::InvalidParameter(format!("point {:?} lies outside the declared region", p.0)));
        }
        pts.sort_by(Point::total_cmp);
        pts.dedup();
        Ok(Self {
            group: group.clone(),
            points: pts,
            region,
        })
    }

    pub fn singleton(group: &MetricGroup, p: Point) -> Result<Self> {
        Self::new(group, [p], Region::Whole)
    }

    /// Embeds a finite set under a word metric.
    pub fn from_set(metric: &WordMetric, set: &MSet) -> Result<Self> {
        if set.group() != metric.group() {
            return Err(Error::GroupMismatch {
                left: set.group().label().to_string(),
                right: metric.group().label().to_string(),
            });
        }
        Self::new(&MetricGroup::Word(metric.clone()), set.iter().map(Point::elem), Region::Whole)
    }

    /// Points of the grid `(1/m)Z^d / Z^d` lying in `region`.
    pub fn torus_grid(dim: usize, m: usize, region: Region) -> Result<Self> {
        let g = MetricGroup::torus(dim)?;
        if m == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        let total = m.checked_pow(dim as u32).filter(|&t| t <= 10_000_000).ok_or(Error::CloudCap {
            count: usize::MAX,
            cap: 10_000_000,
        })?;
        let pts = (0..total).map(|mut i| {
            let mut c = [0.0; 4];
            for x in c.iter_mut().take(dim) {
                *x = (i % m) as f64 / m as f64;
                i /= m;
            }
            Point(c)
        });
        Self::new(&g, pts.filter(|p| region.contains(&g, p)).collect::<Vec<_>>(), region)
    }

    /// `count` Haar-random points of `region`, by rejection with a fixed seed.
    pub fn random_in_region(group: &MetricGroup, region: Region, count: usize, seed: u64) -> Result<Self> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::with_capacity(count);
        let mut tries = 0usize;
        while pts.len() < count {
            tries += 1;
            if tries > count.saturating_mul(1_000_000).max(1_000_000) {
                return Err(Error::InvalidParameter("region too small for rejection sampling".into()));
            }
            let p = group.random_point(&mut rng);
            if region.contains(group, &p) {
                pts.push(p);
            }
        }
        Self::new(group, pts, region)
    }

    pub fn group(&self) -> &MetricGroup {
        &self.group
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let pts = &self.points;
        crate::par::map_range(pts.len(), |i| {
            pts[i + 1..].iter().map(|q| self.group.distance(&pts[i], q)).fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_wraps_and_measures() {
        let g = MetricGroup::torus(1).unwrap();
        let d = g.distance(&Point::torus(&[0.05]), &Point::torus(&[0.95]));
        assert!((d - 0.1).abs() < 1e-12);
        assert_eq!(g.mul(&Point::torus(&[0.7]), &Point::torus(&[0.3])), Point::torus(&[0.0]));
        assert_eq!(g.ball_measure(0.1), Some(0.2));
        assert!(MetricGroup::torus(4).is_err());
    }

    #[test]
    fn quaternion_product_is_hamilton() {
        let g = MetricGroup::UnitQuaternions;
        let i = Point::quaternion(0.0, 1.0, 0.0, 0.0);
        let j = Point::quaternion(0.0, 0.0, 1.0, 0.0);
        let k = g.mul(&i, &j);
        assert_eq!(k, Point::quaternion(0.0, 0.0, 0.0, 1.0));
        assert_eq!(g.mul(&i, &g.inv(&i)), g.identity());
        assert!((g.ball_measure(2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quaternion_doubling_below_eight() {
        let g = MetricGroup::UnitQuaternions;
        for i in 1..=50 {
            let r = i as f64 / 100.0;
            let ratio = g.ball_measure(2.0 * r).unwrap() / g.ball_measure(r).unwrap();
            assert!(ratio <= 8.0 && ratio > 7.0, "r = {r}: {ratio}");
        }
    }

    #[test]
    fn word_metric_on_cyclic() {
        let cg = FiniteGroup::parse("cyclic(10)").unwrap();
        let w = WordMetric::new(&cg, &[1]).unwrap();
        assert_eq!(w.diameter(), 5);
        assert_eq!(w.ball(2.0), vec![0, 1, 9]);
        let g = MetricGroup::Word(w);
        assert_eq!(g.distance(&Point::elem(2), &Point::elem(9)), 3.0);
        let p = g.profile();
        assert_eq!(p.right_lipschitz, 1.0);
        assert_eq!(p.doubling, 3.0);
        assert!(WordMetric::new(&cg, &[2]).is_err());
    }

    #[test]
    fn cloud_is_canonical() {
        let g = MetricGroup::torus(1).unwrap();
        let c = MetricCloud::new(
            &g,
            [Point::torus(&[0.5]), Point::torus(&[1.0]), Point::torus(&[0.0])],
            Region::Whole,
        )
        .unwrap();
        assert_eq!(c.points(), &[Point::torus(&[0.0]), Point::torus(&[0.5])]);
        let region = Region::Ball {
            center: Point::torus(&[0.0]),
            radius: 0.1,
        };
        assert!(MetricCloud::new(&g, [Point::torus(&[0.5])], region).is_err());
        assert_eq!(MetricCloud::torus_grid(2, 10, Region::Whole).unwrap().len(), 100);
    }
}

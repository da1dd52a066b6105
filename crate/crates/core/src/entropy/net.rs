use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use super::metric::{MetricCloud, MetricGroup, Point, TOL};
use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::ledger::format_float;

pub(crate) fn check_scale(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(eps))
    }
}

/// `d < ε`, the open-ball membership test.
pub fn within(d: f64, eps: f64) -> bool {
    d < eps - TOL
}

enum Backend {
    /// Cells of width at least `ε`; a point's neighbours lie in adjacent cells.
    Grid {
        n: i64,
        wrap: bool,
        lo: f64,
        span: f64,
        cells: HashMap<[i64; 4], Vec<usize>>,
    },
    /// Elements within `ε` of some inserted point.
    Marks {
        ball: Vec<Elem>,
        near: Bitset,
    },
    Linear,
}

/// Incremental index answering "is `p` within `ε` of an inserted point?".
pub struct NetIndex<'a> {
    group: &'a MetricGroup,
    eps: f64,
    dim: usize,
    points: Vec<Point>,
    backend: Backend,
}

impl<'a> NetIndex<'a> {
    pub fn new(group: &'a MetricGroup, eps: f64) -> Self {
        let (dim, backend) = match group {
            MetricGroup::Torus { dim } => (*dim, grid(1.0 / eps, true, 0.0, 1.0)),
            MetricGroup::UnitQuaternions => (4, grid(2.0 / eps, false, -1.0, 2.0)),
            MetricGroup::Word(w) => (
                0,
                Backend::Marks {
                    ball: w.ball(eps),
                    near: Bitset::new(w.group().order()),
                },
            ),
        };
        Self {
            group,
            eps,
            dim,
            points: Vec::new(),
            backend,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    fn cell(&self, p: &Point) -> [i64; 4] {
        let mut c = [0i64; 4];
        if let Backend::Grid { n, lo, span, .. } = &self.backend {
            for i in 0..self.dim {
                c[i] = (((p.0[i] - lo) / span * *n as f64).floor() as i64).clamp(0, n - 1);
            }
        }
        c
    }

    pub fn insert(&mut self, p: Point) {
        let idx = self.points.len();
        let cell = self.cell(&p);
        match &mut self.backend {
            Backend::Grid { cells, .. } => cells.entry(cell).or_default().push(idx),
            Backend::Marks { ball, near } => {
                let MetricGroup::Word(w) = self.group else { unreachable!() };
                let x = p.as_elem();
                for &b in ball.iter() {
                    near.insert(w.group().mul(x, b));
                }
            }
            Backend::Linear => {}
        }
        self.points.push(p);
    }

    pub fn any_within(&self, p: &Point) -> bool {
        let close = |q: &Point| within(self.group.distance(p, q), self.eps);
        match &self.backend {
            Backend::Linear => self.points.iter().any(close),
            Backend::Marks { near, .. } => near.contains(p.as_elem()),
            Backend::Grid { n, wrap, cells, .. } => {
                let base = self.cell(p);
                let offsets = 3usize.pow(self.dim as u32);
                (0..offsets).any(|mut o| {
                    let mut c = [0i64; 4];
                    for i in 0..self.dim {
                        let v = base[i] + (o % 3) as i64 - 1;
                        o /= 3;
                        c[i] = if *wrap {
                            v.rem_euclid(*n)
                        } else if (0..*n).contains(&v) {
                            v
                        } else {
                            return false;
                        };
                    }
                    cells.get(&c).is_some_and(|ids| ids.iter().any(|&j| close(&self.points[j])))
                })
            }
        }
    }

    /// Inserts `p` unless it is within `ε` of an existing point.
    pub fn offer(&mut self, p: Point) -> bool {
        if self.any_within(&p) {
            false
        } else {
            self.insert(p);
            true
        }
    }
}

fn grid(cells_per_span: f64, wrap: bool, lo: f64, span: f64) -> Backend {
    let n = cells_per_span.floor().min((1 << 20) as f64) as i64;
    if n < 3 {
        Backend::Linear
    } else {
        Backend::Grid {
            n,
            wrap,
            lo,
            span,
            cells: HashMap::new(),
        }
    }
}

/// Greedy `ε`-net with centers in `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub eps: f64,
    pub centers: Vec<Point>,
}

impl Cover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// Scans `X` in order and makes every point not yet within `ε` of a center a
/// new center. The result covers `X` by open `ε`-balls centred in `X`.
pub fn covering_number(x: &MetricCloud, eps: f64) -> Result<Cover> {
    check_scale(eps)?;
    let mut idx = NetIndex::new(x.group(), eps);
    for p in x.points() {
        idx.offer(*p);
    }
    Ok(Cover {
        eps,
        centers: idx.into_points(),
    })
}

/// Greedy maximal `ε`-separated subset (pairwise `d ≥ ε`), input order.
pub fn separated_set(x: &MetricCloud, eps: f64) -> Result<Vec<Point>> {
    check_scale(eps)?;
    let g = x.group();
    let mut chosen: Vec<Point> = Vec::new();
    let mut idx = NetIndex::new(g, eps);
    for p in x.points() {
        if !idx.any_within(p) {
            chosen.push(*p);
            idx.insert(*p);
        }
    }
    Ok(chosen)
}

/// Every point of `X` is within `ε` of some center.
pub fn cover_is_sound(x: &MetricCloud, cover: &Cover) -> bool {
    let mut idx = NetIndex::new(x.group(), cover.eps);
    for c in &cover.centers {
        idx.insert(*c);
    }
    x.points().iter().all(|p| idx.any_within(p))
}

/// Pairwise `d ≥ ε` and no further point of `X` can be added.
pub fn is_maximal_separated(x: &MetricCloud, s: &[Point], eps: f64) -> bool {
    let g = x.group();
    let separated = s
        .iter()
        .enumerate()
        .all(|(i, p)| s[i + 1..].iter().all(|q| !within(g.distance(p, q), eps)));
    separated && x.points().iter().all(|p| s.iter().any(|q| within(g.distance(p, q), eps)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyRow {
    pub eps: f64,
    pub n_eps: usize,
    pub separated: usize,
    pub n_half: usize,
    pub n_double: usize,
}

impl EntropyRow {
    /// `𝒩_ε / 𝒩_{2ε}`.
    pub fn ratio(&self) -> f64 {
        self.n_eps as f64 / self.n_double as f64
    }

    /// `𝒩_ε ≤ |S_ε| ≤ 𝒩_{ε/2}`.
    pub fn sandwich_holds(&self) -> bool {
        self.n_eps <= self.separated && self.separated <= self.n_half
    }
}

/// Covering numbers of one cloud over an increasing grid of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub cloud_len: usize,
    pub rows: Vec<EntropyRow>,
}

#[derive(Serialize)]
struct CsvRow {
    eps: String,
    #[serde(rename = "N_eps")]
    n_eps: usize,
    separated: usize,
    ratio: String,
}

impl EntropyReport {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].n_eps <= w[0].n_eps)
    }

    pub fn sandwich(&self) -> bool {
        self.rows.iter().all(EntropyRow::sandwich_holds)
    }

    /// CSV with columns `eps, N_eps, separated, ratio`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wr.write_record(["eps", "N_eps", "separated", "ratio"])?;
        }
        for r in &self.rows {
            wr.serialize(CsvRow {
                eps: format_float(r.eps),
                n_eps: r.n_eps,
                separated: r.separated,
                ratio: format_float(r.ratio()),
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

/// Computes `𝒩_ε`, `|S_ε|`, `𝒩_{ε/2}` and `𝒩_{2ε}` for every `ε` of the grid
/// (sorted ascending, duplicates removed). Scales run concurrently.
pub fn entropy_report(x: &MetricCloud, grid: &[f64]) -> Result<EntropyReport> {
    for &e in grid {
        check_scale(e)?;
    }
    let mut eps: Vec<f64> = grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let rows = crate::par::map(&eps, |&e| -> Result<EntropyRow> {
        Ok(EntropyRow {
            eps: e,
            n_eps: covering_number(x, e)?.count(),
            separated: separated_set(x, e)?.len(),
            n_half: covering_number(x, e / 2.0)?.count(),
            n_double: covering_number(x, 2.0 * e)?.count(),
        })
    });
    Ok(EntropyReport {
        cloud_len: x.len(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::metric::Region;
    use super::*;
    use crate::group::FiniteGroup;

    fn t1(xs: &[f64]) -> MetricCloud {
        let g = MetricGroup::torus(1).unwrap();
        MetricCloud::new(&g, xs.iter().map(|&x| Point::torus(&[x])), Region::Whole).unwrap()
    }

    #[test]
    fn small_clouds() {
        assert_eq!(covering_number(&t1(&[0.3]), 0.001).unwrap().count(), 1);
        assert_eq!(covering_number(&t1(&[0.0, 0.5]), 0.3).unwrap().count(), 2);
        assert_eq!(covering_number(&t1(&[0.0, 0.5]), 0.6).unwrap().count(), 1);
        assert!(matches!(covering_number(&t1(&[0.0]), 0.0), Err(Error::NonPositiveScale(_))));
        assert!(separated_set(&t1(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn unit_grid_counts() {
        let grid = MetricCloud::torus_grid(1, 100, Region::Whole).unwrap();
        // Centers 0, 0.05, ..., 0.95: the open ball of radius 0.05 around a
        // center reaches four grid steps on each side.
        let c = covering_number(&grid, 0.05).unwrap();
        assert_eq!(c.count(), 20);
        assert!(cover_is_sound(&grid, &c));
        let s = separated_set(&grid, 0.1).unwrap();
        assert_eq!(s.len(), 10);
        assert!(is_maximal_separated(&grid, &s, 0.1));
    }

    #[test]
    fn large_scale_gives_one_point() {
        let g = MetricGroup::UnitQuaternions;
        let x = MetricCloud::random_in_region(&g, Region::Whole, 200, 7).unwrap();
        assert_eq!(separated_set(&x, 2.5).unwrap().len(), 1);
        assert_eq!(covering_number(&x, 2.5).unwrap().count(), 1);
    }

    #[test]
    fn grid_index_agrees_with_linear_scan() {
        for g in [MetricGroup::torus(2).unwrap(), MetricGroup::UnitQuaternions] {
            let x = MetricCloud::random_in_region(&g, Region::Whole, 400, 11).unwrap();
            for eps in [0.05, 0.2, 0.7] {
                let c = covering_number(&x, eps).unwrap();
                let mut naive: Vec<Point> = Vec::new();
                for p in x.points() {
                    if !naive.iter().any(|q| within(g.distance(p, q), eps)) {
                        naive.push(*p);
                    }
                }
                assert_eq!(c.centers, naive);
            }
        }
    }

    #[test]
    fn word_metric_nets() {
        let cg = FiniteGroup::parse("cyclic(12)").unwrap();
        let g = MetricGroup::word(&cg, &[1]).unwrap();
        let x = MetricCloud::new(&g, (0..12).map(Point::elem), Region::Whole).unwrap();
        assert_eq!(covering_number(&x, 1.5).unwrap().count(), 6);
        assert_eq!(covering_number(&x, 0.5).unwrap().count(), 12);
    }

    #[test]
    fn report_csv_and_invariants() {
        let grid = MetricCloud::torus_grid(1, 100, Region::Whole).unwrap();
        let r = entropy_report(&grid, &[0.1, 0.05, 0.025]).unwrap();
        assert!(r.monotone() && r.sandwich());
        assert_eq!(r.rows[0].eps, 0.025);
        let csv = r.to_csv_string();
        assert!(csv.starts_with("eps,N_eps,separated,ratio\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}

//! Set families and the deterministic set generator.
//!
//! Grammar: `name(key=value,...)`, element lists joined by `+`:
//!
//! * `subgroup(gens=1+6)`
//! * `coset(x=3,gens=4[,side=left|right])`
//! * `geometric_progression(base=1,len=5)`
//! * `subgroup_plus_point(gens=1[,x=3])`
//! * `union_of_cosets(gens=5,count=3[,side=left|right])`
//! * `random_dense(density=0.1[,seed=7])`
//! * `ball(gens=1+9,radius=2)`, also spelled `ball_in_word_metric`

use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use approx_groups::entropy::WordMetric;
use approx_groups::group::subgroup_closure;
use approx_groups::{Bitset, Elem, FiniteGroup, MSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetSide {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetFamilySpec {
    Subgroup { gens: Vec<Elem> },
    Coset { x: Elem, gens: Vec<Elem>, side: CosetSide },
    GeometricProgression { base: Elem, len: usize },
    SubgroupPlusPoint { gens: Vec<Elem>, x: Option<Elem> },
    UnionOfCosets { gens: Vec<Elem>, count: usize, side: CosetSide },
    RandomDense { density: f64, seed: Option<u64> },
    Ball { gens: Vec<Elem>, radius: u32 },
}

fn elems(s: &str) -> Result<Vec<Elem>> {
    s.split('+')
        .map(|t| t.trim().parse::<Elem>().with_context(|| format!("bad element id `{t}`")))
        .collect()
}

fn side(s: &str) -> Result<CosetSide> {
    match s {
        "left" => Ok(CosetSide::Left),
        "right" => Ok(CosetSide::Right),
        _ => bail!("side must be left or right, got `{s}`"),
    }
}

fn join(v: &[Elem]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("+")
}

fn side_name(s: CosetSide) -> &'static str {
    match s {
        CosetSide::Left => "left",
        CosetSide::Right => "right",
    }
}

struct Args<'a> {
    family: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Args<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn req(&self, key: &str) -> Result<&'a str> {
        self.get(key).ok_or_else(|| anyhow!("{} requires `{key}=`", self.family))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.contains(k) {
                bail!("{} does not take `{k}`", self.family);
            }
        }
        Ok(())
    }
}

impl SetFamilySpec {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let (name, rest) = t
            .split_once('(')
            .ok_or_else(|| anyhow!("family `{t}` must look like name(key=value,...)"))?;
        let body = rest.strip_suffix(')').ok_or_else(|| anyhow!("family `{t}` is missing `)`"))?;
        let name = name.trim();
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("argument `{item}` of `{t}` must be key=value"))?;
            pairs.push((k.trim(), v.trim()));
        }
        let a = Args { family: name, pairs };
        let spec = match name {
            "subgroup" => {
                a.check_keys(&["gens"])?;
                SetFamilySpec::Subgroup {
                    gens: elems(a.req("gens")?)?,
                }
            }
            "coset" => {
                a.check_keys(&["x", "gens", "side"])?;
                SetFamilySpec::Coset {
                    x: a.req("x")?.parse().context("bad x")?,
                    gens: elems(a.req("gens")?)?,
                    side: a.get("side").map(side).transpose()?.unwrap_or(CosetSide::Left),
                }
            }
            "geometric_progression" => {
                a.check_keys(&["base", "len"])?;
                let len: usize = a.req("len")?.parse().context("bad len")?;
                if len == 0 {
                    bail!("geometric_progression needs len >= 1");
                }
                SetFamilySpec::GeometricProgression {
                    base: a.req("base")?.parse().context("bad base")?,
                    len,
                }
            }
            "subgroup_plus_point" => {
                a.check_keys(&["gens", "x"])?;
                SetFamilySpec::SubgroupPlusPoint {
                    gens: elems(a.req("gens")?)?,
                    x: a.get("x").map(|v| v.parse().context("bad x")).transpose()?,
                }
            }
            "union_of_cosets" => {
                a.check_keys(&["gens", "count", "side"])?;
                let count: usize = a.req("count")?.parse().context("bad count")?;
                if count == 0 {
                    bail!("union_of_cosets needs count >= 1");
                }
                SetFamilySpec::UnionOfCosets {
                    gens: elems(a.req("gens")?)?,
                    count,
                    side: a.get("side").map(side).transpose()?.unwrap_or(CosetSide::Left),
                }
            }
            "random_dense" => {
                a.check_keys(&["density", "seed"])?;
                let density: f64 = a.req("density")?.parse().context("bad density")?;
                if !(density > 0.0 && density <= 1.0) {
                    bail!("density must lie in (0,1], got {density}");
                }
                SetFamilySpec::RandomDense {
                    density,
                    seed: a.get("seed").map(|v| v.parse().context("bad seed")).transpose()?,
                }
            }
            "ball" | "ball_in_word_metric" => {
                a.check_keys(&["gens", "radius"])?;
                SetFamilySpec::Ball {
                    gens: elems(a.req("gens")?)?,
                    radius: a.req("radius")?.parse().context("bad radius")?,
                }
            }
            _ => bail!("unknown set family `{name}`"),
        };
        Ok(spec)
    }

    /// True if the family draws random elements and so needs a seed.
    pub fn is_random(&self) -> bool {
        matches!(self, SetFamilySpec::RandomDense { .. })
    }

    /// The same family with a seed filled in when none was given.
    pub fn with_default_seed(&self, seed: u64) -> SetFamilySpec {
        match self {
            SetFamilySpec::RandomDense { density, seed: None } => SetFamilySpec::RandomDense {
                density: *density,
                seed: Some(seed),
            },
            other => other.clone(),
        }
    }
}

impl fmt::Display for SetFamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetFamilySpec::Subgroup { gens } => write!(f, "subgroup(gens={})", join(gens)),
            SetFamilySpec::Coset { x, gens, side } => write!(f, "coset(x={x},gens={},side={})", join(gens), side_name(*side)),
            SetFamilySpec::GeometricProgression { base, len } => write!(f, "geometric_progression(base={base},len={len})"),
            SetFamilySpec::SubgroupPlusPoint { gens, x: Some(x) } => write!(f, "subgroup_plus_point(gens={},x={x})", join(gens)),
            SetFamilySpec::SubgroupPlusPoint { gens, x: None } => write!(f, "subgroup_plus_point(gens={})", join(gens)),
            SetFamilySpec::UnionOfCosets { gens, count, side } => {
                write!(f, "union_of_cosets(gens={},count={count},side={})", join(gens), side_name(*side))
            }
            SetFamilySpec::RandomDense { density, seed: Some(s) } => write!(f, "random_dense(density={density},seed={s})"),
            SetFamilySpec::RandomDense { density, seed: None } => write!(f, "random_dense(density={density})"),
            SetFamilySpec::Ball { gens, radius } => write!(f, "ball(gens={},radius={radius})", join(gens)),
        }
    }
}

fn closure(g: &FiniteGroup, gens: &[Elem]) -> Result<Bitset> {
    Ok(subgroup_closure(g, gens)?)
}

fn normalizes(g: &FiniteGroup, h: &Bitset, x: Elem) -> bool {
    h.iter().all(|e| h.contains(g.conj(x, e)))
}

fn translate<'a>(g: &'a FiniteGroup, h: &'a Bitset, x: Elem, side: CosetSide) -> impl Iterator<Item = Elem> + 'a {
    h.iter().map(move |e| match side {
        CosetSide::Left => g.mul(x, e),
        CosetSide::Right => g.mul(e, x),
    })
}

/// Builds the set described by `spec` in `g`. Deterministic given the family,
/// which carries its own seed for random families.
pub fn generate_set(g: &FiniteGroup, spec: &SetFamilySpec) -> Result<MSet> {
    let n = g.order();
    let set = match spec {
        SetFamilySpec::Subgroup { gens } => MSet::from_bitset(g, closure(g, gens)?)?,
        SetFamilySpec::Coset { x, gens, side } => {
            g.check_id(*x)?;
            let h = closure(g, gens)?;
            MSet::new(g, translate(g, &h, *x, *side))?
        }
        SetFamilySpec::GeometricProgression { base, len } => {
            g.check_id(*base)?;
            let mut ids = Vec::with_capacity(*len);
            let mut cur = g.identity();
            for _ in 0..*len {
                ids.push(cur);
                cur = g.mul(cur, *base);
            }
            MSet::new(g, ids)?
        }
        SetFamilySpec::SubgroupPlusPoint { gens, x } => {
            let h = closure(g, gens)?;
            let x = match x {
                Some(x) => {
                    g.check_id(*x)?;
                    if normalizes(g, &h, *x) {
                        bail!("{x} lies in the normalizer of <{}>", join(gens));
                    }
                    *x
                }
                None => (0..n as Elem)
                    .find(|&x| !normalizes(g, &h, x))
                    .ok_or_else(|| anyhow!("every element of {} normalizes <{}>", g.label(), join(gens)))?,
            };
            MSet::new(g, h.iter().chain([x]))?
        }
        SetFamilySpec::UnionOfCosets { gens, count, side } => {
            let h = closure(g, gens)?;
            let mut seen = Bitset::new(n);
            let mut out = Bitset::new(n);
            let mut taken = 0;
            for x in 0..n as Elem {
                if taken == *count {
                    break;
                }
                if seen.contains(x) {
                    continue;
                }
                for y in translate(g, &h, x, *side) {
                    seen.insert(y);
                    out.insert(y);
                }
                taken += 1;
            }
            if taken < *count {
                bail!("only {taken} cosets of <{}> exist in {}", join(gens), g.label());
            }
            MSet::from_bitset(g, out)?
        }
        SetFamilySpec::RandomDense { density, seed } => {
            let seed = seed.ok_or_else(|| anyhow!("random_dense needs a seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ids: Vec<Elem> = (0..n as Elem).filter(|_| rng.gen_bool(*density)).collect();
            if ids.is_empty() {
                bail!("random_dense(density={density},seed={seed}) drew no element of {}", g.label());
            }
            MSet::new(g, ids)?
        }
        SetFamilySpec::Ball { gens, radius } => {
            let w = WordMetric::new(g, gens)?;
            MSet::new(g, w.ball(*radius as f64 + 0.5))?
        }
    };
    Ok(set)
}

/// `count` random subsets with sizes uniform in `1..=max_size`, drawn from
/// one ChaCha8 stream keyed by `seed`.
pub fn random_subsets(g: &FiniteGroup, max_size: usize, count: usize, seed: u64) -> Vec<MSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.order();
    let cap = max_size.clamp(1, n);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=cap);
            let ids = rand::seq::index::sample(&mut rng, n, size);
            MSet::new(g, ids.into_iter().map(|i| i as Elem)).expect("nonempty")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_groups::setcalc::power;

    fn g(s: &str) -> FiniteGroup {
        FiniteGroup::parse(s).unwrap()
    }

    #[test]
    fn geometric_progression_of_length_one_is_identity() {
        let z = g("cyclic(10)");
        let s = generate_set(&z, &SetFamilySpec::parse("geometric_progression(base=3,len=1)").unwrap()).unwrap();
        assert_eq!(s.ids(), vec![0]);
        let s = generate_set(&z, &SetFamilySpec::parse("geometric_progression(base=3,len=4)").unwrap()).unwrap();
        assert_eq!(s.ids(), vec![0, 3, 6, 9]);
    }

    #[test]
    fn subgroup_plus_point_in_s3() {
        let s3 = g("symmetric(3)");
        let t = (0..6).find(|&x| x != 0 && s3.mul(x, x) == 0).unwrap();
        let spec = SetFamilySpec::SubgroupPlusPoint { gens: vec![t], x: None };
        let a = generate_set(&s3, &spec).unwrap();
        assert_eq!(a.len(), 3);
        let a2 = power(&a, 2).unwrap().len();
        let a3 = power(&a, 3).unwrap().len();
        assert!(a3 > a2, "{a2} {a3}");
    }

    #[test]
    fn subgroup_plus_point_reports_when_everything_normalizes() {
        let z = g("cyclic(6)");
        let err = generate_set(&z, &SetFamilySpec::parse("subgroup_plus_point(gens=2)").unwrap()).unwrap_err();
        assert!(err.to_string().contains("normalizes"));
    }

    #[test]
    fn random_dense_is_reproducible() {
        let z = g("cyclic(1000)");
        let spec = SetFamilySpec::parse("random_dense(density=0.1,seed=7)").unwrap();
        let a = generate_set(&z, &spec).unwrap();
        let b = generate_set(&z, &spec).unwrap();
        assert_eq!(a, b);
        assert!((60..=140).contains(&a.len()), "{}", a.len());
        assert!(generate_set(&z, &SetFamilySpec::parse("random_dense(density=0.1)").unwrap()).is_err());
    }

    #[test]
    fn cosets_and_balls() {
        let d = g("dihedral(6)");
        let u = generate_set(&d, &SetFamilySpec::parse("union_of_cosets(gens=6,count=3)").unwrap()).unwrap();
        assert_eq!(u.len(), 6);
        let c = generate_set(&d, &SetFamilySpec::parse("coset(x=1,gens=6,side=right)").unwrap()).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.contains(1));
        let z = g("cyclic(20)");
        let b = generate_set(&z, &SetFamilySpec::parse("ball(gens=1,radius=2)").unwrap()).unwrap();
        assert_eq!(b.ids(), vec![0, 1, 2, 18, 19]);
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "subgroup(gens=1+6)",
            "coset(x=3,gens=4,side=left)",
            "geometric_progression(base=1,len=5)",
            "subgroup_plus_point(gens=1,x=3)",
            "union_of_cosets(gens=5,count=3,side=right)",
            "random_dense(density=0.1,seed=7)",
            "ball(gens=1+9,radius=2)",
        ] {
            let f = SetFamilySpec::parse(s).unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(SetFamilySpec::parse(&f.to_string()).unwrap(), f);
        }
    }
}

//! Suite configuration files.
//!
//! Flat `key = value` lines, `#` starts a comment. Keys before the first
//! `[suite]` header are global (`out`). Every `[suite]` header opens a new
//! suite. List values are separated by `;` outside parentheses.
//!
//! ```text
//! out = reports/run1
//!
//! [suite]
//! name = tripling
//! groups = cyclic(30); dihedral(8)
//! families = subgroup(gens=1); geometric_progression(base=1,len=5)
//! instances = 20
//! max_size = 6
//! seeds = 1; 2
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use approx_groups::rational::parse_rational;
use approx_groups::{Elem, Rational};

use crate::family::SetFamilySpec;

pub const SUITES: [&str; 11] = [
    "ruzsa-axioms",
    "energy-identities",
    "covering",
    "musprop",
    "weak-bsg",
    "bsg",
    "tripling",
    "energy-equivalence",
    "entropy",
    "heisenberg",
    "splitting",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSpec {
    pub name: String,
    pub groups: Vec<String>,
    pub families: Vec<SetFamilySpec>,
    /// Fixed `K`; when absent each instance uses its measured constant.
    pub k: Option<Rational>,
    /// Scales: exact rationals for `weak-bsg`, floats for `entropy`.
    pub eps: Vec<String>,
    pub n: Option<usize>,
    pub seeds: Vec<u64>,
    /// Random subsets drawn per group and seed.
    pub instances: usize,
    pub max_size: usize,
    pub metrics: Vec<String>,
    pub points: usize,
    pub samples: Option<usize>,
    /// Generators of the normal subgroup for `splitting`.
    pub normal: Vec<Elem>,
    pub primes: Vec<u32>,
}

impl SuiteSpec {
    pub fn new(name: &str) -> Self {
        SuiteSpec {
            name: name.to_string(),
            groups: Vec::new(),
            families: Vec::new(),
            k: None,
            eps: Vec::new(),
            n: None,
            seeds: Vec::new(),
            instances: 0,
            max_size: 8,
            metrics: Vec::new(),
            points: 500,
            samples: None,
            normal: Vec::new(),
            primes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.name.as_str()) {
            bail!("unknown suite `{}` (known: {})", self.name, SUITES.join(", "));
        }
        if self.seeds.is_empty() {
            if self.instances > 0 {
                bail!("suite `{}`: random instances need `seeds`", self.name);
            }
            if let Some(f) = self.families.iter().find(|f| f.is_random() && f.with_default_seed(0) != **f) {
                bail!("suite `{}`: family `{f}` needs a seed (inline or via `seeds`)", self.name);
            }
        }
        if self.max_size == 0 {
            bail!("suite `{}`: max_size must be positive", self.name);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteConfig {
    pub out: Option<PathBuf>,
    pub suites: Vec<SuiteSpec>,
}

/// Splits on `sep` outside parentheses, trimming and dropping empty items.
pub fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out.into_iter().map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    split_top_level(v, ';').iter().map(|x| f(x)).collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    v.trim().parse().with_context(|| format!("bad value for `{key}`: `{v}`"))
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SuiteConfig::default();
        let mut current: Option<SuiteSpec> = None;
        let mut has_name = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("line {}", lineno + 1);
            if line == "[suite]" {
                if let Some(s) = current.take() {
                    if !has_name {
                        bail!("a [suite] section is missing `name`");
                    }
                    cfg.suites.push(s);
                }
                current = Some(SuiteSpec::new(""));
                has_name = false;
                continue;
            }
            if line.starts_with('[') {
                bail!("{}: unknown section `{line}`", at());
            }
            let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("{}: expected key = value", at()))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(s) = current.as_mut() else {
                match key {
                    "out" => cfg.out = Some(PathBuf::from(value)),
                    _ => bail!("{}: unknown global key `{key}`", at()),
                }
                continue;
            };
            let res: Result<()> = (|| {
                match key {
                    "name" => {
                        s.name = value.to_string();
                        has_name = true;
                    }
                    "groups" => s.groups = split_top_level(value, ';'),
                    "families" => s.families = parse_list(value, SetFamilySpec::parse)?,
                    "k" => s.k = Some(parse_rational(value)?),
                    "eps" => s.eps = split_top_level(value, ';'),
                    "n" => s.n = Some(num(key, value)?),
                    "seeds" => s.seeds = parse_list(value, |x| num(key, x))?,
                    "instances" => s.instances = num(key, value)?,
                    "max_size" => s.max_size = num(key, value)?,
                    "metrics" => s.metrics = split_top_level(value, ';'),
                    "points" => s.points = num(key, value)?,
                    "samples" => s.samples = Some(num(key, value)?),
                    "normal" => s.normal = value.split('+').map(|x| num(key, x)).collect::<Result<_>>()?,
                    "primes" => s.primes = parse_list(value, |x| num(key, x))?,
                    _ => bail!("unknown suite key `{key}`"),
                }
                Ok(())
            })();
            res.with_context(at)?;
        }
        if let Some(s) = current {
            if !has_name {
                bail!("a [suite] section is missing `name`");
            }
            cfg.suites.push(s);
        }
        for s in &cfg.suites {
            s.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_groups::rational::ratio;

    #[test]
    fn parses_sections_and_lists() {
        let cfg = SuiteConfig::parse(
            "out = r/x   # where\n\n[suite]\nname = tripling\ngroups = cyclic(8); heisenberg(z=3+3;w=3;pairing=symplectic)\n\
             families = subgroup(gens=1+2); random_dense(density=0.5)\nk = 7/4\nseeds = 1; 2\n[suite]\nname = entropy\nmetrics = torus(1)\n",
        )
        .unwrap();
        assert_eq!(cfg.out, Some(PathBuf::from("r/x")));
        assert_eq!(cfg.suites.len(), 2);
        let s = &cfg.suites[0];
        assert_eq!(s.groups, vec!["cyclic(8)", "heisenberg(z=3+3;w=3;pairing=symplectic)"]);
        assert_eq!(s.families.len(), 2);
        assert_eq!(s.k, Some(ratio(7, 4)));
        assert_eq!(s.seeds, vec![1, 2]);
        assert_eq!(cfg.suites[1].metrics, vec!["torus(1)"]);
    }

    #[test]
    fn empty_config_has_no_suites() {
        assert_eq!(SuiteConfig::parse("# nothing\n").unwrap().suites.len(), 0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SuiteConfig::parse("[suite]\nname = nope\n").is_err());
        assert!(SuiteConfig::parse("[suite]\ngroups = cyclic(4)\n").is_err());
        assert!(SuiteConfig::parse("[suite]\nname = covering\nfamilies = random_dense(density=0.5)\n").is_err());
        assert!(SuiteConfig::parse("[suite]\nname = covering\ninstances = 3\n").is_err());
        assert!(SuiteConfig::parse("[suite]\nname = covering\nbogus = 1\n").is_err());
        assert!(SuiteConfig::parse("[other]\n").is_err());
    }
}

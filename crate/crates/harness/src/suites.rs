//! The named check suites and the suite runner.
//!
//! Every suite fans out over (group, instance) pairs through
//! [`approx_groups::par`]; rows are merged in instance order and the final
//! report is sorted by suite, group and instance.

use anyhow::{anyhow, bail, Context, Result};
use approx_groups::bsg::{bsg_extract, energy_equivalences, infer_bsg_k, weak_bsg_squared, EnergyClause};
use approx_groups::entropy::{
    approx_energy, entropy_report, metric_profile_check, MetricCloud, MetricGroup, ProfileOptions, Region, WordMetric,
};
use approx_groups::group::{quotient_map, PairingSpec};
use approx_groups::heisenberg::{
    build_heisenberg, exact_split_oracle, heisen_inverse, split_approximate, subgroup_sandwich, verify_inverse_converse, HeisenbergGroup,
};
use approx_groups::ledger::format_float;
use approx_groups::rational::{infer_k, int, parse_rational, pow, ratio};
use approx_groups::setcalc::{
    convolution, energy, energy_quadruples, inverse_set, power, product_set, ruzsa_distance, ENERGY_ORACLE_LIMIT,
};
use approx_groups::structure::{
    approx_group_from_tripling, cover_contains, local_tripling_check, ruzsa_cover, symmetric_core, tripling_chain, verify_approx_group,
    Side,
};
use approx_groups::{par, ConstantLedger, Elem, Error, FiniteGroup, GroupSpec, MSet, Rational, RowClass};
use num_bigint::BigUint;

use crate::config::{SuiteConfig, SuiteSpec};
use crate::family::{generate_set, random_subsets, SetFamilySpec};
use crate::report::{Report, ReportRow, RowSource};

/// A labelled input set.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub set: MSet,
}

/// Runs every suite of `config` and returns the sorted report.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new();
    for spec in &config.suites {
        report.extend(run_one(spec).with_context(|| format!("suite `{}`", spec.name))?);
    }
    report.sort();
    Ok(report)
}

/// Runs a single suite.
pub fn run_one(spec: &SuiteSpec) -> Result<Vec<ReportRow>> {
    spec.validate()?;
    match spec.name.as_str() {
        "entropy" => return entropy_suite(spec),
        "heisenberg" => return heisenberg_suite(spec),
        _ => {}
    }
    if spec.groups.is_empty() {
        bail!("suite `{}` needs `groups`", spec.name);
    }
    let normal = if spec.name == "splitting" {
        if spec.normal.is_empty() {
            bail!("suite `splitting` needs `normal` generators");
        }
        Some(spec.normal.clone())
    } else {
        None
    };
    let mut rows = Vec::new();
    for gs in &spec.groups {
        let g = FiniteGroup::parse(gs)?;
        let inst = instances(spec, &g)?;
        if inst.is_empty() {
            continue;
        }
        let h = match &normal {
            Some(gens) => Some(quotient_map(&g, gens)?),
            None => None,
        };
        let label = g.label().to_string();
        let idx: Vec<usize> = (0..inst.len()).collect();
        let per = par::map(&idx, |&i| {
            let src = RowSource {
                suite: &spec.name,
                group: &label,
                instance: i,
                label: &inst[i].label,
            };
            let a = &inst[i].set;
            let b = &inst[(i + 1) % inst.len()].set;
            let c = &inst[(i + 2) % inst.len()].set;
            let out = match spec.name.as_str() {
                "ruzsa-axioms" => ruzsa_rows(&src, a, b, c, i),
                "energy-identities" => energy_rows(&src, a, b),
                "covering" => covering_rows(&src, a, b),
                "musprop" => musprop_rows(&src, spec, a),
                "weak-bsg" => weak_bsg_rows(&src, spec, a, b),
                "bsg" => bsg_rows(&src, spec, a, b),
                "tripling" => tripling_rows(&src, spec, a),
                "energy-equivalence" => equivalence_rows(&src, spec, a, b),
                "splitting" => splitting_rows(&src, spec, a, h.as_ref().expect("normal subgroup")),
                other => unreachable!("suite {other} is dispatched above"),
            };
            settle(&src, out)
        });
        rows.extend(per.into_iter().flatten());
    }
    Ok(rows)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Family sets (random families once per seed) followed by `instances`
/// random subsets per seed.
pub fn instances(spec: &SuiteSpec, g: &FiniteGroup) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for f in &spec.families {
        let variants: Vec<SetFamilySpec> = if f.is_random() && f.with_default_seed(0) != *f {
            spec.seeds.iter().map(|&s| f.with_default_seed(s)).collect()
        } else {
            vec![f.clone()]
        };
        for v in variants {
            let set = generate_set(g, &v).with_context(|| format!("family `{v}` in {}", g.label()))?;
            out.push(Instance { label: v.to_string(), set });
        }
    }
    for &seed in &spec.seeds {
        if spec.instances == 0 {
            break;
        }
        let sets = random_subsets(g, spec.max_size, spec.instances, seed ^ fnv1a(g.label()));
        for (j, set) in sets.into_iter().enumerate() {
            out.push(Instance {
                label: format!("random(seed={seed},max_size={},index={j})", spec.max_size),
                set,
            });
        }
    }
    Ok(out)
}

/// Hypothesis failures become soft rows; any other error becomes a failing
/// hard row so that it shows in the report and fails the run.
fn settle(src: &RowSource, out: approx_groups::Result<Vec<ReportRow>>) -> Vec<ReportRow> {
    match out {
        Ok(rows) => rows,
        Err(e) => vec![error_row(src, &e)],
    }
}

fn error_row(src: &RowSource, e: &Error) -> ReportRow {
    match e {
        Error::Hypothesis { name, lhs, rhs } => src.hypothesis_failure("hypothesis", name, lhs, rhs),
        other => {
            let mut r = src.int_row("error", &format!("error: {other}"), 1, 0, RowClass::Hard);
            r.measured = String::new();
            r
        }
    }
}

/// Runs `f`, turning a hypothesis failure into a soft row and keeping the
/// remaining rows of the instance.
fn attempt(
    src: &RowSource,
    rows: &mut Vec<ReportRow>,
    f: impl FnOnce() -> approx_groups::Result<Vec<ReportRow>>,
) -> approx_groups::Result<()> {
    match f() {
        Ok(r) => rows.extend(r),
        Err(e @ Error::Hypothesis { .. }) => rows.push(error_row(src, &e)),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn flag(b: bool) -> Rational {
    int(u8::from(b))
}

fn ruzsa_rows(src: &RowSource, a: &MSet, b: &MSet, c: &MSet, i: usize) -> approx_groups::Result<Vec<ReportRow>> {
    let g = a.group();
    let ab = ruzsa_distance(a, b)?;
    let ba = ruzsa_distance(b, a)?;
    let bc = ruzsa_distance(b, c)?;
    let ac = ruzsa_distance(a, c)?;
    let x = ((i as u64).wrapping_mul(2_654_435_761) % g.order() as u64) as Elem;
    let xab = ruzsa_distance(&a.left_translate(x), &b.left_translate(x))?;
    let mut l = ConstantLedger::new();
    l.hard(
        "|A C^-1||B| <= |A B^-1||B C^-1|",
        int(ac.numerator) * int(b.len()),
        int(ab.numerator) * int(bc.numerator),
        "|A B^-1|*|B C^-1|",
    );
    l.hard(
        "| |A B^-1| - |B A^-1| | <= 0",
        int(ab.numerator.abs_diff(ba.numerator)),
        int(0),
        "0",
    );
    l.hard(
        "|A||B| <= |A B^-1|^2",
        int(ab.denominator_sq),
        int(ab.numerator) * int(ab.numerator),
        "|A B^-1|^2",
    );
    l.hard(
        &format!("| |xA (xB)^-1| - |A B^-1| | <= 0 at x={x}"),
        int(xab.numerator.abs_diff(ab.numerator)),
        int(0),
        "0",
    );
    Ok(src.ledger("ruzsa_distance", &l))
}

fn energy_rows(src: &RowSource, a: &MSet, b: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let ai = inverse_set(a);
    let e1 = energy(a, &ai)?.value();
    let e2 = energy(&ai, a)?.value();
    let eab = energy(a, b)?.value();
    let nab = (a.len() * b.len()) as u128;
    let abl = product_set(a, b)?.len();
    let mut l = ConstantLedger::new();
    l.hard("| E(A,A^-1) - E(A^-1,A) | <= 0", int(e1.abs_diff(e2)), int(0), "0");
    l.hard("E(A,B)^2 <= (|A||B|)^3", int(eab) * int(eab), pow(&int(nab), 3), "(|A||B|)^3");
    l.hard(
        "(|A||B|)^2 <= E(A,B)|A B|",
        int(nab) * int(nab),
        int(eab) * int(abl),
        "E(A,B)*|A B|",
    );
    l.hard(
        "| sum_x conv(x) - |A||B| | <= 0",
        int((convolution(a, b)?.total() as u128).abs_diff(nab)),
        int(0),
        "0",
    );
    if a.len() <= ENERGY_ORACLE_LIMIT && b.len() <= ENERGY_ORACLE_LIMIT {
        let brute = energy_quadruples(a, b)?.value();
        l.hard(
            "| E(A,B) by convolution - E(A,B) by quadruples | <= 0",
            int(eab.abs_diff(brute)),
            int(0),
            "0",
        );
        let brute_ai = energy_quadruples(a, &ai)?.value();
        l.hard(
            "| E(A,A^-1) by convolution - by quadruples | <= 0",
            int(e1.abs_diff(brute_ai)),
            int(0),
            "0",
        );
    }
    let mut rows = src.ledger("energy", &l);
    rows.push(src.measurement("asymmetry", "|A A^-1|", product_set(a, &ai)?.len() as u128));
    rows.push(src.measurement("asymmetry", "|A^-1 A|", product_set(&ai, a)?.len() as u128));
    Ok(rows)
}

fn covering_rows(src: &RowSource, a: &MSet, b: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let mut l = ConstantLedger::new();
    for side in [Side::Left, Side::Right] {
        let x = ruzsa_cover(a, b, side)?;
        let (prod, contain) = match side {
            Side::Left => (product_set(a, b)?.len(), "B subset A^-1 A X (violations)"),
            Side::Right => (product_set(b, a)?.len(), "B subset X A A^-1 (violations)"),
        };
        let (name, formula) = match side {
            Side::Left => ("|X||A| <= |A B|", "|A B|"),
            Side::Right => ("|X||A| <= |B A|", "|B A|"),
        };
        l.hard(name, int(x.len() * a.len()), int(prod), formula);
        l.hard(contain, flag(!cover_contains(a, b, &x, side)?), int(0), "0");
    }
    Ok(src.ledger("ruzsa_cover", &l))
}

fn measured_aai(a: &MSet) -> approx_groups::Result<Rational> {
    Ok(ratio(product_set(a, &inverse_set(a))?.len() as u64, a.len() as u64))
}

fn tripling_k(a: &MSet) -> approx_groups::Result<Rational> {
    Ok(ratio(power(a, 3)?.len() as u64, a.len() as u64))
}

fn musprop_rows(src: &RowSource, spec: &SuiteSpec, a: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => measured_aai(a)?,
    };
    let (core, l) = symmetric_core(a, &k, spec.n.unwrap_or(3))?;
    let mut rows = src.ledger("symmetric_core", &l);
    rows.push(src.measurement("symmetric_core", "|S|", core.s.len() as u128));
    Ok(rows)
}

fn weak_bsg_rows(src: &RowSource, spec: &SuiteSpec, a: &MSet, b: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let g = a.group();
    let conv = convolution(a, b)?;
    let ab = conv.support(g);
    // Popular products: counts at least the average over A·B.
    let nab = (a.len() * b.len()) as u64;
    let c = MSet::new(g, ab.iter().filter(|&x| conv.get(x) * ab.len() as u64 >= nab))?;
    let hits: u64 = c.iter().map(|x| conv.get(x)).sum();
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => ratio(nab, hits),
    };
    let kp2 = {
        let v = ratio((c.len() * c.len()) as u64, nab);
        if v < int(1) {
            int(1)
        } else {
            v
        }
    };
    let eps_list = if spec.eps.is_empty() {
        vec!["1/2".to_string()]
    } else {
        spec.eps.clone()
    };
    let mut rows = Vec::new();
    for e in &eps_list {
        let eps = parse_rational(e)?;
        attempt(src, &mut rows, || {
            let w = weak_bsg_squared(a, b, &c, &k, &kp2, &eps)?;
            let mut r = src.ledger(&format!("weak_bsg eps={e}"), &w.ledger);
            r.push(src.measurement(&format!("weak_bsg eps={e}"), "|A'|", w.a_prime.len() as u128));
            r.push(src.measurement(&format!("weak_bsg eps={e}"), "|D|", w.d.len() as u128));
            Ok(r)
        })?;
    }
    Ok(rows)
}

fn bsg_rows(src: &RowSource, spec: &SuiteSpec, a: &MSet, b: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => infer_bsg_k(a, b)?,
    };
    let r = bsg_extract(a, b, &k)?;
    let mut rows = src.ledger("bsg_extract", &r.ledger);
    rows.extend(trace_rows(src, &r));
    Ok(rows)
}

/// Stage cardinalities in pipeline order.
pub fn trace_rows(src: &RowSource, r: &approx_groups::bsg::BsgExtract) -> Vec<ReportRow> {
    r.stages()
        .into_iter()
        .map(|(name, n)| src.measurement("trace", &format!("|{name}|"), n as u128))
        .collect()
}

fn tripling_rows(src: &RowSource, spec: &SuiteSpec, a: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => tripling_k(a)?,
    };
    let n = spec.n.unwrap_or(6).clamp(1, 6);
    let mut rows = Vec::new();
    attempt(src, &mut rows, || Ok(src.ledger("tripling_chain", &tripling_chain(a, &k, n)?)))?;
    attempt(src, &mut rows, || {
        let t = approx_group_from_tripling(a, &k)?;
        let w = &t.witness;
        let mut l = t.ledger.clone();
        l.hard("A subset H (violations)", int(a.len() - a.intersection_len(&w.h)), int(0), "0");
        let clauses = match verify_approx_group(&w.h, &w.x, &w.k) {
            Ok(_) => 0,
            Err(v) => v.failures.len(),
        };
        l.hard("verify_approx_group(H, X, K) (violated clauses)", int(clauses), int(0), "0");
        Ok(src.ledger("approx_group_from_tripling", &l))
    })?;
    let k_local = match &spec.k {
        Some(k) => k.clone(),
        None => {
            let a2 = power(a, 2)?.len();
            let sup = a
                .iter()
                .map(|x| product_set(&a.right_translate(x), a).map(|s| s.len()))
                .collect::<approx_groups::Result<Vec<_>>>()?;
            ratio(a2.max(sup.into_iter().max().unwrap_or(0)) as u64, a.len() as u64)
        }
    };
    attempt(src, &mut rows, || Ok(src.ledger("corruz", &local_tripling_check(a, &k_local)?)))?;
    Ok(rows)
}

fn equivalence_rows(src: &RowSource, spec: &SuiteSpec, a: &MSet, b: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let g = a.group();
    let n = BigUint::from(g.order());
    let nab = BigUint::from(a.len() * b.len());
    let abl = BigUint::from(product_set(a, b)?.len());
    let k_energy = match &spec.k {
        Some(k) => k.clone(),
        None => infer_bsg_k(a, b)?,
    };
    let k_partial = match &spec.k {
        Some(k) => k.clone(),
        None => infer_k(&(&abl * &abl), &nab, &(&n * &n * &n)),
    };
    let all_pairs: Vec<(Elem, Elem)> = a.iter().flat_map(|x| b.iter().map(move |y| (x, y))).collect();
    let mut rows = Vec::new();
    for (input, k) in [
        (EnergyClause::Energy, k_energy),
        (EnergyClause::PartialProduct(all_pairs), k_partial),
    ] {
        let op = format!("energy_equivalences from ({})", input.kind().label());
        attempt(src, &mut rows, || {
            Ok(src.ledger(&op, &energy_equivalences(a, b, &input, &k)?.ledger))
        })?;
    }
    Ok(rows)
}

fn splitting_rows(
    src: &RowSource,
    spec: &SuiteSpec,
    a: &MSet,
    h: &approx_groups::NormalSubgroupView,
) -> approx_groups::Result<Vec<ReportRow>> {
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => tripling_k(a)?,
    };
    let mut rows = Vec::new();
    let mut split = None;
    attempt(src, &mut rows, || {
        let s = split_approximate(a, h, &k)?;
        let r = src.ledger("split_approximate", &s.ledger);
        split = Some(s);
        Ok(r)
    })?;
    if a.is_subgroup() {
        let exact = exact_split_oracle(a, h)?;
        rows.extend(src.ledger("exact_split_oracle", &exact.ledger));
        if let Some(s) = split {
            let mut l = ConstantLedger::new();
            let bad_b = s.b.iter().filter(|b| **b != exact.b).count();
            l.hard("B_i = A cap H for i = 1,2,3 (mismatches)", int(bad_b), int(0), "0");
            l.hard("C = pi(A) (mismatch)", flag(s.c != exact.c), int(0), "0");
            rows.extend(src.ledger("oracle_agreement", &l));
        }
    }
    Ok(rows)
}

/// The Heisenberg group named by a spec string.
pub fn heisenberg_from(spec: &str) -> Result<HeisenbergGroup> {
    let gs: GroupSpec = spec.parse()?;
    let ps: PairingSpec = match gs {
        GroupSpec::Heisenberg(ps) => ps,
        _ => bail!("`{spec}` is not a heisenberg(...) group"),
    };
    Ok(build_heisenberg(&ps)?)
}

pub fn standard_heisenberg(p: u32) -> String {
    format!("heisenberg(z=Z{p}^2;w=Z{p};pairing=symplectic)")
}

fn heisenberg_suite(spec: &SuiteSpec) -> Result<Vec<ReportRow>> {
    let mut specs: Vec<String> = spec.primes.iter().map(|&p| standard_heisenberg(p)).collect();
    specs.extend(spec.groups.iter().cloned());
    if specs.is_empty() {
        bail!("suite `heisenberg` needs `primes` or heisenberg `groups`");
    }
    let mut rows = Vec::new();
    for s in &specs {
        let hg = heisenberg_from(s)?;
        let inst = instances(spec, &hg.group)?;
        let label = hg.group.label().to_string();
        let idx: Vec<usize> = (0..inst.len()).collect();
        let per = par::map(&idx, |&i| {
            let src = RowSource {
                suite: &spec.name,
                group: &label,
                instance: i,
                label: &inst[i].label,
            };
            settle(&src, heisenberg_rows(&src, spec, &hg, &inst[i].set))
        });
        rows.extend(per.into_iter().flatten());
    }
    Ok(rows)
}

fn heisenberg_rows(src: &RowSource, spec: &SuiteSpec, hg: &HeisenbergGroup, a: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let k = match &spec.k {
        Some(k) => k.clone(),
        None => tripling_k(a)?,
    };
    let w = heisen_inverse(hg, a, &k)?;
    let mut rows = src.ledger("heisen_inverse", &w.ledger);
    let mut l = ConstantLedger::new();
    let clauses = match verify_approx_group(&w.a_tilde, &w.cover, &w.k_tilde) {
        Ok(_) => 0,
        Err(v) => v.failures.len(),
    };
    l.hard(
        "A~ is a K~-approximate group in Z x W (violated clauses)",
        int(clauses),
        int(0),
        "0",
    );
    rows.extend(src.ledger("additive_approx_group", &l));
    rows.extend(src.ledger("converse", &verify_inverse_converse(hg, &w, a)?));
    if a.is_subgroup() {
        rows.extend(src.ledger("subgroup_sandwich", &subgroup_sandwich(hg, a)?));
    }
    Ok(rows)
}

/// Parses `torus(d)`, `quaternions` or `word(gens=1+9)`; word metrics are
/// built on each of `groups`.
pub fn parse_metrics(s: &str, groups: &[String]) -> Result<Vec<MetricGroup>> {
    let t = s.trim();
    if t == "quaternions" {
        return Ok(vec![MetricGroup::UnitQuaternions]);
    }
    let (name, rest) = t.split_once('(').ok_or_else(|| anyhow!("unknown metric `{t}`"))?;
    let body = rest.strip_suffix(')').ok_or_else(|| anyhow!("metric `{t}` is missing `)`"))?;
    match name.trim() {
        "torus" => Ok(vec![MetricGroup::torus(body.trim().parse().context("bad torus dimension")?)?]),
        "word" => {
            let gens = body
                .trim()
                .strip_prefix("gens=")
                .ok_or_else(|| anyhow!("word metric needs gens="))?
                .split('+')
                .map(|x| x.trim().parse::<Elem>().context("bad generator"))
                .collect::<Result<Vec<_>>>()?;
            if groups.is_empty() {
                bail!("word metric `{t}` needs `groups`");
            }
            groups
                .iter()
                .map(|gs| Ok(MetricGroup::word(&FiniteGroup::parse(gs)?, &gens)?))
                .collect()
        }
        other => bail!("unknown metric `{other}`"),
    }
}

pub fn parse_scales(eps: &[String], default: &[f64]) -> Result<Vec<f64>> {
    if eps.is_empty() {
        return Ok(default.to_vec());
    }
    eps.iter()
        .map(|e| {
            let v: f64 = e.trim().parse().with_context(|| format!("bad scale `{e}`"))?;
            if !(v > 0.0 && v.is_finite()) {
                bail!("scale must be positive, got {e}");
            }
            Ok(v)
        })
        .collect()
}

pub const DEFAULT_SCALES: [f64; 3] = [0.05, 0.1, 0.2];

/// `N_ε ≤ |sep_ε| ≤ N_{ε/2}` and `N_{2ε} ≤ N_ε` on every scale.
pub fn sweep_rows(src: &RowSource, x: &MetricCloud, grid: &[f64]) -> approx_groups::Result<Vec<ReportRow>> {
    let r = entropy_report(x, grid)?;
    let mut rows = Vec::new();
    for e in &r.rows {
        let tag = format_float(e.eps);
        rows.push(src.int_row(
            "entropy_report",
            &format!("N_eps <= |sep_eps| at eps={tag}"),
            e.n_eps as u128,
            e.separated as u128,
            RowClass::Hard,
        ));
        rows.push(src.int_row(
            "entropy_report",
            &format!("|sep_eps| <= N_eps/2 at eps={tag}"),
            e.separated as u128,
            e.n_half as u128,
            RowClass::Hard,
        ));
        rows.push(src.int_row(
            "entropy_report",
            &format!("N_2eps <= N_eps at eps={tag}"),
            e.n_double as u128,
            e.n_eps as u128,
            RowClass::Hard,
        ));
    }
    Ok(rows)
}

fn entropy_suite(spec: &SuiteSpec) -> Result<Vec<ReportRow>> {
    let grid = parse_scales(&spec.eps, &DEFAULT_SCALES)?;
    let metric_specs = if spec.metrics.is_empty() {
        vec!["torus(1)".to_string()]
    } else {
        spec.metrics.clone()
    };
    let seeds = if spec.seeds.is_empty() { vec![0] } else { spec.seeds.clone() };
    let mut opts = ProfileOptions::default();
    if let Some(s) = spec.samples {
        opts.samples = s;
        opts.measure_samples = s;
    }
    let mut rows = Vec::new();
    for ms in &metric_specs {
        for mg in parse_metrics(ms, &spec.groups)? {
            let label = mg.label();
            let mut jobs: Vec<(String, MetricCloud)> = Vec::new();
            for &seed in &seeds {
                jobs.push((
                    format!("random(points={},seed={seed})", spec.points),
                    MetricCloud::random_in_region(&mg, Region::Whole, spec.points, seed)?,
                ));
            }
            let mut embedded = Vec::new();
            if let MetricGroup::Word(w) = &mg {
                for i in instances(spec, w.group())? {
                    embedded.push(i);
                }
            }
            let idx: Vec<usize> = (0..jobs.len()).collect();
            let per = par::map(&idx, |&i| {
                let src = RowSource {
                    suite: &spec.name,
                    group: &label,
                    instance: i,
                    label: &jobs[i].0,
                };
                let x = &jobs[i].1;
                let mut opts = opts;
                opts.seed = opts.seed.wrapping_add(i as u64);
                settle(
                    &src,
                    (|| {
                        let mut r = sweep_rows(&src, x, &grid)?;
                        let p = metric_profile_check(x, &grid, &opts)?;
                        r.extend(p.rows.iter().map(|m| src.metric_row("metric_profile_check", m)));
                        Ok(r)
                    })(),
                )
            });
            rows.extend(per.into_iter().flatten());
            if let MetricGroup::Word(w) = &mg {
                let base = jobs.len();
                let idx: Vec<usize> = (0..embedded.len()).collect();
                let per = par::map(&idx, |&i| {
                    let src = RowSource {
                        suite: &spec.name,
                        group: &label,
                        instance: base + i,
                        label: &embedded[i].label,
                    };
                    settle(&src, embedded_energy_rows(&src, w, &embedded[i].set))
                });
                rows.extend(per.into_iter().flatten());
            }
        }
    }
    Ok(rows)
}

/// On a word metric the scale 1/2 lies below the gap, so the approximate
/// energy of an embedded set equals its discrete energy.
fn embedded_energy_rows(src: &RowSource, w: &WordMetric, a: &MSet) -> approx_groups::Result<Vec<ReportRow>> {
    let x = MetricCloud::from_set(w, a)?;
    let approx = approx_energy(&x, &x, 0.5)?.value as u128;
    let exact = energy(a, a)?.value();
    Ok(vec![src.equality(
        "approx_energy",
        "approx E_eps(A,A) = E(A,A) at eps=0.5",
        approx,
        exact,
    )])
}

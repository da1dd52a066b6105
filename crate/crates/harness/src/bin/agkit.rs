use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agkit::suites::{heisenberg_from, parse_metrics, parse_scales, standard_heisenberg, sweep_rows, trace_rows, DEFAULT_SCALES};
use agkit::{generate_set, run_one, run_suite, Report, RowSource, SetFamilySpec, SuiteConfig, SuiteSpec, SUITES};
use anyhow::{bail, Context, Result};
use approx_groups::bsg::{bsg_extract, infer_bsg_k};
use approx_groups::entropy::{entropy_report, MetricCloud, Region};
use approx_groups::heisenberg::{heisen_inverse, verify_inverse_converse};
use approx_groups::rational::{display, parse_rational, ratio};
use approx_groups::setcalc::power;
use approx_groups::{Elem, FiniteGroup, MSet, Rational};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agkit", version, about = "Exact product-set experiments over finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a group.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Generate a set from a family.
    Set {
        #[command(subcommand)]
        cmd: SetCmd,
    },
    /// Run one named suite from command-line parameters.
    Verify(VerifyArgs),
    /// Balog-Szemerédi-Gowers extraction.
    Bsg {
        #[command(subcommand)]
        cmd: BsgCmd,
    },
    /// Heisenberg inverse theorem.
    Heisen {
        #[command(subcommand)]
        cmd: HeisenCmd,
    },
    /// Covering numbers of point clouds.
    Entropy {
        #[command(subcommand)]
        cmd: EntropyCmd,
    },
    /// Run every suite of a configuration file.
    Suite {
        #[command(subcommand)]
        cmd: SuiteCmd,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Info {
        spec: String,
        /// List every element with its name.
        #[arg(long)]
        elements: bool,
    },
}

#[derive(Subcommand)]
enum SetCmd {
    Gen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        family: String,
        /// Seed for random families that carry none.
        #[arg(long)]
        seed: Option<u64>,
        /// Also print element names.
        #[arg(long)]
        names: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name.
    suite: String,
    #[arg(long = "group")]
    groups: Vec<String>,
    #[arg(long = "family")]
    families: Vec<String>,
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "eps")]
    eps: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Random subsets per group and seed.
    #[arg(long, default_value_t = 0)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    max_size: usize,
    /// Normal subgroup generators for `splitting`, joined by `+`.
    #[arg(long)]
    normal: Option<String>,
    #[arg(long = "prime")]
    primes: Vec<u32>,
    #[arg(long = "metric")]
    metrics: Vec<String>,
    #[arg(long, default_value_t = 500)]
    points: usize,
    #[arg(long)]
    samples: Option<usize>,
    /// Output stem; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BsgCmd {
    Run {
        #[arg(long)]
        group: String,
        /// Family of A.
        #[arg(long)]
        a: String,
        /// Family of B (defaults to A).
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "infer_k")]
        k: Option<String>,
        /// Use the smallest K with (|A||B|)^3 <= K^2 E(A,B)^2.
        #[arg(long)]
        infer_k: bool,
        /// Add per-stage cardinality rows.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HeisenCmd {
    Run {
        /// Standard Heisenberg group over Z/p.
        #[arg(long, conflicts_with = "group")]
        prime: Option<u32>,
        /// Any heisenberg(...) group spec.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        family: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to the measured |A^3|/|A|.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EntropyCmd {
    Sweep {
        /// `torus(d)`, `quaternions` or `word(gens=..)`.
        #[arg(long)]
        metric: String,
        /// Group for word metrics.
        #[arg(long)]
        group: Option<String>,
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Scales, repeated or `;`-separated.
        #[arg(long = "eps")]
        eps: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes `<out>.csv`, `<out>.json` and the sweep table `<out>_sweep.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_k(k: &Option<String>) -> Result<Option<Rational>> {
    k.as_deref().map(|s| parse_rational(s).map_err(Into::into)).transpose()
}

fn family_set(g: &FiniteGroup, family: &str, seed: Option<u64>) -> Result<MSet> {
    let mut f = SetFamilySpec::parse(family)?;
    if let Some(s) = seed {
        f = f.with_default_seed(s);
    }
    generate_set(g, &f)
}

/// Writes the report to `out`, or prints the CSV when there is no path, then
/// reports the summary on stderr.
fn finish(report: &Report, out: Option<&Path>) -> Result<ExitCode> {
    match out {
        Some(p) => {
            report.emit(p)?;
            eprintln!(
                "wrote {} and {}",
                p.with_extension("csv").display(),
                p.with_extension("json").display()
            );
        }
        None => print!("{}", report.to_csv_string()),
    }
    let s = report.summary();
    eprintln!(
        "{} rows: {} hard ({} failed), {} soft ({} not holding)",
        s.rows, s.hard, s.hard_failures, s.soft, s.soft_failures
    );
    for r in report.failures() {
        eprintln!(
            "FAIL [{} {} #{}] {}: {} > {}",
            r.suite, r.group, r.instance, r.inequality, r.lhs, r.rhs
        );
    }
    Ok(if report.passes() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn group_info(spec: &str, elements: bool) -> Result<ExitCode> {
    let g = FiniteGroup::parse(spec)?;
    println!("group: {}", g.label());
    println!("order: {}", g.order());
    println!("abelian: {}", g.is_abelian());
    println!("table: {}", g.has_table());
    match g.check_axioms() {
        Ok(()) => println!("axioms: ok"),
        Err(e) => println!("axioms: FAILED ({e})"),
    }
    if elements || g.order() <= 64 {
        for x in g.elements() {
            println!("{x}\t{}\tinverse {}", g.elem_name(x), g.inv(x));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let mut s = SuiteSpec::new(&a.suite);
    s.groups = a.groups;
    s.families = a.families.iter().map(|f| SetFamilySpec::parse(f)).collect::<Result<_>>()?;
    s.seeds = a.seeds;
    s.k = parse_k(&a.k)?;
    s.eps = a.eps.iter().flat_map(|e| agkit::config::split_top_level(e, ';')).collect();
    s.n = a.n;
    s.instances = a.instances;
    s.max_size = a.max_size;
    if let Some(n) = a.normal {
        s.normal = n
            .split('+')
            .map(|x| x.trim().parse::<Elem>().context("bad normal generator"))
            .collect::<Result<_>>()?;
    }
    s.primes = a.primes;
    s.metrics = a.metrics;
    s.points = a.points;
    s.samples = a.samples;
    if !SUITES.contains(&s.name.as_str()) {
        bail!("unknown suite `{}` (known: {})", s.name, SUITES.join(", "));
    }
    let mut report = Report::new();
    report.extend(run_one(&s)?);
    report.sort();
    finish(&report, a.out.as_deref())
}

#[allow(clippy::too_many_arguments)]
fn bsg_run(
    group: &str,
    a: &str,
    b: Option<&str>,
    seed: Option<u64>,
    k: &Option<String>,
    trace: bool,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let g = FiniteGroup::parse(group)?;
    let sa = family_set(&g, a, seed)?;
    let sb = match b {
        Some(b) => family_set(&g, b, seed)?,
        None => sa.clone(),
    };
    let k = match parse_k(k)? {
        Some(k) => k,
        None => infer_bsg_k(&sa, &sb)?,
    };
    let label = format!("A={a}; B={}; K={}", b.unwrap_or(a), display(&k));
    let src = RowSource {
        suite: "bsg",
        group: g.label(),
        instance: 0,
        label: &label,
    };
    let r = bsg_extract(&sa, &sb, &k)?;
    let mut report = Report::new();
    report.extend(src.ledger("bsg_extract", &r.ledger));
    if trace {
        report.extend(trace_rows(&src, &r));
    }
    finish(&report, out)
}

fn heisen_run(
    prime: Option<u32>,
    group: Option<String>,
    family: &str,
    seed: Option<u64>,
    k: &Option<String>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let spec = match (prime, group) {
        (Some(p), None) => standard_heisenberg(p),
        (None, Some(g)) => g,
        _ => bail!("give exactly one of --prime or --group"),
    };
    let hg = heisenberg_from(&spec)?;
    let a = family_set(&hg.group, family, seed)?;
    let k = match parse_k(k)? {
        Some(k) => k,
        None => ratio(power(&a, 3)?.len() as u64, a.len() as u64),
    };
    let label = format!("{family}; K={}", display(&k));
    let src = RowSource {
        suite: "heisenberg",
        group: hg.group.label(),
        instance: 0,
        label: &label,
    };
    let w = heisen_inverse(&hg, &a, &k)?;
    let mut report = Report::new();
    report.extend(src.ledger("heisen_inverse", &w.ledger));
    report.extend(src.ledger("converse", &verify_inverse_converse(&hg, &w, &a)?));
    eprintln!("|A| = {}, |A~| = {}, K~ = {}", a.len(), w.a_tilde.len(), display(&w.k_tilde));
    finish(&report, out)
}

fn entropy_sweep(metric: &str, group: Option<String>, points: usize, eps: &[String], seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let groups: Vec<String> = group.into_iter().collect();
    let metrics = parse_metrics(metric, &groups)?;
    let eps: Vec<String> = eps.iter().flat_map(|e| agkit::config::split_top_level(e, ';')).collect();
    let grid = parse_scales(&eps, &DEFAULT_SCALES)?;
    let mg = metrics.into_iter().next().expect("one metric");
    let x = MetricCloud::random_in_region(&mg, Region::Whole, points, seed)?;
    let label = format!("random(points={points},seed={seed})");
    let mg_label = mg.label();
    let src = RowSource {
        suite: "entropy",
        group: &mg_label,
        instance: 0,
        label: &label,
    };
    let mut report = Report::new();
    report.extend(sweep_rows(&src, &x, &grid)?);
    if let Some(p) = out {
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let sweep = p.with_file_name(format!("{stem}_sweep.csv"));
        if let Some(dir) = sweep.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::fs::File::create(&sweep).with_context(|| format!("creating {}", sweep.display()))?;
        entropy_report(&x, &grid)?.write_csv(file)?;
    }
    finish(&report, out)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Group {
            cmd: GroupCmd::Info { spec, elements },
        } => group_info(&spec, elements),
        Command::Set {
            cmd: SetCmd::Gen {
                group,
                family,
                seed,
                names,
            },
        } => {
            let g = FiniteGroup::parse(&group)?;
            let a = family_set(&g, &family, seed)?;
            for x in a.iter() {
                if names {
                    println!("{x}\t{}", g.elem_name(x));
                } else {
                    println!("{x}");
                }
            }
            eprintln!("|A| = {}", a.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => verify(a),
        Command::Bsg {
            cmd:
                BsgCmd::Run {
                    group,
                    a,
                    b,
                    seed,
                    k,
                    infer_k: _,
                    trace,
                    out,
                },
        } => bsg_run(&group, &a, b.as_deref(), seed, &k, trace, out.as_deref()),
        Command::Heisen {
            cmd:
                HeisenCmd::Run {
                    prime,
                    group,
                    family,
                    seed,
                    k,
                    out,
                },
        } => heisen_run(prime, group, &family, seed, &k, out.as_deref()),
        Command::Entropy {
            cmd:
                EntropyCmd::Sweep {
                    metric,
                    group,
                    points,
                    eps,
                    seed,
                    out,
                },
        } => entropy_sweep(&metric, group, points, &eps, seed, out.as_deref()),
        Command::Suite {
            cmd: SuiteCmd::Run { config, out },
        } => {
            let cfg = SuiteConfig::load(&config)?;
            let report = run_suite(&cfg)?;
            let out = out.or(cfg.out);
            finish(&report, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spread_coloring::audit::{
    spread_report, ColoringSampler, PipelineSampler, RandomGreedySampler, SlackGreedySampler, TestFamily,
    UniformSampler,
};
use spread_coloring::decompose::{sparse_dense_decompose, verify_decomposition};
use spread_coloring::graph::gen_random_regular;
use spread_coloring::greedy::{build_counterexample, CounterexampleKind, DEFAULT_ENUMERATION_CAP};
use spread_coloring::par::{map_indexed, trial_rng};
use spread_coloring::thresholds::{cost_bruteforce, expense, sparsification_scan, Hypergraph, DEFAULT_COLORABILITY_CAP};
use spread_coloring::{Graph, ListAssignment, SpreadColorer};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "spreadcol", version, about = "Spread random (D+1)-colorings and their audits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent trials (1 runs sequentially).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    theta_prime: Option<f64>,
    #[arg(long, global = true)]
    zeta0: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    k_out: Option<usize>,
    #[arg(long, global = true)]
    max_tries: Option<usize>,
    #[arg(long, global = true)]
    d_min: Option<usize>,
}

#[derive(Debug, Args)]
struct GraphSource {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["n", "d"])]
    graph: Option<PathBuf>,
    /// Vertices of a random regular graph drawn from the seed.
    #[arg(long, requires = "d")]
    n: Option<usize>,
    #[arg(long = "D", requires = "n")]
    d: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplerKind {
    Pipeline,
    Uniform,
    RandomGreedy,
    SlackGreedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Singletons,
    Pairs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random regular graph as an edge list.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long = "D")]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sparse-dense decomposition with its verification report.
    Decompose {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pipeline colorings, one per seed stream.
    Sample {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spread report of a sampler.
    Audit {
        #[arg(long, value_enum, default_value_t = SamplerKind::Pipeline)]
        sampler: SamplerKind,
        #[command(flatten)]
        source: GraphSource,
        /// Audit the uniform distribution of a named counterexample instead.
        #[arg(long, conflicts_with_all = ["graph", "n"])]
        counterexample: Option<String>,
        #[arg(long = "ce-D", default_value_t = 3)]
        ce_d: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Family::Pairs)]
        family: Family,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Exit with status 1 when the configured ceilings are exceeded.
        #[arg(long)]
        enforce: bool,
    },
    /// Exact probabilities on the instances where simple samplers fail.
    Counterexample {
        kind: String,
        #[arg(long = "D")]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Colorability under random k-sublists, per k.
    Sparsify {
        #[command(flatten)]
        source: GraphSource,
        /// Comma-separated list sizes; defaults to 2, 4, ... and D+1.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_COLORABILITY_CAP)]
        cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expense and cost of a hypergraph file.
    Cost {
        #[arg(long)]
        hypergraph: PathBuf,
    },
}

/// Bad input rather than a failed run.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn is_usage(e: &anyhow::Error) -> bool {
    use spread_coloring::Error as E;
    e.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<E>(),
                Some(E::InvalidParameter(_) | E::InvalidGraph(_) | E::InvalidVertex { .. } | E::Parse(_) | E::Io(_) | E::Json(_))
            )
            || c.is::<std::io::Error>()
            || c.is::<serde_json::Error>()
    })
}

fn resolve_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if g.jobs.is_some() {
        cfg.jobs = g.jobs;
    }
    let p = &mut cfg.params;
    if let Some(x) = g.eps {
        p.eps = x;
    }
    if g.theta_prime.is_some() {
        p.theta_prime = g.theta_prime;
    }
    if g.zeta0.is_some() {
        p.zeta0_override = g.zeta0;
    }
    if g.eta.is_some() {
        p.eta_override = g.eta;
    }
    if let Some(x) = g.k_out {
        p.k_out = x;
        p.k_max = p.k_max.max(x);
    }
    if let Some(x) = g.max_tries {
        p.max_tries = x;
    }
    if let Some(x) = g.d_min {
        p.d_min = x;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn load_graph(source: &GraphSource, seed: u64) -> Result<Graph> {
    match (&source.graph, source.n, source.d) {
        (Some(path), _, _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Graph::parse_edge_list(&text)?)
        }
        (None, Some(n), Some(d)) => Ok(gen_random_regular(n, d, seed)?),
        _ => Err(usage("give either --graph FILE or --n N --D D")),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Serialize)]
struct DecomposeOutput {
    decomposition: spread_coloring::decompose::Decomposition,
    all_pass: bool,
    failures: usize,
    sparse_margin: f64,
    outside_margin: f64,
    missing_margin: f64,
}

#[derive(Serialize)]
struct SampleSummary {
    samples: usize,
    proper: usize,
    flagged: usize,
}

#[derive(Serialize)]
struct CostOutput {
    expense: f64,
    cost: f64,
    cost_exact: String,
    cover: Vec<Vec<String>>,
}

fn audit_sampler(
    kind: SamplerKind,
    source: &GraphSource,
    counterexample: Option<&str>,
    ce_d: usize,
    cfg: &RunConfig,
) -> Result<Box<dyn ColoringSampler>> {
    if let Some(name) = counterexample {
        let kind_ce: CounterexampleKind = name.parse()?;
        if !matches!(kind, SamplerKind::Uniform) {
            return Err(usage("--counterexample needs --sampler uniform"));
        }
        let ce = build_counterexample(kind_ce, ce_d)?;
        return Ok(Box::new(UniformSampler::enumerate(&ce.graph, &ce.lists, DEFAULT_ENUMERATION_CAP)?));
    }
    let g = load_graph(source, cfg.seed)?;
    Ok(match kind {
        SamplerKind::Pipeline => Box::new(PipelineSampler::new(SpreadColorer::new(&g, cfg.pipeline(), cfg.seed)?)),
        SamplerKind::Uniform => {
            let lists = ListAssignment::uniform(g.n(), g.max_degree() + 1);
            Box::new(UniformSampler::enumerate(&g, &lists, DEFAULT_ENUMERATION_CAP)?)
        }
        SamplerKind::RandomGreedy => Box::new(RandomGreedySampler::new(g)),
        SamplerKind::SlackGreedy => {
            let order = (0..g.n()).collect();
            Box::new(SlackGreedySampler::new(g, order))
        }
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = resolve_config(&cli.global)?;
    #[cfg(feature = "parallel")]
    if let Some(jobs) = cfg.jobs {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let exec = cfg.execution();
    match cli.command {
        Command::Gen { n, d, out } => {
            let g = gen_random_regular(n, d, cfg.seed)?;
            emit(out.as_deref(), &g.to_edge_list())?;
        }
        Command::Decompose { source, out } => {
            let g = load_graph(&source, cfg.seed)?.regularize();
            let dec = sparse_dense_decompose(&g, cfg.params.eps)?;
            let report = verify_decomposition(&g, &dec);
            let output = DecomposeOutput {
                all_pass: report.all_pass(),
                failures: report.failures(),
                sparse_margin: report.sparse_margin,
                outside_margin: report.outside_margin,
                missing_margin: report.missing_margin,
                decomposition: dec,
            };
            emit(out.as_deref(), &to_json(&output)?)?;
        }
        Command::Sample { source, seeds, out } => {
            let g = load_graph(&source, cfg.seed)?;
            let colorer = SpreadColorer::new(&g, cfg.pipeline(), cfg.seed)?
                .with_execution(spread_coloring::Execution::Sequential);
            let results = map_indexed(exec, seeds, |i| colorer.sample(&mut trial_rng(cfg.seed, i as u64)))
                .into_iter()
                .collect::<spread_coloring::Result<Vec<_>>>()?;
            let proper = results.iter().filter(|r| r.coloring.is_total() && r.coloring.is_proper(&g)).count();
            let flagged = results.iter().filter(|r| r.no_spread_guarantee).count();
            emit(out.as_deref(), &to_json(&results)?)?;
            let summary = SampleSummary { samples: seeds, proper, flagged };
            eprintln!("{}", serde_json::to_string(&summary)?);
            if proper != seeds {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Audit { sampler, source, counterexample, ce_d, trials, family, csv, json, enforce } => {
            let s = audit_sampler(sampler, &source, counterexample.as_deref(), ce_d, &cfg)?;
            let family = match family {
                Family::Singletons => TestFamily::Singletons,
                Family::Pairs => TestFamily::default_for(s.n()),
            };
            let report = spread_report(s.as_ref(), &family, trials, cfg.seed, exec)?;
            emit(csv.as_deref(), &report.to_csv())?;
            let summary = to_json(&report.summary)?;
            match json {
                Some(p) => emit(Some(&p), &summary)?,
                None => eprint!("{summary}"),
            }
            let within = report.summary.c_hat <= cfg.ceilings.c_hat
                && report.summary.flagged_fraction <= cfg.ceilings.flagged_fraction;
            if enforce && !within {
                eprintln!(
                    "ceiling exceeded: C_hat = {} (limit {}), flagged = {} (limit {})",
                    report.summary.c_hat, cfg.ceilings.c_hat, report.summary.flagged_fraction, cfg.ceilings.flagged_fraction
                );
                return Ok(ExitCode::from(1));
            }
        }
        Command::Counterexample { kind, d, cap } => {
            let kind: CounterexampleKind = kind.parse()?;
            let report = build_counterexample(kind, d)?.evaluate(cap)?;
            print!("{}", to_json(&report)?);
            if !report.holds {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sparsify { source, k, trials, cap, out } => {
            let g = load_graph(&source, cfg.seed)?;
            let top = g.max_degree() + 1;
            let ks = if k.is_empty() {
                let mut ks: Vec<usize> = (2..top).step_by(2).collect();
                ks.push(top);
                ks
            } else {
                k
            };
            let curve = sparsification_scan(&g, &ks, trials, cfg.seed, cap, exec)?;
            emit(out.as_deref(), &curve.to_csv())?;
            eprintln!("monotone within CI: {}", curve.monotone_within_ci());
        }
        Command::Cost { hypergraph } => {
            let text = std::fs::read_to_string(&hypergraph)
                .with_context(|| format!("reading {}", hypergraph.display()))?;
            let (h, q) = Hypergraph::from_json(&text)?;
            let cost = cost_bruteforce(&h, &q)?;
            let names = h.ground();
            let output = CostOutput {
                expense: expense(&h, &q)?,
                cost: cost.to_f64(),
                cost_exact: cost.value.to_string(),
                cover: cost.cover.iter().map(|b| b.iter().map(|&x| names[x].clone()).collect()).collect(),
            };
            print!("{}", to_json(&output)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}

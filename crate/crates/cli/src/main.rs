use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use expandlab::constructions::{self, graphical_tuple, TupleLog};
use expandlab::dimension::{self, Normalization};
use expandlab::error::Error;
use expandlab::field::FieldSpec;
use expandlab::par;
use expandlab::graph::{self, Graph, GraphMetrics};
use expandlab::quantum;
use expandlab::report::{parse_tuple, to_canonical_json, tuple_to_json};
use expandlab::tuple::MatrixTuple;
use expandlab::verify::{self, SuiteReport};

const SCHEMAS: &str = "\
FILE FORMATS

Graph file (plain text):
  first line   n m
  then m lines u v        1-indexed, unordered, no loops or duplicates

Tuple file (JSON):
  {
    \"field\": \"complex\" | {\"prime\": p},
    \"n\": n,
    \"matrices\": [M_1, ..., M_d],      each M_i is a list of n rows
    \"metadata\": {...}                 optional
  }
  Complex entries are [re, im] pairs or plain numbers; prime-field entries
  are integers in 0..p. Graphical tuples carry metadata.graphical.degree,
  which `--normalization auto` uses.

Reports are canonical JSON: sorted keys, exact rationals as \"p/q\" strings,
floats with 17 significant digits. Every report embeds its resolved config.

EXIT CODES
  0 success, 1 a verification check failed, 2 usage or input error.

ENVIRONMENT
  EXPANDLAB_THREADS   cap on worker threads";

#[derive(Parser, Debug)]
#[command(name = "expandlab", version, about = "Expansion parameters of graphs and matrix tuples", after_long_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact edge and vertex expansion and spectral expansion of a regular graph.
    Graph(GraphArgs),
    /// Quantum and dimension expansion of a matrix tuple.
    Tuple(TupleArgs),
    /// Emit a tuple JSON.
    #[command(subcommand)]
    Construct(Construct),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Run an experiment sweep.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Args, Debug)]
struct GraphArgs {
    file: PathBuf,
    #[arg(long, default_value = "h,mu,lambda")]
    metrics: String,
    #[arg(long, default_value_t = graph::DEFAULT_EXHAUSTIVE_LIMIT)]
    limit: usize,
}

#[derive(Args, Debug)]
struct TupleArgs {
    file: PathBuf,
    /// Any of lambda, hq, sp, mu, hd.
    #[arg(long, default_value = "lambda")]
    metrics: String,
    /// Schatten exponent for `sp`.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// auto, tuple, or a positive integer.
    #[arg(long, default_value = "auto")]
    normalization: String,
    /// Relative rank threshold over C.
    #[arg(long)]
    rank_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Construct {
    /// Graphical tuple of a graph file.
    Graphical {
        #[arg(long)]
        graph: PathBuf,
        /// `complex` or a prime p.
        #[arg(long, default_value = "complex")]
        field: String,
        /// Drop the 1/sqrt(degree) scaling (required over prime fields).
        #[arg(long)]
        unnormalized: bool,
    },
    /// Fractional power U^s through the principal Hermitian logarithm.
    Power {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        s: f64,
    },
    /// Independent Haar unitaries.
    Haar {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Unitaries whose eigenbasis stays close to the standard basis.
    Localized {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// d copies of the identity.
    Identity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// eq16, normrank, prop31, witness, pi, thm15, thm16, cor13, prop19,
    /// pointwise, sandwich, cheeger or kn.
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Tuple JSON for tuple suites (default: a Haar tuple).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Graph file for graph suites.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Prime field for graph suites.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    /// Grid resolution for the C P^1 searches.
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Gap collapse of U^s for a Haar tuple.
    Separation {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,0.3,0.1,0.03,0.01,0.003")]
        s: Vec<f64>,
        #[command(flatten)]
        common: ExperimentCommon,
    },
    /// Localized unitaries stay poor quantum expanders for every s.
    Localized {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,10")]
        s: Vec<f64>,
        #[command(flatten)]
        common: ExperimentCommon,
    },
}

#[derive(Args, Debug)]
struct ExperimentCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Also write per-s rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

/// A finished run: JSON to print and whether every check passed.
struct Outcome {
    report: Value,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = match std::env::var("EXPANDLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Some(k),
            _ => {
                eprintln!("error: EXPANDLAB_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        },
        Err(_) => None,
    };
    let result = match threads {
        Some(k) => par::with_threads(k, || run(cli.command)),
        None => run(cli.command),
    };
    match result.and_then(|o| Ok((to_canonical_json(&o.report)?, o.passed))) {
        Ok((text, passed)) => {
            print!("{text}");
            ExitCode::from(if passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn load_tuple(path: &Path) -> Result<MatrixTuple, CliError> {
    Ok(parse_tuple(&read(path)?)?)
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    Ok(Graph::parse(&read(path)?)?)
}

fn parse_field(text: &str) -> Result<FieldSpec, CliError> {
    if text == "complex" {
        return Ok(FieldSpec::complex());
    }
    let p = text
        .parse::<u64>()
        .map_err(|_| CliError::Usage(format!("field must be 'complex' or a prime, got '{text}'")))?;
    Ok(FieldSpec::prime(p)?)
}

fn metric_list<'a>(text: &'a str, allowed: &[&str]) -> Result<Vec<&'a str>, CliError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    for m in &items {
        if !allowed.contains(m) {
            return Err(CliError::Usage(format!(
                "unknown metric '{m}', expected one of {}",
                allowed.join(",")
            )));
        }
    }
    Ok(items)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn with_config(mut body: Map<String, Value>, config: Value) -> Value {
    body.insert("config".into(), config);
    Value::Object(body)
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Graph(a) => run_graph(a),
        Command::Tuple(a) => run_tuple(a),
        Command::Construct(c) => run_construct(c),
        Command::Verify(a) => run_verify(a),
        Command::Experiment(e) => run_experiment(e),
    }
}

fn run_graph(a: GraphArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.file)?;
    let metrics = metric_list(&a.metrics, &["h", "mu", "lambda"])?;
    let sel = GraphMetrics {
        h: metrics.contains(&"h"),
        mu: metrics.contains(&"mu"),
        lambda: metrics.contains(&"lambda"),
    };
    let rep = graph::expansion_report(&g, sel, a.limit)?;
    let mut body = Map::new();
    body.insert("n".into(), json!(rep.n));
    body.insert("degree".into(), json!(rep.degree));
    if let Some(h) = &rep.h {
        body.insert("h".into(), json!(h.value.to_string()));
        body.insert("h_witness".into(), json!(h.witness));
    }
    if let Some(mu) = &rep.mu {
        body.insert("mu".into(), json!(mu.value.to_string()));
        body.insert("mu_witness".into(), json!(mu.witness));
    }
    if let Some(sp) = &rep.spectral {
        body.insert("lambda_eig".into(), json!(sp.lambda_eig));
        body.insert("lambda_sv".into(), json!(sp.lambda_sv));
    }
    let config = json!({
        "command": "graph",
        "input": a.file.display().to_string(),
        "metrics": metrics,
        "limit": a.limit,
    });
    Ok(Outcome { report: with_config(body, config), passed: true })
}

fn run_tuple(a: TupleArgs) -> Result<Outcome, CliError> {
    let mut b = load_tuple(&a.file)?;
    if let Some(tol) = a.rank_tol {
        b.set_rank_tol(tol)?;
    }
    let metrics = metric_list(&a.metrics, &["lambda", "hq", "sp", "mu", "hd"])?;
    let norm = Normalization::parse(&a.normalization)?;
    let mut body = Map::new();
    body.insert("n".into(), json!(b.n()));
    body.insert("d".into(), json!(b.d()));
    body.insert("fingerprint".into(), json!(b.fingerprint()));
    if metrics.contains(&"lambda") {
        let q = quantum::quantum_expansion(&b)?;
        body.insert("gap".into(), json!(q.gap));
        body.insert("lambda2_sv".into(), json!(q.lambda2_sv));
        body.insert("spectrum".into(), json!(q.spectrum));
    }
    if metrics.contains(&"hq") {
        let est = quantum::quantum_edge_bracket(&b, a.budget, a.seed)?;
        body.insert("hq".into(), estimate_json(&est));
    }
    if metrics.contains(&"sp") {
        let est = quantum::schatten_edge_bracket(&b, a.p, a.budget, a.seed, &[])?;
        body.insert("sp".into(), estimate_json(&est));
    }
    let mut resolved = Value::Null;
    if metrics.contains(&"mu") || metrics.contains(&"hd") {
        let k = norm.resolve(&b)?;
        resolved = json!(k);
        let rep = dimension::dimension_report(&b, k, a.budget, a.seed)?;
        body.insert("exact".into(), json!(rep.exact));
        if metrics.contains(&"mu") {
            body.insert("mu".into(), to_value(&rep.mu));
        }
        if metrics.contains(&"hd") {
            body.insert("hd".into(), to_value(&rep.h_d));
        }
    }
    let config = json!({
        "command": "tuple",
        "input": a.file.display().to_string(),
        "metrics": metrics,
        "p": a.p,
        "budget": a.budget,
        "seed": a.seed,
        "normalization": a.normalization,
        "normalization_resolved": resolved,
        "rank_tol": b.field().rank_tol(),
    });
    Ok(Outcome { report: with_config(body, config), passed: true })
}

fn estimate_json(e: &quantum::ExpansionEstimate) -> Value {
    json!({
        "lower": e.lower_bound,
        "best": e.best_value,
        "witness": to_value(&e.witness),
        "dims_searched": e.dims_searched,
        "evaluations": e.evaluations,
    })
}

fn run_construct(c: Construct) -> Result<Outcome, CliError> {
    let tuple = match c {
        Construct::Graphical { graph, field, unnormalized } => {
            let g = load_graph(&graph)?;
            graphical_tuple(&g, parse_field(&field)?, !unnormalized)?
        }
        Construct::Power { input, s } => TupleLog::new(&load_tuple(&input)?)?.power(s)?,
        Construct::Haar { n, d, seed } => constructions::haar_unitary_tuple(n, d, seed)?,
        Construct::Localized { n, d, eps, seed } => constructions::localized_unitary_tuple(n, d, eps, seed)?,
        Construct::Identity { n, d } => constructions::identity_tuple(n, d)?,
    };
    Ok(Outcome { report: tuple_to_json(&tuple), passed: true })
}

fn default_tuple(a: &VerifyArgs, n: usize, d: usize) -> Result<MatrixTuple, CliError> {
    match &a.input {
        Some(p) => load_tuple(p),
        None => Ok(constructions::haar_unitary_tuple(n, d, a.seed)?),
    }
}

fn run_verify(a: VerifyArgs) -> Result<Outcome, CliError> {
    let field = match a.p {
        Some(p) => FieldSpec::prime(p)?,
        None => FieldSpec::complex(),
    };
    let graph = a.graph.as_deref().map(load_graph).transpose()?;
    let rep: SuiteReport = match a.suite.as_str() {
        "eq16" => verify::eq16_identity_suite(&default_tuple(&a, 6, 3)?, a.trials, a.seed)?,
        "normrank" => verify::norm_rank_suite(&default_tuple(&a, 6, 3)?, a.trials, a.seed)?,
        "prop31" => verify::prop31_pointwise_suite(&default_tuple(&a, 6, 3)?, a.trials, a.seed)?,
        "witness" | "pi" => match (&graph, a.p) {
            (Some(g), Some(p)) => verify::graph_suites_exhaustive(g, p)?,
            (Some(g), None) if a.suite == "witness" => verify::witness_suite(g, field, a.trials, a.seed)?,
            (Some(g), None) => verify::pi_expansion_suite(g, field, a.trials, a.seed)?,
            (None, _) => verify::witness_battery(a.trials, a.seed)?,
        },
        "thm15" => match &graph {
            Some(g) => verify::thm15_spectrum_check(g)?,
            None => verify::thm15_battery(&verify::random_regular_graphs(20, 3, &[4, 6, 8], a.seed)?)?,
        },
        "thm16" => {
            let p = a.p.unwrap_or(2);
            match &graph {
                Some(g) => verify::thm16_exact_check(g, p)?,
                None => verify::thm16_battery(
                    &[Graph::complete(2), Graph::cycle(4), Graph::complete(4), Graph::cycle(6)],
                    p,
                )?,
            }
        }
        "cor13" => verify::cor13_consistency(&default_tuple(&a, 8, 3)?, a.budget, a.seed)?,
        "prop19" => verify::prop19_check(a.grid)?,
        "pointwise" => verify::pointwise_battery(a.trials, a.seed)?,
        "sandwich" => verify::dimension_sandwich_battery(a.trials, 5, 2, a.p.unwrap_or(2), a.seed)?,
        "cheeger" => verify::cheeger_battery(a.trials, 3, a.grid, a.seed)?,
        "kn" => verify::complete_graph_hq_bound(&[2, 3, 4, 5, 6], a.budget, a.seed)?,
        other => return Err(CliError::Usage(format!("unknown suite '{other}'"))),
    };
    let config = json!({
        "command": "verify",
        "suite": a.suite,
        "seed": a.seed,
        "trials": a.trials,
        "input": a.input.as_ref().map(|p| p.display().to_string()),
        "graph": a.graph.as_ref().map(|p| p.display().to_string()),
        "p": a.p,
        "budget": a.budget,
        "grid": a.grid,
    });
    let passed = rep.passed;
    let Value::Object(body) = to_value(&rep) else { unreachable!() };
    Ok(Outcome { report: with_config(body, config), passed })
}

fn run_experiment(e: Experiment) -> Result<Outcome, CliError> {
    let (value, passed, csv, path, config) = match e {
        Experiment::Separation { n, d, s, common } => {
            let rep = verify::separation_experiment(n, d, &s, common.seed, common.budget, common.trials)?;
            let config = json!({
                "command": "experiment separation", "n": n, "d": d, "s": s,
                "seed": common.seed, "budget": common.budget, "trials": common.trials,
            });
            (to_value(&rep), rep.passed, rep.to_csv(), common.csv, config)
        }
        Experiment::Localized { n, d, eps, s, common } => {
            let rep = verify::localized_experiment(n, d, eps, &s, common.seed, common.budget)?;
            let config = json!({
                "command": "experiment localized", "n": n, "d": d, "eps": eps, "s": s,
                "seed": common.seed, "budget": common.budget,
            });
            (to_value(&rep), rep.passed, rep.to_csv(), common.csv, config)
        }
    };
    if let Some(p) = path {
        write(&p, &csv)?;
    }
    let Value::Object(body) = value else { unreachable!() };
    Ok(Outcome { report: with_config(body, config), passed })
}

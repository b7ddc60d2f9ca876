use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use diffgraph::estimate::{self, AdjustOptions, DataKind, Dataset};
use diffgraph::figures::{figure_verdicts, verdict_table, verdict_table_json};
use diffgraph::simulate::{manifest, sample_compatible_pair, NoiseFamily};
use diffgraph::{DifferenceGraph, Effect, EffectQuery, Error, Registry, Verdict, VerdictKind};

/// Identify and estimate causal changes between two populations.
#[derive(Parser, Debug)]
#[command(name = "diffgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the total causal change with the graphical conditions.
    CheckTotal(QueryArgs),
    /// Decide the direct causal change with the graphical conditions.
    CheckDirect(QueryArgs),
    /// Decide the total causal change by enumerating compatible DAG pairs.
    OracleTotal(QueryArgs),
    /// Decide the direct causal change by enumerating compatible DAG pairs.
    OracleDirect(QueryArgs),
    /// Estimate P(y | do(x)) in one population from discrete data.
    EstimateTotal(EstimateArgs),
    /// Estimate the direct effect coefficient in one population from continuous data.
    EstimateDirect(EstimateArgs),
    /// Estimate the causal change between two populations.
    Change(ChangeArgs),
    /// Sample a pair of linear models compatible with a difference graph.
    Simulate(SimulateArgs),
    /// Verdict table for the six reference graphs.
    Figures {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Difference graph in edge-list format.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    exposure: String,
    #[arg(long)]
    outcome: String,
    /// Assume both populations share a topological order.
    #[arg(long)]
    shared_order: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Theorem,
    Oracle,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// CSV dataset with a header row.
    #[arg(long, visible_alias = "data1")]
    data: PathBuf,
    /// Add-α smoothing for the adjustment formula.
    #[arg(long, value_name = "ALPHA")]
    laplace: Option<f64>,
    /// How the adjustment set is chosen.
    #[arg(long, value_enum, default_value = "theorem")]
    method: Method,
}

#[derive(Args, Debug)]
struct ChangeArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    data1: PathBuf,
    #[arg(long)]
    data2: PathBuf,
    /// Discrete data: estimate the total causal change.
    #[arg(long, conflicts_with = "continuous", required_unless_present = "continuous")]
    discrete: bool,
    /// Continuous data: estimate the direct causal change.
    #[arg(long)]
    continuous: bool,
    #[arg(long, value_name = "ALPHA")]
    laplace: Option<f64>,
    #[arg(long, value_enum, default_value = "theorem")]
    method: Method,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Noise {
    Gaussian,
    Uniform,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    shared_order: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows per population.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    noise: Noise,
    /// Directory for population1.csv, population2.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

enum Outcome {
    Success,
    NotIdentifiable,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NotIdentifiable) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::CheckTotal(q) => check(&q, "theorem-total"),
        Command::CheckDirect(q) => check(&q, "theorem-direct"),
        Command::OracleTotal(q) => check(&q, "oracle-total"),
        Command::OracleDirect(q) => check(&q, "oracle-direct"),
        Command::EstimateTotal(a) => estimate_one(&a, Effect::Total),
        Command::EstimateDirect(a) => estimate_one(&a, Effect::Direct),
        Command::Change(a) => change(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Figures { json } => {
            let rows = figure_verdicts();
            if json {
                print_json(&verdict_table_json(&rows));
            } else {
                print!("{}", verdict_table(&rows));
            }
            Ok(Outcome::Success)
        }
    }
}

fn at(path: &Path, e: Error) -> String {
    format!("{}: {e}", path.display())
}

fn read_graph(path: &Path) -> Result<DifferenceGraph, String> {
    let text = fs::read_to_string(path).map_err(|e| at(path, e.into()))?;
    DifferenceGraph::parse(&text).map_err(|e| at(path, e))
}

fn read_data(path: &Path, kind: DataKind) -> Result<Dataset, String> {
    Dataset::from_csv_path(path, kind).map_err(|e| at(path, e))
}

fn verdict_for(q: &QueryArgs, strategy: &str) -> Result<Verdict, String> {
    let graph = read_graph(&q.graph)?;
    let query = EffectQuery::new(graph, &q.exposure, &q.outcome, q.shared_order).map_err(|e| e.to_string())?;
    let registry = Registry::with_defaults();
    let identifier = registry.get(strategy).map_err(|e| e.to_string())?;
    identifier.identify(&query).map_err(|e| e.to_string())
}

fn strategy_name(method: Method, effect: Effect) -> &'static str {
    match (method, effect) {
        (Method::Theorem, Effect::Total) => "theorem-total",
        (Method::Theorem, Effect::Direct) => "theorem-direct",
        (Method::Oracle, Effect::Total) => "oracle-total",
        (Method::Oracle, Effect::Direct) => "oracle-direct",
    }
}

fn print_json(doc: &Value) {
    println!("{}", serde_json::to_string_pretty(doc).expect("JSON values serialize"));
}

fn print_verdict(v: &Verdict) {
    println!("{}", v.describe());
    if let Some(witness) = &v.witness {
        println!("witness (no common admissible set):");
        for dag in witness {
            println!("  {dag}");
        }
    }
}

fn outcome_of(v: &Verdict) -> Outcome {
    if v.kind == VerdictKind::NotIdentifiable {
        Outcome::NotIdentifiable
    } else {
        Outcome::Success
    }
}

fn check(q: &QueryArgs, strategy: &str) -> Result<Outcome, String> {
    let v = verdict_for(q, strategy)?;
    if q.json {
        print_json(&v.to_json());
    } else {
        print_verdict(&v);
    }
    Ok(outcome_of(&v))
}

fn report_not_identifiable(v: &Verdict, json: bool) -> Outcome {
    if json {
        print_json(&json!({ "verdict": v.to_json() }));
    } else {
        print_verdict(v);
    }
    Outcome::NotIdentifiable
}

fn estimate_one(a: &EstimateArgs, effect: Effect) -> Result<Outcome, String> {
    let q = &a.query;
    let v = verdict_for(q, strategy_name(a.method, effect))?;
    if v.kind == VerdictKind::NotIdentifiable {
        return Ok(report_not_identifiable(&v, q.json));
    }
    match effect {
        Effect::Total => {
            let data = read_data(&a.data, DataKind::Discrete)?;
            let opts = AdjustOptions { laplace: a.laplace };
            let table =
                estimate::estimate_total(&v, &data, &q.exposure, &q.outcome, opts).map_err(|e| e.to_string())?;
            if q.json {
                print_json(&json!({ "verdict": v.to_json(), "estimate": table.to_json() }));
            } else {
                println!("{}", v.describe());
                print!("{}", table.to_text());
            }
        }
        Effect::Direct => {
            let data = read_data(&a.data, DataKind::Continuous)?;
            let alpha = estimate::estimate_direct(&v, &data, &q.exposure, &q.outcome).map_err(|e| e.to_string())?;
            if q.json {
                print_json(&json!({ "verdict": v.to_json(), "estimate": alpha }));
            } else {
                println!("{}", v.describe());
                println!("coefficient  {alpha:.6}");
            }
        }
    }
    Ok(Outcome::Success)
}

fn change(a: &ChangeArgs) -> Result<Outcome, String> {
    let q = &a.query;
    let (effect, kind) = if a.discrete {
        (Effect::Total, DataKind::Discrete)
    } else {
        (Effect::Direct, DataKind::Continuous)
    };
    let v = verdict_for(q, strategy_name(a.method, effect))?;
    if v.kind == VerdictKind::NotIdentifiable {
        return Ok(report_not_identifiable(&v, q.json));
    }
    let d1 = read_data(&a.data1, kind)?;
    let d2 = read_data(&a.data2, kind)?;
    let opts = AdjustOptions { laplace: a.laplace };
    let report = estimate::causal_change(&v, &d1, &d2, &q.exposure, &q.outcome, opts).map_err(|e| e.to_string())?;
    if q.json {
        print_json(&json!({ "verdict": v.to_json(), "report": report.to_json() }));
    } else {
        println!("{}", v.describe());
        print!("{}", report.to_text());
    }
    Ok(Outcome::Success)
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, String> {
    if a.n == 0 {
        return Err("--n must be at least 1".to_string());
    }
    let d = read_graph(&a.graph)?;
    let mut pair = sample_compatible_pair(&d, a.shared_order, a.seed).map_err(|e| e.to_string())?;
    pair.set_noise(match a.noise {
        Noise::Gaussian => NoiseFamily::Gaussian,
        Noise::Uniform => NoiseFamily::Uniform,
    });
    let (d1, d2) = pair.sample_datasets(a.n, a.seed);
    fs::create_dir_all(&a.out).map_err(|e| at(&a.out, e.into()))?;
    for (name, data) in [("population1.csv", &d1), ("population2.csv", &d2)] {
        let path = a.out.join(name);
        let file = fs::File::create(&path).map_err(|e| at(&path, e.into()))?;
        data.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| at(&path, e))?;
    }
    let doc = manifest(&pair, a.shared_order, a.seed, a.n);
    let path = a.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| at(&path, e.into()))?;
    if a.json {
        print_json(&doc);
    } else {
        println!("population 1: {}", pair.scm1.dag());
        println!("population 2: {}", pair.scm2.dag());
        println!("wrote {} rows per population to {}", a.n, a.out.display());
    }
    Ok(Outcome::Success)
}

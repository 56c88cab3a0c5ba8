//! Command-line front end.
//!
//! Exit codes: 0 success, 2 no route, 64 usage or input error, 70 internal
//! or capacity error (and a failed `verify`).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecoroute_core::crptc::{export_milp, MilpConfig};
use ecoroute_core::netmodel::{generate_synthetic, GraphKind, SyntheticConfig};
use ecoroute_core::{Algorithm, EnergyParams, Error, Network, NodeId, Query};

use crate::batch::{self, BenchConfig, CompareConfig};
use crate::format::{load_network, load_params, write_text, FormatError, NetworkFile};
use crate::report::{route_geojson, SolutionReport};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_ROUTE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NoRoute,
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::NoRoute => EXIT_NO_ROUTE,
            Self::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoRoute { .. } => Self::NoRoute,
            Error::Capacity { .. } => Self::Internal(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Network {
                source: Error::Capacity { .. },
                ..
            } => Self::Internal(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ecoroute",
    version,
    about = "Energy-cost routing for plug-in hybrid vehicles"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic network file.
    Gen(GenArgs),
    /// Solve one origin-destination query.
    Route(RouteArgs),
    /// Run several algorithms over sampled O-D pairs and budgets.
    Compare(CompareArgs),
    /// Cross-check the solvers against brute force on small random graphs.
    Verify(VerifyArgs),
    /// Time the solvers over sampled O-D pairs.
    Bench(BenchArgs),
    /// Write the joint route and power-train model in LP format.
    ExportMilp(MilpArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Random,
}

impl From<Kind> for GraphKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Grid => GraphKind::Grid,
            Kind::Random => GraphKind::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "grid")]
    kind: Kind,
    #[arg(long)]
    nodes: usize,
    /// Mean total (in + out) degree.
    #[arg(long, default_value_t = 4.4)]
    avg_degree: f64,
    /// Category probabilities as high,medium,low.
    #[arg(long, value_parser = parse_mix, default_value = "0.2,0.3,0.5")]
    mix: [f64; 3],
    #[arg(long, default_value_t = 1)]
    slots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamsArg {
    /// JSON file overriding prices and fuel economies.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RouteArgs {
    #[arg(long)]
    net: PathBuf,
    /// External id of the origin node.
    #[arg(long)]
    from: i64,
    /// External id of the destination node.
    #[arg(long)]
    to: i64,
    #[arg(long, value_parser = parse_algorithm, default_value = "crptc")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0.0)]
    budget_kwh: f64,
    /// Time weight; above zero selects the time-weighted variant.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    slot: usize,
    #[arg(long, requires = "beta_energy")]
    beta_time: Option<f64>,
    #[arg(long, requires = "beta_time")]
    beta_energy: Option<f64>,
    /// Also write the route as GeoJSON; needs node coordinates.
    #[arg(long)]
    geojson: Option<PathBuf>,
    #[command(flatten)]
    params: ParamsArg,
    /// Omit wall time so output is byte-stable.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct NetSource {
    #[arg(long, conflicts_with = "gen_nodes", required_unless_present = "gen_nodes")]
    net: Option<PathBuf>,
    /// Generate a random network of this size instead of loading one.
    #[arg(long)]
    gen_nodes: Option<usize>,
    #[arg(long, default_value_t = 4.4)]
    gen_degree: f64,
    #[arg(long, default_value_t = 0)]
    slot: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    source: NetSource,
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2.5,5.7")]
    budgets: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "fastest,cdf,bilevel,crptc")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 12)]
    max_nodes: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,1")]
    budgets: Vec<f64>,
    #[command(flatten)]
    params: ParamsArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    source: NetSource,
    #[arg(long, default_value_t = 20)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    budget_kwh: f64,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "fastest,cdf,bilevel")]
    algos: Vec<Algorithm>,
    #[command(flatten)]
    params: ParamsArg,
}

#[derive(Debug, Args)]
struct MilpArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    from: i64,
    #[arg(long)]
    to: i64,
    #[arg(long, default_value_t = 0.0)]
    budget_kwh: f64,
    #[arg(long, default_value_t = 0)]
    slot: usize,
    #[arg(long, default_value_t = MilpConfig::default().max_links)]
    max_links: usize,
    #[command(flatten)]
    params: ParamsArg,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| {
        let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
        format!("unknown algorithm '{s}', expected one of {}", names.join(", "))
    })
}

fn parse_mix(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three comma-separated values, got {}", v.len()))
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(CliError::NoRoute) => {
            let _ = writeln!(out, "{{\"error\":\"no_route\"}}");
            EXIT_NO_ROUTE
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Internal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Route(a) => cmd_route(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::ExportMilp(a) => cmd_export_milp(a, out),
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text).map_err(|e| CliError::Internal(e.to_string())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = SyntheticConfig::new(a.kind.into(), a.nodes, a.avg_degree, a.mix, a.seed);
    cfg.slots = a.slots;
    let net = generate_synthetic(&cfg)?;
    emit(&NetworkFile::from_network(&net).to_json(), a.output.as_deref(), out)
}

fn node_by_external(net: &Network, id: i64) -> Result<NodeId, CliError> {
    net.node_ids()
        .find(|&n| net.node(n).external_id == id)
        .ok_or_else(|| CliError::Usage(format!("node {id} is not in the network")))
}

/// With `alpha > 0` the energy solvers switch to their time-weighted form.
fn effective_algorithm(algo: Algorithm, alpha: f64) -> Result<Algorithm, CliError> {
    if alpha == 0.0 {
        return Ok(algo);
    }
    match algo {
        Algorithm::CdfDijkstra | Algorithm::CdfExact | Algorithm::WeightedCdf => Ok(Algorithm::WeightedCdf),
        Algorithm::Crptc | Algorithm::WeightedCrptc => Ok(Algorithm::WeightedCrptc),
        other => Err(CliError::Usage(format!("--alpha is not supported with --algo {other}"))),
    }
}

fn cmd_route(a: RouteArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load_params(a.params.params.as_deref())?;
    let net = load_network(&a.net, a.slot)?;
    let (o, d) = (node_by_external(&net, a.from)?, node_by_external(&net, a.to)?);
    let algorithm = effective_algorithm(a.algo, a.alpha)?;
    let mut q = Query::new(o, d, a.budget_kwh).with_alpha(a.alpha).with_slot(a.slot);
    if let (Some(bt), Some(be)) = (a.beta_time, a.beta_energy) {
        q = q.with_normalizers(bt, be);
    }
    let sol = batch::timed_solve(&net, &p, &q, algorithm)?;
    let geojson = match &a.geojson {
        Some(path) => {
            let g = route_geojson(&net, &sol)
                .ok_or_else(|| CliError::Usage("--geojson needs lat/lon on every route node".into()))?;
            Some((path, g))
        }
        None => None,
    };
    if let Some((path, g)) = geojson {
        write_text(path, &to_json(&g)).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    emit(&to_json(&SolutionReport::new(&net, &q, &sol, !a.no_timing)), None, out)
}

fn network_for(src: &NetSource, seed: u64) -> Result<Network, CliError> {
    match (&src.net, src.gen_nodes) {
        (Some(path), _) => Ok(load_network(path, src.slot)?),
        (None, Some(n)) => {
            let mut cfg = SyntheticConfig::new(GraphKind::Random, n, src.gen_degree, [0.2, 0.3, 0.5], seed);
            cfg.slots = src.slot + 1;
            Ok(generate_synthetic(&cfg)?.for_slot(src.slot)?)
        }
        (None, None) => Err(CliError::Usage("one of --net or --gen-nodes is required".into())),
    }
}

fn validated_params(arg: &ParamsArg) -> Result<EnergyParams, CliError> {
    Ok(load_params(arg.params.as_deref())?)
}

fn check_budgets(budgets: &[f64]) -> Result<(), CliError> {
    match budgets.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        Some(b) => Err(CliError::Usage(format!("budget {b} must be finite and non-negative"))),
        None => Ok(()),
    }
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_budgets(&a.budgets)?;
    if !(0.0..=1.0).contains(&a.alpha) {
        return Err(CliError::Usage(format!("--alpha {} outside [0, 1]", a.alpha)));
    }
    let algorithms = a
        .algos
        .iter()
        .map(|&alg| match alg {
            Algorithm::Fastest | Algorithm::Bilevel | Algorithm::HybridLp => Ok(alg),
            _ => effective_algorithm(alg, a.alpha),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let p = validated_params(&a.params)?;
    let net = network_for(&a.source, a.seed)?;
    let cfg = CompareConfig {
        pairs: a.pairs,
        seed: a.seed,
        budgets: a.budgets,
        algorithms,
        alpha: a.alpha,
        timed: !a.no_timing,
    };
    let report = batch::compare(&net, &p, a.source.slot, &cfg);
    let text = match a.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => report.to_csv(),
    };
    emit(&text, None, out)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_budgets(&a.budgets)?;
    let p = validated_params(&a.params)?;
    let cfg = VerifyConfig {
        seeds: a.seeds,
        max_nodes: a.max_nodes,
        budgets: a.budgets,
    };
    let report = verify::verify(&cfg, &p).map_err(CliError::Usage)?;
    out.write_all(report.render().as_bytes())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Internal(format!("{} verification failures", report.failures)))
    }
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    check_budgets(&[a.budget_kwh])?;
    let p = validated_params(&a.params)?;
    let net = network_for(&a.source, a.seed)?;
    let cfg = BenchConfig {
        pairs: a.pairs,
        seed: a.seed,
        budget_kwh: a.budget_kwh,
        algorithms: a.algos,
    };
    let report = batch::bench(&net, &p, a.source.slot, &cfg);
    err.write_all(report.to_table().as_bytes())?;
    emit(&to_json(&report), None, out)
}

fn cmd_export_milp(a: MilpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load_params(a.params.params.as_deref())?;
    let net = load_network(&a.net, a.slot)?;
    let (o, d) = (node_by_external(&net, a.from)?, node_by_external(&net, a.to)?);
    let q = Query::new(o, d, a.budget_kwh).with_slot(a.slot);
    let lp = export_milp(&net, &p, &q, &MilpConfig { max_links: a.max_links })?;
    emit(&lp, a.output.as_deref(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("ecoroute").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn mix_parsing() {
        assert_eq!(parse_mix("0.2, 0.3,0.5").unwrap(), [0.2, 0.3, 0.5]);
        assert!(parse_mix("0.2,0.3").is_err());
        assert!(parse_mix("a,b,c").is_err());
    }

    #[test]
    fn alpha_selects_weighted_variants() {
        assert_eq!(
            effective_algorithm(Algorithm::CdfDijkstra, 0.5).unwrap(),
            Algorithm::WeightedCdf
        );
        assert_eq!(
            effective_algorithm(Algorithm::Crptc, 0.5).unwrap(),
            Algorithm::WeightedCrptc
        );
        assert_eq!(
            effective_algorithm(Algorithm::Bilevel, 0.0).unwrap(),
            Algorithm::Bilevel
        );
        assert_eq!(
            effective_algorithm(Algorithm::Bilevel, 0.5).unwrap_err().code(),
            EXIT_USAGE
        );
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_capture(&["route", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["gen"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["gen", "--nodes", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify", "--max-nodes", "20"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["compare", "--gen-nodes", "10", "--algos", "nope"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn verify_zero_seeds() {
        let (code, out, _) = run_capture(&["verify", "--seeds", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("cdf_exact == oracle_cdf: 0/0"));
    }

    #[test]
    fn compare_zero_pairs_is_empty() {
        let (code, out, _) = run_capture(&["compare", "--gen-nodes", "30", "--pairs", "0", "--no-timing"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pairs"], 0);
        assert!(v["rows"].as_array().unwrap().is_empty());
    }
}

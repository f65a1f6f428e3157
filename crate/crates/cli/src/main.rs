//! Command-line front end: closed-form sweeps as CSV, simulations and
//! selection reports as JSON.

use std::fs;
use std::io::{self, Write};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use arqld::clda::{ContextSpec, MarkovContext, SentenceLists, TieBreak};
use arqld::codes::CodeSpec;
use arqld::{
    average_selection_probability, monte_carlo_arq, select, selection_lower_bound, simulate_clda,
    weight_distribution_exhaustive, ArqAnalysis, ArqSimReport, Error, LinearCode,
};

#[derive(Parser)]
#[command(
    name = "arqld",
    version,
    about = "ARQ error control with list decoding"
)]
struct Cli {
    /// JSON file with defaults for code, context, p, p-grid, length,
    /// trials, and seed; explicit flags win.
    #[arg(long, global = true)]
    config: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form per-delivery metrics over a grid of crossover
    /// probabilities, as CSV on stdout.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates next to their closed-form values.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// The built-in three-state selection walkthrough, as JSON.
    CldaDemo,
    /// Lower bound on correct sentence selection over a p grid, as CSV.
    Bound(BoundArgs),
    /// Average selection probability for a context and sentence length.
    Paverage(PaverageArgs),
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Repeat-until-accepted deliveries of single words.
    Arq(SimArqArgs),
    /// Full sentence pipeline: acceptance, list decoding, selection.
    Clda(SimCldaArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Code: hamming:M, rm:R,M, repetition:N, or a JSON spec file.
    #[arg(long)]
    code: Option<String>,
    /// Inclusive grid start:stop:count, e.g. 0.01:0.2:20.
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
}

#[derive(Args)]
struct SimArqArgs {
    #[arg(long)]
    code: Option<String>,
    /// Crossover probability of the binary symmetric channel.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimCldaArgs {
    #[arg(long)]
    code: Option<String>,
    /// Context: uniform, cyclic, random:SEED, or a JSON file.
    #[arg(long)]
    context: Option<String>,
    /// Words per sentence.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Break weight ties randomly with this seed instead of keeping the
    /// first list entry.
    #[arg(long = "tie-seed")]
    tie_seed: Option<u64>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    code: Option<String>,
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
    /// Sentence length N.
    #[arg(long)]
    length: Option<usize>,
    /// Take every same-list set as a singleton instead of computing it.
    #[arg(long = "assume-singleton")]
    assume_singleton: bool,
}

#[derive(Args)]
struct PaverageArgs {
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    context: Option<String>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
}

/// Defaults loaded from --config; any field may be absent.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    code: Option<String>,
    context: Option<String>,
    p: Option<f64>,
    #[serde(rename = "p_grid")]
    p_grid: Option<String>,
    length: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        // Downstream tools closing the pipe early is a normal way to stop
        // reading; end quietly instead of reporting a failure.
        if err.downcast_ref::<io::Error>().map(io::Error::kind) == Some(io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// 2 for rejected input (bad flags, specs, or parameter ranges), 1 for
/// failures while running.
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Parameter(_)
            | Error::LengthMismatch { .. }
            | Error::InvalidCode(_)
            | Error::Capacity(_)
            | Error::Json(_),
        ) => 2,
        _ => 1,
    }
}

fn validation(msg: String) -> anyhow::Error {
    anyhow::Error::new(Error::Parameter(msg))
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            serde_json::from_str(&text).map_err(Error::Json)?
        }
        None => Config::default(),
    };
    match cli.command {
        Command::Analyze(args) => analyze(args, &config),
        Command::Simulate(SimulateCommand::Arq(args)) => simulate_arq(args, &config),
        Command::Simulate(SimulateCommand::Clda(args)) => simulate_sentences(args, &config),
        Command::CldaDemo => clda_demo(),
        Command::Bound(args) => bound(args, &config),
        Command::Paverage(args) => paverage(args, &config),
    }
}

fn analyze(args: AnalyzeArgs, config: &Config) -> Result<()> {
    let code = parse_code(required("--code", args.code.or(config.code.clone()))?)?;
    let grid = parse_grid(&required(
        "--p-grid",
        args.p_grid.or(config.p_grid.clone()),
    )?)?;
    let dist = weight_distribution_exhaustive(&code)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", ArqAnalysis::CSV_HEADER)?;
    for p in grid {
        writeln!(out, "{}", ArqAnalysis::compute(&dist, p)?.csv_row())?;
    }
    Ok(())
}

/// Simulation report with the matching closed-form quantities alongside.
#[derive(Serialize)]
struct ArqComparison {
    #[serde(flatten)]
    simulated: ArqSimReport,
    closed_form: ClosedForm,
}

#[derive(Serialize)]
struct ClosedForm {
    pe_arq: f64,
    dist_d_share: f64,
    mean_retransmissions: f64,
}

fn simulate_arq(args: SimArqArgs, config: &Config) -> Result<()> {
    let code = parse_code(required("--code", args.code.or(config.code.clone()))?)?;
    let p = required("--p", args.p.or(config.p))?;
    let trials = required("--trials", args.trials.or(config.trials))?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let report = monte_carlo_arq(&code, p, trials, seed)?;
    let dist = weight_distribution_exhaustive(&code)?;
    let analysis = ArqAnalysis::compute(&dist, p)?;
    let accept = analysis.acceptance();
    let comparison = ArqComparison {
        simulated: report,
        closed_form: ClosedForm {
            pe_arq: analysis.pe_arq,
            dist_d_share: analysis.benefit.unwrap_or(0.0),
            mean_retransmissions: (1.0 - accept) / accept,
        },
    };
    print_json(&comparison)
}

fn simulate_sentences(args: SimCldaArgs, config: &Config) -> Result<()> {
    let code = parse_code(required("--code", args.code.or(config.code.clone()))?)?;
    let ctx = parse_context(
        &required("--context", args.context.or(config.context.clone()))?,
        &code,
    )?;
    let length = required("--length", args.length.or(config.length))?;
    let p = required("--p", args.p.or(config.p))?;
    let trials = required("--trials", args.trials.or(config.trials))?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let tie = match args.tie_seed {
        Some(s) => TieBreak::Seeded(s),
        None => TieBreak::FirstIndex,
    };
    let report = simulate_clda(&code, &ctx, length, p, trials, seed, tie)?;
    print_json(&report)
}

/// The demo trellis in linear space, with backpointers, winning rows, and
/// the selected sentence.
#[derive(Serialize)]
struct DemoReport {
    prior: Vec<f64>,
    transitions: Vec<Vec<f64>>,
    lists: Vec<Vec<u64>>,
    #[serde(rename = "T")]
    path_weights: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    backpointers: Vec<Vec<usize>>,
    #[serde(rename = "R")]
    rows: Vec<usize>,
    #[serde(rename = "F")]
    sentence: Vec<u64>,
}

fn clda_demo() -> Result<()> {
    let ctx = MarkovContext::three_state_demo();
    let lists = SentenceLists::new(vec![vec![0, 1, 2]; 3])?;
    let trace = select(&ctx, &lists, TieBreak::FirstIndex)?;
    let report = DemoReport {
        prior: ctx.prior().to_vec(),
        transitions: (0..3).map(|i| ctx.row(i).to_vec()).collect(),
        lists: lists.lists().to_vec(),
        path_weights: trace.linear_weights(),
        backpointers: trace.backpointers.clone(),
        rows: trace.path.clone(),
        sentence: trace.sentence.clone(),
    };
    print_json(&report)
}

fn bound(args: BoundArgs, config: &Config) -> Result<()> {
    let code = parse_code(required("--code", args.code.or(config.code.clone()))?)?;
    let grid = parse_grid(&required(
        "--p-grid",
        args.p_grid.or(config.p_grid.clone()),
    )?)?;
    let length = required("--length", args.length.or(config.length))?;
    let dist = weight_distribution_exhaustive(&code)?;
    let sentence = vec![0u64; length];
    let mut out = io::stdout().lock();
    writeln!(out, "p,N,lower_bound,assume_singleton")?;
    for p in grid {
        let report = selection_lower_bound(&code, &dist, &sentence, p, args.assume_singleton)?;
        writeln!(
            out,
            "{},{},{},{}",
            arqld::format_sig10(p),
            length,
            arqld::format_sig10(report.value),
            report.assume_singleton
        )?;
    }
    Ok(())
}

fn paverage(args: PaverageArgs, config: &Config) -> Result<()> {
    let code = parse_code(required("--code", args.code.or(config.code.clone()))?)?;
    let ctx = parse_context(
        &required("--context", args.context.or(config.context.clone()))?,
        &code,
    )?;
    let length = required("--length", args.length.or(config.length))?;
    let p = required("--p", args.p.or(config.p))?;
    let dist = weight_distribution_exhaustive(&code)?;
    let report = average_selection_probability(&code, &dist, &ctx, length, p)?;
    print_json(&report)
}

fn required<T>(flag: &str, value: Option<T>) -> Result<T> {
    value.ok_or_else(|| validation(format!("{flag} is required (flag or config)")))
}

/// hamming:M, rm:R,M, repetition:N, or a path to a JSON code spec.
fn parse_code(spec: String) -> Result<LinearCode> {
    if let Some((family, params)) = spec.split_once(':') {
        match family {
            "hamming" => {
                let m = params
                    .parse()
                    .map_err(|_| validation(format!("bad hamming parameter {params:?}")))?;
                return Ok(LinearCode::hamming(m)?);
            }
            "rm" => {
                let (r, m) = params
                    .split_once(',')
                    .and_then(|(r, m)| Some((r.trim().parse().ok()?, m.trim().parse().ok()?)))
                    .ok_or_else(|| validation(format!("bad rm parameters {params:?}, want R,M")))?;
                return Ok(LinearCode::reed_muller(r, m)?);
            }
            "repetition" => {
                let n = params
                    .parse()
                    .map_err(|_| validation(format!("bad repetition length {params:?}")))?;
                return Ok(LinearCode::repetition(n)?);
            }
            _ => {}
        }
    }
    let text = fs::read_to_string(&spec).with_context(|| format!("reading code spec {spec}"))?;
    Ok(CodeSpec::from_json(&text)?.build()?)
}

/// uniform, cyclic, random:SEED, or a path to a JSON context spec. The
/// named forms span the code's 2^k messages.
fn parse_context(spec: &str, code: &LinearCode) -> Result<MarkovContext> {
    let states = || {
        if code.k() >= 32 {
            return Err(validation(format!(
                "{} has 2^{} messages, too many for a context",
                code.name(),
                code.k()
            )));
        }
        Ok(1usize << code.k())
    };
    match spec {
        "uniform" => return Ok(MarkovContext::uniform(states()?)?),
        "cyclic" => return Ok(MarkovContext::cyclic(states()?)?),
        _ => {}
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed = seed
            .parse()
            .map_err(|_| validation(format!("bad random context seed {seed:?}")))?;
        return Ok(MarkovContext::random(states()?, seed)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading context spec {spec}"))?;
    Ok(ContextSpec::from_json(&text)?.build()?)
}

/// Inclusive linear grid start:stop:count.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || validation(format!("bad grid {spec:?}, want start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(validation("grid needs at least one point".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| anyhow!("serializing report: {e}"))?;
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

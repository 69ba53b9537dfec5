//! Command-line front end for the one-shot coding toolbox.
//!
//! Subcommands: `bound`, `simulate`, `rate`, `exponent`, `divergence`,
//! `second-order`, `hoeffding`, `check`. Data goes to standard output
//! (JSON or CSV), diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error,
//! 3 property-check failure, 4 numerical failure.

mod output;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, Report};
use qpack_core::bounds::{self, BoundReport, ExponentReport, GridSpec, Precoder, RateComparison};
use qpack_core::checks;
use qpack_core::discrimination;
use qpack_core::divergences;
use qpack_core::model::{self, CQChannel, DensityOperator, KrausChannel, Model};
use qpack_core::operator::SubsystemShape;
use qpack_core::simulate::{self, SimConfig, SimulationResult};
use qpack_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PROPERTY: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qpack",
    about = "One-shot coding bounds, divergences, and PGM simulations for classical-quantum channels",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for data on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write data to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,

    /// Display logarithmic quantities in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,

    /// Worker threads for simulations (default: all cores). Never
    /// affects computed values.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form one-shot error bounds.
    Bound(BoundArgs),
    /// Exact or Monte-Carlo decoder simulations certifying the bounds.
    Simulate(SimulateArgs),
    /// One-shot rate bounds at fixed error (ours / Hayashi-Nagaoka /
    /// Beigi-Gohari).
    Rate(RateArgs),
    /// Error-exponent sweep at fixed rate.
    Exponent(ExponentArgs),
    /// Divergence calculators on a pair of density files.
    Divergence(DivergenceArgs),
    /// Normal-approximation rate expansion from a channel model.
    SecondOrder(SecondOrderArgs),
    /// One-shot Hoeffding-bound evaluation via the two-outcome PGM.
    Hoeffding(HoeffdingArgs),
    /// Randomized property batteries.
    Check(CheckArgs),
}

#[derive(Args)]
struct BoundArgs {
    #[command(subcommand)]
    protocol: BoundProtocol,
}

#[derive(Subcommand)]
enum BoundProtocol {
    /// Classical-quantum channel coding.
    Cq {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        messages: u64,
        /// Include the strengthened bound in the output.
        #[arg(long)]
        strengthened: bool,
    },
    /// Source coding with quantum side information.
    Cqsw {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        messages: u64,
    },
    /// One-shot quantum packing: a bipartite density (model) against a
    /// reference state (tau).
    Packing {
        /// Bipartite density operator rho_RB.
        #[arg(long)]
        model: std::path::PathBuf,
        /// Reference density operator tau_R.
        #[arg(long)]
        tau: std::path::PathBuf,
        /// Dimension of the R factor.
        #[arg(long)]
        dr: usize,
        #[arg(long)]
        messages: u64,
    },
    /// Entanglement-assisted point-to-point coding.
    Ea {
        /// Kraus channel N_{A->B}.
        #[arg(long)]
        model: std::path::PathBuf,
        /// Resource density operator theta_RA.
        #[arg(long)]
        theta: std::path::PathBuf,
        /// Dimension of the R factor.
        #[arg(long)]
        dr: usize,
        #[arg(long)]
        messages: u64,
    },
    /// Classical-quantum multiple-access coding (composite "x|y"
    /// alphabet with a product prior).
    Mac {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        ma: u64,
        #[arg(long)]
        mb: u64,
    },
    /// Classical-quantum broadcast coding through a deterministic
    /// precoder.
    Broadcast {
        /// Channel with outputs on B ⊗ C.
        #[arg(long)]
        model: std::path::PathBuf,
        /// Dimension of Bob's factor (d_C is inferred).
        #[arg(long)]
        db: usize,
        /// Precoder table "x(0,0),x(0,1);x(1,0),x(1,1)" (rows = u).
        #[arg(long)]
        precoder: String,
        /// Prior over U, comma separated.
        #[arg(long)]
        pu: String,
        /// Prior over V, comma separated.
        #[arg(long)]
        pv: String,
        #[arg(long)]
        mb: u64,
        #[arg(long)]
        mc: u64,
    },
    /// Coding with causal state information (composite "x|s" alphabet).
    StateInfo {
        #[arg(long)]
        model: std::path::PathBuf,
        /// Number of channel states |S|.
        #[arg(long)]
        ns: usize,
        /// State prior, comma separated.
        #[arg(long)]
        ps: String,
        /// Precoder table "x(u=0,s=0),x(0,1);x(1,0),x(1,1)" (rows = u).
        #[arg(long)]
        precoder: String,
        /// Precoding prior over U, comma separated.
        #[arg(long)]
        pu: String,
        #[arg(long)]
        messages: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[command(subcommand)]
    protocol: SimProtocol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct SimCommon {
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Monte-Carlo trial count (mc mode).
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed; required in mc mode (no ambient entropy).
    #[arg(long)]
    seed: Option<u64>,
    /// Codebook-enumeration cap for exact mode.
    #[arg(long, default_value_t = 4096)]
    enumeration_cap: u64,
    /// Total-dimension cap for position-based constructions.
    #[arg(long, default_value_t = 64)]
    dimension_cap: usize,
}

impl SimCommon {
    fn config(&self) -> SimConfig {
        SimConfig {
            enumeration_cap: self.enumeration_cap,
            dimension_cap: self.dimension_cap,
        }
    }
}

#[derive(Subcommand)]
enum SimProtocol {
    Cq {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        messages: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    Cqsw {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        messages: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    Packing {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        tau: std::path::PathBuf,
        #[arg(long)]
        dr: usize,
        #[arg(long)]
        messages: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    Mac {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        ma: u64,
        #[arg(long)]
        mb: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    Broadcast {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        db: usize,
        #[arg(long)]
        precoder: String,
        #[arg(long)]
        pu: String,
        #[arg(long)]
        pv: String,
        #[arg(long)]
        mb: u64,
        #[arg(long)]
        mc: u64,
        #[command(flatten)]
        common: SimCommon,
    },
    StateInfo {
        #[arg(long)]
        model: std::path::PathBuf,
        #[arg(long)]
        ns: usize,
        #[arg(long)]
        ps: String,
        #[arg(long)]
        precoder: String,
        #[arg(long)]
        pu: String,
        #[arg(long)]
        messages: u64,
        #[command(flatten)]
        common: SimCommon,
    },
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    model: std::path::PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct ExponentArgs {
    #[arg(long)]
    model: std::path::PathBuf,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 99)]
    grid_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DivergenceKindArg {
    Petz,
    Kl,
    Variance,
    Collision,
    Max,
    Ht,
    Is,
}

#[derive(Args)]
struct DivergenceArgs {
    #[arg(value_enum)]
    kind: DivergenceKindArg,
    /// First density operator file.
    #[arg(long)]
    rho: std::path::PathBuf,
    /// Second density operator file.
    #[arg(long)]
    sigma: std::path::PathBuf,
    /// Renyi order (petz).
    #[arg(long)]
    alpha: Option<f64>,
    /// Error parameter (ht, is).
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct SecondOrderArgs {
    #[arg(long)]
    model: std::path::PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: u64,
}

#[derive(Args)]
struct HoeffdingArgs {
    #[arg(long)]
    rho: std::path::PathBuf,
    #[arg(long)]
    sigma: std::path::PathBuf,
    #[arg(long)]
    order: f64,
    #[arg(long)]
    r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Facts,
    Hn,
    TraceChain,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    #[arg(long, default_value_t = 500)]
    trials: u64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 2718281828)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BadM(_)
            | Error::EpsOutOfRange(_)
            | Error::DeltaOutOfRange { .. }
            | Error::AlphaOutOfRange(_)
            | Error::OrderOutOfRange(_)
            | Error::POutOfRange(_)
            | Error::GridEmpty => EXIT_USAGE,
            Error::NumericalFailure | Error::SupportFailure => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version requests on stdout with success
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(exit) => exit,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let (report, property_failed) = match &cli.command {
        Command::Bound(args) => (run_bound(args)?, false),
        Command::Simulate(args) => (run_simulate(args)?, false),
        Command::Rate(args) => (run_rate(args)?, false),
        Command::Exponent(args) => (run_exponent(args)?, false),
        Command::Divergence(args) => (run_divergence(args)?, false),
        Command::SecondOrder(args) => (run_second_order(args)?, false),
        Command::Hoeffding(args) => (run_hoeffding(args)?, false),
        Command::Check(args) => {
            let (report, passed) = run_check(args)?;
            (report, !passed)
        }
    };
    let rendered = report.render(cli.format, cli.bits);
    match &cli.output {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|_| {
                    if !rendered.ends_with('\n') {
                        stdout.write_all(b"\n")
                    } else {
                        Ok(())
                    }
                })
                .map_err(|e| Failure::usage(format!("cannot write stdout: {e}")))?;
        }
    }
    if property_failed {
        return Ok(ExitCode::from(EXIT_PROPERTY));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_model(path: &std::path::Path) -> Result<Model, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(model::parse_model(&text)?)
}

fn load_channel(path: &std::path::Path) -> Result<CQChannel, Failure> {
    match load_model(path)? {
        Model::CQChannel(ch) => Ok(ch),
        other => Err(Failure::from(Error::ParseError(format!(
            "{} holds a {} model, expected cq-channel",
            path.display(),
            other.kind()
        )))),
    }
}

fn load_density(path: &std::path::Path) -> Result<DensityOperator, Failure> {
    match load_model(path)? {
        Model::Density(d) => Ok(d),
        other => Err(Failure::from(Error::ParseError(format!(
            "{} holds a {} model, expected density",
            path.display(),
            other.kind()
        )))),
    }
}

fn load_kraus(path: &std::path::Path) -> Result<KrausChannel, Failure> {
    match load_model(path)? {
        Model::Kraus(k) => Ok(k),
        other => Err(Failure::from(Error::ParseError(format!(
            "{} holds a {} model, expected kraus-channel",
            path.display(),
            other.kind()
        )))),
    }
}

fn parse_prior(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::usage(format!("{what}: bad entry {s:?}: {e}")))
        })
        .collect()
}

fn parse_precoder(text: &str, alphabet_len: usize) -> Result<Precoder, Failure> {
    let table: Vec<Vec<usize>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| Failure::usage(format!("precoder: bad entry {s:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(Precoder::new(table, alphabet_len)?)
}

fn bound_report(tag: &str, rep: &BoundReport, strengthened: bool) -> Report {
    let mut out = Report::new(tag, &rep.inputs_digest)
        .value("bound", rep.bound)
        .value("effective", rep.effective);
    if strengthened {
        if let Some(s) = rep.strengthened_bound {
            out = out.value("strengthened_bound", s);
        }
    }
    out = out.diagnostic_bool("trivial", rep.trivial);
    for (k, v) in &rep.components {
        out = out.diagnostic_num(k, *v);
    }
    out
}

fn split_factor(total: usize, first: usize, what: &str) -> Result<usize, Failure> {
    if first == 0 || total % first != 0 {
        return Err(Failure::usage(format!(
            "{what}: {first} does not divide the operator dimension {total}"
        )));
    }
    Ok(total / first)
}

fn run_bound(args: &BoundArgs) -> Result<Report, Failure> {
    match &args.protocol {
        BoundProtocol::Cq {
            model,
            messages,
            strengthened,
        } => {
            let ch = load_channel(model)?;
            let rep = bounds::cq_bound(&ch, *messages)?;
            Ok(bound_report("cq", &rep, *strengthened))
        }
        BoundProtocol::Cqsw { model, messages } => {
            let ch = load_channel(model)?;
            let state = model::build_cq_joint(&ch);
            let rep = bounds::cqsw_bound(&state, *messages)?;
            Ok(bound_report("cqsw", &rep, false))
        }
        BoundProtocol::Packing {
            model,
            tau,
            dr,
            messages,
        } => {
            let rho = load_density(model)?;
            let tau = load_density(tau)?;
            let db = split_factor(rho.dim(), *dr, "--dr")?;
            let shape = SubsystemShape::new(&[*dr, db])?;
            let rep = bounds::packing_bound(&rho, &shape, &tau, *messages)?;
            Ok(bound_report("packing", &rep, false))
        }
        BoundProtocol::Ea {
            model,
            theta,
            dr,
            messages,
        } => {
            let ch = load_kraus(model)?;
            let theta = load_density(theta)?;
            let da = split_factor(theta.dim(), *dr, "--dr")?;
            let shape = SubsystemShape::new(&[*dr, da])?;
            let rep = bounds::ea_bound(&ch, &theta, &shape, *messages)?;
            Ok(bound_report("ea", &rep, false))
        }
        BoundProtocol::Mac { model, ma, mb } => {
            let ch = load_channel(model)?;
            let (xs, ys) = ch.composite_split()?;
            let state = model::build_cq_joint(&ch);
            let rep = bounds::mac_bound(&state, xs.len(), ys.len(), *ma, *mb)?;
            Ok(bound_report("mac", &rep, false))
        }
        BoundProtocol::Broadcast {
            model,
            db,
            precoder,
            pu,
            pv,
            mb,
            mc,
        } => {
            let ch = load_channel(model)?;
            let dc = split_factor(ch.dim_b(), *db, "--db")?;
            let shape = SubsystemShape::new(&[*db, dc])?;
            let precoder = parse_precoder(precoder, ch.alphabet_len())?;
            let p_u = parse_prior(pu, "--pu")?;
            let p_v = parse_prior(pv, "--pv")?;
            let (eb, ec) = bounds::broadcast_bounds(&ch, &shape, &precoder, &p_u, &p_v, *mb, *mc)?;
            Ok(Report::new("broadcast", &eb.inputs_digest)
                .value("bound_b", eb.bound)
                .value("bound_c", ec.bound)
                .value("effective_b", eb.effective)
                .value("effective_c", ec.effective)
                .diagnostic_bool("trivial_b", eb.trivial)
                .diagnostic_bool("trivial_c", ec.trivial))
        }
        BoundProtocol::StateInfo {
            model,
            ns,
            ps,
            precoder,
            pu,
            messages,
        } => {
            let ch = load_channel(model)?;
            let p_s = parse_prior(ps, "--ps")?;
            let p_u = parse_prior(pu, "--pu")?;
            let nx = if *ns == 0 { 0 } else { ch.alphabet_len() / ns };
            let precoder = parse_precoder(precoder, nx)?;
            let rep = bounds::state_info_bound(&ch, *ns, &p_s, &precoder, &p_u, *messages)?;
            Ok(bound_report("state-info", &rep, false))
        }
    }
}

fn sim_report(tag: &str, res: &SimulationResult, digest: &str) -> Report {
    let mut out = Report::new(tag, digest)
        .value("mean_error", res.mean_error)
        .value("bound_checked", res.bound_checked)
        .value("std_error", res.std_error)
        .diagnostic_bool("certified", res.certified)
        .diagnostic_text(
            "mode",
            match res.mode {
                simulate::SimMode::Exact => "exact",
                simulate::SimMode::MonteCarlo => "monte_carlo",
            },
        );
    if res.trials > 0 {
        out = out.diagnostic_num("trials", res.trials as f64);
    }
    if let Some(seed) = res.seed {
        out = out.diagnostic_num("seed", seed as f64);
    }
    out
}

fn mc_params(common: &SimCommon) -> Result<(u64, u64), Failure> {
    let trials = common
        .trials
        .ok_or_else(|| Failure::usage("--trials is required in mc mode"))?;
    let seed = common
        .seed
        .ok_or_else(|| Failure::usage("--seed is required in mc mode (no ambient entropy)"))?;
    Ok((trials, seed))
}

fn run_simulate(args: &SimulateArgs) -> Result<Report, Failure> {
    match &args.protocol {
        SimProtocol::Cq {
            model,
            messages,
            common,
        } => {
            let ch = load_channel(model)?;
            let res = match common.mode {
                Mode::Exact => simulate::cq_random_coding_exact(&ch, *messages, &common.config())?,
                Mode::Mc => {
                    let (trials, seed) = mc_params(common)?;
                    simulate::cq_random_coding_mc(&ch, *messages, trials, seed, &common.config())?
                }
            };
            Ok(sim_report("cq-simulation", &res, "-"))
        }
        SimProtocol::Cqsw {
            model,
            messages,
            common,
        } => {
            require_exact(common)?;
            let ch = load_channel(model)?;
            let state = model::build_cq_joint(&ch);
            let res = simulate::cqsw_exact(&state, *messages, &common.config())?;
            Ok(sim_report("cqsw-simulation", &res, "-"))
        }
        SimProtocol::Packing {
            model,
            tau,
            dr,
            messages,
            common,
        } => {
            require_exact(common)?;
            let rho = load_density(model)?;
            let tau = load_density(tau)?;
            let db = split_factor(rho.dim(), *dr, "--dr")?;
            let shape = SubsystemShape::new(&[*dr, db])?;
            let res = simulate::packing_exact(&rho, &shape, &tau, *messages, &common.config())?;
            Ok(sim_report("packing-simulation", &res, "-"))
        }
        SimProtocol::Mac {
            model,
            ma,
            mb,
            common,
        } => {
            require_exact(common)?;
            let ch = load_channel(model)?;
            let (xs, ys) = ch.composite_split()?;
            let state = model::build_cq_joint(&ch);
            let res = simulate::mac_exact(&state, xs.len(), ys.len(), *ma, *mb, &common.config())?;
            Ok(sim_report("mac-simulation", &res, "-"))
        }
        SimProtocol::Broadcast {
            model,
            db,
            precoder,
            pu,
            pv,
            mb,
            mc,
            common,
        } => {
            require_exact(common)?;
            let ch = load_channel(model)?;
            let dc = split_factor(ch.dim_b(), *db, "--db")?;
            let shape = SubsystemShape::new(&[*db, dc])?;
            let precoder = parse_precoder(precoder, ch.alphabet_len())?;
            let p_u = parse_prior(pu, "--pu")?;
            let p_v = parse_prior(pv, "--pv")?;
            let (rb, rc) = simulate::broadcast_exact(
                &ch,
                &shape,
                &precoder,
                &p_u,
                &p_v,
                *mb,
                *mc,
                &common.config(),
            )?;
            Ok(Report::new("broadcast-simulation", "-")
                .value("mean_error_b", rb.mean_error)
                .value("mean_error_c", rc.mean_error)
                .value("bound_b", rb.bound_checked)
                .value("bound_c", rc.bound_checked)
                .diagnostic_bool("certified_b", rb.certified)
                .diagnostic_bool("certified_c", rc.certified))
        }
        SimProtocol::StateInfo {
            model,
            ns,
            ps,
            precoder,
            pu,
            messages,
            common,
        } => {
            require_exact(common)?;
            let ch = load_channel(model)?;
            let p_s = parse_prior(ps, "--ps")?;
            let p_u = parse_prior(pu, "--pu")?;
            let nx = if *ns == 0 { 0 } else { ch.alphabet_len() / ns };
            let precoder = parse_precoder(precoder, nx)?;
            let res = simulate::state_info_exact(
                &ch,
                *ns,
                &p_s,
                &precoder,
                &p_u,
                *messages,
                &common.config(),
            )?;
            Ok(sim_report("state-info-simulation", &res, "-"))
        }
    }
}

fn require_exact(common: &SimCommon) -> Result<(), Failure> {
    if common.mode != Mode::Exact {
        return Err(Failure::usage(
            "Monte-Carlo mode is available for the cq protocol only",
        ));
    }
    Ok(())
}

fn run_rate(args: &RateArgs) -> Result<Report, Failure> {
    let ch = load_channel(&args.model)?;
    let cmp: RateComparison = bounds::cq_rate(&ch, args.eps, args.delta)?;
    Ok(Report::new("rate", "-")
        .log_value("ours", cmp.ours)
        .log_value("hayashi_nagaoka", cmp.hayashi_nagaoka)
        .log_value("beigi_gohari", cmp.beigi_gohari)
        .log_value("effective", cmp.effective)
        .diagnostic_num("eps", args.eps)
        .diagnostic_num("delta", args.delta))
}

fn run_exponent(args: &ExponentArgs) -> Result<Report, Failure> {
    let ch = load_channel(&args.model)?;
    let grid = GridSpec {
        steps: args.grid_steps,
        ..GridSpec::default()
    };
    let rep: ExponentReport = bounds::cq_exponent(&ch, args.rate, &grid)?;
    let rows: Vec<Vec<f64>> = rep.grid.iter().map(|&(a, v)| vec![a, v]).collect();
    Ok(Report::new("exponent", "-")
        .log_value("exponent", rep.exponent)
        .value("best_alpha", rep.best_alpha)
        .log_value("rate", rep.rate)
        .log_value("mutual_information", rep.mutual_information)
        .table(&["alpha", "integrand"], rows))
}

fn run_divergence(args: &DivergenceArgs) -> Result<Report, Failure> {
    let rho = load_density(&args.rho)?;
    let sigma = load_density(&args.sigma)?;
    let need_alpha = || {
        args.alpha
            .ok_or_else(|| Failure::usage("--alpha is required for the petz divergence"))
    };
    let need_eps = || {
        args.eps
            .ok_or_else(|| Failure::usage("--eps is required for ht/is divergences"))
    };
    let (tag, value) = match args.kind {
        DivergenceKindArg::Petz => (
            "divergence-petz",
            divergences::petz_renyi(&rho, &sigma, need_alpha()?)?.value_or_inf(),
        ),
        DivergenceKindArg::Kl => (
            "divergence-kl",
            divergences::relative_entropy(&rho, &sigma)?.value_or_inf(),
        ),
        DivergenceKindArg::Variance => (
            "divergence-variance",
            divergences::relative_entropy_variance(&rho, &sigma)?.value_or_inf(),
        ),
        DivergenceKindArg::Collision => (
            "divergence-collision",
            divergences::collision_divergence(rho.op(), sigma.op())?.value_or_inf(),
        ),
        DivergenceKindArg::Max => (
            "divergence-max",
            divergences::max_relative_entropy(&rho, &sigma)?.value_or_inf(),
        ),
        DivergenceKindArg::Ht => (
            "divergence-ht",
            discrimination::ht_divergence(&rho, &sigma, need_eps()?)?.value_or_inf(),
        ),
        DivergenceKindArg::Is => (
            "divergence-is",
            discrimination::is_divergence(
                &rho,
                &sigma,
                need_eps()?,
                discrimination::DEFAULT_BISECT_TOL,
            )?
            .value_or_inf(),
        ),
    };
    let mut report = Report::new(tag, "-").log_value("value", value);
    if let Some(alpha) = args.alpha {
        report = report.diagnostic_num("alpha", alpha);
    }
    if let Some(eps) = args.eps {
        report = report.diagnostic_num("eps", eps);
    }
    Ok(report)
}

fn run_second_order(args: &SecondOrderArgs) -> Result<Report, Failure> {
    let ch = load_channel(&args.model)?;
    let state = model::build_cq_joint(&ch);
    let i = divergences::cq_mutual_information(&state)?.value_or_inf();
    let v = divergences::cq_mutual_information_variance(&state)?.value_or_inf();
    let rate = bounds::second_order_rate(i, v, args.eps, args.n)?;
    Ok(Report::new("second-order", "-")
        .log_value("rate", rate)
        .log_value("mutual_information", i)
        .value("variance", v)
        .diagnostic_num("n", args.n as f64)
        .diagnostic_num("eps", args.eps)
        .diagnostic_text(
            "note",
            "normal approximation without the O(1) constant; not an achievability guarantee",
        ))
}

fn run_hoeffding(args: &HoeffdingArgs) -> Result<Report, Failure> {
    let rho = load_density(&args.rho)?;
    let sigma = load_density(&args.sigma)?;
    let rep = discrimination::hoeffding_pgm(&rho, &sigma, args.order, args.r)?;
    Ok(Report::new("hoeffding", "-")
        .value("type1_bound", rep.type1_bound)
        .value("type2_bound", rep.type2_bound)
        .value("type1_actual", rep.type1_actual)
        .value("type2_actual", rep.type2_actual)
        .value("mu", rep.mu)
        .diagnostic_num("order", args.order)
        .diagnostic_num("r", args.r))
}

fn run_check(args: &CheckArgs) -> Result<(Report, bool), Failure> {
    let dims = vec![args.dim];
    let report = match args.kind {
        CheckKind::Facts => checks::run_fact_battery(&dims, args.trials, args.seed)?,
        CheckKind::Hn => checks::run_hn_battery(&dims, args.trials, args.seed)?,
        CheckKind::TraceChain => checks::run_trace_chain_battery(&dims, args.trials, args.seed)?,
    };
    let passed = report.passed();
    let mut out = Report::new(&format!("check-{}", report.name), "-")
        .diagnostic_bool("passed", passed)
        .diagnostic_num("trials", report.trials as f64)
        .diagnostic_num("dim", args.dim as f64)
        .diagnostic_num("seed", args.seed as f64);
    for margin in &report.margins {
        out = out.value(&format!("margin_{}", margin.name), margin.worst_margin);
        eprintln!(
            "{}: {} (worst margin {:.3e}, tolerance {:.0e})",
            margin.name,
            if margin.passed() { "pass" } else { "FAIL" },
            margin.worst_margin,
            margin.tolerance
        );
    }
    Ok((out, passed))
}

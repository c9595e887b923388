use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gradecode::coding::{build_complex_scheme, build_real_bch_scheme};
use gradecode::conditions::{
    adversarial_straggler_set, check_ec_scheme, check_eps_ac, lower_bound, min_norm_residual, VerificationMode,
    DEFAULT_EXHAUSTIVE_CAP,
};
use gradecode::expander::{
    build_bipartite_scheme, build_expander_scheme, identity_scheme, random_bipartite_regular, random_regular_graph,
    ApproxDecoder,
};
use gradecode::io::{load_code, read_graph, save_code, write_graph};
use gradecode::sim::{
    l2_sweep, partition, run_gd, write_sweep_csv, DecoderKind, GradientCode, SimConfig, SweepParams, TrainConfig,
};
use gradecode::Error;

#[derive(Parser)]
#[command(name = "gradecode", version, about = "Build, verify and simulate gradient codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scheme construction.
    #[command(subcommand)]
    Scheme(SchemeCommand),
    /// Check the EC or ε-AC condition of a saved scheme.
    Verify(VerifyArgs),
    /// Recovery-error sweep over random expander schemes, written as CSV.
    Sweep(SweepArgs),
    /// Run simulated coded gradient descent from a JSON config.
    Train(TrainArgs),
    /// Greedy adversarial stragglers against the sqrt(floor(s/d)) lower bound.
    Bound(BoundArgs),
}

#[derive(Subcommand)]
enum SchemeCommand {
    /// Build a scheme and write it as JSON.
    Build(BuildArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    ComplexMds,
    RealBch,
    Expander,
    Bipartite,
    Identity,
}

#[derive(Args)]
struct SeedArg {
    /// RNG seed; falls back to GRADECODE_SEED, then 0.
    #[arg(long, env = "GRADECODE_SEED", default_value_t = 0)]
    seed: u64,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        eprintln!("seed: {}", self.seed);
        self.seed
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of workers.
    #[arg(long)]
    n: usize,
    /// Stragglers tolerated (exact kinds).
    #[arg(long)]
    s: Option<usize>,
    /// Degree (graph kinds).
    #[arg(long)]
    d: Option<usize>,
    /// Adjacency-list file to use instead of a random graph (expander kind).
    #[arg(long, conflicts_with = "d")]
    graph: Option<PathBuf>,
    /// Also write the generated graph as an adjacency list.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EpsilonArg {
    /// The scheme's own spectral bound.
    Auto,
    /// sqrt(s), the trivial scheme's error.
    Sqrt,
    /// No bound: report residuals only.
    None,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecoderArg {
    Linear,
    Optimal,
    IgnoreStragglers,
}

impl From<DecoderArg> for ApproxDecoder {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Linear => Self::Linear,
            DecoderArg::Optimal => Self::Optimal,
            DecoderArg::IgnoreStragglers => Self::IgnoreStragglers,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long, value_enum, default_value = "sampled")]
    mode: ModeArg,
    /// Sets drawn in sampled mode.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Largest number of sets allowed in exhaustive mode.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u128,
    /// Stragglers to test (graph schemes; exact schemes use their own s).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    epsilon: EpsilonArg,
    /// Multiplies the ε bound.
    #[arg(long, default_value_t = 1.0)]
    epsilon_scale: f64,
    #[arg(long, value_enum, default_value = "linear")]
    decoder: DecoderArg,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// Degrees, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    s_min: usize,
    #[arg(long)]
    s_max: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["linear", "optimal"])]
    decoders: Vec<DecoderArg>,
    #[command(flatten)]
    seed: SeedArg,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrainDecoderArg {
    Exact,
    Linear,
    Optimal,
    IgnoreStragglers,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the decoder named in the config.
    #[arg(long, value_enum)]
    decoder: Option<TrainDecoderArg>,
    /// Metrics CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Scheme file whose matrix is attacked; otherwise a random expander.
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long, required_unless_present = "scheme")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "scheme")]
    d: Option<usize>,
    #[arg(long)]
    s: usize,
    #[command(flatten)]
    seed: SeedArg,
}

/// A run that completed but whose check did not pass.
#[derive(Debug)]
struct CheckFailed;

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("check failed")
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Scheme(SchemeCommand::Build(args)) => cmd_scheme_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Train(args) => cmd_train(args),
        Command::Bound(args) => cmd_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<CheckFailed>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for failed constructions and checks, 2 for bad input.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::ConstructionCheck(_) | Error::GenerationFailure { .. } | Error::Disconnected) => 1,
        _ => 2,
    }
}

fn require(value: Option<usize>, flag: &str, kind: Kind) -> anyhow::Result<usize> {
    value.with_context(|| format!("--{flag} is required for --kind {kind:?}"))
}

fn cmd_scheme_build(args: BuildArgs) -> anyhow::Result<()> {
    let seed = args.seed.resolve();
    let n = args.n;
    let mut graph = None;
    let code = match args.kind {
        Kind::ComplexMds => GradientCode::Exact(build_complex_scheme(n, require(args.s, "s", args.kind)?)?),
        Kind::RealBch => GradientCode::Exact(build_real_bch_scheme(n, require(args.s, "s", args.kind)?)?),
        Kind::Expander => {
            let g = match &args.graph {
                Some(path) => {
                    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    let g = read_graph(BufReader::new(file))?;
                    if g.n() != n {
                        bail!(Error::InvalidParams(format!("graph has {} vertices, --n is {n}", g.n())));
                    }
                    g
                }
                None => random_regular_graph(n, require(args.d, "d", args.kind)?, seed)?,
            };
            let scheme = build_expander_scheme(&g)?;
            graph = Some(g);
            GradientCode::Approx(scheme)
        }
        Kind::Bipartite => {
            let g = random_bipartite_regular(n, require(args.d, "d", args.kind)?, seed)?;
            GradientCode::Approx(build_bipartite_scheme(&g)?)
        }
        Kind::Identity => GradientCode::Approx(identity_scheme(n)?),
    };
    save_code(&code, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.graph_out {
        let g = graph.context("--graph-out needs --kind expander")?;
        write_graph(&g, File::create(path)?)?;
    }

    let supports = code.supports();
    let max_support = supports.iter().map(Vec::len).max().unwrap_or(0);
    let kind = args.kind.to_possible_value().expect("no skipped variants");
    println!("kind: {}", kind.get_name());
    println!("n: {n}");
    match &code {
        GradientCode::Exact(s) => println!("s: {}", s.s()),
        GradientCode::Approx(s) => {
            println!("d: {}", s.d());
            println!("lambda: {}", s.bound_lambda());
        }
    }
    println!("row support: {max_support}");
    println!("written: {}", args.out.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<()> {
    let seed = args.seed.resolve();
    let code = load_code(&args.scheme).with_context(|| format!("loading {}", args.scheme.display()))?;
    let mode = match args.mode {
        ModeArg::Exhaustive => VerificationMode::Exhaustive { cap: args.cap },
        ModeArg::Sampled => VerificationMode::Sampled {
            samples: args.samples,
            seed,
        },
    };
    let report = match &code {
        GradientCode::Exact(scheme) => check_ec_scheme(scheme, mode)?,
        GradientCode::Approx(scheme) => {
            let s = args.s.context("--s is required for graph schemes")?;
            let eps = match args.epsilon {
                EpsilonArg::Auto => scheme.epsilon(s)?,
                EpsilonArg::Sqrt => (s as f64).sqrt(),
                EpsilonArg::None => f64::INFINITY,
            } * args.epsilon_scale;
            let decoder = ApproxDecoder::from(args.decoder);
            let mut report = check_eps_ac(&code.name(), scheme.b(), s, |k| decoder.decode(scheme, k), |_| eps, mode)?;
            if eps.is_infinite() {
                // JSON has no infinity; an absent bound is reported as null
                report.bound = f64::NAN;
                report.worst_margin = f64::NAN;
            }
            report
        }
    };
    println!("{}", report.to_json()?);
    if report.passed {
        Ok(())
    } else {
        Err(CheckFailed.into())
    }
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let seed = args.seed.resolve();
    if args.s_min > args.s_max {
        bail!(Error::InvalidParams("--s-min exceeds --s-max".into()));
    }
    let params = SweepParams {
        n: args.n,
        degrees: args.d,
        s_values: (args.s_min..=args.s_max).collect(),
        trials: args.trials,
        decoders: args.decoders.into_iter().map(ApproxDecoder::from).collect(),
        seed,
    };
    let rows = l2_sweep(&params)?;
    match &args.out {
        Some(path) => write_sweep_csv(&rows, File::create(path)?)?,
        None => write_sweep_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let config: TrainConfig = serde_json::from_str(&text).map_err(Error::from)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    eprintln!("seed: {}", config.straggler.seed);

    let code = load_code(&resolve(base, &config.scheme_path))?;
    let data = config.data.load(base)?;
    let parts = partition(&data, &code.supports(), config.partition_seed)?;
    let decoder = match args.decoder {
        None => config.decoder,
        Some(TrainDecoderArg::Exact) => DecoderKind::Exact,
        Some(TrainDecoderArg::Linear) => DecoderKind::Linear,
        Some(TrainDecoderArg::Optimal) => DecoderKind::Optimal,
        Some(TrainDecoderArg::IgnoreStragglers) => DecoderKind::IgnoreStragglers,
    };
    let sim = SimConfig {
        code,
        decoder,
        iterations: config.iterations,
        lr: config.lr,
        stragglers: config.straggler,
        pack: config.pack,
    };
    let run = run_gd(&sim, &parts)?;
    match &args.out {
        Some(path) => run.write_metrics_csv(File::create(path)?)?,
        None => run.write_metrics_csv(io::stdout().lock())?,
    }
    eprintln!("final loss: {}", run.final_loss);
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<()> {
    let seed = args.seed.resolve();
    let b = match &args.scheme {
        Some(path) => match load_code(path)? {
            GradientCode::Approx(scheme) => scheme.b().clone(),
            GradientCode::Exact(scheme) => {
                if scheme.b().iter().any(|z| z.im != 0.0) {
                    bail!(Error::InvalidParams("the lower bound needs a real matrix".into()));
                }
                scheme.b_real()
            }
        },
        None => {
            let (n, d) = (args.n.expect("required by clap"), args.d.expect("required by clap"));
            build_expander_scheme(&random_regular_graph(n, d, seed)?)?.b().clone()
        }
    };
    let adv = adversarial_straggler_set(&b, args.s)?;
    let residual = min_norm_residual(&b, &adv.k)?;
    let bound = lower_bound(args.s, adv.d);
    let passed = residual >= bound - 1e-9;
    let one_based = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
    let mut out = io::stdout().lock();
    writeln!(out, "d: {}", adv.d)?;
    writeln!(out, "K: {}", one_based(&adv.k))?;
    writeln!(out, "Q: {}", one_based(&adv.q))?;
    writeln!(out, "residual: {residual}")?;
    writeln!(out, "lower bound: {bound}")?;
    writeln!(out, "{}", if passed { "pass" } else { "fail" })?;
    if passed {
        Ok(())
    } else {
        Err(CheckFailed.into())
    }
}

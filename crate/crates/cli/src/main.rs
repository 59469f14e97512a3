//! Command-line frontend: sample fBm paths, solve single problems, run
//! convergence and interpolation-error studies, print constants, and check
//! degeneracy. Exit codes: 0 success, 1 validation error, 2 runtime error.

use clap::{Args, Parser, Subcommand};
use fbm_sde::analysis;
use fbm_sde::coeff::Params;
use fbm_sde::fbm::{self, CholeskySampler, CirculantSampler};
use fbm_sde::harness::{self, ExperimentConfig, WeightSource};
use fbm_sde::model::{self, DegeneracyThresholds, ProblemConfig};
use fbm_sde::schemes::{self, SchemeKind};
use fbm_sde::{Error, Hurst, Result};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fbm-sde", version, about = "Strong approximation of SDEs driven by fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample fractional Brownian motion paths and emit them as CSV
    Sample(SampleArgs),
    /// Solve one problem along one sampled path and emit the trajectory
    Solve(SolveArgs),
    /// Run a Monte Carlo strong-error convergence study
    Convergence(ConvergenceArgs),
    /// Estimate the weighted interpolation error per grid size
    InterpError(InterpErrorArgs),
    /// Print the error constants attached to a Hurst index
    Constants(ConstantsArgs),
    /// Classify a problem as degenerate or non-degenerate
    Degeneracy(DegeneracyArgs),
    /// Monte Carlo diagnostics of the weight process Y
    Weight(WeightArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Hurst index in (0, 1)
    #[arg(long)]
    hurst: f64,
    /// Number of grid steps on [0, 1]
    #[arg(long)]
    n: usize,
    /// Number of independent paths
    #[arg(long, default_value_t = 1)]
    paths: usize,
    /// Master seed; path i uses rng stream i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampler: "cholesky" or "circulant"
    #[arg(long, default_value = "circulant")]
    method: String,
    /// Output CSV file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON problem config file
    #[arg(long)]
    config: PathBuf,
    /// Number of grid steps on [0, 1]
    #[arg(long)]
    n: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scheme: euler, wong-zakai, or mcshane
    #[arg(long, default_value = "mcshane")]
    scheme: String,
    /// Wong-Zakai ODE substeps per cell
    #[arg(long, default_value_t = schemes::DEFAULT_WZ_SUBSTEPS)]
    substeps: usize,
    /// Output CSV file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// JSON problem config file
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated scheme list
    #[arg(long, default_value = "euler,wong-zakai,mcshane")]
    schemes: String,
    /// Comma-separated coarse step counts
    #[arg(long, default_value = "16,32,64,128")]
    n: String,
    /// Monte Carlo paths
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fine grid refinement over max(n)
    #[arg(long, default_value_t = harness::DEFAULT_FINE_FACTOR)]
    fine_factor: usize,
    /// Wong-Zakai ODE substeps per cell
    #[arg(long, default_value_t = schemes::DEFAULT_WZ_SUBSTEPS)]
    substeps: usize,
    /// Output directory for errors.csv, regression.csv, manifest.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpErrorArgs {
    /// JSON problem config file
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated coarse step counts
    #[arg(long, default_value = "16,32,64,128")]
    n: String,
    /// Monte Carlo paths
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fine grid refinement over max(n)
    #[arg(long, default_value_t = harness::DEFAULT_FINE_FACTOR)]
    fine_factor: usize,
    /// Weight source: "langevin" (deterministic) or "mc-weight" (pathwise)
    #[arg(long, default_value = "langevin")]
    source: String,
    /// Output CSV file (default: human-readable table on stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Hurst index in (1/2, 1)
    #[arg(long)]
    hurst: f64,
}

#[derive(Args)]
struct DegeneracyArgs {
    /// JSON problem config file
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct WeightArgs {
    /// JSON problem config file
    #[arg(long)]
    config: PathBuf,
    /// Monte Carlo paths
    #[arg(long, default_value_t = 2000)]
    paths: usize,
    /// Fine grid steps for the weight trajectories
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// 6 significant digits for human-readable output.
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e7).contains(&a) {
        let digits = (5 - a.log10().floor() as i32).max(0) as usize;
        format!("{x:.digits$}")
    } else {
        format!("{x:.5e}")
    }
}

fn load_config(path: &PathBuf) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad step count `{t}`")))
        })
        .collect()
}

fn parse_schemes(text: &str) -> Result<Vec<SchemeKind>> {
    text.split(',').map(|t| SchemeKind::parse(t.trim())).collect()
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run_sample(args: &SampleArgs) -> Result<()> {
    let h = Hurst::new(args.hurst)?;
    let mut paths = Vec::with_capacity(args.paths);
    match args.method.as_str() {
        "cholesky" => {
            let sampler = CholeskySampler::new(args.n, h)?;
            for id in 0..args.paths as u64 {
                paths.push(sampler.sample(&mut fbm_sde::rng::stream(args.seed, id), id));
            }
        }
        "circulant" => {
            let sampler = CirculantSampler::new(args.n, h)?;
            for id in 0..args.paths as u64 {
                paths.push(sampler.sample(&mut fbm_sde::rng::stream(args.seed, id), id));
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown sampler `{other}` (expected cholesky or circulant)"
            )))
        }
    }
    fbm::write_paths_csv(&mut open_output(&args.out)?, &paths)
}

fn run_solve(args: &SolveArgs) -> Result<()> {
    let problem = load_config(&args.config)?.build()?;
    let scheme = SchemeKind::parse(&args.scheme)?;
    let sampler = CirculantSampler::new(args.n, problem.hurst)?;
    let path = sampler.sample(&mut fbm_sde::rng::stream(args.seed, 0), 0);
    let traj = match scheme {
        SchemeKind::WongZakai => schemes::wong_zakai_solve(&problem, &path, args.substeps)?,
        other => other.solve(&problem, &path)?,
    };
    let mut out = open_output(&args.out)?;
    writeln!(out, "t,b,x")?;
    for (k, x) in traj.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e},{x:.16e}", path.grid.node(k), path.values[k])?;
    }
    Ok(())
}

fn experiment_config(
    config: &PathBuf,
    schemes: &str,
    n: &str,
    paths: usize,
    seed: u64,
    fine_factor: usize,
    substeps: usize,
    out: Option<PathBuf>,
) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        problem: load_config(config)?,
        schemes: parse_schemes(schemes)?,
        n_list: parse_list(n)?,
        fine_factor,
        paths,
        master_seed: seed,
        substeps,
        output: out,
    })
}

fn run_convergence(args: &ConvergenceArgs) -> Result<()> {
    let cfg = experiment_config(
        &args.config,
        &args.schemes,
        &args.n,
        args.paths,
        args.seed,
        args.fine_factor,
        args.substeps,
        args.out.clone(),
    )?;
    let table = if cfg.output.is_some() {
        harness::run_experiment(&cfg)?
    } else {
        harness::strong_error_study(&cfg)?
    };
    println!(
        "{:<12} {:>6} {:>12} {:>12} {:>12} {:>8}",
        "scheme", "n", "rms_error", "stderr", "scaled", "aborted"
    );
    for r in &table.rows {
        println!(
            "{:<12} {:>6} {:>12} {:>12} {:>12} {:>8}",
            r.scheme.name(),
            r.n,
            sig6(r.rms_error),
            sig6(r.stderr),
            sig6(r.scaled_error),
            r.aborted_paths
        );
    }
    for &scheme in &cfg.schemes {
        if let Ok((slope, _, r2)) = harness::rate_regression(&table, scheme) {
            println!(
                "rate[{}]: slope={} r2={}",
                scheme.name(),
                sig6(slope),
                sig6(r2)
            );
        }
    }
    Ok(())
}

fn run_interp_error(args: &InterpErrorArgs) -> Result<()> {
    let source = match args.source.as_str() {
        "langevin" => WeightSource::Langevin,
        "mc-weight" | "mc_weight" => WeightSource::McWeight,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown weight source `{other}` (expected langevin or mc-weight)"
            )))
        }
    };
    let cfg = experiment_config(
        &args.config,
        "mcshane",
        &args.n,
        args.paths,
        args.seed,
        args.fine_factor,
        schemes::DEFAULT_WZ_SUBSTEPS,
        None,
    )?;
    let rows = harness::interp_error_study(&cfg, source)?;
    if let Some(path) = &args.out {
        let mut out = std::fs::File::create(path)?;
        writeln!(out, "n,paths,mc_estimate,stderr,exact,scaled")?;
        for r in &rows {
            let exact = r.exact.map_or(String::new(), |e| format!("{e:.16e}"));
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{exact},{:.16e}",
                r.n, r.paths, r.mc_estimate, r.stderr, r.scaled
            )?;
        }
    } else {
        println!(
            "{:>6} {:>12} {:>12} {:>12} {:>12}",
            "n", "mc_estimate", "stderr", "exact", "scaled"
        );
        for r in &rows {
            println!(
                "{:>6} {:>12} {:>12} {:>12} {:>12}",
                r.n,
                sig6(r.mc_estimate),
                sig6(r.stderr),
                r.exact.map_or("-".into(), sig6),
                sig6(r.scaled)
            );
        }
    }
    Ok(())
}

fn run_constants(args: &ConstantsArgs) -> Result<()> {
    let h = Hurst::for_sde(args.hurst)?;
    let c = analysis::constants_for(h)?;
    println!("kappa={}", sig6(c.kappa));
    println!("zeta_neg2H={}", sig6(c.zeta_neg2h));
    println!("beta_H={}", sig6(c.beta));
    println!("K2={}", sig6(c.k2));
    println!("C0_1e4={}", sig6(analysis::c0_sequence(10_000, h)));
    Ok(())
}

fn run_degeneracy(args: &DegeneracyArgs) -> Result<()> {
    let problem = load_config(&args.config)?.build()?;
    let class = model::degeneracy_check(&problem, (-10.0, 10.0), DegeneracyThresholds::default())?;
    let label = match class {
        model::Degeneracy::Degenerate => "degenerate",
        model::Degeneracy::NonDegenerate => "non_degenerate",
        model::Degeneracy::Inconclusive => "inconclusive",
    };
    println!("classification={label}");
    println!("commutator_x0={}", sig6(problem.commutator(problem.x0)?));
    Ok(())
}

fn run_weight(args: &WeightArgs) -> Result<()> {
    let problem = load_config(&args.config)?.build()?;
    let (msw, msw_se) =
        analysis::mean_square_weight_integral(&problem, args.paths, args.n, args.seed)?;
    let (nd, nd_se) = analysis::nd_condition_estimate(&problem, args.paths, args.n, args.seed)?;
    let predicted = analysis::predicted_asymptotic_error(&problem, args.paths, args.n, args.seed)?;
    println!("mean_square_weight={}", sig6(msw));
    println!("mean_square_weight_stderr={}", sig6(msw_se));
    println!("nd_condition={}", sig6(nd));
    println!("nd_condition_stderr={}", sig6(nd_se));
    println!("predicted_asymptotic_error={}", sig6(predicted));
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Solve(args) => run_solve(args),
        Command::Convergence(args) => run_convergence(args),
        Command::InterpError(args) => run_interp_error(args),
        Command::Constants(args) => run_constants(args),
        Command::Degeneracy(args) => run_degeneracy(args),
        Command::Weight(args) => run_weight(args),
    }
}

/// 1 for bad input, 2 for failures at run time.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::Syntax { .. }
        | Error::UnknownFunction(_)
        | Error::UnboundParameter(_)
        | Error::Divisibility { .. }
        | Error::InvalidConfig(_)
        | Error::SchemeNotAdmissible(_) => 1,
        _ => 2,
    }
}

fn main() {
    if let Ok(threads) = std::env::var("FBM_SDE_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: FBM_SDE_THREADS must be a positive integer");
                std::process::exit(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here with a zero exit; everything else
            // is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            e.print().ok();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbcd::metrics::CostParams;
use dbcd::{
    auprc, cost_estimate, emit_csv, parse_libsvm, reference_solve, run_method, synth_dataset,
    write_libsvm, CsvOptions, Dataset, Error, InnerStop, LossKind, Method, MethodConfig, Result,
    SynthConfig,
};

const THREADS_ENV: &str = "SOLVER_THREADS";

#[derive(Parser)]
#[command(
    name = "dbcd",
    version,
    about = "Distributed block coordinate descent for l1-regularized classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a LIBSVM file and write the per-iteration trajectory as CSV.
    Solve(SolveArgs),
    /// Evaluate the per-iteration cost model.
    EstimateCost(CostArgs),
    /// Generate a synthetic LIBSVM dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    nodes: usize,
    #[arg(long, default_value_t = 0.1)]
    wss_frac: f64,
    #[arg(long, default_value_t = 1e-12)]
    mu: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 1e-12)]
    nu: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    beta_ls: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_comm: f64,
    #[arg(long, default_value_t = 800)]
    max_outer: usize,
    #[arg(long, default_value_t = 1e-6)]
    kkt_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference objective file; computed and written if missing.
    #[arg(long)]
    fstar: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = LossKind::Logistic)]
    loss: LossKind,
    /// Number of features; inferred from the file when omitted.
    #[arg(long)]
    dim: Option<usize>,
    /// Stop the inner solve early once |delta_j| <= (mu/2)|d_j|.
    #[arg(long)]
    eps_stop: bool,
    /// ESO multiplier for HYDRA.
    #[arg(long, default_value_t = 2.0)]
    omega: f64,
    /// Stop once RFVD drops to this level.
    #[arg(long, allow_hyphen_values = true)]
    rfvd_stop: Option<f64>,
    /// Held-out LIBSVM file for an AUPRC report.
    #[arg(long)]
    eval: Option<PathBuf>,
    /// Write measured wall time per iteration.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    nz: f64,
    #[arg(long)]
    n: f64,
    #[arg(long)]
    m: f64,
    #[arg(long)]
    nodes: f64,
    #[arg(long)]
    s_size: f64,
    #[arg(long)]
    beta_comm: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_ls: f64,
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    density: f64,
    #[arg(long)]
    sparsity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    group_size: usize,
    #[arg(long, default_value_t = 0.0)]
    correlation: f64,
    /// Held-out rows written to --test-out.
    #[arg(long, default_value_t = 0)]
    n_test: usize,
    #[arg(long)]
    test_out: Option<PathBuf>,
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|t| *t > 0)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn load(path: &Path, dim: Option<usize>, loss: LossKind) -> Result<Dataset<f64>> {
    parse_libsvm(BufReader::new(File::open(path)?), dim, loss)
}

fn read_fstar(path: &Path) -> Result<Option<f64>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)?;
    text.trim()
        .parse::<f64>()
        .map(Some)
        .map_err(|e| Error::Parse {
            line: 1,
            msg: format!("reference objective in {}: {e}", path.display()),
        })
}

fn solve(args: SolveArgs) -> Result<()> {
    let dataset = load(&args.data, args.dim, args.loss)?;
    let mut cfg = MethodConfig::new(args.method, args.lambda, args.nodes);
    cfg.wss_frac = args.wss_frac;
    cfg.mu = args.mu;
    cfg.k = args.k;
    cfg.nu = args.nu;
    cfg.sigma = args.sigma;
    cfg.beta_ls = args.beta_ls;
    cfg.beta_comm = args.beta_comm;
    cfg.max_outer = args.max_outer;
    cfg.kkt_tol = args.kkt_tol;
    cfg.seed = args.seed;
    cfg.hydra_omega = args.omega;
    cfg.inner_stop = if args.eps_stop {
        InnerStop::EpsMuOverTwo
    } else {
        InnerStop::FixedCycles
    };
    cfg.threads = threads_from_env()?;
    cfg.rfvd_stop = args.rfvd_stop;
    cfg.validate(dataset.m())?;

    let f_star = match &args.fstar {
        Some(path) => match read_fstar(path)? {
            Some(v) => v,
            None => {
                let reference = reference_solve(&dataset, args.lambda, 1e-10, 100_000);
                fs::write(path, format!("{:.17e}\n", reference.f_star))?;
                reference.f_star
            }
        },
        None => reference_solve(&dataset, args.lambda, 1e-10, 100_000).f_star,
    };
    cfg.f_star = Some(f_star);

    let run = run_method(&cfg, &dataset)?;
    emit_csv(
        &run.records,
        CsvOptions {
            timing: args.timing,
        },
        &args.out,
    )?;
    let last = run
        .records
        .last()
        .expect("trajectory has the initial record");
    eprintln!(
        "{}: {} after {} iterations, F = {:.12e}, rfvd = {:.3}, kkt = {:.3e}, nnz = {}",
        args.method,
        run.stop,
        last.t,
        last.f,
        last.rfvd,
        last.kkt,
        run.state.nnz()
    );
    if let Some(path) = &args.eval {
        let test = load(path, Some(dataset.m()), args.loss)?;
        let scores = test.matrix.mul_vec(&run.state.w);
        eprintln!("auprc = {:.6}", auprc(&scores, &test.labels)?);
    }
    Ok(())
}

fn estimate(args: CostArgs) -> Result<()> {
    let est = cost_estimate(
        args.method,
        &CostParams {
            nz: args.nz,
            n: args.n,
            m: args.m,
            nodes: args.nodes,
            s_size: args.s_size,
            beta: args.beta_comm,
            tau_ls: args.tau_ls,
            k: args.k,
            q: args.q,
        },
    )?;
    println!("comp={:.12e} comm={:.12e}", est.comp, est.comm);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut cfg = SynthConfig::new(args.n, args.m, args.density, args.sparsity, args.seed);
    cfg.noise = args.noise;
    cfg.group_size = args.group_size;
    cfg.correlation = args.correlation;
    cfg.n_test = args.n_test;
    let data = synth_dataset::<f64>(&cfg)?;
    write_libsvm(&data.train, BufWriter::new(File::create(&args.out)?))?;
    if let Some(path) = &args.test_out {
        write_libsvm(&data.test, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::EstimateCost(a) => estimate(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use randqls::simulator::NoiseMode;
use randqls_cli::experiments::{rmse_sweep, rte_single, RteSingleConfig, SweepConfig, SweepPolicy};
use randqls_cli::manifest::{write_csv, write_json, Manifest};
use randqls_cli::matrix::{gen_matrix, load_matrix, MatrixArtifact};
use randqls_cli::series::{params, series_artifact, table1, verify_series};
use randqls_cli::solve::{
    pf_inputs, resources, solve, KernelKind, PolicySpec, ResourceRequest, SolveRequest,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "randqls",
    version,
    about = "Randomized Fourier-series linear-systems solver experiments"
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Enable the expensive configurations (κ = 1000 table rows, full-scale sweeps).
    #[arg(long, global = true)]
    heavy: bool,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random Hermitian matrix with a prescribed condition number.
    GenMatrix {
        #[arg(long, default_value_t = 2)]
        qubits: usize,
        #[arg(long)]
        kappa: f64,
    },
    /// Truncation and quadrature parameters for a rescaled condition number.
    Params(SeriesArgs),
    /// Full series artifact (parameters, nodes, weights) as JSON.
    BuildSeries(SeriesArgs),
    /// Series values against 1/x on a log grid.
    VerifySeries {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// (J, K) for the twelve reference rows, with optional random-matrix trials.
    Table1 {
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Sample and gate counts for the PF or RTE kernel.
    Resources {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value = "rte")]
        kernel: KernelKind,
        /// tmax, fixed:R, quadratic:C, time-floored:C
        #[arg(long, default_value = "tmax")]
        r_policy: PolicySpec,
        /// Commutator constant; taken from --matrix when omitted.
        #[arg(long)]
        f: Option<f64>,
        /// Number of Pauli terms; taken from --matrix when omitted.
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Estimate <phi|A^-1|psi> by sampling.
    Solve {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        kappa_star: Option<f64>,
        #[arg(long)]
        eps_t: f64,
        #[arg(long)]
        eps_d: f64,
        #[arg(long, default_value = "pf")]
        kernel: KernelKind,
        /// tmax, fixed:R, quadratic:C, time-floored:C, certified:EPS
        #[arg(long, default_value = "quadratic:0.1")]
        r_policy: PolicySpec,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value = "bernoulli")]
        noise: NoiseMode,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        phi: usize,
        #[arg(long, default_value_t = 0)]
        psi: usize,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        /// Per-sample records as CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// RMSE against sample count for several Trotter policies.
    RmseSweep {
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 2e-2)]
        eps_f: f64,
        #[arg(long, default_value = "gaussian")]
        noise: NoiseMode,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        n_min: u64,
        #[arg(long)]
        n_max: Option<u64>,
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
        /// exact, fixed:R, quadratic:C
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "fixed:5,quadratic:0.05,quadratic:0.1,exact"
        )]
        policies: Vec<SweepPolicy>,
    },
    /// RMSE of the RTE estimator for one exponential.
    RteSingle {
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,20,50,80")]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        r: u64,
        #[arg(long, default_value_t = randqls::kernel_rte::NMAX_CAP)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
    },
}

#[derive(Args, Clone, Serialize)]
struct SeriesArgs {
    /// Condition-number bound before rescaling.
    #[arg(long)]
    kappa_star: Option<f64>,
    /// Pauli weight; κ̃ = λ κ*.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Rescaled condition number; overrides --kappa-star.
    #[arg(long)]
    kappa_tilde: Option<f64>,
    #[arg(long)]
    eps_t: f64,
    #[arg(long)]
    eps_d: f64,
}

impl SeriesArgs {
    fn kappa_tilde(&self) -> anyhow::Result<f64> {
        match (self.kappa_tilde, self.kappa_star) {
            (Some(kt), _) => Ok(kt),
            (None, Some(k)) => Ok(k * self.lambda),
            (None, None) => bail!("give --kappa-star or --kappa-tilde"),
        }
    }
}

#[derive(Args, Clone, Serialize)]
struct MatrixArgs {
    /// Matrix artifact, Pauli decomposition or dense JSON.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Generate a 2-qubit matrix with this condition number instead.
    #[arg(long)]
    gen_kappa: Option<f64>,
}

impl MatrixArgs {
    fn load(&self, seed: u64) -> anyhow::Result<Option<MatrixArtifact>> {
        match (&self.matrix, self.gen_kappa) {
            (Some(p), _) => Ok(Some(load_matrix(p)?)),
            (None, Some(k)) => Ok(Some(gen_matrix(2, k, seed)?)),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args, Clone, Serialize)]
struct TargetArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    kappa_star: Option<f64>,
    /// Pauli weight when no matrix is given.
    #[arg(long)]
    lambda: Option<f64>,
    /// Rescaled condition number; with --lambda sets κ* = κ̃/λ.
    #[arg(long)]
    kappa_tilde: Option<f64>,
    #[arg(long)]
    eps_t: f64,
    #[arg(long)]
    eps_d: f64,
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let out = cli.out.as_deref();
    let seed = cli.seed;
    match &cli.command {
        Command::GenMatrix { qubits, kappa } => {
            let m = gen_matrix(*qubits, *kappa, seed)?;
            let manifest = Manifest::new(
                "gen-matrix",
                seed,
                serde_json::json!({"qubits": qubits, "kappa": kappa}),
            )?;
            write_json(out, &manifest, &m)
        }
        Command::Params(a) => {
            let p = params(a.kappa_tilde()?, a.eps_t, a.eps_d)?;
            write_json(out, &Manifest::new("params", seed, a)?, &p)
        }
        Command::BuildSeries(a) => {
            let kt = a.kappa_tilde()?;
            let s = series_artifact(kt / a.lambda, a.lambda, a.eps_t, a.eps_d)?;
            write_json(out, &Manifest::new("build-series", seed, a)?, &s)
        }
        Command::VerifySeries { series, points } => {
            let kt = series.kappa_tilde()?;
            let s = randqls::fourier::build_series(
                kt / series.lambda,
                series.lambda,
                series.eps_t,
                series.eps_d,
            )?;
            let rows = verify_series(&s, *points);
            let config = serde_json::json!({"series": series, "points": points});
            write_csv(out, &Manifest::new("verify-series", seed, config)?, &rows)
        }
        Command::Table1 { trials } => {
            let rows = table1(*trials, cli.heavy, seed)?;
            let config = serde_json::json!({"trials": trials, "heavy": cli.heavy});
            write_csv(out, &Manifest::new("table1", seed, config)?, &rows)
        }
        Command::Resources {
            target,
            eps,
            delta,
            kernel,
            r_policy,
            f,
            terms,
        } => {
            let m = target.matrix.load(seed)?;
            let lambda = match (&m, target.lambda) {
                (_, Some(l)) => l,
                (Some(m), None) => m.lambda,
                (None, None) => bail!("give --lambda or a matrix"),
            };
            let kappa_star = match (target.kappa_tilde, target.kappa_star, &m) {
                (Some(kt), _, _) => kt / lambda,
                (None, Some(k), _) => k,
                (None, None, Some(m)) => 1.0 / m.min_abs_eigenvalue(),
                (None, None, None) => bail!("give --kappa-star, --kappa-tilde or a matrix"),
            };
            let (f, terms) = match (&m, *kernel) {
                (Some(m), KernelKind::Pf) if f.is_none() || terms.is_none() => {
                    let (mf, ml) = pf_inputs(m)?;
                    (Some(f.unwrap_or(mf)), Some(terms.unwrap_or(ml)))
                }
                _ => (*f, *terms),
            };
            let req = ResourceRequest {
                kappa_star,
                lambda,
                eps: *eps,
                delta: *delta,
                eps_t: target.eps_t,
                eps_d: target.eps_d,
                kernel: *kernel,
                r_policy: *r_policy,
                f,
                n_terms: terms,
            };
            let report = resources(&req)?;
            if !report.estimate.is_feasible() {
                log::warn!(
                    "{:?}: log10 N_S >= {:.1}",
                    report.estimate.feasibility,
                    report.estimate.log10_n_s_lower
                );
            }
            write_json(out, &Manifest::new("resources", seed, &req)?, &report)
        }
        Command::Solve {
            matrix,
            kappa_star,
            eps_t,
            eps_d,
            kernel,
            r_policy,
            n_max,
            noise,
            samples,
            phi,
            psi,
            checkpoints,
            records,
        } => {
            let m = matrix.load(seed)?.context("give --matrix or --gen-kappa")?;
            let req = SolveRequest {
                kappa_star: *kappa_star,
                eps_t: *eps_t,
                eps_d: *eps_d,
                kernel: *kernel,
                r_policy: *r_policy,
                n_max: *n_max,
                noise: *noise,
                n_samples: *samples,
                phi: *phi,
                psi: *psi,
                checkpoints: checkpoints.clone(),
                keep_records: records.is_some(),
                master_seed: seed,
            };
            let mut report = solve(&m, &req)?;
            let manifest = Manifest::new(
                "solve",
                seed,
                serde_json::json!({"request": &req, "matrix": matrix}),
            )?;
            if let (Some(path), Some(recs)) = (records, report.records.take()) {
                let flat: Vec<RecordRow> = recs.iter().map(RecordRow::from).collect();
                write_csv(Some(path), &manifest, &flat)?;
            }
            write_json(out, &manifest, &report)
        }
        Command::RmseSweep {
            kappa,
            eps_f,
            noise,
            trials,
            n_min,
            n_max,
            per_decade,
            policies,
        } => {
            let config = SweepConfig {
                kappa: *kappa,
                eps_f: *eps_f,
                noise: *noise,
                trials: *trials,
                n_min: *n_min,
                n_max: n_max.unwrap_or(if cli.heavy { 100_000_000 } else { 1_000_000 }),
                per_decade: *per_decade,
                policies: policies.clone(),
                master_seed: seed,
            };
            let result = rmse_sweep(&config)?;
            let manifest = Manifest::new(
                "rmse-sweep",
                seed,
                serde_json::json!({"config": &config, "truth": result.truth, "lambda": result.lambda, "j": result.j, "k": result.k}),
            )?;
            write_csv(out, &manifest, &result.rows)
        }
        Command::RteSingle {
            kappa,
            taus,
            r,
            n_max,
            trials,
            samples,
            per_decade,
        } => {
            let config = RteSingleConfig {
                kappa: *kappa,
                taus: taus.clone(),
                r: *r,
                n_max: *n_max,
                trials: *trials,
                n_samples: *samples,
                per_decade: *per_decade,
                master_seed: seed,
                ..Default::default()
            };
            let rows = rte_single(&config)?;
            write_csv(out, &Manifest::new("rte-single", seed, &config)?, &rows)
        }
    }
}

/// Flat CSV form of a sample record.
#[derive(Serialize)]
struct RecordRow {
    sample_index: u64,
    j: usize,
    k: usize,
    tau: f64,
    kernel: randqls::estimator::KernelTag,
    r: u64,
    prefactor_re: f64,
    prefactor_im: f64,
    re: f64,
    im: f64,
    z_hat_re: f64,
    z_hat_im: f64,
}

impl From<&randqls::estimator::SampleRecord<f64>> for RecordRow {
    fn from(r: &randqls::estimator::SampleRecord<f64>) -> Self {
        Self {
            sample_index: r.sample_index,
            j: r.j,
            k: r.k,
            tau: r.tau,
            kernel: r.kernel,
            r: r.r,
            prefactor_re: r.prefactor.re,
            prefactor_im: r.prefactor.im,
            re: r.re,
            im: r.im,
            z_hat_re: r.z_hat.re,
            z_hat_im: r.z_hat.im,
        }
    }
}

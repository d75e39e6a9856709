//! RMSE experiments: estimator convergence per Trotter policy, and the RTE
//! estimator for a single exponential.

use anyhow::Context;
use num_complex::Complex;
use randqls::estimator::{run_solver, KernelConfig, Problem, SolveConfig};
use randqls::fourier::build_series;
use randqls::kernel_pf::TrotterPolicy;
use randqls::kernel_rte::{segment_model, RteSampler};
use randqls::rng::{derive_seed, stream, Purpose};
use randqls::scalar::CompensatedSum;
use randqls::simulator::{NoiseMode, SpectralOverlap, StateVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::{gen_matrix, MatrixArtifact};

/// `per_decade` log-spaced counts from `n_min` to `n_max`, both included.
pub fn log_schedule(n_min: u64, n_max: u64, per_decade: usize) -> Vec<u64> {
    let (lo, hi) = ((n_min.max(1)) as f64, n_max.max(n_min.max(1)) as f64);
    let steps = ((hi.log10() - lo.log10()) * per_decade as f64).round() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| (lo * 10f64.powf(i as f64 / per_decade as f64)).round() as u64)
        .filter(|&n| n <= hi as u64)
        .collect();
    out.push(hi as u64);
    out.sort_unstable();
    out.dedup();
    out
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepPolicy {
    Fixed {
        r: u64,
    },
    Quadratic {
        c: f64,
    },
    /// Exact evolution in place of the product formula.
    Exact,
}

impl SweepPolicy {
    pub fn label(&self) -> String {
        match self {
            SweepPolicy::Fixed { r } => format!("fixed_r{r}"),
            SweepPolicy::Quadratic { c } => format!("quadratic_{c}"),
            SweepPolicy::Exact => "exact".into(),
        }
    }

    fn kernel(&self) -> KernelConfig<f64> {
        match *self {
            SweepPolicy::Fixed { r } => KernelConfig::Pf {
                policy: TrotterPolicy::Fixed { r },
            },
            SweepPolicy::Quadratic { c } => KernelConfig::Pf {
                policy: TrotterPolicy::Quadratic { c },
            },
            SweepPolicy::Exact => KernelConfig::Exact,
        }
    }
}

impl std::str::FromStr for SweepPolicy {
    type Err = anyhow::Error;

    /// `exact`, `fixed:R` or `quadratic:C`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        Ok(match kind {
            "exact" => SweepPolicy::Exact,
            "fixed" => SweepPolicy::Fixed {
                r: arg.parse().context("fixed:R needs an integer")?,
            },
            "quadratic" => SweepPolicy::Quadratic {
                c: arg.parse().context("quadratic:C needs a number")?,
            },
            _ => anyhow::bail!("unknown policy {s:?}; use exact, fixed:R or quadratic:C"),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kappa: f64,
    pub eps_f: f64,
    pub noise: NoiseMode,
    pub trials: usize,
    pub n_min: u64,
    pub n_max: u64,
    pub per_decade: usize,
    pub policies: Vec<SweepPolicy>,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kappa: 10.0,
            eps_f: 2e-2,
            noise: NoiseMode::Gaussian,
            trials: 20,
            n_min: 100,
            n_max: 1_000_000,
            per_decade: 10,
            policies: vec![
                SweepPolicy::Fixed { r: 5 },
                SweepPolicy::Quadratic { c: 0.05 },
                SweepPolicy::Quadratic { c: 0.1 },
                SweepPolicy::Exact,
            ],
            master_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy: String,
    pub n_s: u64,
    pub rmse: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub truth: f64,
    pub lambda: f64,
    pub kappa_tilde: f64,
    pub j: usize,
    pub k: usize,
}

impl SweepResult {
    pub fn curve(&self, policy: &SweepPolicy) -> Vec<(f64, f64)> {
        let label = policy.label();
        self.rows
            .iter()
            .filter(|r| r.policy == label)
            .map(|r| (r.n_s as f64, r.rmse))
            .collect()
    }

    pub fn rmse_at(&self, policy: &SweepPolicy, n_s: u64) -> Option<f64> {
        let label = policy.label();
        self.rows
            .iter()
            .find(|r| r.policy == label && r.n_s == n_s)
            .map(|r| r.rmse)
    }
}

/// Estimates `Re <0|A⁻¹|0>` for a random 2-qubit matrix. Every policy sees
/// the same trial seeds, hence the same Fourier times and shot noise.
pub fn rmse_sweep(config: &SweepConfig) -> anyhow::Result<SweepResult> {
    let m = gen_matrix(
        2,
        config.kappa,
        derive_seed(config.master_seed, Purpose::Matrix, 0),
    )?;
    let problem = basis_problem(&m, config.eps_f)?;
    let truth = problem.truth().re;
    let schedule = log_schedule(config.n_min, config.n_max, config.per_decade);
    let n_s = *schedule.last().context("empty schedule")?;
    let mut rows = Vec::new();
    for policy in &config.policies {
        let mut sq = vec![CompensatedSum::<f64>::default(); schedule.len()];
        for t in 0..config.trials {
            let report = run_solver(
                &problem,
                &SolveConfig {
                    kernel: policy.kernel(),
                    n_samples: n_s,
                    noise: config.noise,
                    master_seed: derive_seed(config.master_seed, Purpose::Trial, t as u64),
                    checkpoints: schedule.clone(),
                    keep_records: false,
                },
            )?;
            for (acc, (_, z)) in sq.iter_mut().zip(&report.checkpoints) {
                acc.add((z.re - truth).powi(2));
            }
            log::info!(
                "{} trial {t}: |error| = {:.3e}",
                policy.label(),
                (report.z_ns.re - truth).abs()
            );
        }
        for (&n, acc) in schedule.iter().zip(&sq) {
            rows.push(SweepRow {
                policy: policy.label(),
                n_s: n,
                rmse: (acc.value() / config.trials as f64).sqrt(),
                trials: config.trials,
            });
        }
    }
    Ok(SweepResult {
        rows,
        truth,
        lambda: problem.decomposition.lambda(),
        kappa_tilde: problem.series.kappa_tilde(),
        j: problem.series.j(),
        k: problem.series.k(),
    })
}

/// `<0|A⁻¹|0>` problem with `ε_T = ε_D = ε_F/2` and `κ* = 1/min|w|`.
pub fn basis_problem(m: &MatrixArtifact, eps_f: f64) -> anyhow::Result<Problem<f64>> {
    let kappa_star = 1.0 / m.min_abs_eigenvalue();
    let series = build_series(kappa_star, m.lambda, eps_f / 2.0, eps_f / 2.0)?;
    let zero = StateVector::basis(m.n_qubits, 0)?;
    Ok(Problem::new(
        m.decomposition.clone(),
        zero.clone(),
        zero,
        series,
    )?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RteSingleConfig {
    pub kappa: f64,
    pub taus: Vec<f64>,
    pub r: u64,
    pub n_max: usize,
    pub trials: usize,
    pub n_min: u64,
    pub n_samples: u64,
    pub per_decade: usize,
    pub master_seed: u64,
}

impl Default for RteSingleConfig {
    fn default() -> Self {
        Self {
            kappa: 10.0,
            taus: vec![1.0, 20.0, 50.0, 80.0],
            r: 100,
            n_max: randqls::kernel_rte::NMAX_CAP,
            trials: 20,
            n_min: 10,
            n_samples: 100_000,
            per_decade: 10,
            master_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RteSingleRow {
    pub tau: f64,
    pub n_samples: u64,
    pub rmse: f64,
    /// `log10 α^r`.
    pub log10_weight: f64,
    pub trials: usize,
}

/// RMSE of `Re(phase α^r <0|U|0>)` against `Re <0|e^{-iÃτ}|0>` with exact
/// overlaps.
pub fn rte_single(config: &RteSingleConfig) -> anyhow::Result<Vec<RteSingleRow>> {
    let m = gen_matrix(
        2,
        config.kappa,
        derive_seed(config.master_seed, Purpose::Matrix, 0),
    )?;
    let unit = m.decomposition.unit_weight();
    let zero = StateVector::basis(m.n_qubits, 0)?;
    let spectral = SpectralOverlap::new(&unit.materialize()?, &zero, &zero)?;
    let sampler = RteSampler::new(&unit)?;
    let schedule = log_schedule(config.n_min, config.n_samples, config.per_decade);
    let n_s = *schedule.last().context("empty schedule")?;
    let mut rows = Vec::new();
    for (ti, &tau) in config.taus.iter().enumerate() {
        let model = segment_model(tau, config.r, config.n_max)?;
        let truth = spectral.at(tau).re;
        let per_trial: Vec<Vec<f64>> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> anyhow::Result<Vec<f64>> {
                let seed = derive_seed(
                    config.master_seed,
                    Purpose::Trial,
                    (ti * config.trials + t) as u64,
                );
                let mut acc = CompensatedSum::default();
                let mut errs = Vec::with_capacity(schedule.len());
                let mut next = schedule.iter().peekable();
                let dim = 1usize << m.n_qubits;
                for i in 0..n_s {
                    let u =
                        sampler.sample(&model, config.r, &mut stream(seed, Purpose::Kernel, i))?;
                    let mut v = vec![Complex::new(0.0, 0.0); dim];
                    v[0] = Complex::new(1.0, 0.0);
                    u.apply(&mut v)?;
                    let est = u.phase_complex() * u.weight() * v[0];
                    acc.add(est.re);
                    if next.peek() == Some(&&(i + 1)) {
                        next.next();
                        errs.push((acc.value() / (i + 1) as f64 - truth).powi(2));
                    }
                }
                Ok(errs)
            })
            .collect::<anyhow::Result<_>>()?;
        for (si, &n) in schedule.iter().enumerate() {
            let mut sum = CompensatedSum::default();
            per_trial.iter().for_each(|e| sum.add(e[si]));
            rows.push(RteSingleRow {
                tau,
                n_samples: n,
                rmse: (sum.value() / config.trials as f64).sqrt(),
                log10_weight: config.r as f64 * model.alpha.ln() / std::f64::consts::LN_10,
                trials: config.trials,
            });
        }
    }
    Ok(rows)
}

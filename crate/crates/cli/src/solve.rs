//! Resource reports and end-to-end solves.

use anyhow::{bail, Context};
use randqls::estimator::{
    pf_resources, rte_resource_report, run_solver, KernelConfig, Problem, ResourceEstimate,
    SolveConfig, SolveReport,
};
use randqls::fourier::build_series;
use randqls::kernel_pf::TrotterPolicy;
use randqls::pauli::commutator_constant;
use randqls::simulator::{NoiseMode, StateVector};
use serde::{Deserialize, Serialize};

use crate::matrix::MatrixArtifact;

/// Trotter policy as given on the command line; `tmax` resolves to
/// `r = ceil(t_max)` once the series is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PolicySpec {
    Tmax,
    Fixed { r: u64 },
    Quadratic { c: f64 },
    TimeFloored { c: f64 },
    Certified { eps: f64 },
}

impl std::str::FromStr for PolicySpec {
    type Err = anyhow::Error;

    /// `tmax`, `fixed:R`, `quadratic:C`, `time-floored:C` or `certified:EPS`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = || {
            arg.parse::<f64>()
                .with_context(|| format!("{kind} needs a number"))
        };
        Ok(match kind {
            "tmax" => PolicySpec::Tmax,
            "fixed" => PolicySpec::Fixed {
                r: arg.parse().context("fixed:R needs an integer")?,
            },
            "quadratic" => PolicySpec::Quadratic { c: num()? },
            "time-floored" => PolicySpec::TimeFloored { c: num()? },
            "certified" => PolicySpec::Certified { eps: num()? },
            _ => bail!("unknown r policy {s:?}"),
        })
    }
}

impl PolicySpec {
    pub fn resolve(&self, t_max: f64, f: Option<f64>) -> anyhow::Result<TrotterPolicy<f64>> {
        Ok(match *self {
            PolicySpec::Tmax => TrotterPolicy::Fixed {
                r: t_max.ceil().max(1.0) as u64,
            },
            PolicySpec::Fixed { r } => TrotterPolicy::Fixed { r },
            PolicySpec::Quadratic { c } => TrotterPolicy::Quadratic { c },
            PolicySpec::TimeFloored { c } => TrotterPolicy::TimeFloored { c },
            PolicySpec::Certified { eps } => TrotterPolicy::Certified {
                f: f.context("certified policy needs a matrix for the commutator constant")?,
                eps,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Exact,
    Pf,
    Rte,
}

impl std::str::FromStr for KernelKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "exact" => Ok(KernelKind::Exact),
            "pf" => Ok(KernelKind::Pf),
            "rte" => Ok(KernelKind::Rte),
            _ => bail!("unknown kernel {s:?}; use exact, pf or rte"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceRequest {
    pub kappa_star: f64,
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    pub eps_t: f64,
    pub eps_d: f64,
    pub kernel: KernelKind,
    pub r_policy: PolicySpec,
    /// Commutator constant; PF only.
    pub f: Option<f64>,
    /// Number of Pauli terms `L`; PF only.
    pub n_terms: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceReport {
    pub kappa_tilde: f64,
    pub j: usize,
    pub k: usize,
    pub t_max: f64,
    pub t_min_abs: f64,
    pub n_y: f64,
    pub n_z: f64,
    pub estimate: ResourceEstimate,
}

pub fn resources(req: &ResourceRequest) -> anyhow::Result<ResourceReport> {
    let s = build_series(req.kappa_star, req.lambda, req.eps_t, req.eps_d)?;
    let estimate = match req.kernel {
        KernelKind::Pf => pf_resources(
            req.eps,
            req.delta,
            s.n_y,
            s.n_z,
            req.lambda,
            req.f
                .context("PF resources need the commutator constant f")?,
            s.t_max(),
            req.n_terms
                .context("PF resources need the number of Pauli terms")?,
        )?,
        KernelKind::Rte => rte_resource_report(
            req.eps,
            req.delta,
            s.n_y,
            s.n_z,
            req.lambda,
            s.t_max(),
            s.t_min_abs,
            &req.r_policy.resolve(s.t_max(), req.f)?,
        )?,
        KernelKind::Exact => bail!("resources are defined for the pf and rte kernels"),
    };
    Ok(ResourceReport {
        kappa_tilde: s.kappa_tilde(),
        j: s.j(),
        k: s.k(),
        t_max: s.t_max(),
        t_min_abs: s.t_min_abs,
        n_y: s.n_y,
        n_z: s.n_z,
        estimate,
    })
}

/// `f` and `L` of the unit-weight matrix.
pub fn pf_inputs(m: &MatrixArtifact) -> anyhow::Result<(f64, usize)> {
    let unit = m.decomposition.unit_weight();
    Ok((commutator_constant(&unit)?, unit.len()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveRequest {
    /// Defaults to `1/min|w|`.
    pub kappa_star: Option<f64>,
    pub eps_t: f64,
    pub eps_d: f64,
    pub kernel: KernelKind,
    pub r_policy: PolicySpec,
    pub n_max: Option<usize>,
    pub noise: NoiseMode,
    pub n_samples: u64,
    pub phi: usize,
    pub psi: usize,
    pub checkpoints: Vec<u64>,
    pub keep_records: bool,
    pub master_seed: u64,
}

pub fn solve(m: &MatrixArtifact, req: &SolveRequest) -> anyhow::Result<SolveReport<f64>> {
    let kappa_star = req.kappa_star.unwrap_or(1.0 / m.min_abs_eigenvalue());
    let series = build_series(kappa_star, m.lambda, req.eps_t, req.eps_d)?;
    let t_max = series.t_max();
    let f = match req.r_policy {
        PolicySpec::Certified { .. } => Some(pf_inputs(m)?.0),
        _ => None,
    };
    let policy = req.r_policy.resolve(t_max, f)?;
    let kernel = match req.kernel {
        KernelKind::Exact => KernelConfig::Exact,
        KernelKind::Pf => KernelConfig::Pf { policy },
        KernelKind::Rte => KernelConfig::Rte {
            policy,
            n_max: req.n_max.unwrap_or(randqls::kernel_rte::NMAX_CAP),
        },
    };
    let phi = StateVector::basis(m.n_qubits, req.phi)?;
    let psi = StateVector::basis(m.n_qubits, req.psi)?;
    let problem = Problem::new(m.decomposition.clone(), phi, psi, series)?;
    Ok(run_solver(
        &problem,
        &SolveConfig {
            kernel,
            n_samples: req.n_samples,
            noise: req.noise,
            master_seed: req.master_seed,
            checkpoints: req.checkpoints.clone(),
            keep_records: req.keep_records,
        },
    )?)
}

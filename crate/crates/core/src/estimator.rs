//! Monte Carlo estimator, bias bounds and resource counts.
//!
//! One sample draws a Fourier time `τ`, realizes `e^{-iÃτ}` with the chosen
//! kernel, takes one Hadamard-test shot for each of the real and imaginary
//! parts, and forms `ẑ = ω (N_y N_z/λ) [phase α^r] (re + i im)`. The mean of
//! `ẑ` estimates `<φ|A^{-1}|ψ>`.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fourier::FourierSeries;
use crate::kernel_pf::{pf_step, step_unitary, TrotterPolicy, DEFAULT_TROTTER_CAP};
use crate::kernel_rte::{choose_nmax, log_rte_bias_bound, segment_model, RteSampler};
use crate::linalg::{matrix_power, sandwich, CMatrix, CVector};
use crate::pauli::PauliDecomposition;
use crate::rng::{stream, Purpose};
use crate::sampler::{FourierSample, FourierSampler};
use crate::scalar::{c_abs, c_real, CompensatedComplexSum, Real};
use crate::simulator::{shot_from_overlap, NoiseMode, Part, SpectralOverlap, StateVector};

/// Resource numbers above this are reported as infeasible at desk scale.
pub const DESK_SCALE_LIMIT: f64 = 1e15;
/// Per-`(j, k)` overlap caching is used up to this many grid points.
pub const CACHE_LIMIT: u128 = 1 << 22;
const BATCH: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelTag {
    Exact,
    Pf,
    Rte,
}

/// `λ^{-1} N_y N_z f t_max³ / r²`.
pub fn pf_bias_bound<T: Real>(n_y: T, n_z: T, lambda: T, f: T, t_max: T, r: u64) -> T {
    let rf = T::lit(r as f64);
    n_y * n_z * f * t_max * t_max * t_max / (lambda * rf * rf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    /// `N_S` exceeds [`DESK_SCALE_LIMIT`].
    InfeasibleScale,
    /// No admissible `n_max` brings the bias below `ε/2`.
    BiasInfeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceInputs {
    pub eps: f64,
    pub delta: f64,
    pub n_y: f64,
    pub n_z: f64,
    pub lambda: f64,
    pub t_max: f64,
    pub f: Option<f64>,
    pub t_min_abs: Option<f64>,
    pub n_terms: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub kernel: KernelTag,
    pub feasibility: Feasibility,
    /// `N_S` when it fits below [`DESK_SCALE_LIMIT`].
    pub n_s: Option<u64>,
    /// `log10 N_S`; absent when the bias target is out of reach.
    pub log10_n_s: Option<f64>,
    /// `log10 N_S` with the bias set to zero; a floor on any admissible choice.
    pub log10_n_s_lower: f64,
    pub n_cp: u64,
    pub r: u64,
    pub n_max: Option<usize>,
    /// Infinite when it overflows; see `log10_bias_bound`.
    pub bias_bound: f64,
    pub log10_bias_bound: f64,
    /// `log10 e^{2 t_max²/r}`, the RTE normalization factor in `N_S`.
    pub log10_prefactor: Option<f64>,
    pub inputs: ResourceInputs,
}

impl ResourceEstimate {
    pub fn is_feasible(&self) -> bool {
        self.feasibility == Feasibility::Feasible
    }
}

fn check_budget<T: Real>(eps: T, delta: T) -> Result<()> {
    if !(eps > T::zero()) {
        return Err(invalid("eps", format!("{eps} must be positive")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid("delta", format!("{delta} outside (0, 1)")));
    }
    Ok(())
}

/// `ln(c + ln(2/δ)·16 e^{2 log_pref} (N_y N_z)² / (λ² gap²))` in log space.
fn log_sample_count<T: Real>(c: T, delta: T, n_y: T, n_z: T, lambda: T, gap: T, log_pref: T) -> T {
    let two = T::lit(2.0);
    let log_term =
        ((two / delta).ln() * T::lit(16.0)).ln() + two * log_pref + two * (n_y * n_z).ln()
            - two * lambda.ln()
            - two * gap.ln();
    // ln(c + e^x) without overflow
    let m = log_term.max(c.ln());
    m + ((c.ln() - m).exp() + (log_term - m).exp()).ln()
}

fn count_from_log<T: Real>(log_n: T) -> (Option<u64>, f64) {
    let log10 = log_n.as_f64() / std::f64::consts::LN_10;
    if log10 > DESK_SCALE_LIMIT.log10() {
        return (None, log10);
    }
    // Round off exp rounding before the ceiling.
    let v = log_n.as_f64().exp();
    let c = if (v - v.round()).abs() < 1e-9 * v {
        v.round()
    } else {
        v.ceil()
    };
    (Some(c as u64), log10)
}

/// Product-formula resources: the smallest `r` with bias below `ε/2`, then
/// `N_S = ceil(2 + ln(2/δ) 16 (N_y N_z)² / (λ² (ε/2 - B)²))` and `N_CP = 2rL`.
#[allow(clippy::too_many_arguments)]
pub fn pf_resources<T: Real>(
    eps: T,
    delta: T,
    n_y: T,
    n_z: T,
    lambda: T,
    f: T,
    t_max: T,
    n_terms: usize,
) -> Result<ResourceEstimate> {
    check_budget(eps, delta)?;
    if !(f >= T::zero()) {
        return Err(invalid("f", format!("{f} < 0")));
    }
    let two = T::lit(2.0);
    let r_bound = (two * n_y * n_z * f * t_max * t_max * t_max / (lambda * eps)).sqrt();
    let r_real = r_bound.floor().as_f64() + 1.0;
    if !r_real.is_finite() || r_real > DEFAULT_TROTTER_CAP as f64 {
        return Err(Error::TrotterCapExceeded {
            cap: DEFAULT_TROTTER_CAP,
        });
    }
    let r = r_real as u64;
    let bias = pf_bias_bound(n_y, n_z, lambda, f, t_max, r);
    let gap = eps / two - bias;
    if !(gap > T::zero()) {
        return Err(Error::TrotterCapExceeded {
            cap: DEFAULT_TROTTER_CAP,
        });
    }
    let log_n = log_sample_count(two, delta, n_y, n_z, lambda, gap, T::zero());
    let log_lower = log_sample_count(two, delta, n_y, n_z, lambda, eps / two, T::zero());
    let (n_s, log10_n_s) = count_from_log(log_n);
    Ok(ResourceEstimate {
        kernel: KernelTag::Pf,
        feasibility: if n_s.is_some() {
            Feasibility::Feasible
        } else {
            Feasibility::InfeasibleScale
        },
        n_s,
        log10_n_s: Some(log10_n_s),
        log10_n_s_lower: log_lower.as_f64() / std::f64::consts::LN_10,
        n_cp: 2 * r * n_terms as u64,
        r,
        n_max: None,
        bias_bound: bias.as_f64(),
        log10_bias_bound: bias.as_f64().log10(),
        log10_prefactor: None,
        inputs: ResourceInputs {
            eps: eps.as_f64(),
            delta: delta.as_f64(),
            n_y: n_y.as_f64(),
            n_z: n_z.as_f64(),
            lambda: lambda.as_f64(),
            t_max: t_max.as_f64(),
            f: Some(f.as_f64()),
            t_min_abs: None,
            n_terms: Some(n_terms),
        },
    })
}

/// Random-Taylor-expansion resources. Fails when no `n_max` up to the cap
/// meets the bias target; [`rte_resource_report`] reports that case instead.
#[allow(clippy::too_many_arguments)]
pub fn rte_resources<T: Real>(
    eps: T,
    delta: T,
    n_y: T,
    n_z: T,
    lambda: T,
    t_max: T,
    t_min_abs: T,
    policy: &TrotterPolicy<T>,
) -> Result<ResourceEstimate> {
    let report = rte_resource_report(eps, delta, n_y, n_z, lambda, t_max, t_min_abs, policy)?;
    if report.feasibility == Feasibility::BiasInfeasible {
        let r = report.r;
        return Err(Error::NmaxInfeasible {
            cap: crate::kernel_rte::NMAX_CAP,
            log_prefactor: log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, 0).as_f64(),
        });
    }
    Ok(report)
}

/// [`rte_resources`] that always returns a report, with
/// [`Feasibility::BiasInfeasible`] and a zero-bias floor on `N_S` when the
/// bias target cannot be met.
#[allow(clippy::too_many_arguments)]
pub fn rte_resource_report<T: Real>(
    eps: T,
    delta: T,
    n_y: T,
    n_z: T,
    lambda: T,
    t_max: T,
    t_min_abs: T,
    policy: &TrotterPolicy<T>,
) -> Result<ResourceEstimate> {
    check_budget(eps, delta)?;
    let r = policy.max_steps(t_max)?;
    let two = T::lit(2.0);
    let log_pref = t_max * t_max / T::lit(r as f64);
    let log_lower = log_sample_count(T::one(), delta, n_y, n_z, lambda, eps / two, log_pref);
    let inputs = ResourceInputs {
        eps: eps.as_f64(),
        delta: delta.as_f64(),
        n_y: n_y.as_f64(),
        n_z: n_z.as_f64(),
        lambda: lambda.as_f64(),
        t_max: t_max.as_f64(),
        f: None,
        t_min_abs: Some(t_min_abs.as_f64()),
        n_terms: None,
    };
    let log10_prefactor = Some((two * log_pref).as_f64() / std::f64::consts::LN_10);
    let log10_lower = log_lower.as_f64() / std::f64::consts::LN_10;
    match choose_nmax(t_max, t_min_abs, r, n_y, n_z, eps) {
        Ok(n_max) => {
            let log_bias = log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, n_max);
            let bias = log_bias.exp();
            let log_n = log_sample_count(
                T::one(),
                delta,
                n_y,
                n_z,
                lambda,
                eps / two - bias,
                log_pref,
            );
            let (n_s, log10_n_s) = count_from_log(log_n);
            Ok(ResourceEstimate {
                kernel: KernelTag::Rte,
                feasibility: if n_s.is_some() {
                    Feasibility::Feasible
                } else {
                    Feasibility::InfeasibleScale
                },
                n_s,
                log10_n_s: Some(log10_n_s),
                log10_n_s_lower: log10_lower,
                n_cp: r,
                r,
                n_max: Some(n_max),
                bias_bound: bias.as_f64(),
                log10_bias_bound: log_bias.as_f64() / std::f64::consts::LN_10,
                log10_prefactor,
                inputs,
            })
        }
        Err(Error::NmaxInfeasible { .. }) => {
            let log_cap_bias =
                log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, crate::kernel_rte::NMAX_CAP);
            Ok(ResourceEstimate {
                kernel: KernelTag::Rte,
                feasibility: Feasibility::BiasInfeasible,
                n_s: None,
                log10_n_s: None,
                log10_n_s_lower: log10_lower,
                n_cp: r,
                r,
                n_max: None,
                bias_bound: log_cap_bias.exp().as_f64(),
                log10_bias_bound: log_cap_bias.as_f64() / std::f64::consts::LN_10,
                log10_prefactor,
                inputs,
            })
        }
        Err(e) => Err(e),
    }
}

/// `A`, the states, and the series built for `A`.
#[derive(Clone, Debug)]
pub struct Problem<T: Real> {
    pub decomposition: PauliDecomposition<T>,
    pub phi: StateVector<T>,
    pub psi: StateVector<T>,
    pub series: FourierSeries<T>,
    unit: PauliDecomposition<T>,
    spectral: SpectralOverlap<T>,
}

impl<T: Real> Problem<T> {
    pub fn new(
        decomposition: PauliDecomposition<T>,
        phi: StateVector<T>,
        psi: StateVector<T>,
        series: FourierSeries<T>,
    ) -> Result<Self> {
        let lam = decomposition.lambda();
        if (series.lambda - lam).abs() > T::lit(1e-9) * lam {
            return Err(invalid(
                "lambda",
                format!(
                    "series built for lambda = {} but the matrix has {}",
                    series.lambda, lam
                ),
            ));
        }
        let unit = decomposition.unit_weight();
        let spectral = SpectralOverlap::new(&unit.materialize()?, &phi, &psi)?;
        Ok(Self {
            decomposition,
            phi,
            psi,
            series,
            unit,
            spectral,
        })
    }

    /// `Ã = A/λ`.
    pub fn unit_weight(&self) -> &PauliDecomposition<T> {
        &self.unit
    }

    /// `<φ|A^{-1}|ψ>` from the eigendecomposition of `Ã`.
    pub fn truth(&self) -> Complex<T> {
        let lam = self.decomposition.lambda();
        self.spectral.apply_fn(|w| c_real(T::one() / (w * lam)))
    }

    /// `λ^{-1} <φ|F(Ã)|ψ>` for the series `F`.
    pub fn series_target(&self) -> Complex<T> {
        let lam = self.series.lambda;
        self.spectral
            .apply_fn(|w| c_real(self.series.evaluate(w) / lam))
    }

    /// `<φ|e^{-iÃτ}|ψ>`.
    pub fn exact_overlap(&self, tau: T) -> Complex<T> {
        self.spectral.at(tau)
    }

    /// `<φ|S(τ/r)^r|ψ>`.
    pub fn pf_overlap(&self, tau: T, r: u64) -> Result<Complex<T>> {
        let step = step_unitary(self.unit.n_qubits(), &pf_step(&self.unit, tau, r)?)?;
        let u: CMatrix<T> = matrix_power(&step, r);
        sandwich(self.phi.amplitudes(), &u, self.psi.amplitudes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kernel")]
pub enum KernelConfig<T> {
    /// Exact evolution; isolates sampling error.
    Exact,
    Pf {
        policy: TrotterPolicy<T>,
    },
    Rte {
        policy: TrotterPolicy<T>,
        n_max: usize,
    },
}

impl<T> KernelConfig<T> {
    pub fn tag(&self) -> KernelTag {
        match self {
            KernelConfig::Exact => KernelTag::Exact,
            KernelConfig::Pf { .. } => KernelTag::Pf,
            KernelConfig::Rte { .. } => KernelTag::Rte,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig<T> {
    pub kernel: KernelConfig<T>,
    pub n_samples: u64,
    pub noise: NoiseMode,
    pub master_seed: u64,
    /// Sample counts at which to record the running mean.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub keep_records: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord<T> {
    pub sample_index: u64,
    pub j: usize,
    pub k: usize,
    pub tau: T,
    pub kernel: KernelTag,
    pub r: u64,
    pub prefactor: Complex<T>,
    pub re: T,
    pub im: T,
    pub z_hat: Complex<T>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_r: u64,
    pub mean_r: f64,
    pub max_n_cp: u64,
    /// Largest `ln α^r` over RTE samples.
    pub max_log_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<T> {
    pub z_ns: Complex<T>,
    pub n_s: u64,
    pub truth: Option<Complex<T>>,
    pub series_target: Complex<T>,
    pub abs_error: Option<T>,
    pub wall_time_s: f64,
    pub master_seed: u64,
    pub kernel: KernelTag,
    pub noise: NoiseMode,
    pub diagnostics: Diagnostics,
    pub checkpoints: Vec<(u64, Complex<T>)>,
    pub records: Option<Vec<SampleRecord<T>>>,
}

/// Cached `(overlap, r)` for one grid point.
type OverlapSlot<T> = OnceLock<(Complex<T>, u64)>;

/// Deterministic kernel evaluation: overlap and `r` for a sampled time.
struct KernelEval<'p, T: Real> {
    problem: &'p Problem<T>,
    config: KernelConfig<T>,
    rte: Option<RteSampler<'p, T>>,
    cache: Option<Vec<OverlapSlot<T>>>,
    k: usize,
}

struct KernelOutput<T> {
    overlap: Complex<T>,
    /// Extra prefactor from the kernel (RTE phase and `α^r`).
    factor: Complex<T>,
    r: u64,
    log_weight: Option<T>,
}

impl<'p, T: Real> KernelEval<'p, T> {
    fn new(problem: &'p Problem<T>, config: KernelConfig<T>) -> Result<Self> {
        let rte = match config {
            KernelConfig::Rte { .. } => Some(RteSampler::new(problem.unit_weight())?),
            _ => None,
        };
        let cache = match config {
            KernelConfig::Pf { .. } if problem.series.term_count() <= CACHE_LIMIT => Some(
                (0..problem.series.term_count() as usize)
                    .map(|_| OnceLock::new())
                    .collect(),
            ),
            _ => None,
        };
        Ok(Self {
            problem,
            config,
            rte,
            cache,
            k: problem.series.k(),
        })
    }

    fn eval(
        &self,
        sample: &FourierSample<T>,
        master_seed: u64,
        index: u64,
    ) -> Result<KernelOutput<T>> {
        let one = Complex::new(T::one(), T::zero());
        match self.config {
            KernelConfig::Exact => Ok(KernelOutput {
                overlap: self.problem.exact_overlap(sample.tau),
                factor: one,
                r: 0,
                log_weight: None,
            }),
            KernelConfig::Pf { policy } => {
                let compute = || -> Result<(Complex<T>, u64)> {
                    let r = policy.steps(sample.tau)?;
                    Ok((self.problem.pf_overlap(sample.tau, r)?, r))
                };
                let (overlap, r) = match &self.cache {
                    Some(cache) => {
                        let slot = &cache[sample.j * self.k + sample.k];
                        match slot.get() {
                            Some(v) => *v,
                            None => {
                                let v = compute()?;
                                *slot.get_or_init(|| v)
                            }
                        }
                    }
                    None => compute()?,
                };
                Ok(KernelOutput {
                    overlap,
                    factor: one,
                    r,
                    log_weight: None,
                })
            }
            KernelConfig::Rte { policy, n_max } => {
                let r = policy.steps(sample.tau)?;
                let model = segment_model(sample.tau, r, n_max)?;
                let mut rng = stream(master_seed, Purpose::Kernel, index);
                let u = self
                    .rte
                    .as_ref()
                    .expect("rte sampler")
                    .sample(&model, r, &mut rng)?;
                let mut v: Vec<Complex<T>> =
                    self.problem.psi.amplitudes().iter().copied().collect();
                u.apply(&mut v)?;
                let overlap = self.problem.phi.amplitudes().dotc(&CVector::from_vec(v));
                Ok(KernelOutput {
                    overlap,
                    factor: u.phase_complex() * u.weight(),
                    r,
                    log_weight: Some(u.log_weight),
                })
            }
        }
    }
}

fn one_sample<T: Real>(
    sampler: &FourierSampler<'_, T>,
    kernel: &KernelEval<'_, T>,
    config: &SolveConfig<T>,
    index: u64,
) -> Result<(SampleRecord<T>, Option<T>)> {
    let seed = config.master_seed;
    let sample = sampler.sample(&mut stream(seed, Purpose::FourierTime, index));
    let out = kernel.eval(&sample, seed, index)?;
    let re = shot_from_overlap(
        out.overlap,
        Part::Real,
        config.noise,
        &mut stream(seed, Purpose::ShotReal, index),
    )?;
    let im = shot_from_overlap(
        out.overlap,
        Part::Imaginary,
        config.noise,
        &mut stream(seed, Purpose::ShotImaginary, index),
    )?;
    let prefactor = sample.omega * sample.weight * out.factor;
    let rec = SampleRecord {
        sample_index: index,
        j: sample.j,
        k: sample.k,
        tau: sample.tau,
        kernel: kernel.config.tag(),
        r: out.r,
        prefactor,
        re: re.value,
        im: im.value,
        z_hat: prefactor * Complex::new(re.value, im.value),
    };
    Ok((rec, out.log_weight))
}

/// Runs `config.n_samples` samples. Results are bit-identical for any thread
/// count: samples are computed in parallel batches and reduced in index order.
pub fn run_solver<T: Real>(
    problem: &Problem<T>,
    config: &SolveConfig<T>,
) -> Result<SolveReport<T>> {
    if config.n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let start = Instant::now();
    let sampler = FourierSampler::new(&problem.series)?;
    let kernel = KernelEval::new(problem, config.kernel)?;
    let mut checkpoints: Vec<u64> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= 1 && c <= config.n_samples)
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let mut next_cp = checkpoints.iter().peekable();
    let mut recorded = Vec::with_capacity(checkpoints.len());
    let mut records = config.keep_records.then(Vec::new);
    let mut acc = CompensatedComplexSum::default();
    let mut diag = Diagnostics::default();
    let mut r_sum = 0f64;
    let mut max_log_weight: Option<f64> = None;
    let l = problem.unit.len() as u64;

    let mut done = 0u64;
    while done < config.n_samples {
        let end = (done + BATCH as u64).min(config.n_samples);
        let batch: Vec<(SampleRecord<T>, Option<T>)> = (done..end)
            .into_par_iter()
            .map(|i| one_sample(&sampler, &kernel, config, i))
            .collect::<Result<_>>()?;
        for (rec, log_weight) in batch {
            acc.add(rec.z_hat);
            let n = rec.sample_index + 1;
            diag.max_r = diag.max_r.max(rec.r);
            r_sum += rec.r as f64;
            let n_cp = match config.kernel {
                KernelConfig::Pf { .. } => 2 * rec.r * l,
                KernelConfig::Rte { .. } => rec.r,
                KernelConfig::Exact => 0,
            };
            diag.max_n_cp = diag.max_n_cp.max(n_cp);
            if let Some(lw) = log_weight {
                let lw = lw.as_f64();
                max_log_weight = Some(max_log_weight.map_or(lw, |m: f64| m.max(lw)));
            }
            if next_cp.peek() == Some(&&n) {
                next_cp.next();
                recorded.push((n, acc.value() / T::lit(n as f64)));
            }
            if let Some(r) = records.as_mut() {
                r.push(rec);
            }
        }
        done = end;
    }
    diag.mean_r = r_sum / config.n_samples as f64;
    diag.max_log_weight = max_log_weight;
    let z_ns = acc.value() / T::lit(config.n_samples as f64);
    let truth = (problem.decomposition.n_qubits() <= crate::simulator::EVOLUTION_MAX_QUBITS)
        .then(|| problem.truth());
    Ok(SolveReport {
        z_ns,
        n_s: config.n_samples,
        abs_error: truth.map(|t| c_abs(z_ns - t)),
        truth,
        series_target: problem.series_target(),
        wall_time_s: start.elapsed().as_secs_f64(),
        master_seed: config.master_seed,
        kernel: config.kernel.tag(),
        noise: config.noise,
        diagnostics: diag,
        checkpoints: recorded,
        records,
    })
}

/// Exact expectation of `ẑ` over all `(j, k)` for a deterministic kernel and
/// noiseless shots.
pub fn exhaustive_mean<T: Real>(
    problem: &Problem<T>,
    kernel: KernelConfig<T>,
) -> Result<Complex<T>> {
    if let KernelConfig::Rte { .. } = kernel {
        return Err(invalid(
            "kernel",
            "exhaustive mean needs a deterministic kernel",
        ));
    }
    let sampler = FourierSampler::new(&problem.series)?;
    let eval = KernelEval::new(problem, kernel)?;
    let mut acc = CompensatedComplexSum::default();
    for (p, sample) in sampler.outcomes() {
        let out = eval.eval(&sample, 0, 0)?;
        acc.add(sample.omega * sample.weight * out.factor * out.overlap * p);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::build_series;

    #[test]
    fn pf_bias_cases() {
        assert_eq!(pf_bias_bound(2.0f64, 1.0, 1.0, 0.0, 10.0, 100), 0.0);
        assert!((pf_bias_bound(2.0f64, 1.0, 1.0, 0.1, 10.0, 100) - 0.02).abs() < 1e-15);
        let a = pf_bias_bound(2.0f64, 1.5, 1.2, 0.3, 7.0, 10);
        let b = pf_bias_bound(2.0f64, 1.5, 1.2, 0.3, 7.0, 20);
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pf_resources_commuting_case() {
        let (eps, delta, n_y, n_z, lam) = (0.1f64, 0.05, 3.0, 1.8, 1.7);
        let est = pf_resources(eps, delta, n_y, n_z, lam, 0.0, 50.0, 4).unwrap();
        assert_eq!(est.r, 1);
        let expect =
            2.0 + (2.0 / delta).ln() * 64.0 * (n_y * n_z).powi(2) / (lam * lam * eps * eps);
        assert_eq!(est.n_s, Some(expect.ceil() as u64));
        assert_eq!(est.n_cp, 8);
        assert!(pf_resources(eps, 2.0, n_y, n_z, lam, 0.0, 50.0, 4).is_err());
        assert!(pf_resources(0.0, 0.1, n_y, n_z, lam, 0.0, 50.0, 4).is_err());
    }

    #[test]
    fn pf_resources_bias_below_half_eps() {
        let est = pf_resources(1e-2f64, 0.1, 5.0, 2.0, 1.5, 0.2, 40.0, 6).unwrap();
        assert!(est.bias_bound < 5e-3);
        let r_bound = (2.0 * 10.0 * 0.2 * 40f64.powi(3) / (1.5 * 1e-2)).sqrt();
        assert_eq!(est.r, r_bound.floor() as u64 + 1);
        assert_eq!(est.n_cp, 2 * est.r * 6);
    }

    #[test]
    fn sample_counts_are_monotone() {
        // Commuting terms: with a bias the floor in r makes the gap non-monotone in eps.
        let mut prev = u64::MAX;
        for eps in [1e-3f64, 3e-3, 1e-2, 3e-2] {
            let n = pf_resources(eps, 0.1, 5.0, 2.0, 1.5, 0.0, 40.0, 6)
                .unwrap()
                .n_s
                .unwrap();
            assert!(n <= prev);
            prev = n;
        }
        let mut prev = 0;
        for delta in [0.5f64, 0.1, 0.01] {
            let n = pf_resources(1e-2, delta, 5.0, 2.0, 1.5, 0.2, 40.0, 6)
                .unwrap()
                .n_s
                .unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn rte_resources_regimes() {
        let (n_y, n_z, lam) = (2.0f64, 2.0, 1.0);
        let t_max = 20.0;
        // r = t_max²: the prefactor is e
        let est = rte_resources(
            0.1,
            0.1,
            n_y,
            n_z,
            lam,
            t_max,
            0.01,
            &TrotterPolicy::Fixed { r: 400 },
        )
        .unwrap();
        assert!((est.log10_prefactor.unwrap() - 2.0 / std::f64::consts::LN_10).abs() < 1e-12);
        assert!(est.is_feasible());
        assert_eq!(est.n_cp, 400);
        // huge ε: N_S = 1
        let est = rte_resources(
            1e12,
            0.1,
            n_y,
            n_z,
            lam,
            t_max,
            0.01,
            &TrotterPolicy::Fixed { r: 400 },
        )
        .unwrap();
        assert_eq!(est.n_s, Some(1));
        assert!(matches!(
            rte_resources(
                0.1,
                0.1,
                n_y,
                n_z,
                lam,
                t_max,
                0.01,
                &TrotterPolicy::Fixed { r: 10 }
            ),
            Err(Error::RteRadiusTooSmall { .. })
        ));
    }

    #[test]
    fn rte_report_for_infeasible_regime() {
        let t_max = 5579.757f64;
        let r = t_max.ceil() as u64;
        let est = rte_resource_report(
            4e-3,
            0.05,
            40.0,
            2.0,
            2.09,
            t_max,
            1e-3,
            &TrotterPolicy::Fixed { r },
        )
        .unwrap();
        assert!(!est.is_feasible());
        let expect = 2.0 * t_max * t_max / r as f64 / std::f64::consts::LN_10;
        assert!((est.log10_prefactor.unwrap() - expect).abs() < 1e-9);
        assert!(est.log10_n_s_lower > expect);
    }

    fn toy_problem() -> Problem<f64> {
        let d = PauliDecomposition::from_pairs([
            (1.2, "Z".parse().unwrap()),
            (0.5, "X".parse().unwrap()),
        ])
        .unwrap();
        let series = build_series(1.0, d.lambda(), 0.25, 0.25).unwrap();
        let phi = StateVector::basis(1, 0).unwrap();
        let psi = StateVector::normalized(CVector::from_vec(vec![
            Complex::new(0.6, 0.0),
            Complex::new(0.0, 0.8),
        ]))
        .unwrap();
        Problem::new(d, phi, psi, series).unwrap()
    }

    #[test]
    fn exact_kernel_exhaustive_mean_is_series_target() {
        let p = toy_problem();
        let mean = exhaustive_mean(&p, KernelConfig::Exact).unwrap();
        assert!((mean - p.series_target()).norm() < 1e-10);
    }

    #[test]
    fn run_is_reproducible_and_checkpointed() {
        let p = toy_problem();
        let config = SolveConfig {
            kernel: KernelConfig::Pf {
                policy: TrotterPolicy::Quadratic { c: 0.1 },
            },
            n_samples: 3000,
            noise: NoiseMode::Bernoulli,
            master_seed: 17,
            checkpoints: vec![10, 1000, 3000, 5000],
            keep_records: true,
        };
        let a = run_solver(&p, &config).unwrap();
        let b = run_solver(&p, &config).unwrap();
        assert_eq!(a.z_ns, b.z_ns);
        assert_eq!(a.checkpoints.len(), 3);
        assert_eq!(a.checkpoints[2].1, a.z_ns);
        let recs = a.records.unwrap();
        assert_eq!(recs.len(), 3000);
        for rec in &recs {
            assert_eq!(rec.z_hat, rec.prefactor * Complex::new(rec.re, rec.im));
            assert!(rec.re == 1.0 || rec.re == -1.0);
        }
        let mean = recs
            .iter()
            .fold(CompensatedComplexSum::default(), |mut s, r| {
                s.add(r.z_hat);
                s
            });
        assert!((mean.value() / 3000.0 - a.z_ns).norm() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_lambda() {
        let d = PauliDecomposition::from_pairs([
            (1.2, "Z".parse().unwrap()),
            (0.5, "X".parse().unwrap()),
        ])
        .unwrap();
        let series = build_series(1.0, 2.0, 0.25, 0.25).unwrap();
        let phi = StateVector::basis(1, 0).unwrap();
        assert!(Problem::new(d, phi.clone(), phi, series).is_err());
    }
}

//! Series parameters, the reference parameter table and certification runs.

use anyhow::Context;
use randqls::fourier::{build_series, fourier_params, truncation_params, FourierSeries, MAX_TERMS};
use randqls::rng::{derive_seed, Purpose};
use randqls::FourierSeries64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::gen_matrix;

pub const TABLE1_KAPPAS: [f64; 3] = [10.0, 100.0, 1000.0];
pub const TABLE1_EPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesParams {
    pub kappa_tilde: f64,
    pub eps_t: f64,
    pub eps_d: f64,
    pub y_max: f64,
    pub z_max: f64,
    pub t_max: f64,
    pub j: usize,
    pub k: usize,
    pub n_y: Option<f64>,
    pub n_z: Option<f64>,
    pub n_z_bound: Option<f64>,
    pub t_min_abs: Option<f64>,
}

/// `(J, K)` and truncation data for `κ̃`; the normalizations are filled in
/// when the grid fits below the term limit.
pub fn params(kappa_tilde: f64, eps_t: f64, eps_d: f64) -> anyhow::Result<SeriesParams> {
    let trunc = truncation_params(kappa_tilde, eps_t)?;
    let (j, k) = fourier_params(&trunc, eps_d)?;
    let series = ((j as u128) * (k as u128) <= MAX_TERMS)
        .then(|| build_series(kappa_tilde, 1.0, eps_t, eps_d))
        .transpose()?;
    Ok(SeriesParams {
        kappa_tilde,
        eps_t,
        eps_d,
        y_max: trunc.y_max,
        z_max: trunc.z_max,
        t_max: trunc.t_max,
        j,
        k,
        n_y: series.as_ref().map(|s| s.n_y),
        n_z: series.as_ref().map(|s| s.n_z),
        n_z_bound: series.as_ref().map(|s| s.n_z_bound()),
        t_min_abs: series.as_ref().map(|s| s.t_min_abs),
    })
}

/// Series artifact: parameters plus the node and weight arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesArtifact {
    pub kappa_star: f64,
    pub lambda: f64,
    pub kappa_tilde: f64,
    pub eps_t: f64,
    pub eps_d: f64,
    pub j: usize,
    pub k: usize,
    pub y_max: f64,
    pub z_max: f64,
    pub n_y: f64,
    pub n_z: f64,
    pub series: FourierSeries64,
}

pub fn series_artifact(
    kappa_star: f64,
    lambda: f64,
    eps_t: f64,
    eps_d: f64,
) -> anyhow::Result<SeriesArtifact> {
    let s = build_series(kappa_star, lambda, eps_t, eps_d)?;
    Ok(SeriesArtifact {
        kappa_star,
        lambda,
        kappa_tilde: s.kappa_tilde(),
        eps_t,
        eps_d,
        j: s.j(),
        k: s.k(),
        y_max: s.trunc.y_max,
        z_max: s.trunc.z_max,
        n_y: s.n_y,
        n_z: s.n_z,
        series: s,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub series_value_re: f64,
    pub series_value_im: f64,
    pub abs_error: f64,
}

/// Terms up to which the imaginary part is summed term by term.
const NAIVE_LIMIT: u128 = 1 << 20;

/// Series values on `±[1/κ̃, 1]`, log-spaced, against `1/x`.
pub fn verify_series(series: &FourierSeries<f64>, points: usize) -> Vec<SeriesPoint> {
    let lo = 1.0 / series.kappa_tilde();
    let points = points.max(2);
    let xs: Vec<f64> = (0..points)
        .map(|i| lo * (1.0 / lo).powf(i as f64 / (points - 1) as f64))
        .flat_map(|x| [-x, x])
        .collect();
    let naive = series.term_count() <= NAIVE_LIMIT;
    xs.par_iter()
        .map(|&x| {
            let re = series.evaluate(x);
            let im = if naive {
                series.evaluate_naive(x).im
            } else {
                0.0
            };
            SeriesPoint {
                x,
                series_value_re: re,
                series_value_im: im,
                abs_error: (re - 1.0 / x).hypot(im),
            }
        })
        .collect()
}

/// One random matrix checked against its own series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationTrial {
    pub kappa: f64,
    pub eps_f: f64,
    pub trial: usize,
    pub lambda: f64,
    pub kappa_tilde: f64,
    pub j: usize,
    pub k: usize,
    /// `λ ‖A⁻¹ - λ⁻¹ F(Ã)‖`.
    pub error: f64,
    /// `|N_y √(2π)/y_max - 1|`.
    pub n_y_defect: f64,
    pub n_z: f64,
    pub n_z_bound: f64,
}

/// Random matrices with `κ̃ = λκ` and `ε_T = ε_D = ε_F/2`.
pub fn certify(
    kappa: f64,
    eps_f: f64,
    trials: usize,
    master_seed: u64,
) -> anyhow::Result<Vec<CertificationTrial>> {
    (0..trials)
        .map(|t| {
            let seed = derive_seed(master_seed, Purpose::Trial, t as u64);
            let m = gen_matrix(2, kappa, seed)?;
            let s = build_series(kappa, m.lambda, eps_f / 2.0, eps_f / 2.0)
                .with_context(|| format!("series for kappa={kappa}, eps_f={eps_f}"))?;
            let xs: Vec<f64> = m.eigenvalues.iter().map(|w| w / m.lambda).collect();
            Ok(CertificationTrial {
                kappa,
                eps_f,
                trial: t,
                lambda: m.lambda,
                kappa_tilde: s.kappa_tilde(),
                j: s.j(),
                k: s.k(),
                error: s.max_error(&xs),
                n_y_defect: (s.n_y / s.n_y_closed_form() - 1.0).abs(),
                n_z: s.n_z,
                n_z_bound: s.n_z_bound(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table1Row {
    pub kappa: f64,
    pub eps_f: f64,
    pub j: usize,
    pub k: usize,
    pub trials: usize,
    pub eps_max: Option<f64>,
    pub within_bound: Option<bool>,
}

/// `(J, K)` for the twelve rows with `κ̃ = κ`; optional certification trials,
/// with the `κ = 1000` rows only under `heavy`.
pub fn table1(trials: usize, heavy: bool, master_seed: u64) -> anyhow::Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for &eps_f in &TABLE1_EPS {
        for &kappa in &TABLE1_KAPPAS {
            let trunc = truncation_params(kappa, eps_f / 2.0)?;
            let (j, k) = fourier_params(&trunc, eps_f / 2.0)?;
            let run = trials > 0 && (heavy || kappa < 1000.0);
            let (eps_max, within) = if run {
                let ts = certify(kappa, eps_f, trials, master_seed)?;
                let worst = ts.iter().fold(0.0f64, |m, t| m.max(t.error));
                (Some(worst), Some(worst <= eps_f))
            } else {
                (None, None)
            };
            rows.push(Table1Row {
                kappa,
                eps_f,
                j,
                k,
                trials: if run { trials } else { 0 },
                eps_max,
                within_bound: within,
            });
        }
    }
    Ok(rows)
}

//! Importance sampling of Fourier times.
//!
//! `j` is drawn with probability `∝ |w_y^{(j)}|` and `k` independently with
//! probability `∝ |Δz z_k e^{-z_k²/2}|`. The phase `ω = i·sign(z_k)` and the
//! weight `N_y N_z / λ` make `ω · weight · e^{-i x τ}` an unbiased estimate of
//! the series value at `x` divided by `λ`.

pub mod alias;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fourier::FourierSeries;
use crate::scalar::Real;

pub use alias::DiscreteDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSample<T> {
    pub j: usize,
    pub k: usize,
    pub tau: T,
    pub omega: Complex<T>,
    pub weight: T,
}

/// `(p_y, p_z)` for a series.
pub fn build_distributions<T: Real>(
    series: &FourierSeries<T>,
) -> Result<(DiscreteDistribution<T>, DiscreteDistribution<T>)> {
    let wy: Vec<T> = series.grid.wy.iter().map(|w| w.abs()).collect();
    let wz: Vec<T> = series.z_amplitudes.iter().map(|a| a.abs()).collect();
    Ok((
        DiscreteDistribution::new(&wy)?,
        DiscreteDistribution::new(&wz)?,
    ))
}

#[derive(Clone, Debug)]
pub struct FourierSampler<'a, T> {
    series: &'a FourierSeries<T>,
    p_y: DiscreteDistribution<T>,
    p_z: DiscreteDistribution<T>,
    weight: T,
}

impl<'a, T: Real> FourierSampler<'a, T> {
    pub fn new(series: &'a FourierSeries<T>) -> Result<Self> {
        let (p_y, p_z) = build_distributions(series)?;
        Ok(Self {
            series,
            p_y,
            p_z,
            weight: series.n_y * series.n_z / series.lambda,
        })
    }

    pub fn series(&self) -> &'a FourierSeries<T> {
        self.series
    }

    pub fn p_y(&self) -> &DiscreteDistribution<T> {
        &self.p_y
    }

    pub fn p_z(&self) -> &DiscreteDistribution<T> {
        &self.p_z
    }

    /// `N_y N_z / λ`.
    pub fn weight(&self) -> T {
        self.weight
    }

    pub fn sample_at(&self, j: usize, k: usize) -> FourierSample<T> {
        let z = self.series.grid.z_nodes[k];
        let sign = if z > T::zero() { T::one() } else { -T::one() };
        FourierSample {
            j,
            k,
            tau: self.series.time(j, k),
            omega: Complex::new(T::zero(), sign),
            weight: self.weight,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FourierSample<T> {
        let j = self.p_y.sample(rng);
        let k = self.p_z.sample(rng);
        self.sample_at(j, k)
    }

    /// Every positive-probability outcome with its probability.
    pub fn outcomes(&self) -> impl Iterator<Item = (T, FourierSample<T>)> + '_ {
        self.p_y.support().iter().flat_map(move |&j| {
            self.p_z.support().iter().map(move |&k| {
                (
                    self.p_y.probability(j) * self.p_z.probability(k),
                    self.sample_at(j, k),
                )
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{truncation_params, FourierSeries};
    use crate::rng::{stream, Purpose};
    use crate::scalar::{cis, CompensatedComplexSum};

    fn toy(j: usize, k: usize, lambda: f64) -> FourierSeries<f64> {
        let trunc = truncation_params(4.0 * lambda, 0.1).unwrap();
        FourierSeries::from_grid(trunc, j, k, 4.0, lambda, 0.1).unwrap()
    }

    #[test]
    fn exhaustive_expectation_matches_series() {
        let s = toy(4, 5, 1.6);
        let sampler = FourierSampler::new(&s).unwrap();
        for x in [0.2, -0.7, 1.0] {
            let mut acc = CompensatedComplexSum::default();
            for (p, smp) in sampler.outcomes() {
                acc.add(smp.omega * cis(-x * smp.tau) * (p * smp.weight));
            }
            let expect = s.evaluate_naive(x) / s.lambda;
            assert!((acc.value() - expect).norm() < 1e-14, "{x}");
        }
    }

    #[test]
    fn symmetric_z_distribution() {
        let s = toy(3, 7, 1.0);
        let (p_y, p_z) = build_distributions(&s).unwrap();
        let k = s.k();
        for i in 0..k {
            assert!((p_z.probability(i) - p_z.probability(k - 1 - i)).abs() < 1e-15);
        }
        assert_eq!(p_z.probability(3), 0.0);
        assert!(!p_z.support().contains(&3));
        assert_eq!(p_y.len(), 3);
    }

    #[test]
    fn toy_probabilities_by_hand() {
        let s = toy(1, 5, 1.0);
        let (p_y, p_z) = build_distributions(&s).unwrap();
        assert_eq!(p_y.probabilities(), &[1.0]);
        let amps: Vec<f64> = s
            .grid
            .z_nodes
            .iter()
            .map(|z| (z * (-z * z / 2.0).exp()).abs())
            .collect();
        let total: f64 = amps.iter().sum();
        for (p, a) in p_z.probabilities().iter().zip(&amps) {
            assert!((p - a / total).abs() < 1e-15);
        }
    }

    #[test]
    fn single_nonzero_term() {
        let s = toy(1, 2, 1.0);
        let sampler = FourierSampler::new(&s).unwrap();
        let mut rng = stream(5, Purpose::FourierTime, 0);
        let smp = sampler.sample(&mut rng);
        assert_eq!(smp.j, 0);
        assert!(smp.omega == Complex::new(0.0, 1.0) || smp.omega == Complex::new(0.0, -1.0));
        assert!(smp.tau.abs() <= s.t_max() + 1e-12);
    }

    #[test]
    fn deterministic_per_stream() {
        let s = toy(6, 9, 1.0);
        let sampler = FourierSampler::new(&s).unwrap();
        let a = sampler.sample(&mut stream(11, Purpose::FourierTime, 42));
        let b = sampler.sample(&mut stream(11, Purpose::FourierTime, 42));
        assert_eq!(a, b);
    }

    #[test]
    fn marginal_frequencies() {
        let s = toy(8, 6, 1.0);
        let sampler = FourierSampler::new(&s).unwrap();
        let mut rng = stream(3, Purpose::FourierTime, 0);
        let n = 1_000_000usize;
        let mut counts = vec![0usize; s.j()];
        for _ in 0..n {
            counts[sampler.sample(&mut rng).j] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let p = sampler.p_y().probability(j);
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - n as f64 * p).abs() <= 4.0 * sigma, "{j}");
        }
    }
}

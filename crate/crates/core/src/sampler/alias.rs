//! Vose alias tables over the positive-mass part of a weight vector.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Discrete distribution with O(1) draws. Zero-weight outcomes are left out
/// of the table entirely, so they can never be returned.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution<T> {
    probabilities: Vec<T>,
    support: Vec<usize>,
    threshold: Vec<T>,
    alias: Vec<usize>,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(weights: &[T]) -> Result<Self> {
        let mut total = CompensatedSum::default();
        for &w in weights {
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(crate::error::invalid(
                    "weights",
                    format!("{w} is not a finite nonnegative weight"),
                ));
            }
            total.add(w);
        }
        let total = total.value();
        if !(total > T::zero()) {
            return Err(Error::DegenerateDistribution);
        }
        let probabilities: Vec<T> = weights.iter().map(|&w| w / total).collect();
        let support: Vec<usize> = (0..weights.len())
            .filter(|&i| weights[i] > T::zero())
            .collect();
        let m = support.len();
        let mf = T::from_count(m);
        let mut scaled: Vec<T> = support.iter().map(|&i| probabilities[i] * mf).collect();
        let mut threshold = vec![T::one(); m];
        let mut alias: Vec<usize> = (0..m).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..m).partition(|&i| scaled[i] < T::one());
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            threshold[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - T::one();
            if scaled[l] < T::one() {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            threshold[i] = T::one();
        }
        Ok(Self {
            probabilities,
            support,
            threshold,
            alias,
        })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn probability(&self, i: usize) -> T {
        self.probabilities[i]
    }

    /// Indices with positive probability, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let slot = rng.random_range(0..self.support.len());
        let u = T::lit(rng.random::<f64>());
        if u < self.threshold[slot] {
            self.support[slot]
        } else {
            self.support[self.alias[slot]]
        }
    }

    /// Probability mass the table assigns to each outcome; equals
    /// [`probabilities`](Self::probabilities) up to rounding.
    pub fn table_mass(&self) -> Vec<T> {
        let m = T::from_count(self.support.len());
        let mut mass = vec![T::zero(); self.probabilities.len()];
        for slot in 0..self.support.len() {
            mass[self.support[slot]] += self.threshold[slot] / m;
            mass[self.support[self.alias[slot]]] += (T::one() - self.threshold[slot]) / m;
        }
        mass
    }
}

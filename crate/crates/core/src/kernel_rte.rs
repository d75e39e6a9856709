//! Random Taylor expansion of `e^{-iÃτ}`.
//!
//! Each of `r` segments `e^{-iÃs}`, `s = τ/r`, is replaced by its Taylor
//! series truncated after the pair `(n_max, n_max + 1)`. Pairing orders `n`
//! and `n + 1` gives, for unit-weight `Ã = Σ c̃_ℓ P_ℓ`,
//!
//! `(-is)^n/n! Ã^n (I - i s Ã/(n+1)) = (-1)^{n/2} d_n Ã^n Σ_ℓ |c̃_ℓ| e^{-i sgn(s c̃_ℓ) θ_n P_ℓ}`
//!
//! with `d_n = |s|^n/n! · sqrt(1 + (s/(n+1))²)` and `θ_n = atan(|s|/(n+1))`.
//! Sampling `n ∝ d_n` and Pauli indices `∝ |c̃_ℓ|` turns the segment into one
//! Clifford prefix plus one Pauli rotation; all signs and Pauli-product phases
//! collect in a fourth root of unity per sample.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{identity, CMatrix};
use crate::pauli::{pauli_product, PauliDecomposition, PauliString, Phase, PhasedPauli};
use crate::sampler::DiscreteDistribution;
use crate::scalar::{CompensatedSum, Real};

/// Largest truncation order; `1/n!` leaves the double range soon after.
pub const NMAX_CAP: usize = 150;

#[derive(Clone, Debug)]
pub struct RteSegmentModel<T> {
    pub tau_over_r: T,
    pub n_max: usize,
    /// Even orders `0, 2, …, n_max`.
    pub orders: Vec<usize>,
    pub d: Vec<T>,
    pub theta: Vec<T>,
    /// `Σ d_n`.
    pub alpha: T,
    order_dist: DiscreteDistribution<T>,
}

/// Segment model for `e^{-iÃτ/r}`. Odd `n_max` rounds up; values above
/// [`NMAX_CAP`] are clamped.
pub fn segment_model<T: Real>(tau: T, r: u64, n_max: usize) -> Result<RteSegmentModel<T>> {
    if r == 0 {
        return Err(invalid("r", "must be at least 1"));
    }
    let mut n_max = n_max + n_max % 2;
    if n_max > NMAX_CAP {
        log::warn!("n_max = {n_max} clamped to {NMAX_CAP} to avoid underflow in 1/n!");
        n_max = NMAX_CAP;
    }
    let s = tau / T::lit(r as f64);
    let abs_s = s.abs();
    let orders: Vec<usize> = (0..=n_max).step_by(2).collect();
    let mut d = Vec::with_capacity(orders.len());
    let mut theta = Vec::with_capacity(orders.len());
    // ln(|s|^n / n!), advanced two orders at a time
    let mut log_power = T::zero();
    let log_s = abs_s.ln();
    for &n in &orders {
        let ratio = abs_s / T::from_count(n + 1);
        theta.push(ratio.atan());
        let root = (T::one() + ratio * ratio).sqrt();
        if n == 0 {
            d.push(root);
            continue;
        }
        if abs_s == T::zero() {
            d.push(T::zero());
            continue;
        }
        log_power += log_s + log_s - T::from_count(n * (n - 1)).ln();
        d.push(log_power.exp() * root);
    }
    let mut alpha = CompensatedSum::default();
    d.iter().for_each(|&v| alpha.add(v));
    Ok(RteSegmentModel {
        tau_over_r: s,
        n_max,
        order_dist: DiscreteDistribution::new(&d)?,
        orders,
        d,
        theta,
        alpha: alpha.value(),
    })
}

impl<T: Real> RteSegmentModel<T> {
    /// Probability of drawing order index `i`.
    pub fn order_probability(&self, i: usize) -> T {
        self.order_dist.probability(i)
    }
}

/// One segment: `prefix · e^{i·angle·rotation}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RteSegment<T> {
    pub order: usize,
    pub prefix: PauliString,
    pub rotation: PauliString,
    pub angle: T,
}

/// A sampled product of `r` segments. The estimator for the truncated
/// evolution is `phase · α^r · U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RteUnitary<T> {
    pub n_qubits: usize,
    pub segments: Vec<RteSegment<T>>,
    #[serde(with = "phase_serde")]
    pub phase: Phase,
    /// `r ln α`.
    pub log_weight: T,
}

mod phase_serde {
    use super::Phase;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Phase, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(p.power())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Phase, D::Error> {
        Ok(Phase::from_power(u8::deserialize(d)? as u32))
    }
}

impl<T: Real> RteUnitary<T> {
    /// Controlled rotations: one per segment.
    pub fn n_cp(&self) -> u64 {
        self.segments.len() as u64
    }

    /// `α^r`; infinite when it overflows.
    pub fn weight(&self) -> T {
        self.log_weight.exp()
    }

    pub fn phase_complex(&self) -> Complex<T> {
        self.phase.to_complex()
    }

    /// The unitary `U` without phase or weight.
    pub fn dense(&self) -> Result<CMatrix<T>> {
        let mut u = identity(1 << self.n_qubits);
        for seg in &self.segments {
            seg.prefix.right_multiply(&mut u)?;
            seg.rotation.right_multiply_rotation(seg.angle, &mut u)?;
        }
        Ok(u)
    }

    /// `v <- U v`.
    pub fn apply(&self, v: &mut [Complex<T>]) -> Result<()> {
        for seg in self.segments.iter().rev() {
            seg.rotation.apply_rotation(seg.angle, v)?;
            seg.prefix.apply(v)?;
        }
        Ok(())
    }
}

/// Draws [`RteUnitary`] samples for one decomposition.
#[derive(Clone, Debug)]
pub struct RteSampler<'a, T> {
    d: &'a PauliDecomposition<T>,
    pauli_dist: DiscreteDistribution<T>,
}

impl<'a, T: Real> RteSampler<'a, T> {
    pub fn new(d: &'a PauliDecomposition<T>) -> Result<Self> {
        let weights: Vec<T> = d.terms().iter().map(|t| t.coeff.abs()).collect();
        Ok(Self {
            d,
            pauli_dist: DiscreteDistribution::new(&weights)?,
        })
    }

    /// Probability `|c̃_ℓ|` of term `ℓ`.
    pub fn term_probability(&self, l: usize) -> T {
        self.pauli_dist.probability(l)
    }

    /// The segment for order index `order_idx` and Pauli indices
    /// `ℓ_1..ℓ_n, ℓ_{n+1}`, with its phase.
    pub fn segment(
        &self,
        model: &RteSegmentModel<T>,
        order_idx: usize,
        indices: &[usize],
    ) -> Result<(RteSegment<T>, Phase)> {
        let n = model.orders[order_idx];
        if indices.len() != n + 1 {
            return Err(invalid(
                "indices",
                format!("expected {} indices, got {}", n + 1, indices.len()),
            ));
        }
        let terms = self.d.terms();
        let mut acc = PhasedPauli::identity(self.d.n_qubits());
        let mut phase = Phase::from_power(n as u32); // (-1)^{n/2} = i^n
        for &l in &indices[..n] {
            acc = pauli_product(&acc, &terms[l].pauli.into())?;
            if terms[l].coeff < T::zero() {
                phase *= Phase::MINUS_ONE;
            }
        }
        phase *= acc.phase;
        let last = &terms[indices[n]];
        let sign_s = if model.tau_over_r < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        let sign_c = if last.coeff < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        let segment = RteSegment {
            order: n,
            prefix: acc.string,
            rotation: last.pauli,
            angle: -sign_s * sign_c * model.theta[order_idx],
        };
        Ok((segment, phase))
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        model: &RteSegmentModel<T>,
        r: u64,
        rng: &mut R,
    ) -> Result<RteUnitary<T>> {
        let mut segments = Vec::with_capacity(r as usize);
        let mut phase = Phase::ONE;
        let mut indices = Vec::new();
        for _ in 0..r {
            let order_idx = model.order_dist.sample(rng);
            let n = model.orders[order_idx];
            indices.clear();
            indices.extend((0..=n).map(|_| self.pauli_dist.sample(rng)));
            let (seg, ph) = self.segment(model, order_idx, &indices)?;
            segments.push(seg);
            phase *= ph;
        }
        Ok(RteUnitary {
            n_qubits: self.d.n_qubits(),
            segments,
            phase,
            log_weight: T::lit(r as f64) * model.alpha.ln(),
        })
    }
}

/// `ln` of the bias bound
/// `(r N_y N_z / 2) e^{(t_max² + t_max - t_min)/r} (e t_max/(r n_max))^{n_max}`.
pub fn log_rte_bias_bound<T: Real>(
    t_max: T,
    t_min_abs: T,
    r: u64,
    n_y: T,
    n_z: T,
    n_max: usize,
) -> T {
    let rf = T::lit(r as f64);
    let mut log = (rf * n_y * n_z / T::lit(2.0)).ln() + (t_max * t_max + t_max - t_min_abs) / rf;
    if n_max > 0 {
        let nf = T::from_count(n_max);
        log += nf * (T::one() + t_max.ln() - (rf * nf).ln());
    }
    log
}

/// [`log_rte_bias_bound`] exponentiated; `+∞` on overflow.
pub fn rte_bias_bound<T: Real>(t_max: T, t_min_abs: T, r: u64, n_y: T, n_z: T, n_max: usize) -> T {
    log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, n_max).exp()
}

/// Smallest even `n_max ≤ NMAX_CAP` whose bias bound is below `ε/2`.
pub fn choose_nmax<T: Real>(
    t_max: T,
    t_min_abs: T,
    r: u64,
    n_y: T,
    n_z: T,
    eps: T,
) -> Result<usize> {
    if T::lit(r as f64) < t_max {
        return Err(Error::RteRadiusTooSmall {
            r,
            t_max: t_max.as_f64(),
        });
    }
    if !(eps > T::zero()) {
        return Err(invalid("eps", format!("{eps} must be positive")));
    }
    let target = (eps / T::lit(2.0)).ln();
    (2..=NMAX_CAP)
        .step_by(2)
        .find(|&n| log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, n) < target)
        .ok_or_else(|| Error::NmaxInfeasible {
            cap: NMAX_CAP,
            log_prefactor: log_rte_bias_bound(t_max, t_min_abs, r, n_y, n_z, 0).as_f64(),
        })
}

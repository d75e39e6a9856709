//! Fourier-integral approximation of `1/x` on `D_κ = [-1, -1/κ] ∪ [1/κ, 1]`.
//!
//! The inverse is written as a double integral over `y ∈ [0, y_max]` and
//! `z ∈ [-z_max, z_max]`, discretized with Gauss-Legendre in `y` and the
//! trapezoid rule in `z`. The result is the family
//! `α_{jk} = (i/√(2π)) w_y^{(j)} Δz z_k e^{-z_k²/2}`, `t_{jk} = y_j z_k` with
//! `Σ α_{jk} e^{-i x t_{jk}} ≈ 1/x`.

pub mod gauss_legendre;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{cis, CompensatedSum, Real};

pub use gauss_legendre::gauss_legendre;

/// Largest `J·K` accepted by [`build_series`].
pub const MAX_TERMS: u128 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams<T> {
    pub y_max: T,
    pub z_max: T,
    pub t_max: T,
    pub kappa_tilde: T,
    pub eps_t: T,
}

impl<T: Real> TruncationParams<T> {
    /// `ln(3κ̃/ε_T)`.
    pub fn log_term(&self) -> T {
        (T::lit(3.0) * self.kappa_tilde / self.eps_t).ln()
    }
}

/// `κ̃ = λ κ*`.
pub fn rescale<T: Real>(kappa_star: T, lambda: T) -> Result<T> {
    if !(kappa_star >= T::one()) {
        return Err(invalid("kappa_star", format!("{kappa_star} < 1")));
    }
    if !(lambda >= T::one()) {
        return Err(invalid("lambda", format!("{lambda} < 1")));
    }
    Ok(lambda * kappa_star)
}

pub fn truncation_params<T: Real>(kappa_tilde: T, eps_t: T) -> Result<TruncationParams<T>> {
    if !(kappa_tilde >= T::one()) {
        return Err(invalid("kappa_tilde", format!("{kappa_tilde} < 1")));
    }
    if !(eps_t > T::zero()) || !(eps_t < T::lit(3.0) * kappa_tilde) {
        return Err(invalid(
            "eps_T",
            format!("{eps_t} outside (0, 3 kappa_tilde)"),
        ));
    }
    let log = (T::lit(3.0) * kappa_tilde / eps_t).ln();
    let z_max = (log + log).sqrt();
    let y_max = kappa_tilde * z_max;
    Ok(TruncationParams {
        y_max,
        z_max,
        t_max: y_max * z_max,
        kappa_tilde,
        eps_t,
    })
}

/// Real-valued lower bounds `(J, K)` before rounding, with `J` evaluated at
/// the given integer `K`.
pub fn fourier_bounds<T: Real>(trunc: &TruncationParams<T>, eps_d: T, k: usize) -> (T, T) {
    let two = T::lit(2.0);
    let sqrt_2pi = T::two_pi().sqrt();
    let log = trunc.log_term();
    let kappa = trunc.kappa_tilde;
    let k_bound = T::one()
        + (two.ln()
            + trunc.z_max * trunc.z_max / two
            + two * kappa * log
            + (two / eps_d).ln()
            + (T::one() + two / (trunc.z_max * sqrt_2pi)).ln())
            / T::pi();
    let kf = T::from_count(k);
    let j_bound = ((kf / (kf - T::one())).ln()
        + (T::lit(32.0) * trunc.y_max * trunc.z_max * trunc.z_max / (eps_d * sqrt_2pi)).ln()
        + T::lit(3.0) * kappa * log / (two * two.sqrt()))
        / two.ln();
    (j_bound, k_bound)
}

/// Grid sizes `(J, K)`: `K` is the ceiling of its bound and `J` the ceiling
/// of its bound evaluated at that `K`.
pub fn fourier_params<T: Real>(trunc: &TruncationParams<T>, eps_d: T) -> Result<(usize, usize)> {
    if !(eps_d > T::zero()) {
        return Err(invalid("eps_D", format!("{eps_d} must be positive")));
    }
    let (_, k_bound) = fourier_bounds(trunc, eps_d, 2);
    let k = ceil_count(k_bound, "K")?.max(2);
    let (j_bound, _) = fourier_bounds(trunc, eps_d, k);
    let j = ceil_count(j_bound, "J")?.max(2);
    Ok((j, k))
}

fn ceil_count<T: Real>(x: T, name: &'static str) -> Result<usize> {
    let v = x.ceil().as_f64();
    if !v.is_finite() || v > u64::MAX as f64 {
        return Err(invalid(name, format!("bound {v} is not representable")));
    }
    Ok(v as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid<T> {
    pub j: usize,
    pub k: usize,
    pub gl_nodes: Vec<T>,
    pub gl_weights: Vec<T>,
    pub y_nodes: Vec<T>,
    pub wy: Vec<T>,
    pub z_nodes: Vec<T>,
    pub delta_z: T,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn new(y_max: T, z_max: T, j: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(invalid("K", "at least two trapezoid nodes are required"));
        }
        let (gl_nodes, gl_weights) = gauss_legendre::<T>(j)?;
        let half_y = y_max / T::lit(2.0);
        let y_nodes = gl_nodes.iter().map(|&c| half_y * (T::one() + c)).collect();
        let wy = gl_weights.iter().map(|&w| half_y * w).collect();
        let delta_z = (z_max + z_max) / T::from_count(k - 1);
        let mid = T::from_count(k - 1) / T::lit(2.0);
        let z_nodes = (0..k)
            .map(|i| {
                // Exact zero at the centre of an odd grid.
                if 2 * i + 1 == k {
                    T::zero()
                } else {
                    delta_z * (T::from_count(i) - mid)
                }
            })
            .collect();
        Ok(Self {
            j,
            k,
            gl_nodes,
            gl_weights,
            y_nodes,
            wy,
            z_nodes,
            delta_z,
        })
    }
}

/// The discretized series together with its normalization data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries<T> {
    pub grid: QuadratureGrid<T>,
    pub trunc: TruncationParams<T>,
    pub kappa_star: T,
    pub lambda: T,
    pub eps_d: T,
    /// `Δz z_k e^{-z_k²/2}`.
    pub z_amplitudes: Vec<T>,
    pub n_y: T,
    pub n_z: T,
    pub t_min_abs: T,
}

/// Certified series for `κ̃ = λ κ*` with truncation error `ε_T` and
/// discretization error `ε_D`.
pub fn build_series<T: Real>(
    kappa_star: T,
    lambda: T,
    eps_t: T,
    eps_d: T,
) -> Result<FourierSeries<T>> {
    let kappa_tilde = rescale(kappa_star, lambda)?;
    let trunc = truncation_params(kappa_tilde, eps_t)?;
    let (j, k) = fourier_params(&trunc, eps_d)?;
    let required = j as u128 * k as u128;
    if required > MAX_TERMS {
        return Err(Error::SeriesTooLarge {
            required,
            limit: MAX_TERMS,
        });
    }
    FourierSeries::from_grid(trunc, j, k, kappa_star, lambda, eps_d)
}

impl<T: Real> FourierSeries<T> {
    /// Builds the series on an explicit `J × K` grid.
    pub fn from_grid(
        trunc: TruncationParams<T>,
        j: usize,
        k: usize,
        kappa_star: T,
        lambda: T,
        eps_d: T,
    ) -> Result<Self> {
        let grid = QuadratureGrid::new(trunc.y_max, trunc.z_max, j, k)?;
        let half = T::lit(0.5);
        let z_amplitudes: Vec<T> = grid
            .z_nodes
            .iter()
            .map(|&z| grid.delta_z * z * (-half * z * z).exp())
            .collect();
        let inv_sqrt_2pi = T::one() / T::two_pi().sqrt();
        let mut n_y = CompensatedSum::default();
        grid.wy.iter().for_each(|w| n_y.add(w.abs()));
        let mut n_z = CompensatedSum::default();
        z_amplitudes.iter().for_each(|a| n_z.add(a.abs()));
        let y_min = grid
            .y_nodes
            .iter()
            .fold(T::infinity(), |m, &y| m.min(y.abs()));
        let z_min = grid
            .z_nodes
            .iter()
            .filter(|z| **z != T::zero())
            .fold(T::infinity(), |m, &z| m.min(z.abs()));
        Ok(Self {
            n_y: n_y.value() * inv_sqrt_2pi,
            n_z: n_z.value(),
            t_min_abs: y_min * z_min,
            grid,
            trunc,
            kappa_star,
            lambda,
            eps_d,
            z_amplitudes,
        })
    }

    pub fn j(&self) -> usize {
        self.grid.j
    }

    pub fn k(&self) -> usize {
        self.grid.k
    }

    /// `J·K`, counting zero-amplitude terms.
    pub fn term_count(&self) -> u128 {
        self.grid.j as u128 * self.grid.k as u128
    }

    pub fn kappa_tilde(&self) -> T {
        self.trunc.kappa_tilde
    }

    pub fn t_max(&self) -> T {
        self.trunc.t_max
    }

    /// `(N_y, N_z)` as direct sums.
    pub fn normalization(&self) -> (T, T) {
        (self.n_y, self.n_z)
    }

    /// The closed form `y_max/√(2π)` that `N_y` should equal.
    pub fn n_y_closed_form(&self) -> T {
        self.trunc.y_max / T::two_pi().sqrt()
    }

    /// The bound `2 z_max² √(2π)/(K-1)` stated for `N_z`.
    pub fn n_z_bound(&self) -> T {
        let z = self.trunc.z_max;
        T::lit(2.0) * z * z * T::two_pi().sqrt() / T::from_count(self.grid.k - 1)
    }

    pub fn alpha(&self, j: usize, k: usize) -> Complex<T> {
        let inv = T::one() / T::two_pi().sqrt();
        Complex::new(T::zero(), inv * self.grid.wy[j] * self.z_amplitudes[k])
    }

    pub fn time(&self, j: usize, k: usize) -> T {
        self.grid.y_nodes[j] * self.grid.z_nodes[k]
    }

    /// `Σ |α_{jk}|`.
    pub fn alpha_one_norm(&self) -> T {
        let mut acc = CompensatedSum::default();
        for j in 0..self.grid.j {
            for k in 0..self.grid.k {
                let a = self.alpha(j, k);
                acc.add(a.im.abs() + a.re.abs());
            }
        }
        acc.value()
    }

    /// `Σ α_{jk} e^{-i x t_{jk}}` summed term by term.
    pub fn evaluate_naive(&self, x: T) -> Complex<T> {
        let mut acc = crate::scalar::CompensatedComplexSum::default();
        for j in 0..self.grid.j {
            for k in 0..self.grid.k {
                acc.add(self.alpha(j, k) * cis(-x * self.time(j, k)));
            }
        }
        acc.value()
    }

    /// The series value at `x`, which is real and odd in `x`.
    ///
    /// Pairs `±z_k` and sums `Σ_k a_k sin(x y_j z_k)` with a rotation
    /// recurrence re-anchored every [`REANCHOR`] steps.
    pub fn evaluate(&self, x: T) -> T {
        let k = self.grid.k;
        let first_pos = k / 2;
        // offset of the first positive node in units of Δz
        let offset = if k % 2 == 1 { T::one() } else { T::lit(0.5) };
        let start = if k % 2 == 1 { first_pos + 1 } else { first_pos };
        let amps = &self.z_amplitudes[start..];
        let mut outer = CompensatedSum::default();
        for (&y, &w) in self.grid.y_nodes.iter().zip(&self.grid.wy) {
            let phi = x * y * self.grid.delta_z;
            let step = cis(phi);
            let mut inner = T::zero();
            let mut rot = cis(phi * offset);
            for (m, &a) in amps.iter().enumerate() {
                if m > 0 {
                    rot = if m % REANCHOR == 0 {
                        cis(phi * (offset + T::from_count(m)))
                    } else {
                        rot * step
                    };
                }
                inner += a * rot.im;
            }
            outer.add(w * inner);
        }
        T::lit(2.0) / T::two_pi().sqrt() * outer.value()
    }

    /// `max |1/x - F(x)|` over the given points.
    pub fn max_error(&self, xs: &[T]) -> T {
        xs.iter().fold(T::zero(), |m, &x| {
            m.max((T::one() / x - self.evaluate(x)).abs())
        })
    }
}

pub const REANCHOR: usize = 32;

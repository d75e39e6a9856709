//! Gauss-Legendre nodes and weights up to degree 10^6.
//!
//! Degrees up to [`ASYMPTOTIC_THRESHOLD`] use Newton's method on the
//! three-term recurrence. Above it, interior nodes are found by Newton's
//! method in `θ` on the interior asymptotic expansion of `P_n(cos θ)`
//! (Hale and Townsend), and only the [`BOUNDARY_NODES`] roots closest to
//! each endpoint fall back to the recurrence.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scalar::{CompensatedSum, Real};

pub const MAX_DEGREE: usize = 1_000_000;
pub const ASYMPTOTIC_THRESHOLD: usize = 10_000;
pub const BOUNDARY_NODES: usize = 30;
const EXPANSION_TERMS: usize = 20;
const MAX_NEWTON: usize = 12;

/// Nodes in ascending order and the matching positive weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 || n > MAX_DEGREE {
        return Err(invalid("J", format!("degree {n} outside 1..={MAX_DEGREE}")));
    }
    if n <= ASYMPTOTIC_THRESHOLD {
        Ok(assemble(n, recurrence_half(n, half_count(n))))
    } else {
        Ok(assemble(n, asymptotic_half(n)))
    }
}

fn half_count(n: usize) -> usize {
    n.div_ceil(2)
}

/// Roots with index `k = 1..=count` counted from `x = 1`, as `(x, w)`.
pub(crate) fn recurrence_half<T: Real>(n: usize, count: usize) -> Vec<(T, T)> {
    (1..=count)
        .into_par_iter()
        .map(|k| recurrence_root(n, k))
        .collect()
}

pub(crate) fn asymptotic_half<T: Real>(n: usize) -> Vec<(T, T)> {
    let half = half_count(n);
    let boundary = BOUNDARY_NODES.min(half);
    let mut out = recurrence_half(n, boundary);
    let ln_c = ln_expansion_constant::<T>(n);
    out.par_extend(
        (boundary + 1..=half)
            .into_par_iter()
            .map(|k| asymptotic_root(n, k, ln_c)),
    );
    out
}

/// Mirror the half set into ascending order.
fn assemble<T: Real>(n: usize, half: Vec<(T, T)>) -> (Vec<T>, Vec<T>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &half[..n / 2] {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, w) = half[n / 2];
        nodes.push(T::zero());
        weights.push(w);
    }
    for &(x, w) in half[..n / 2].iter().rev() {
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

fn initial_theta<T: Real>(n: usize, k: usize) -> T {
    let nf = T::from_count(n);
    let x = (T::one() - (nf - T::one()) / (T::lit(8.0) * nf * nf * nf))
        * (T::pi() * T::from_count(4 * k - 1) / T::from_count(4 * n + 2)).cos();
    x.acos()
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub(crate) fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 1..n {
        let kf = T::from_count(k);
        let next = ((kf + kf + T::one()) * x * p - kf * p_prev) / (kf + T::one());
        p_prev = p;
        p = next;
    }
    let dp = T::from_count(n) * (x * p - p_prev) / (x * x - T::one());
    (p, dp)
}

fn recurrence_root<T: Real>(n: usize, k: usize) -> (T, T) {
    if n % 2 == 1 && k == n / 2 + 1 {
        let (_, dp) = legendre::<T>(n, T::zero());
        return (T::zero(), T::lit(2.0) / (dp * dp));
    }
    let mut x = initial_theta::<T>(n, k).cos();
    let tol = T::lit(4.0) * T::default_epsilon();
    for _ in 0..MAX_NEWTON {
        let (p, dp) = legendre(n, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() <= tol * x.abs().max(T::one()) {
            break;
        }
    }
    let (_, dp) = legendre(n, x);
    (x, T::lit(2.0) / ((T::one() - x * x) * dp * dp))
}

/// `ln C_n` with `C_n = (4/π) Π_{j=1}^n j/(j+1/2)`.
pub(crate) fn ln_expansion_constant<T: Real>(n: usize) -> T {
    let mut acc = CompensatedSum::default();
    acc.add((T::lit(4.0) / T::pi()).ln());
    let half = T::lit(0.5);
    for j in 1..=n {
        acc.add(-(half / T::from_count(j)).ln_1p());
    }
    acc.value()
}

/// `(P_n(cos θ), dP_n(cos θ)/dθ)` from the interior expansion.
pub(crate) fn legendre_theta<T: Real>(n: usize, theta: T, ln_c: T) -> (T, T) {
    let half = T::lit(0.5);
    let nf = T::from_count(n);
    let (s, c) = (theta.sin(), theta.cos());
    let two_s = s + s;
    let cot = c / s;
    let mut h = T::one();
    let mut scale = T::one() / two_s.sqrt();
    let mut p = T::zero();
    let mut dp = T::zero();
    for m in 0..EXPANSION_TERMS {
        let mf = T::from_count(m);
        if m > 0 {
            let jm = mf - half;
            h *= jm * jm / (mf * (nf + mf + half));
            scale /= two_s;
        }
        let alpha = (nf + mf + half) * theta - (mf + half) * T::frac_pi_2();
        let (sa, ca) = (alpha.sin(), alpha.cos());
        p += h * ca * scale;
        dp -= h * scale * ((nf + mf + half) * sa + (mf + half) * ca * cot);
    }
    let cn = ln_c.exp();
    (cn * p, cn * dp)
}

fn asymptotic_root<T: Real>(n: usize, k: usize, ln_c: T) -> (T, T) {
    let mut theta = initial_theta::<T>(n, k);
    let tol = T::lit(4.0) * T::default_epsilon();
    for _ in 0..MAX_NEWTON {
        let (p, dp) = legendre_theta(n, theta, ln_c);
        let dt = p / dp;
        theta -= dt;
        if dt.abs() <= tol * theta {
            break;
        }
    }
    let (_, dp) = legendre_theta(n, theta, ln_c);
    let x = if n % 2 == 1 && k == n / 2 + 1 {
        T::zero()
    } else {
        theta.cos()
    };
    (x, T::lit(2.0) / (dp * dp))
}

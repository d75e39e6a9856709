//! Second-order (Strang) product formula for `e^{-iÃτ}` with `Ã = A/λ`.
//!
//! One step `S(δ)` applies half-angle rotations for terms `0..L-1`, a full
//! rotation for the last term, then the half-angle rotations in reverse. The
//! two middle half-steps are merged, so a step stores `2L - 1` rotations while
//! the gate count keeps the `2L`-per-step accounting.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{identity, matrix_power, CMatrix};
use crate::pauli::{PauliDecomposition, PauliString};
use crate::scalar::Real;

/// Dense guard for building the plan unitary.
pub const PF_MAX_QUBITS: usize = 10;
/// Default Trotter-number cap.
pub const DEFAULT_TROTTER_CAP: u64 = 1_000_000_000;

/// `r = max(1, ceil(sqrt(f |τ|³ / ε)))`.
pub fn trotter_number<T: Real>(f: T, tau: T, eps_pf: T) -> Result<u64> {
    if !(f >= T::zero()) {
        return Err(invalid("f", format!("{f} < 0")));
    }
    if !(eps_pf > T::zero()) {
        return Err(invalid("eps_pf", format!("{eps_pf} must be positive")));
    }
    let t = tau.abs();
    ceil_steps((f * t * t * t / eps_pf).sqrt(), DEFAULT_TROTTER_CAP)
}

/// Certified spectral-norm error bound `f |τ|³ / r²`.
pub fn pf_error_bound<T: Real>(f: T, tau: T, r: u64) -> T {
    let t = tau.abs();
    let rf = T::lit(r as f64);
    f * t * t * t / (rf * rf)
}

fn ceil_steps<T: Real>(x: T, cap: u64) -> Result<u64> {
    let v = x.ceil().as_f64();
    if !v.is_finite() || v > cap as f64 {
        return Err(Error::TrotterCapExceeded { cap });
    }
    Ok((v as u64).max(1))
}

/// How many steps to use for a sampled time `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrotterPolicy<T> {
    /// The same `r` for every time.
    Fixed { r: u64 },
    /// `max(1, ceil(c τ²))`.
    Quadratic { c: T },
    /// [`trotter_number`] with a known commutator constant.
    Certified { f: T, eps: T },
    /// `max(ceil|τ|, ceil(c τ²))`, which keeps `r ≥ |τ|`.
    TimeFloored { c: T },
}

impl<T: Real> TrotterPolicy<T> {
    pub fn steps(&self, tau: T) -> Result<u64> {
        let t = tau.abs();
        match *self {
            TrotterPolicy::Fixed { r } => {
                if r == 0 {
                    return Err(invalid("r", "must be at least 1"));
                }
                Ok(r)
            }
            TrotterPolicy::Quadratic { c } => ceil_steps(c * t * t, DEFAULT_TROTTER_CAP),
            TrotterPolicy::Certified { f, eps } => trotter_number(f, tau, eps),
            TrotterPolicy::TimeFloored { c } => Ok(ceil_steps(t, DEFAULT_TROTTER_CAP)?
                .max(ceil_steps(c * t * t, DEFAULT_TROTTER_CAP)?)),
        }
    }

    /// Largest step count over `|τ| ≤ t_max`; every policy is monotone in `|τ|`.
    pub fn max_steps(&self, t_max: T) -> Result<u64> {
        self.steps(t_max)
    }
}

/// `e^{i·angle·P}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation<T> {
    pub pauli: PauliString,
    pub angle: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfPlan<T> {
    pub tau: T,
    pub r: u64,
    /// One step, in application order from left to right of the product.
    pub rotations: Vec<Rotation<T>>,
    pub n_cp_per_sample: u64,
    pub dense_unitary: Option<CMatrix<T>>,
}

/// The rotations of one step `S(τ/r)`, without the dense product.
pub fn pf_step<T: Real>(d: &PauliDecomposition<T>, tau: T, r: u64) -> Result<Vec<Rotation<T>>> {
    if r == 0 {
        return Err(invalid("r", "must be at least 1"));
    }
    let delta = tau / T::lit(r as f64);
    let lambda = d.lambda();
    let terms = d.terms();
    let l = terms.len();
    let half = |i: usize| Rotation {
        pauli: terms[i].pauli,
        angle: -(terms[i].coeff / lambda) * delta / T::lit(2.0),
    };
    let mut rotations: Vec<Rotation<T>> = (0..l - 1).map(half).collect();
    rotations.push(Rotation {
        pauli: terms[l - 1].pauli,
        angle: -(terms[l - 1].coeff / lambda) * delta,
    });
    rotations.extend((0..l - 1).rev().map(half));
    Ok(rotations)
}

/// Product of the rotations as a dense matrix.
pub fn step_unitary<T: Real>(n_qubits: usize, rotations: &[Rotation<T>]) -> Result<CMatrix<T>> {
    let mut u = identity(1 << n_qubits);
    for rot in rotations {
        rot.pauli.right_multiply_rotation(rot.angle, &mut u)?;
    }
    Ok(u)
}

/// Plan and dense unitary `S(τ/r)^r` for the unit-weight terms of `d`.
pub fn build_pf<T: Real>(d: &PauliDecomposition<T>, tau: T, r: u64) -> Result<PfPlan<T>> {
    if d.n_qubits() > PF_MAX_QUBITS {
        return Err(Error::DenseGuard {
            op: "build_pf",
            max: PF_MAX_QUBITS,
            got: d.n_qubits(),
        });
    }
    let rotations = pf_step(d, tau, r)?;
    let step = step_unitary(d.n_qubits(), &rotations)?;
    Ok(PfPlan {
        tau,
        r,
        n_cp_per_sample: 2 * r * d.len() as u64,
        dense_unitary: Some(matrix_power(&step, r)),
        rotations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, spectral_norm, unitarity_defect, HermitianEigen};
    use crate::pauli::commutator_constant;

    fn exact(d: &PauliDecomposition<f64>, tau: f64) -> CMatrix<f64> {
        let h = d.unit_weight().materialize().unwrap();
        HermitianEigen::new(&h).evolution(tau)
    }

    fn two_qubit() -> PauliDecomposition<f64> {
        PauliDecomposition::from_pairs([
            (0.7, "XI".parse().unwrap()),
            (-0.4, "ZZ".parse().unwrap()),
            (0.3, "IY".parse().unwrap()),
            (0.25, "YX".parse().unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn trotter_number_cases() {
        assert_eq!(trotter_number(0.0, 5.0, 1e-3).unwrap(), 1);
        assert_eq!(trotter_number(1.0, 2.0, 0.5).unwrap(), 4);
        assert_eq!(TrotterPolicy::Quadratic { c: 0.1 }.steps(10.0).unwrap(), 10);
        assert_eq!(TrotterPolicy::Quadratic { c: 0.1 }.steps(0.0).unwrap(), 1);
        assert_eq!(
            TrotterPolicy::TimeFloored { c: 0.01 }.steps(-7.5).unwrap(),
            8
        );
        assert!(TrotterPolicy::<f64>::Fixed { r: 0 }.steps(1.0).is_err());
        assert!(matches!(
            trotter_number(1e30, 1e30, 1e-30),
            Err(Error::TrotterCapExceeded { .. })
        ));
    }

    #[test]
    fn zero_time_is_identity() {
        let plan = build_pf(&two_qubit(), 0.0, 3).unwrap();
        assert!(max_abs_diff(plan.dense_unitary.as_ref().unwrap(), &identity(4)) < 1e-15);
    }

    #[test]
    fn single_term_is_exact() {
        let d = PauliDecomposition::from_pairs([(-2.0, "XY".parse().unwrap())]).unwrap();
        for r in [1, 5] {
            let plan = build_pf(&d, 1.3, r).unwrap();
            assert!(max_abs_diff(plan.dense_unitary.as_ref().unwrap(), &exact(&d, 1.3)) < 1e-13);
        }
    }

    #[test]
    fn step_layout_and_gate_count() {
        let d = two_qubit();
        let plan = build_pf(&d, 1.0, 8).unwrap();
        assert_eq!(plan.rotations.len(), 2 * d.len() - 1);
        assert_eq!(plan.n_cp_per_sample, 2 * 8 * 4);
        let lam = d.lambda();
        assert!((plan.rotations[0].angle + 0.7 / lam / 8.0 / 2.0).abs() < 1e-15);
        assert!((plan.rotations[3].angle - -(0.25 / lam / 8.0)).abs() < 1e-15);
        assert_eq!(plan.rotations[4], plan.rotations[2]);
        assert!(unitarity_defect(plan.dense_unitary.as_ref().unwrap()) < 1e-12);
    }

    #[test]
    fn error_within_bound_and_second_order() {
        let d = two_qubit();
        let f = commutator_constant(&d).unwrap();
        let target = exact(&d, 1.0);
        let mut errs = Vec::new();
        for r in [4u64, 8, 16, 32] {
            let plan = build_pf(&d, 1.0, r).unwrap();
            let err = spectral_norm(&(plan.dense_unitary.unwrap() - &target));
            assert!(err <= pf_error_bound(f, 1.0, r), "{r}: {err}");
            errs.push(err);
        }
        let slope = (errs[3] / errs[0]).ln() / (8f64).ln();
        assert!((-2.3..=-1.7).contains(&slope), "{slope}");
    }
}

//! Dense overlaps and single-shot Hadamard-test outcomes.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{qubits_for_dim, sandwich, CMatrix, CVector, HermitianEigen};
use crate::pauli::PauliDecomposition;
use crate::scalar::{c_one, c_zero, cis, CompensatedComplexSum, Real};

pub const EVOLUTION_MAX_QUBITS: usize = 10;
pub const NORM_TOLERANCE: f64 = 1e-10;
pub const OVERLAP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: CVector<T>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: CVector<T>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::lit(NORM_TOLERANCE) {
            return Err(Error::NotNormalized {
                norm: norm.as_f64(),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector<T>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > T::zero()) {
            return Err(Error::NotNormalized {
                norm: norm.as_f64(),
            });
        }
        Self::new(amplitudes.map(|a| a / Complex::new(norm, T::zero())))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(invalid(
                "index",
                format!("{index} outside a {dim}-dimensional space"),
            ));
        }
        let mut v = CVector::from_element(dim, c_zero());
        v[index] = c_one();
        Ok(Self { amplitudes: v })
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// `e^{-i H τ}` for `H` the materialized decomposition.
pub fn exact_evolution<T: Real>(d: &PauliDecomposition<T>, tau: T) -> Result<CMatrix<T>> {
    if d.n_qubits() > EVOLUTION_MAX_QUBITS {
        return Err(Error::DenseGuard {
            op: "exact_evolution",
            max: EVOLUTION_MAX_QUBITS,
            got: d.n_qubits(),
        });
    }
    Ok(HermitianEigen::new(&d.materialize()?).evolution(tau))
}

/// `<φ|U|ψ>`.
pub fn overlap<T: Real>(
    phi: &StateVector<T>,
    u: &CMatrix<T>,
    psi: &StateVector<T>,
) -> Result<Complex<T>> {
    sandwich(&phi.amplitudes, u, &psi.amplitudes)
}

/// `<φ|e^{-iHτ}|ψ>` for many `τ` from one eigendecomposition.
#[derive(Clone, Debug)]
pub struct SpectralOverlap<T> {
    eigenvalues: Vec<T>,
    /// `conj(<v_m|φ>) <v_m|ψ>`
    products: Vec<Complex<T>>,
}

impl<T: Real> SpectralOverlap<T> {
    pub fn new(h: &CMatrix<T>, phi: &StateVector<T>, psi: &StateVector<T>) -> Result<Self> {
        if h.nrows() != phi.dim() || h.nrows() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: if h.nrows() != phi.dim() {
                    phi.dim()
                } else {
                    psi.dim()
                },
            });
        }
        let eig = HermitianEigen::new(h);
        let a = eig.vectors.adjoint() * &phi.amplitudes;
        let b = eig.vectors.adjoint() * &psi.amplitudes;
        Ok(Self {
            eigenvalues: eig.values.iter().copied().collect(),
            products: a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).collect(),
        })
    }

    pub fn at(&self, tau: T) -> Complex<T> {
        let mut acc = CompensatedComplexSum::default();
        for (&w, &p) in self.eigenvalues.iter().zip(&self.products) {
            acc.add(p * cis(-w * tau));
        }
        acc.value()
    }

    /// `<φ|g(H)|ψ>`.
    pub fn apply_fn(&self, g: impl Fn(T) -> Complex<T>) -> Complex<T> {
        let mut acc = CompensatedComplexSum::default();
        for (&w, &p) in self.eigenvalues.iter().zip(&self.products) {
            acc.add(p * g(w));
        }
        acc.value()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Real,
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `±1` with `P(+1) = (1 + v)/2`.
    Bernoulli,
    /// `v` plus a standard normal draw.
    Gaussian,
    /// `v` itself.
    Exact,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(NoiseMode::Bernoulli),
            "gaussian" => Ok(NoiseMode::Gaussian),
            "exact" => Ok(NoiseMode::Exact),
            _ => Err(invalid("noise_mode", format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome<T> {
    pub value: T,
    pub part: Part,
}

/// One shot given the overlap `<φ|U|ψ>`.
pub fn shot_from_overlap<T: Real, R: Rng + ?Sized>(
    overlap: Complex<T>,
    part: Part,
    mode: NoiseMode,
    rng: &mut R,
) -> Result<ShotOutcome<T>> {
    let v = match part {
        Part::Real => overlap.re,
        Part::Imaginary => overlap.im,
    };
    if !(v.abs() <= T::one() + T::lit(OVERLAP_TOLERANCE)) {
        return Err(Error::OverlapOutOfRange { value: v.as_f64() });
    }
    let value = match mode {
        NoiseMode::Exact => v,
        NoiseMode::Gaussian => v + T::lit(rng.sample::<f64, _>(StandardNormal)),
        NoiseMode::Bernoulli => {
            let p_plus = (T::one() + v) / T::lit(2.0);
            if T::lit(rng.random::<f64>()) < p_plus {
                T::one()
            } else {
                -T::one()
            }
        }
    };
    Ok(ShotOutcome { value, part })
}

pub fn hadamard_shot<T: Real, R: Rng + ?Sized>(
    phi: &StateVector<T>,
    u: &CMatrix<T>,
    psi: &StateVector<T>,
    part: Part,
    mode: NoiseMode,
    rng: &mut R,
) -> Result<ShotOutcome<T>> {
    shot_from_overlap(overlap(phi, u, psi)?, part, mode, rng)
}

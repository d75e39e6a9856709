//! Dense complex linear algebra used at desk scale.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{c_abs, c_one, c_real, c_zero, cis, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { c_one() } else { c_zero() })
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(c_abs(*z)))
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(c_abs(*x - *y)))
}

/// `max |A - A^dagger|`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max(c_abs(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &identity(u.nrows()))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |acc, s| acc.max(*s))
}

/// Eigendecomposition `H = V diag(w) V^dagger` of a Hermitian matrix.
pub struct HermitianEigen<T: Real> {
    pub values: DVector<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(h: &CMatrix<T>) -> Self {
        // Symmetrize first so rounding noise below the diagonal cannot leak in.
        let sym = (h + h.adjoint()).map(|z| z * c_real(T::lit(0.5)));
        let eig = SymmetricEigen::new(sym);
        Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    /// `V diag(g(w)) V^dagger`.
    pub fn apply_fn(&self, g: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let gj = g(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= gj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-i H tau}`.
    pub fn evolution(&self, tau: T) -> CMatrix<T> {
        self.apply_fn(|w| cis(-w * tau))
    }
}

/// `r`-th power by repeated squaring.
pub fn matrix_power<T: Real>(m: &CMatrix<T>, mut r: u64) -> CMatrix<T> {
    let n = m.nrows();
    let mut result = identity(n);
    let mut base = m.clone();
    let mut scratch = CMatrix::zeros(n, n);
    let mut first = true;
    while r > 0 {
        if r & 1 == 1 {
            if first {
                result.copy_from(&base);
                first = false;
            } else {
                scratch.gemm(c_one(), &result, &base, c_zero());
                std::mem::swap(&mut result, &mut scratch);
            }
        }
        r >>= 1;
        if r > 0 {
            scratch.gemm(c_one(), &base, &base, c_zero());
            std::mem::swap(&mut base, &mut scratch);
        }
    }
    result
}

/// `<phi| M |psi>`.
pub fn sandwich<T: Real>(phi: &CVector<T>, m: &CMatrix<T>, psi: &CVector<T>) -> Result<Complex<T>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.len(),
        });
    }
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    let m_psi = m * psi;
    Ok(phi.dotc(&m_psi))
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::<f64>::from_fn(n, n, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        &m + m.adjoint()
    }

    #[test]
    fn power_matches_repeated_product() {
        let h = random_hermitian(4, 3);
        let u = HermitianEigen::new(&h).evolution(0.3);
        let mut naive = identity::<f64>(4);
        for _ in 0..13 {
            naive *= &u;
        }
        assert!(max_abs_diff(&matrix_power(&u, 13), &naive) < 1e-12);
        assert!(max_abs_diff(&matrix_power(&u, 0), &identity(4)) == 0.0);
    }

    #[test]
    fn evolution_group_law() {
        let h = random_hermitian(8, 11);
        let eig = HermitianEigen::new(&h);
        let lhs = eig.evolution(0.7) * eig.evolution(1.9);
        assert!(max_abs_diff(&lhs, &eig.evolution(2.6)) < 1e-12);
        assert!(unitarity_defect(&eig.evolution(5.0)) < 1e-12);
    }

    #[test]
    fn spectral_norm_of_hermitian_is_max_abs_eigenvalue() {
        let h = random_hermitian(4, 5);
        let eig = HermitianEigen::new(&h);
        let expect = eig.values.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        assert!((spectral_norm(&h) - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(qubits_for_dim(6), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(qubits_for_dim(8), Ok(3));
    }
}

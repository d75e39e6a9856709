//! Random conditioned test matrices and matrix artifacts.

use std::path::Path;

use anyhow::{bail, Context};
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use randqls::linalg::{qubits_for_dim, CMatrix, HermitianEigen};
use randqls::rng::{stream, Purpose};
use randqls::PauliDecomposition64;
use serde::{Deserialize, Serialize};

/// Complex entries as `[re, im]` pairs, row-major.
pub type DensePairs = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixArtifact {
    pub n_qubits: usize,
    pub kappa_requested: Option<f64>,
    /// `max|w| / min|w|` of the emitted matrix.
    pub kappa: f64,
    pub lambda: f64,
    pub eigenvalues: Vec<f64>,
    pub dense: DensePairs,
    pub decomposition: PauliDecomposition64,
}

impl MatrixArtifact {
    pub fn from_dense(a: &CMatrix<f64>, kappa_requested: Option<f64>) -> anyhow::Result<Self> {
        let n_qubits = qubits_for_dim(a.nrows())?;
        let decomposition = PauliDecomposition64::decompose(a)?;
        let mut eigenvalues: Vec<f64> = HermitianEigen::new(a).values.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let (lo, hi) = spectrum_extent(&eigenvalues);
        Ok(Self {
            n_qubits,
            kappa_requested,
            kappa: hi / lo,
            lambda: decomposition.lambda(),
            eigenvalues,
            dense: to_pairs(a),
            decomposition,
        })
    }

    /// Smallest `|w|`, so `1/min|w|` certifies `‖A⁻¹‖`.
    pub fn min_abs_eigenvalue(&self) -> f64 {
        spectrum_extent(&self.eigenvalues).0
    }
}

fn spectrum_extent(w: &[f64]) -> (f64, f64) {
    w.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
        (lo.min(x.abs()), hi.max(x.abs()))
    })
}

pub fn to_pairs(a: &CMatrix<f64>) -> DensePairs {
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn from_pairs(rows: &DensePairs) -> anyhow::Result<CMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        bail!("dense matrix must be square");
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Spectrum with `±1/κ` and `±1` present and the rest uniform on
/// `[-1, -1/κ] ∪ [1/κ, 1]`.
pub fn conditioned_spectrum<R: Rng + ?Sized>(dim: usize, kappa: f64, rng: &mut R) -> Vec<f64> {
    let sign = |rng: &mut R| if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut w = Vec::with_capacity(dim);
    w.push(sign(rng) / kappa);
    if dim > 1 {
        w.push(sign(rng));
    }
    while w.len() < dim {
        let mag = 1.0 / kappa + (1.0 - 1.0 / kappa) * rng.random::<f64>();
        w.push(sign(rng) * mag);
    }
    w
}

/// `A = U D U†` with Haar `U` and a spectrum of condition number `κ`.
pub fn gen_matrix(n_qubits: usize, kappa: f64, master_seed: u64) -> anyhow::Result<MatrixArtifact> {
    if !(1.0..f64::INFINITY).contains(&kappa) {
        bail!("kappa must be a finite number >= 1, got {kappa}");
    }
    if n_qubits == 0 || n_qubits > randqls::pauli::MATERIALIZE_MAX_QUBITS {
        bail!(
            "n_qubits must be in 1..={}",
            randqls::pauli::MATERIALIZE_MAX_QUBITS
        );
    }
    let dim = 1usize << n_qubits;
    let mut rng = stream(master_seed, Purpose::Matrix, n_qubits as u64);
    let u = haar_unitary(dim, &mut rng);
    let w = conditioned_spectrum(dim, kappa, &mut rng);
    let mut ud = u.clone();
    for j in 0..dim {
        for i in 0..dim {
            ud[(i, j)] *= w[j];
        }
    }
    let a = ud * u.adjoint();
    let a = (&a + a.adjoint()) * Complex::new(0.5, 0.0);
    MatrixArtifact::from_dense(&a, Some(kappa))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Artifact(Box<MatrixArtifact>),
    Decomposition(PauliDecomposition64),
    Dense(DensePairs),
}

/// Reads a matrix artifact, a Pauli decomposition list or a dense matrix.
pub fn load_matrix(path: &Path) -> anyhow::Result<MatrixArtifact> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // Outputs of this tool wrap their payload next to a manifest.
    let payload = value.get("result").cloned().unwrap_or(value);
    match serde_json::from_value::<MatrixFile>(payload).context("unrecognized matrix format")? {
        MatrixFile::Artifact(a) => Ok(*a),
        MatrixFile::Decomposition(d) => MatrixArtifact::from_dense(&d.materialize()?, None),
        MatrixFile::Dense(rows) => MatrixArtifact::from_dense(&from_pairs(&rows)?, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use randqls::linalg::{max_abs_diff, unitarity_defect};

    #[test]
    fn haar_is_unitary() {
        let mut rng = stream(1, Purpose::Matrix, 0);
        assert!(unitarity_defect(&haar_unitary(8, &mut rng)) < 1e-12);
    }

    #[test]
    fn requested_condition_number_is_exact() {
        for (i, kappa) in [1.0, 10.0, 100.0, 1000.0].into_iter().enumerate() {
            let m = gen_matrix(2, kappa, i as u64).unwrap();
            assert!(
                (m.kappa - kappa).abs() < 1e-10 * kappa,
                "{} vs {kappa}",
                m.kappa
            );
            let a = from_pairs(&m.dense).unwrap();
            assert!(max_abs_diff(&m.decomposition.materialize().unwrap(), &a) < 1e-12);
        }
    }

    #[test]
    fn unit_kappa_has_unit_spectrum() {
        let m = gen_matrix(2, 1.0, 3).unwrap();
        assert!(m.eigenvalues.iter().all(|w| (w.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_small_kappa() {
        assert!(gen_matrix(2, 0.5, 0).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let m = gen_matrix(1, 5.0, 9).unwrap();
        let json = serde_json::to_string(&m.dense).unwrap();
        let dir = std::env::temp_dir().join(format!("randqls-dense-{}.json", std::process::id()));
        std::fs::write(&dir, json).unwrap();
        let back = load_matrix(&dir).unwrap();
        std::fs::remove_file(&dir).ok();
        assert!((back.lambda - m.lambda).abs() < 1e-12);
    }
}

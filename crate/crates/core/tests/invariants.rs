//! Property tests for algebraic invariants.

use num_complex::Complex;
use proptest::prelude::*;
use randqls::linalg::{max_abs_diff, spectral_norm, CMatrix};
use randqls::pauli::PauliDecomposition;
use randqls::sampler::DiscreteDistribution;
use randqls::{pauli_product, PauliString, PhasedPauli};

fn hermitian(n_qubits: usize) -> impl Strategy<Value = CMatrix<f64>> {
    let dim = 1usize << n_qubits;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            Complex::new(v[i * dim + j].0, v[i * dim + j].1)
        });
        &m + m.adjoint()
    })
}

fn pauli(n_qubits: usize) -> impl Strategy<Value = PhasedPauli> {
    let mask = (1u64 << n_qubits) - 1;
    (any::<u64>(), any::<u64>()).prop_map(move |(x, z)| {
        PauliString::from_masks(n_qubits, x & mask, z & mask)
            .unwrap()
            .into()
    })
}

proptest! {
    #[test]
    fn decompose_round_trip(a in hermitian(2)) {
        let d = PauliDecomposition::decompose(&a).unwrap();
        prop_assert!(max_abs_diff(&d.materialize().unwrap(), &a) < 1e-12);
        prop_assert!(d.lambda() + 1e-12 >= spectral_norm(&a));
        let unit = d.unit_weight();
        prop_assert!((unit.lambda() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_matches_dense_and_associates(a in pauli(3), b in pauli(3), c in pauli(3)) {
        let ab = pauli_product(&a, &b).unwrap();
        prop_assert!(max_abs_diff(&ab.dense::<f64>(), &(a.dense::<f64>() * b.dense::<f64>())) < 1e-15);
        let left = pauli_product(&ab, &c).unwrap();
        let right = pauli_product(&a, &pauli_product(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn alias_table_mass_matches_weights(w in prop::collection::vec(0.0f64..10.0, 1..40)) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let dist = DiscreteDistribution::new(&w).unwrap();
        let total: f64 = w.iter().sum();
        let mass = dist.table_mass();
        for (i, &x) in w.iter().enumerate() {
            prop_assert!((dist.probability(i) - x / total).abs() < 1e-12);
            prop_assert!((mass[i] - x / total).abs() < 1e-12);
        }
        let s: f64 = mass.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}

//! The estimator's exact expectation against independently assembled sums.

use num_complex::Complex;
use randqls::estimator::{exhaustive_mean, pf_bias_bound, KernelConfig, Problem};
use randqls::fourier::build_series;
use randqls::kernel_pf::TrotterPolicy;
use randqls::linalg::{CVector, HermitianEigen};
use randqls::pauli::{commutator_constant, PauliDecomposition};
use randqls::simulator::StateVector;

fn problem(pairs: &[(f64, &str)], kappa_star: f64, eps: f64) -> Problem<f64> {
    let d = PauliDecomposition::from_pairs(pairs.iter().map(|(c, p)| (*c, p.parse().unwrap())))
        .unwrap();
    let n = d.n_qubits();
    let dim = 1usize << n;
    let series = build_series(kappa_star, d.lambda(), eps, eps).unwrap();
    let phi = StateVector::normalized(CVector::from_fn(dim, |i, _| {
        Complex::new(1.0 + i as f64, 0.5)
    }))
    .unwrap();
    let psi = StateVector::normalized(CVector::from_fn(dim, |i, _| {
        Complex::new(0.3, i as f64 - 1.0)
    }))
    .unwrap();
    Problem::new(d, phi, psi, series).unwrap()
}

/// `λ^{-1} Σ_{jk} α_{jk} <φ|e^{-iÃ t_{jk}}|ψ>` from dense exponentials.
fn direct_sum(p: &Problem<f64>) -> Complex<f64> {
    let a = p.unit_weight().materialize().unwrap();
    let eig = HermitianEigen::new(&a);
    let s = &p.series;
    let mut total = Complex::new(0.0, 0.0);
    for j in 0..s.j() {
        for k in 0..s.k() {
            let u = eig.evolution(s.time(j, k));
            total += s.alpha(j, k) * p.phi.amplitudes().dotc(&(&u * p.psi.amplitudes()));
        }
    }
    total / s.lambda
}

fn min_singular(p: &Problem<f64>) -> f64 {
    let a = p.decomposition.materialize().unwrap();
    HermitianEigen::new(&a)
        .values
        .iter()
        .fold(f64::INFINITY, |m, w| m.min(w.abs()))
}

#[test]
fn exact_kernel_expectation_is_the_series() {
    let p = problem(&[(1.2, "Z"), (0.5, "X")], 1.0, 0.1);
    let mean = exhaustive_mean(&p, KernelConfig::Exact).unwrap();
    assert!((mean - direct_sum(&p)).norm() < 1e-10);
}

#[test]
fn series_target_is_within_budget_of_the_inverse() {
    let pairs = [(1.0, "ZI"), (0.4, "XX"), (-0.3, "YZ"), (0.2, "IX")];
    let base = problem(&pairs, 1.0, 0.1);
    let kappa_star = 1.0 / min_singular(&base);
    let eps = 0.02;
    let p = problem(&pairs, kappa_star, eps);
    let mean = exhaustive_mean(&p, KernelConfig::Exact).unwrap();
    assert!((mean - direct_sum(&p)).norm() < 1e-9);
    let gap = (mean - p.truth()).norm();
    assert!(gap <= 2.0 * eps / p.decomposition.lambda(), "gap {gap}");
}

#[test]
fn pf_bias_is_within_its_bound() {
    let pairs = [(1.0, "ZI"), (0.4, "XX"), (-0.3, "YZ"), (0.2, "IX")];
    let base = problem(&pairs, 1.0, 0.1);
    let kappa_star = 1.0 / min_singular(&base);
    let p = problem(&pairs, kappa_star, 0.05);
    let exact = exhaustive_mean(&p, KernelConfig::Exact).unwrap();
    let f = commutator_constant(p.unit_weight()).unwrap();
    assert!(f > 0.0);
    let s = &p.series;
    let mut prev = f64::INFINITY;
    for r in [2u64, 4, 8, 16] {
        let pf = exhaustive_mean(
            &p,
            KernelConfig::Pf {
                policy: TrotterPolicy::Fixed { r },
            },
        )
        .unwrap();
        let bias = (pf - exact).norm();
        let bound = pf_bias_bound(s.n_y, s.n_z, s.lambda, f, s.t_max(), r);
        assert!(bias <= bound, "r={r}: bias {bias:e} above bound {bound:e}");
        assert!(bias < prev);
        prev = bias;
    }
}

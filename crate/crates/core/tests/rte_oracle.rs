//! Exhaustive enumeration of the RTE sampler against the truncated Taylor
//! series written as a plain linear combination of matrix powers.

use num_complex::Complex;
use randqls::kernel_rte::{segment_model, RteSampler, RteUnitary};
use randqls::linalg::{identity, max_abs_diff, CMatrix};
use randqls::pauli::PauliDecomposition;
use randqls::Phase;

fn decomposition(pairs: &[(f64, &str)]) -> PauliDecomposition<f64> {
    PauliDecomposition::from_pairs(pairs.iter().map(|(c, p)| (*c, p.parse().unwrap())))
        .unwrap()
        .unit_weight()
}

/// `Σ_{n even ≤ n_max} (-is)^n/n! Ã^n (I - isÃ/(n+1))`, from dense powers.
fn taylor_lcu(a: &CMatrix<f64>, s: f64, n_max: usize) -> CMatrix<f64> {
    let dim = a.nrows();
    let id = identity::<f64>(dim);
    let mut total = CMatrix::zeros(dim, dim);
    let mut power = id.clone();
    let mut fact = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            power = &power * a;
            fact *= n as f64;
        }
        if n % 2 == 1 {
            continue;
        }
        let coeff = Complex::new(0.0, -s).powu(n as u32) / fact;
        let pair = &id - a * Complex::new(0.0, s / (n as f64 + 1.0));
        total += (&power * pair) * coeff;
    }
    total
}

/// Every `(order, ℓ_1..ℓ_{n+1})` for one segment with its probability.
fn segment_outcomes(
    sampler: &RteSampler<'_, f64>,
    model: &randqls::kernel_rte::RteSegmentModel<f64>,
    n_terms: usize,
) -> Vec<(f64, randqls::kernel_rte::RteSegment<f64>, Phase)> {
    let mut out = Vec::new();
    for (oi, &n) in model.orders.iter().enumerate() {
        let count = n_terms.pow(n as u32 + 1);
        for code in 0..count {
            let mut c = code;
            let idx: Vec<usize> = (0..=n)
                .map(|_| {
                    let l = c % n_terms;
                    c /= n_terms;
                    l
                })
                .collect();
            let p = model.order_probability(oi)
                * idx
                    .iter()
                    .map(|&l| sampler.term_probability(l))
                    .product::<f64>();
            let (seg, ph) = sampler.segment(model, oi, &idx).unwrap();
            out.push((p, seg, ph));
        }
    }
    out
}

fn check(pairs: &[(f64, &str)], tau: f64, r: u64, n_max: usize) {
    let d = decomposition(pairs);
    let a = d.materialize().unwrap();
    let model = segment_model(tau, r, n_max).unwrap();
    let sampler = RteSampler::new(&d).unwrap();
    let outcomes = segment_outcomes(&sampler, &model, d.len());
    let dim = a.nrows();
    let mut mean = CMatrix::<f64>::zeros(dim, dim);
    let mut total_p = 0.0;
    let mut visit = |stack: &[usize]| {
        let segments = stack.iter().map(|&i| outcomes[i].1).collect();
        let phase = stack.iter().fold(Phase::ONE, |acc, &i| acc * outcomes[i].2);
        let p: f64 = stack.iter().map(|&i| outcomes[i].0).product();
        let u = RteUnitary {
            n_qubits: d.n_qubits(),
            segments,
            phase,
            log_weight: r as f64 * model.alpha.ln(),
        };
        total_p += p;
        mean += u.dense().unwrap() * (u.phase_complex() * u.weight() * p);
    };
    match r {
        1 => (0..outcomes.len()).for_each(|i| visit(&[i])),
        2 => {
            for i in 0..outcomes.len() {
                for j in 0..outcomes.len() {
                    visit(&[i, j]);
                }
            }
        }
        _ => unreachable!(),
    }
    let v = taylor_lcu(&a, tau / r as f64, model.n_max);
    let oracle = (0..r).fold(identity::<f64>(dim), |acc, _| acc * &v);
    assert!(
        (total_p - 1.0).abs() < 1e-12,
        "probabilities sum to {total_p}"
    );
    let err = max_abs_diff(&mean, &oracle);
    assert!(err < 1e-12, "tau={tau} r={r} n_max={n_max}: {err:e}");
}

#[test]
fn single_qubit_two_terms() {
    check(&[(0.8, "Z"), (-0.6, "X")], 0.7, 1, 4);
    check(&[(0.8, "Z"), (-0.6, "X")], -1.3, 2, 2);
}

#[test]
fn two_qubit_three_terms_mixed_signs() {
    let pairs = [(0.5, "ZI"), (-0.3, "XY"), (0.25, "YZ")];
    check(&pairs, 1.1, 1, 4);
    check(&pairs, -0.9, 1, 4);
    check(&pairs, 2.0, 2, 2);
    check(&pairs, -0.4, 2, 4);
}

#[test]
fn odd_n_max_rounds_up() {
    let pairs = [(1.0, "X"), (-2.0, "Y")];
    check(&pairs, 0.5, 1, 3);
}

//! Randomized quantum linear-systems solver at desk scale.
//!
//! The pipeline: approximate `1/x` by a doubly discretized Fourier integral
//! ([`fourier`]), importance-sample its times ([`sampler`]), realize each
//! sampled evolution with a product formula ([`kernel_pf`]) or a random
//! Taylor expansion ([`kernel_rte`]), measure overlaps with simulated
//! Hadamard tests ([`simulator`]) and average ([`estimator`]).

// `!(x > 0)` is how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod fourier;
pub mod kernel_pf;
pub mod kernel_rte;
pub mod linalg;
pub mod pauli;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use pauli::{pauli_product, PauliString, Phase, PhasedPauli};
pub use scalar::Real;

pub type PauliDecomposition64 = pauli::PauliDecomposition<f64>;
pub type FourierSeries64 = fourier::FourierSeries<f64>;
pub type StateVector64 = simulator::StateVector<f64>;
pub type Problem64 = estimator::Problem<f64>;
pub type KernelConfig64 = estimator::KernelConfig<f64>;
pub type SolveConfig64 = estimator::SolveConfig<f64>;
pub type SolveReport64 = estimator::SolveReport<f64>;
pub type TrotterPolicy64 = kernel_pf::TrotterPolicy<f64>;

//! Pauli-string algebra and Pauli-basis decomposition of Hermitian matrices.
//!
//! A [`PauliString`] stores X and Z bit masks over the computational-basis
//! index. Text form uses the alphabet `{I,X,Y,Z}` with the leftmost character
//! acting on qubit 0, the most significant bit of the basis index (Kronecker
//! ordering `P_0 ⊗ P_1 ⊗ …`). Qubit `q` therefore maps to mask bit `n - 1 - q`.
//!
//! Masks `(x, z)` represent the operator `i^{|x & z|} X^x Z^z`, so `Y` is the
//! qubit with both bits set.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, max_abs, qubits_for_dim, CMatrix, HermitianEigen};
use crate::scalar::{c_abs, c_real, c_zero, CompensatedSum, Real};

/// Largest register accepted by the bit-mask representation.
pub const MAX_QUBITS: usize = 63;
/// Dense materialization guard.
pub const MATERIALIZE_MAX_QUBITS: usize = 12;
/// Dense commutator-norm guard.
pub const COMMUTATOR_MAX_QUBITS: usize = 8;
/// Coefficients at or below this magnitude are dropped by [`PauliDecomposition::decompose`].
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Relative Hermiticity tolerance for [`PauliDecomposition::decompose`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// A fourth root of unity `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        match self.0 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl std::ops::MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Phase) {
        *self = *self * rhs;
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x: 0,
            z: 0,
        }
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidPauli(format!("{n_qubits} qubits")));
        }
        let valid = (1u64 << n_qubits) - 1;
        if x & !valid != 0 || z & !valid != 0 {
            return Err(Error::InvalidPauli(format!(
                "masks ({x:#b}, {z:#b}) exceed {n_qubits} qubits"
            )));
        }
        Ok(Self { n_qubits, x, z })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Symplectic-form commutation test.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// The single nonzero entry of column `col`: `P|col> = phase |row>`.
    #[inline]
    pub fn column_entry(&self, col: usize) -> (usize, Phase) {
        let sign = 2 * ((self.z & col as u64).count_ones() & 1);
        (
            col ^ self.x as usize,
            Phase::from_power(self.y_count() + sign),
        )
    }

    pub fn dense<T: Real>(&self) -> CMatrix<T> {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::from_element(dim, dim, c_zero());
        for col in 0..dim {
            let (row, ph) = self.column_entry(col);
            m[(row, col)] = ph.to_complex();
        }
        m
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: len,
            });
        }
        Ok(())
    }

    /// `v <- P v`.
    pub fn apply<T: Real>(&self, v: &mut [Complex<T>]) -> Result<()> {
        self.check_len(v.len())?;
        let x = self.x as usize;
        for c in 0..v.len() {
            let d = c ^ x;
            if d < c {
                continue;
            }
            let (_, pc) = self.column_entry(c);
            if d == c {
                v[c] *= pc.to_complex();
            } else {
                let (_, pd) = self.column_entry(d);
                let (a, b) = (v[c], v[d]);
                v[d] = a * pc.to_complex();
                v[c] = b * pd.to_complex();
            }
        }
        Ok(())
    }

    /// `v <- e^{i a P} v`.
    pub fn apply_rotation<T: Real>(&self, angle: T, v: &mut [Complex<T>]) -> Result<()> {
        self.check_len(v.len())?;
        let (s, c) = (angle.sin(), angle.cos());
        let is = Complex::new(T::zero(), s);
        let cr = c_real(c);
        let x = self.x as usize;
        for b in 0..v.len() {
            let d = b ^ x;
            if d < b {
                continue;
            }
            let (_, pb) = self.column_entry(b);
            if d == b {
                v[b] *= cr + is * pb.to_complex();
            } else {
                let (_, pd) = self.column_entry(d);
                let (vb, vd) = (v[b], v[d]);
                v[b] = cr * vb + is * pd.to_complex() * vd;
                v[d] = cr * vd + is * pb.to_complex() * vb;
            }
        }
        Ok(())
    }

    /// `m <- m e^{i a P}`.
    pub fn right_multiply_rotation<T: Real>(&self, angle: T, m: &mut CMatrix<T>) -> Result<()> {
        self.check_len(m.ncols())?;
        let (s, c) = (angle.sin(), angle.cos());
        let is = Complex::new(T::zero(), s);
        let cr = c_real(c);
        let x = self.x as usize;
        let rows = m.nrows();
        for b in 0..m.ncols() {
            let d = b ^ x;
            if d < b {
                continue;
            }
            let (_, pb) = self.column_entry(b);
            if d == b {
                let f = cr + is * pb.to_complex();
                m.column_mut(b).iter_mut().for_each(|e| *e *= f);
            } else {
                let (_, pd) = self.column_entry(d);
                let fb = is * pb.to_complex();
                let fd = is * pd.to_complex();
                for i in 0..rows {
                    let (mb, md) = (m[(i, b)], m[(i, d)]);
                    m[(i, b)] = cr * mb + fb * md;
                    m[(i, d)] = cr * md + fd * mb;
                }
            }
        }
        Ok(())
    }

    /// `m <- m P`.
    pub fn right_multiply<T: Real>(&self, m: &mut CMatrix<T>) -> Result<()> {
        self.check_len(m.ncols())?;
        let x = self.x as usize;
        let rows = m.nrows();
        for b in 0..m.ncols() {
            let d = b ^ x;
            if d < b {
                continue;
            }
            let (_, pb) = self.column_entry(b);
            if d == b {
                let f = pb.to_complex();
                m.column_mut(b).iter_mut().for_each(|e| *e *= f);
            } else {
                // (mP)[:, b] = m[:, d] P[d, b]
                let (_, pd) = self.column_entry(d);
                for i in 0..rows {
                    let (mb, md) = (m[(i, b)], m[(i, d)]);
                    m[(i, b)] = md * pb.to_complex();
                    m[(i, d)] = mb * pd.to_complex();
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        (0..self.n_qubits)
            .map(|q| {
                let bit = 1u64 << (self.n_qubits - 1 - q);
                match (self.x & bit != 0, self.z & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in s.chars().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                'Z' => z |= bit,
                _ => return Err(Error::InvalidPauli(s.to_string())),
            }
        }
        PauliString::from_masks(n, x, z)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Pauli string with a fourth-root-of-unity prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub string: PauliString,
}

impl PhasedPauli {
    pub fn new(phase: Phase, string: PauliString) -> Self {
        Self { phase, string }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(Phase::ONE, PauliString::identity(n_qubits))
    }

    pub fn dense<T: Real>(&self) -> CMatrix<T> {
        let ph = self.phase.to_complex();
        self.string.dense::<T>().map(|e| e * ph)
    }
}

impl From<PauliString> for PhasedPauli {
    fn from(string: PauliString) -> Self {
        Self::new(Phase::ONE, string)
    }
}

/// `a · b` with the accumulated phase.
pub fn pauli_product(a: &PhasedPauli, b: &PhasedPauli) -> Result<PhasedPauli> {
    let (p, q) = (&a.string, &b.string);
    if p.n_qubits != q.n_qubits {
        return Err(Error::WidthMismatch {
            left: p.n_qubits,
            right: q.n_qubits,
        });
    }
    let string = PauliString {
        n_qubits: p.n_qubits,
        x: p.x ^ q.x,
        z: p.z ^ q.z,
    };
    // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
    let k = p.y_count() + q.y_count() + 2 * (p.z & q.x).count_ones() + 4 - string.y_count() % 4;
    Ok(PhasedPauli::new(
        a.phase * b.phase * Phase::from_power(k),
        string,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm<T> {
    pub pauli: PauliString,
    pub coeff: T,
}

/// `A = Σ c_ℓ P_ℓ` in a fixed storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDecomposition<T> {
    n_qubits: usize,
    terms: Vec<PauliTerm<T>>,
    lambda: T,
}

impl<T: Real> PauliDecomposition<T> {
    /// Validates and stores `terms` in the given order.
    pub fn new(terms: Vec<PauliTerm<T>>) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyDecomposition)?;
        let n_qubits = first.pauli.n_qubits;
        let mut seen = HashSet::with_capacity(terms.len());
        let mut lambda = CompensatedSum::default();
        for t in &terms {
            if t.pauli.n_qubits != n_qubits {
                return Err(Error::WidthMismatch {
                    left: n_qubits,
                    right: t.pauli.n_qubits,
                });
            }
            if t.coeff == T::zero() || !t.coeff.is_finite() {
                return Err(Error::ZeroCoefficient(t.pauli.to_text()));
            }
            if !seen.insert((t.pauli.x, t.pauli.z)) {
                return Err(Error::DuplicateTerm(t.pauli.to_text()));
            }
            lambda.add(t.coeff.abs());
        }
        Ok(Self {
            n_qubits,
            terms,
            lambda: lambda.value(),
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, PauliString)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(coeff, pauli)| PauliTerm { coeff, pauli })
                .collect(),
        )
    }

    /// Pauli-basis coefficients `Tr(P A)/N` of a Hermitian matrix, in
    /// lexicographic `(x_mask, z_mask)` order.
    pub fn decompose(a: &CMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let dim = a.nrows();
        let n = qubits_for_dim(dim)?;
        if n == 0 {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let defect = hermiticity_defect(a);
        if defect > T::lit(HERMITIAN_TOLERANCE) * max_abs(a).max(T::one()) {
            return Err(Error::NotHermitian {
                defect: defect.as_f64(),
            });
        }
        let scale = T::one() / T::from_count(dim);
        let prune = T::lit(PRUNE_THRESHOLD);
        let mut terms = Vec::new();
        let mut buf = vec![c_zero::<T>(); dim];
        for x in 0..dim {
            for (b, slot) in buf.iter_mut().enumerate() {
                *slot = a[(b, b ^ x)];
            }
            walsh_hadamard(&mut buf);
            for (z, val) in buf.iter().enumerate() {
                let y = ((x & z) as u64).count_ones();
                let c = (Phase::from_power(y).to_complex::<T>() * *val).re * scale;
                if c.abs() > prune {
                    terms.push(PauliTerm {
                        coeff: c,
                        pauli: PauliString {
                            n_qubits: n,
                            x: x as u64,
                            z: z as u64,
                        },
                    });
                }
            }
        }
        if terms.is_empty() {
            // The zero matrix: keep a well-formed object by refusing it.
            return Err(Error::EmptyDecomposition);
        }
        Self::new(terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Term count `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    /// Pauli weight `Σ|c_ℓ|`.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Coefficients divided by `λ`, so the result has unit weight.
    pub fn unit_weight(&self) -> Self {
        let inv = T::one() / self.lambda;
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coeff: t.coeff * inv,
                pauli: t.pauli,
            })
            .collect();
        Self::new(terms).expect("rescaling preserves validity")
    }

    pub fn materialize(&self) -> Result<CMatrix<T>> {
        if self.n_qubits > MATERIALIZE_MAX_QUBITS {
            return Err(Error::DenseGuard {
                op: "materialize",
                max: MATERIALIZE_MAX_QUBITS,
                got: self.n_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::from_element(dim, dim, c_zero());
        for t in &self.terms {
            for col in 0..dim {
                let (row, ph) = t.pauli.column_entry(col);
                m[(row, col)] += ph.to_complex::<T>() * c_real(t.coeff);
            }
        }
        Ok(m)
    }

    /// True when every pair of stored strings commutes.
    pub fn all_commute(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, a)| {
            self.terms[i + 1..]
                .iter()
                .all(|b| a.pauli.commutes_with(&b.pauli))
        })
    }
}

impl<T: Real + Serialize> Serialize for PauliDecomposition<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for PauliDecomposition<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<PauliTerm<T>>::deserialize(deserializer)?;
        Self::new(terms).map_err(serde::de::Error::custom)
    }
}

fn walsh_hadamard<T: Real>(v: &mut [Complex<T>]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// How the norms inside the commutator constant are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CommutatorNorm {
    /// Dense spectral norms (at most [`COMMUTATOR_MAX_QUBITS`] qubits).
    #[default]
    Spectral,
    /// Sum of absolute Pauli coefficients of each commutator; an upper bound
    /// on the spectral norm that works at any width.
    PauliOneNorm,
}

/// Second-order product-formula commutator constant `f` of the unit-weight
/// terms `P̃_ℓ = (c_ℓ/λ) P_ℓ`, in storage order.
pub fn commutator_constant<T: Real>(d: &PauliDecomposition<T>) -> Result<T> {
    commutator_constant_with(d, CommutatorNorm::Spectral)
}

pub fn commutator_constant_with<T: Real>(
    d: &PauliDecomposition<T>,
    mode: CommutatorNorm,
) -> Result<T> {
    if d.all_commute() {
        return Ok(T::zero());
    }
    match mode {
        CommutatorNorm::Spectral => spectral_commutator_constant(d),
        CommutatorNorm::PauliOneNorm => Ok(one_norm_commutator_constant(d)),
    }
}

fn spectral_commutator_constant<T: Real>(d: &PauliDecomposition<T>) -> Result<T> {
    if d.n_qubits > COMMUTATOR_MAX_QUBITS {
        return Err(Error::DenseGuard {
            op: "commutator_constant",
            max: COMMUTATOR_MAX_QUBITS,
            got: d.n_qubits,
        });
    }
    let unit = d.unit_weight();
    let dense: Vec<CMatrix<T>> = unit
        .terms
        .iter()
        .map(|t| t.pauli.dense::<T>().map(|e| e * c_real(t.coeff)))
        .collect();
    let l = dense.len();
    let dim = 1usize << d.n_qubits;
    // tail[i] = Σ_{ℓ ≥ i} P̃_ℓ
    let mut tail = vec![CMatrix::from_element(dim, dim, c_zero()); l + 1];
    for i in (0..l).rev() {
        tail[i] = &tail[i + 1] + &dense[i];
    }
    let mut outer = CompensatedSum::default();
    let mut single = CompensatedSum::default();
    for l0 in 0..l {
        let inner = commutator(&tail[l0 + 1], &dense[l0]);
        outer.add(operator_norm(&commutator(&tail[l0], &inner)));
        single.add(operator_norm(&inner));
    }
    Ok(outer.value() / T::lit(12.0) + single.value() / T::lit(24.0))
}

fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Spectral norm as `sqrt(max eig(C^dagger C))`.
fn operator_norm<T: Real>(c: &CMatrix<T>) -> T {
    if max_abs(c) == T::zero() {
        return T::zero();
    }
    let gram = c.adjoint() * c;
    HermitianEigen::new(&gram)
        .values
        .iter()
        .fold(T::zero(), |acc, w| acc.max(*w))
        .sqrt()
}

type SparsePauli<T> = BTreeMap<(u64, u64), Complex<T>>;

fn sparse_commutator<T: Real>(a: &SparsePauli<T>, b: &SparsePauli<T>, n: usize) -> SparsePauli<T> {
    let mut out = SparsePauli::new();
    for (&(ax, az), &ca) in a {
        for (&(bx, bz), &cb) in b {
            let p = PauliString {
                n_qubits: n,
                x: ax,
                z: az,
            };
            let q = PauliString {
                n_qubits: n,
                x: bx,
                z: bz,
            };
            if p.commutes_with(&q) {
                continue;
            }
            // Anticommuting: [pq] = 2 pq.
            let prod = pauli_product(&p.into(), &q.into()).expect("equal widths");
            let v = prod.phase.to_complex::<T>() * ca * cb * c_real(T::lit(2.0));
            *out.entry((prod.string.x, prod.string.z))
                .or_insert(c_zero()) += v;
        }
    }
    out
}

fn sparse_one_norm<T: Real>(a: &SparsePauli<T>) -> T {
    a.values().fold(T::zero(), |acc, v| acc + c_abs(*v))
}

fn one_norm_commutator_constant<T: Real>(d: &PauliDecomposition<T>) -> T {
    let unit = d.unit_weight();
    let n = d.n_qubits;
    let l = unit.terms.len();
    let single_term = |i: usize| -> SparsePauli<T> {
        let t = &unit.terms[i];
        SparsePauli::from([((t.pauli.x, t.pauli.z), c_real(t.coeff))])
    };
    let mut tail: Vec<SparsePauli<T>> = vec![SparsePauli::new(); l + 1];
    for i in (0..l).rev() {
        let mut s = tail[i + 1].clone();
        let t = &unit.terms[i];
        *s.entry((t.pauli.x, t.pauli.z)).or_insert(c_zero()) += c_real(t.coeff);
        tail[i] = s;
    }
    let mut outer = CompensatedSum::default();
    let mut single = CompensatedSum::default();
    for l0 in 0..l {
        let inner = sparse_commutator(&tail[l0 + 1], &single_term(l0), n);
        outer.add(sparse_one_norm(&sparse_commutator(&tail[l0], &inner, n)));
        single.add(sparse_one_norm(&inner));
    }
    outer.value() / T::lit(12.0) + single.value() / T::lit(24.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, spectral_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn random_hermitian(dim: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::<f64>::from_fn(dim, dim, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        &m + m.adjoint()
    }

    #[test]
    fn text_round_trip_and_bit_order() {
        let s = p("XIZY");
        assert_eq!(s.to_text(), "XIZY");
        // qubit 0 is the most significant bit
        assert_eq!(s.x_mask(), 0b1001);
        assert_eq!(s.z_mask(), 0b0011);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn dense_matches_kronecker_product() {
        let x = p("X").dense::<f64>();
        let z = p("Z").dense::<f64>();
        let y = p("Y").dense::<f64>();
        assert_eq!(y[(0, 1)], Complex::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex::new(0.0, 1.0));
        let xz = p("XZ").dense::<f64>();
        assert!(max_abs_diff(&xz, &x.kronecker(&z)) == 0.0);
    }

    #[test]
    fn multiplication_table() {
        let xy = pauli_product(&p("X").into(), &p("Y").into()).unwrap();
        assert_eq!(xy, PhasedPauli::new(Phase::I, p("Z")));
        let zz = pauli_product(&p("Z").into(), &p("Z").into()).unwrap();
        assert_eq!(zz, PhasedPauli::new(Phase::ONE, p("I")));
        let yx = pauli_product(&p("Y").into(), &p("X").into()).unwrap();
        assert_eq!(yx, PhasedPauli::new(Phase::MINUS_I, p("Z")));
        assert!(pauli_product(&p("X").into(), &p("XX").into()).is_err());
    }

    #[test]
    fn products_match_dense_on_all_two_qubit_pairs() {
        let all: Vec<PauliString> = (0..4u64)
            .flat_map(|x| (0..4u64).map(move |z| PauliString::from_masks(2, x, z).unwrap()))
            .collect();
        for a in &all {
            for b in &all {
                let prod = pauli_product(&(*a).into(), &(*b).into()).unwrap();
                let dense = a.dense::<f64>() * b.dense::<f64>();
                assert!(max_abs_diff(&prod.dense(), &dense) == 0.0, "{a} {b}");
            }
        }
    }

    #[test]
    fn random_six_long_product_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut acc = PhasedPauli::identity(3);
        let mut dense = crate::linalg::identity::<f64>(8);
        for _ in 0..6 {
            let s =
                PauliString::from_masks(3, rng.random_range(0..8), rng.random_range(0..8)).unwrap();
            acc = pauli_product(&acc, &s.into()).unwrap();
            dense *= s.dense::<f64>();
        }
        assert!(max_abs_diff(&acc.dense(), &dense) < 1e-15);
    }

    #[test]
    fn decompose_basis_cases() {
        let id = crate::linalg::identity::<f64>(4);
        let d = PauliDecomposition::decompose(&id).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].pauli.to_text(), "II");
        assert!((d.terms()[0].coeff - 1.0).abs() < 1e-15);

        let d = PauliDecomposition::decompose(&p("X").dense::<f64>()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].pauli, p("X"));
        assert!((d.terms()[0].coeff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decompose_round_trip_up_to_six_qubits() {
        for (n, seed) in [(1, 1u64), (2, 2), (3, 3), (6, 4)] {
            let a = random_hermitian(1 << n, seed);
            let d = PauliDecomposition::decompose(&a).unwrap();
            assert!(max_abs_diff(&d.materialize().unwrap(), &a) < 1e-10);
            assert!(d.lambda() >= spectral_norm(&a) - 1e-12);
        }
    }

    #[test]
    fn decompose_order_is_lexicographic() {
        let a = random_hermitian(4, 17);
        let d = PauliDecomposition::decompose(&a).unwrap();
        let keys: Vec<_> = d
            .terms()
            .iter()
            .map(|t| (t.pauli.x_mask(), t.pauli.z_mask()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let a = CMatrix::<f64>::from_element(3, 3, c_zero());
        assert_eq!(
            PauliDecomposition::decompose(&a),
            Err(Error::NotPowerOfTwo(3))
        );
        let mut b = crate::linalg::identity::<f64>(2);
        b[(0, 1)] = Complex::new(0.5, 0.0);
        assert!(matches!(
            PauliDecomposition::decompose(&b),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn materialize_small_sum() {
        let d = PauliDecomposition::from_pairs([(0.5, p("X")), (0.5, p("Z"))]).unwrap();
        let m = d.materialize().unwrap();
        let expect = [[0.5, 0.5], [0.5, -0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[(i, j)], Complex::new(expect[i][j], 0.0));
            }
        }
        assert_eq!(d.lambda(), 1.0);
    }

    #[test]
    fn construction_validates_terms() {
        assert_eq!(
            PauliDecomposition::<f64>::new(vec![]),
            Err(Error::EmptyDecomposition)
        );
        assert!(matches!(
            PauliDecomposition::from_pairs([(1.0, p("X")), (2.0, p("X"))]),
            Err(Error::DuplicateTerm(_))
        ));
        assert!(matches!(
            PauliDecomposition::from_pairs([(0.0, p("X"))]),
            Err(Error::ZeroCoefficient(_))
        ));
        assert!(matches!(
            PauliDecomposition::from_pairs([(1.0, p("X")), (1.0, p("XX"))]),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn json_schema() {
        let d = PauliDecomposition::from_pairs([(0.25, p("XY")), (-0.75, p("ZI"))]).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(
            text,
            r#"[{"pauli":"XY","coeff":0.25},{"pauli":"ZI","coeff":-0.75}]"#
        );
        let back: PauliDecomposition<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert!(
            serde_json::from_str::<PauliDecomposition<f64>>(r#"[{"coeff":1,"pauli":"Q"}]"#)
                .is_err()
        );
    }

    #[test]
    fn rotations_match_dense_exponential() {
        let angle: f64 = 0.37;
        for s in ["X", "Z", "Y", "XZ", "YY", "IZX"] {
            let ps = p(s);
            let dim = 1 << ps.n_qubits();
            let pd = ps.dense::<f64>();
            let rot = crate::linalg::identity::<f64>(dim) * c_real(angle.cos())
                + pd.map(|e| e * Complex::new(0.0, angle.sin()));
            let a = random_hermitian(dim, 5);
            let mut m = a.clone();
            ps.right_multiply_rotation(angle, &mut m).unwrap();
            assert!(max_abs_diff(&m, &(&a * &rot)) < 1e-14, "{s}");

            let mut m = a.clone();
            ps.right_multiply(&mut m).unwrap();
            assert!(max_abs_diff(&m, &(&a * &pd)) < 1e-14, "{s}");

            let v: Vec<Complex<f64>> = a.column(0).iter().copied().collect();
            let mut w = v.clone();
            ps.apply_rotation(angle, &mut w).unwrap();
            let expect = &rot * crate::linalg::CVector::from_vec(v.clone());
            assert!(w
                .iter()
                .zip(expect.iter())
                .all(|(a, b)| c_abs(a - b) < 1e-14));

            let mut w = v.clone();
            ps.apply(&mut w).unwrap();
            let expect = &pd * crate::linalg::CVector::from_vec(v);
            assert!(w
                .iter()
                .zip(expect.iter())
                .all(|(a, b)| c_abs(a - b) < 1e-14));
        }
    }

    #[test]
    fn commutator_constant_trivial_cases() {
        let single = PauliDecomposition::from_pairs([(2.0, p("X"))]).unwrap();
        assert_eq!(commutator_constant(&single).unwrap(), 0.0);
        let commuting =
            PauliDecomposition::from_pairs([(1.0, p("ZI")), (0.5, p("IZ")), (-0.3, p("ZZ"))])
                .unwrap();
        assert_eq!(commutator_constant(&commuting).unwrap(), 0.0);
    }

    #[test]
    fn commutator_constant_brute_force() {
        // L = 2: one inner commutator [P̃_1, P̃_0] and one nested term.
        let d = PauliDecomposition::from_pairs([(0.5, p("X")), (0.5, p("Z"))]).unwrap();
        let x = p("X").dense::<f64>().map(|e| e * 0.5);
        let z = p("Z").dense::<f64>().map(|e| e * 0.5);
        let inner = &z * &x - &x * &z;
        let sum = &x + &z;
        let outer = &sum * &inner - &inner * &sum;
        let expect = spectral_norm(&outer) / 12.0 + spectral_norm(&inner) / 24.0;
        let f = commutator_constant(&d).unwrap();
        assert!(f > 0.0);
        assert!((f - expect).abs() < 1e-14, "{f} vs {expect}");
    }

    #[test]
    fn one_norm_fallback_upper_bounds_spectral() {
        let a = random_hermitian(4, 23);
        let d = PauliDecomposition::decompose(&a).unwrap();
        let exact = commutator_constant(&d).unwrap();
        let loose = commutator_constant_with(&d, CommutatorNorm::PauliOneNorm).unwrap();
        assert!(loose >= exact - 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let d = PauliDecomposition::<f32>::from_pairs([(0.5, p("X")), (0.5, p("Z"))]).unwrap();
        let m = d.materialize().unwrap();
        assert_eq!(m[(1, 1)].re, -0.5);
        assert!(commutator_constant(&d).unwrap() > 0.0);
    }
}

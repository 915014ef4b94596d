//! Dense complex linear algebra over multi-qubit polarization spaces.
//!
//! Every state and operator here is a plain dense vector or matrix. Basis
//! ordering is fixed crate-wide: qubit 1 is the most significant bit of a
//! basis index, and `|H⟩ ↦ 0`, `|V⟩ ↦ 1`. So for three qubits `|HVV⟩` is
//! index `0b011 = 3`.
//!
//! Tolerances are split in two: [`EXACT_TOL`] for algebraic identities and
//! [`EIGEN_TOL`] for anything going through an eigensolver.

mod pauli;
pub mod random;

pub use pauli::{Pauli, PauliString};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use thiserror::Error;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest register any operation here will build.
pub const MAX_QUBITS: usize = 12;
/// Entrywise tolerance for exact-algebra identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Absolute tolerance for eigenvalue-derived quantities.
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("tensor: no operands")]
    EmptyTensor,

    #[error("register of {0} qubits exceeds the limit of {MAX_QUBITS}")]
    TooManyQubits(usize),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^†| = {0:e})")]
    NotHermitian(f64),

    #[error("expectation has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("partial trace: keep set is empty")]
    EmptyKeep,

    #[error("qubit index {index} out of range for {n} qubits (indices are 1-based)")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid ket label character {0:?}")]
    BadKetLabel(char),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(AlgebraError::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(AlgebraError::TooManyQubits(n));
    }
    Ok(n)
}

fn check_qubit(index: usize, n: usize) -> Result<()> {
    if index == 0 || index > n {
        Err(AlgebraError::QubitOutOfRange { index, n })
    } else {
        Ok(())
    }
}

/// Bit mask for 1-based `qubit` in an `n`-qubit register.
#[inline]
pub fn qubit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - qubit)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn validate_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(AlgebraError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    qubits_for_dim(m.nrows())
}

fn validate_hermitian(m: &CMatrix) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > EXACT_TOL {
        Err(AlgebraError::NotHermitian(dev))
    } else {
        Ok(())
    }
}

/// Standard single-qubit matrices.
pub mod gates {
    use super::*;

    pub fn identity() -> Matrix2<C64> {
        Matrix2::identity()
    }

    pub fn sigma_x() -> Matrix2<C64> {
        Matrix2::new(C64::ZERO, C64::ONE, C64::ONE, C64::ZERO)
    }

    pub fn sigma_y() -> Matrix2<C64> {
        Matrix2::new(C64::ZERO, -C64::I, C64::I, C64::ZERO)
    }

    pub fn sigma_z() -> Matrix2<C64> {
        Matrix2::new(C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE)
    }

    pub fn hadamard() -> Matrix2<C64> {
        let h = C64::from(FRAC_1_SQRT_2);
        Matrix2::new(h, h, h, -h)
    }

    /// `cos φ σ_x + sin φ σ_y`, an observable in the x-y plane of the
    /// Bloch sphere.
    pub fn xy_plane(phi: f64) -> Matrix2<C64> {
        Matrix2::new(
            C64::ZERO,
            C64::from_polar(1.0, -phi),
            C64::from_polar(1.0, phi),
            C64::ZERO,
        )
    }

    pub fn to_dynamic(m: &Matrix2<C64>) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| m[(i, j)])
    }
}

/// Applies a single-qubit matrix to `qubit` (1-based) of an amplitude vector.
pub fn apply_local_to_vector(amps: &mut [C64], n: usize, qubit: usize, u: &Matrix2<C64>) {
    let mask = qubit_mask(n, qubit);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
        amps[i1] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
    }
}

/// `ρ ↦ U ρ U†` with `U` acting on one qubit.
pub fn conjugate_local(rho: &mut CMatrix, n: usize, qubit: usize, u: &Matrix2<C64>) {
    let mask = qubit_mask(n, qubit);
    let d = rho.nrows();
    // rows: U ρ
    for j in 0..d {
        for i0 in 0..d {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let (a0, a1) = (rho[(i0, j)], rho[(i1, j)]);
            rho[(i0, j)] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            rho[(i1, j)] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }
    // columns: (U ρ) U†
    for i in 0..d {
        for j0 in 0..d {
            if j0 & mask != 0 {
                continue;
            }
            let j1 = j0 | mask;
            let (a0, a1) = (rho[(i, j0)], rho[(i, j1)]);
            rho[(i, j0)] = a0 * u[(0, 0)].conj() + a1 * u[(0, 1)].conj();
            rho[(i, j1)] = a0 * u[(1, 0)].conj() + a1 * u[(1, 1)].conj();
        }
    }
}

/// Pure state as a dense amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
    normalized: bool,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let amplitudes = CVector::from_vec(amplitudes);
        let normalized = (amplitudes.norm_squared() - 1.0).abs() <= EXACT_TOL;
        Ok(Self { n_qubits, amplitudes, normalized })
    }

    /// Computational basis state `index` on `n` qubits.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(AlgebraError::TooManyQubits(n));
        }
        let dim = 1 << n;
        if index >= dim {
            return Err(AlgebraError::DimensionMismatch { expected: dim, found: index });
        }
        let mut amps = vec![C64::ZERO; dim];
        amps[index] = C64::ONE;
        Self::new(amps)
    }

    /// Product state from a label over `H V + - 0 1`, e.g. `"HH+"`.
    pub fn ket(label: &str) -> Result<Self> {
        let h = C64::from(FRAC_1_SQRT_2);
        let mut amps = vec![C64::ONE];
        for c in label.chars() {
            let local = match c {
                'H' | '0' => [C64::ONE, C64::ZERO],
                'V' | '1' => [C64::ZERO, C64::ONE],
                '+' => [h, h],
                '-' => [h, -h],
                other => return Err(AlgebraError::BadKetLabel(other)),
            };
            amps = amps.iter().flat_map(|a| [a * local[0], a * local[1]]).collect();
        }
        if amps.len() == 1 {
            return Err(AlgebraError::EmptyTensor);
        }
        Self::new(amps)
    }

    /// Normalized superposition `Σ c_k |label_k⟩` of product kets.
    pub fn superposition(terms: &[(C64, &str)]) -> Result<Self> {
        let (first, rest) = terms.split_first().ok_or(AlgebraError::EmptyTensor)?;
        let mut acc = Self::ket(first.1)?.amplitudes * first.0;
        for (c, label) in rest {
            let k = Self::ket(label)?;
            if k.amplitudes.len() != acc.len() {
                return Err(AlgebraError::DimensionMismatch {
                    expected: acc.len(),
                    found: k.amplitudes.len(),
                });
            }
            acc += k.amplitudes * *c;
        }
        Self::new(acc.as_slice().to_vec())?.normalize()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn normalize(self) -> Result<Self> {
        let norm = self.amplitudes.norm();
        if norm == 0.0 {
            return Err(AlgebraError::ZeroNorm);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.unscale(norm),
            normalized: true,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|`, the overlap maximized over a global phase.
    pub fn overlap_up_to_phase(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Equality up to one global unit phase: `‖a − e^{iθ} b‖∞ ≤ tol` with the
    /// phase taken from the overlap.
    pub fn equals_up_to_phase(&self, other: &PureState, tol: f64) -> Result<bool> {
        let ip = self.inner(other)?;
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::ONE };
        let worst = self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max);
        Ok(worst <= tol)
    }

    pub fn apply_local(&mut self, qubit: usize, u: &Matrix2<C64>) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        apply_local_to_vector(self.amplitudes.as_mut_slice(), self.n_qubits, qubit, u);
        Ok(())
    }

    pub fn to_density(&self) -> MixedState {
        MixedState {
            n_qubits: self.n_qubits,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn projector(&self, label: impl Into<String>) -> Observable {
        Observable {
            n_qubits: self.n_qubits,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            label: label.into(),
        }
    }
}

/// Density matrix.
///
/// Construction checks shape and Hermiticity; positivity is checked on
/// demand with [`MixedState::min_eigenvalue`] since it costs an eigensolve.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    n_qubits: usize,
    matrix: CMatrix,
}

impl MixedState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = validate_square(&matrix)?;
        validate_hermitian(&matrix)?;
        Ok(Self { n_qubits, matrix })
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(AlgebraError::TooManyQubits(n));
        }
        let d = 1 << n;
        Ok(Self { n_qubits: n, matrix: CMatrix::identity(d, d).unscale(d as f64) })
    }

    /// `p·target + (1 − p)·I/2^n`.
    pub fn white_noise_mixture(target: &MixedState, p: f64) -> MixedState {
        let d = target.dim();
        let mut matrix = target.matrix.scale(p);
        let fill = C64::from((1.0 - p) / d as f64);
        for i in 0..d {
            matrix[(i, i)] += fill;
        }
        MixedState { n_qubits: target.n_qubits, matrix }
    }

    /// Convex combination `Σ w_k ρ_k`; weights are not renormalized.
    pub fn mixture(parts: &[(f64, &MixedState)]) -> Result<MixedState> {
        let (first, rest) = parts.split_first().ok_or(AlgebraError::EmptyTensor)?;
        let mut matrix = first.1.matrix.scale(first.0);
        for (w, rho) in rest {
            if rho.dim() != matrix.nrows() {
                return Err(AlgebraError::DimensionMismatch { expected: matrix.nrows(), found: rho.dim() });
            }
            matrix += rho.matrix.scale(*w);
        }
        Ok(MixedState { n_qubits: first.1.n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= EXACT_TOL
    }

    pub fn normalize(self) -> Result<Self> {
        let t = self.trace();
        if t.abs() <= f64::MIN_POSITIVE {
            return Err(AlgebraError::ZeroNorm);
        }
        Ok(Self { n_qubits: self.n_qubits, matrix: self.matrix.unscale(t) })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigenvalues().min()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        let a = psi.amplitudes();
        Ok((a.adjoint() * &self.matrix * a)[(0, 0)].re)
    }

    pub fn conjugate_local(&mut self, qubit: usize, u: &Matrix2<C64>) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        conjugate_local(&mut self.matrix, self.n_qubits, qubit, u);
        Ok(())
    }

    /// Reorders qubits so that new qubit `k` is old qubit `order[k-1]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<MixedState> {
        let n = self.n_qubits;
        if order.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, found: order.len() });
        }
        let mut seen = vec![false; n];
        for &q in order {
            check_qubit(q, n)?;
            seen[q - 1] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(AlgebraError::DimensionMismatch { expected: n, found: seen.iter().filter(|s| **s).count() });
        }
        let map = |new_index: usize| -> usize {
            let mut old = 0;
            for (k, &src) in order.iter().enumerate() {
                if new_index & qubit_mask(n, k + 1) != 0 {
                    old |= qubit_mask(n, src);
                }
            }
            old
        };
        let d = self.dim();
        let lookup: Vec<usize> = (0..d).map(map).collect();
        let matrix = CMatrix::from_fn(d, d, |i, j| self.matrix[(lookup[i], lookup[j])]);
        Ok(MixedState { n_qubits: n, matrix })
    }
}

/// Hermitian operator with a human-readable label.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    matrix: CMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let n_qubits = validate_square(&matrix)?;
        validate_hermitian(&matrix)?;
        Ok(Self { n_qubits, matrix, label: label.into() })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(AlgebraError::TooManyQubits(n));
        }
        let d = 1 << n;
        Ok(Self { n_qubits: n, matrix: CMatrix::identity(d, d), label: "I".into() })
    }

    /// Single-qubit observable from a 2×2 Hermitian matrix.
    pub fn single(m: &Matrix2<C64>, label: impl Into<String>) -> Result<Self> {
        Self::new(gates::to_dynamic(m), label)
    }

    /// Diagonal observable from real entries.
    pub fn diagonal(entries: &[f64], label: impl Into<String>) -> Result<Self> {
        let d = entries.len();
        let n_qubits = qubits_for_dim(d)?;
        let matrix = CMatrix::from_diagonal(&CVector::from_iterator(d, entries.iter().map(|&x| C64::from(x))));
        Ok(Self { n_qubits, matrix, label: label.into() })
    }

    /// `m^⊗k`.
    pub fn power(&self, k: usize) -> Result<Self> {
        let parts = vec![self.clone(); k];
        let mut out = tensor(&parts)?;
        out.label = format!("({})^{k}", self.label);
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn check_same(&self, other: &Observable) -> Result<()> {
        if self.dim() != other.dim() {
            Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: other.dim() })
        } else {
            Ok(())
        }
    }

    /// `Σ c_k O_k` over same-size observables.
    pub fn linear_combination(terms: &[(f64, &Observable)], label: impl Into<String>) -> Result<Self> {
        let (first, rest) = terms.split_first().ok_or(AlgebraError::EmptyTensor)?;
        let mut matrix = first.1.matrix.scale(first.0);
        for (c, o) in rest {
            first.1.check_same(o)?;
            matrix += o.matrix.scale(*c);
        }
        Ok(Self { n_qubits: first.1.n_qubits, matrix, label: label.into() })
    }

    pub fn sub(&self, other: &Observable) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (-1.0, other)], format!("{} - {}", self.label, other.label))
    }

    pub fn add(&self, other: &Observable) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (1.0, other)], format!("{} + {}", self.label, other.label))
    }

    /// Operator product; the caller is responsible for the factors
    /// commuting, otherwise the product is not Hermitian and this fails.
    pub fn product(&self, other: &Observable) -> Result<Self> {
        self.check_same(other)?;
        Self::new(&self.matrix * &other.matrix, format!("{}·{}", self.label, other.label))
    }

    /// `max |[A, B]|` entrywise.
    pub fn commutator_norm(&self, other: &Observable) -> Result<f64> {
        self.check_same(other)?;
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(c.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn max_abs_diff(&self, other: &Observable) -> Result<f64> {
        self.check_same(other)?;
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{} qubits]", self.label, self.n_qubits)
    }
}

/// Kronecker-product capable values.
pub trait Tensor: Clone {
    fn n_qubits(&self) -> usize;
    fn kron(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn kron(&self, other: &Self) -> Self {
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let normalized = (amplitudes.norm_squared() - 1.0).abs() <= EXACT_TOL;
        Self { n_qubits: self.n_qubits + other.n_qubits, amplitudes, normalized }
    }
}

impl Tensor for MixedState {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn kron(&self, other: &Self) -> Self {
        Self { n_qubits: self.n_qubits + other.n_qubits, matrix: self.matrix.kronecker(&other.matrix) }
    }
}

impl Tensor for Observable {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn kron(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
            label: format!("{}⊗{}", self.label, other.label),
        }
    }
}

/// Kronecker product of `parts`, first operand most significant.
///
/// Mixing states and operators is ruled out by the type parameter.
pub fn tensor<T: Tensor>(parts: &[T]) -> Result<T> {
    let (first, rest) = parts.split_first().ok_or(AlgebraError::EmptyTensor)?;
    let total: usize = parts.iter().map(Tensor::n_qubits).sum();
    if total > MAX_QUBITS {
        return Err(AlgebraError::TooManyQubits(total));
    }
    Ok(rest.iter().fold(first.clone(), |acc, p| acc.kron(p)))
}

/// Anything an observable can be evaluated on.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `⟨ψ|O|ψ⟩` or `Tr(Oρ)` without any checks.
    fn raw_expectation(&self, op: &CMatrix) -> C64;
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn raw_expectation(&self, op: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

impl QuantumState for MixedState {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_expectation(&self, op: &CMatrix) -> C64 {
        // Tr(Oρ) = Σ_ij O_ij ρ_ji
        let d = self.matrix.nrows();
        let mut acc = C64::ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        acc
    }
}

/// Real expectation value of a Hermitian observable.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, obs: &Observable) -> Result<f64> {
    if state.dim() != obs.dim() {
        return Err(AlgebraError::DimensionMismatch { expected: obs.dim(), found: state.dim() });
    }
    validate_hermitian(&obs.matrix)?;
    let z = state.raw_expectation(&obs.matrix);
    if z.im.abs() > EIGEN_TOL {
        return Err(AlgebraError::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// Reduced state on the 1-based qubits in `keep`, in ascending order.
pub fn partial_trace(rho: &MixedState, keep: &[usize]) -> Result<MixedState> {
    let n = rho.n_qubits;
    if keep.is_empty() {
        return Err(AlgebraError::EmptyKeep);
    }
    for &q in keep {
        check_qubit(q, n)?;
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (1..=n).filter(|q| !kept.contains(q)).collect();

    let scatter = |bits: usize, qubits: &[usize]| -> usize {
        let m = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(k, _)| bits & (1 << (m - 1 - k)) != 0)
            .fold(0, |acc, (_, &q)| acc | qubit_mask(n, q))
    };
    let kept_idx: Vec<usize> = (0..1usize << kept.len()).map(|b| scatter(b, &kept)).collect();
    let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|b| scatter(b, &traced)).collect();

    let dk = kept_idx.len();
    let matrix = CMatrix::from_fn(dk, dk, |i, j| {
        traced_idx
            .iter()
            .map(|&t| rho.matrix[(kept_idx[i] | t, kept_idx[j] | t)])
            .sum()
    });
    Ok(MixedState { n_qubits: kept.len(), matrix })
}

/// Full spectrum in ascending order.
pub fn eigenvalues(obs: &Observable) -> Result<Vec<f64>> {
    validate_hermitian(&obs.matrix)?;
    let mut ev: Vec<f64> = obs.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue(obs: &Observable) -> Result<f64> {
    Ok(eigenvalues(obs)?[0])
}

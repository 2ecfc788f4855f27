//! Dense density-operator algebra over a handful of qubits.
//!
//! Basis ordering: for a register of `k` qubits the basis state
//! `|x1 x2 ... xk>` has index `x1·2^(k-1) + ... + xk`, so qubit 0 (the
//! first qubit in user-facing, 1-based text) is the most significant bit.
//! All qubit indices accepted by functions in this module are 0-based.
//!
//! Tolerances:
//! - structural checks (Hermiticity, trace, normalization, unitarity): `1e-9`
//! - positive semidefiniteness (minimum eigenvalue): `-1e-8`
//! - imaginary residue in a measured probability before aborting: `1e-6`

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QvoteError, Result};

pub type ComplexScalar = Complex64;
pub type Matrix = DMatrix<Complex64>;

pub const STRUCTURAL_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-8;
pub const CORRUPTION_TOL: f64 = 1e-6;
pub const DEFAULT_QUBIT_CAP: usize = 12;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

/// Largest register any operation may build.
pub fn qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

/// Overrides the process-wide qubit cap. Values below 3 are raised to 3,
/// the width of the AND workspace.
pub fn set_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap.max(3), Ordering::Relaxed);
}

fn check_cap(qubits: usize) -> Result<()> {
    let cap = qubit_cap();
    if qubits > cap {
        return Err(QvoteError::Capacity { qubits, cap });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len()).ok_or_else(|| {
            QvoteError::Shape(format!(
                "state vector length {} is not a power of two >= 2",
                amplitudes.len()
            ))
        })?;
        check_cap(num_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QvoteError::Validation("non-finite amplitude".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QvoteError::Normalization { norm_sq });
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if num_qubits == 0 || index >= dim {
            return Err(QvoteError::Shape(format!(
                "basis index {index} invalid for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::default(); dim];
        amplitudes[index] = c(1.0);
        Self::new(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// A trace-one Hermitian positive semidefinite matrix on `num_qubits` qubits.
///
/// Construction checks Hermiticity and trace; positivity is only checked by
/// [`DensityOperator::verify`] since it needs an eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    num_qubits: usize,
    entries: Matrix,
}

impl DensityOperator {
    pub fn from_matrix(entries: Matrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        rho.check_structure()?;
        Ok(rho)
    }

    /// Shape and capacity checks only.
    pub(crate) fn from_matrix_unchecked(entries: Matrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(QvoteError::Shape(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let num_qubits = qubits_for_dim(entries.nrows()).ok_or_else(|| {
            QvoteError::Shape(format!(
                "dimension {} is not a power of two >= 2",
                entries.nrows()
            ))
        })?;
        check_cap(num_qubits)?;
        Ok(Self { num_qubits, entries })
    }

    /// Output of a channel: symmetrized against rounding drift, then
    /// checked. A structural violation at this point means the arithmetic
    /// went wrong, not the input.
    pub(crate) fn from_channel_output(entries: Matrix) -> Result<Self> {
        let sym = hermitize(&entries);
        let rho = Self::from_matrix_unchecked(sym)?;
        rho.check_structure().map_err(|e| match e {
            QvoteError::Validation(msg) => QvoteError::NumericalCorruption(msg),
            other => other,
        })?;
        Ok(rho)
    }

    fn check_structure(&self) -> Result<()> {
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QvoteError::Validation("non-finite matrix entry".into()));
        }
        let herm = hermiticity_error(&self.entries);
        if herm > STRUCTURAL_TOL {
            return Err(QvoteError::Validation(format!(
                "matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.entries.trace();
        if (tr - c(1.0)).norm() > STRUCTURAL_TOL {
            return Err(QvoteError::Validation(format!(
                "trace is {tr}, expected 1"
            )));
        }
        Ok(())
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        Ok(pure_to_density(&PureState::basis(num_qubits, index)?))
    }

    /// `I / 2^k`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(QvoteError::Shape("zero qubits".into()));
        }
        check_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        let entries = Matrix::from_diagonal_element(dim, dim, c(1.0 / dim as f64));
        Ok(Self { num_qubits, entries })
    }

    /// Convex combination `sum w_i rho_i`; weights must be nonnegative and
    /// sum to one.
    pub fn mixture(components: &[(f64, DensityOperator)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| QvoteError::Validation("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut total = 0.0;
        let mut acc = Matrix::zeros(dim, dim);
        for (w, rho) in components {
            if !w.is_finite() || *w < 0.0 {
                return Err(QvoteError::Validation(format!("mixture weight {w} is negative")));
            }
            if rho.dim() != dim {
                return Err(QvoteError::Shape("mixture components differ in size".into()));
            }
            total += w;
            acc += rho.entries.map(|z| z * *w);
        }
        if (total - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QvoteError::Validation(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Self::from_matrix(hermitize(&acc))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(hermitize(&self.entries))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(hermitize(&self.entries))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Full invariant check, including positive semidefiniteness.
    pub fn verify(&self) -> Result<()> {
        self.check_structure()?;
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(QvoteError::Validation(format!(
                "matrix is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    /// Largest entrywise deviation from `other`, or infinity on size mismatch.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermiticity_error(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &Matrix) -> Matrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Forms `|psi><psi|`.
pub fn pure_to_density(psi: &PureState) -> DensityOperator {
    let v = nalgebra::DVector::from_column_slice(&psi.amplitudes);
    DensityOperator {
        num_qubits: psi.num_qubits,
        entries: &v * v.adjoint(),
    }
}

/// Kronecker product `a ⊗ b`; `a` occupies the leading qubits.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    check_cap(a.num_qubits + b.num_qubits)?;
    Ok(DensityOperator {
        num_qubits: a.num_qubits + b.num_qubits,
        entries: a.entries.kronecker(&b.entries),
    })
}

/// Largest entrywise deviation of `U U†` from the identity.
pub fn unitarity_error(u: &Matrix) -> f64 {
    let prod = u * u.adjoint();
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { c(1.0) } else { Complex64::default() };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}

/// `U rho U†` for a unitary acting on the whole register.
pub fn apply_unitary(rho: &DensityOperator, u: &Matrix) -> Result<DensityOperator> {
    if u.nrows() != u.ncols() || u.nrows() != rho.dim() {
        return Err(QvoteError::Shape(format!(
            "unitary is {}x{}, state dimension is {}",
            u.nrows(),
            u.ncols(),
            rho.dim()
        )));
    }
    let err = unitarity_error(u);
    if err > STRUCTURAL_TOL {
        return Err(QvoteError::Validation(format!(
            "matrix is not unitary (deviation {err:e})"
        )));
    }
    DensityOperator::from_channel_output(u * &rho.entries * u.adjoint())
}

/// Applies `gate` to the listed qubits (in the listed order) and the
/// identity elsewhere: `G rho G†`.
pub fn apply_local(rho: &DensityOperator, gate: &Matrix, qubits: &[usize]) -> Result<DensityOperator> {
    let err = unitarity_error(gate);
    if gate.nrows() != gate.ncols() || err > STRUCTURAL_TOL {
        return Err(QvoteError::Validation(format!(
            "local gate is not unitary (deviation {err:e})"
        )));
    }
    let out = conjugate_local(&rho.entries, rho.num_qubits, gate, qubits)?;
    DensityOperator::from_channel_output(out)
}

/// Reduced state after tracing out `traced` (0-based). Remaining qubits
/// keep their relative order.
pub fn partial_trace(rho: &DensityOperator, traced: &[usize]) -> Result<DensityOperator> {
    let reduced = partial_trace_matrix(&rho.entries, rho.num_qubits, traced)?;
    DensityOperator::from_channel_output(reduced)
}

fn check_qubit_list(num_qubits: usize, qubits: &[usize]) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits {
            return Err(QvoteError::Shape(format!(
                "qubit {} out of range for a {num_qubits}-qubit register",
                q + 1
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(QvoteError::Shape(format!("qubit {} listed twice", q + 1)));
        }
    }
    Ok(())
}

fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// For each local index over `qubits` (first listed = most significant),
/// the global index offset it contributes.
fn local_offsets(num_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let t = qubits.len();
    (0..1usize << t)
        .map(|local| {
            qubits
                .iter()
                .enumerate()
                .filter(|(k, _)| local & (1 << (t - 1 - k)) != 0)
                .map(|(_, &q)| bit_mask(num_qubits, q))
                .sum()
        })
        .collect()
}

/// Partial trace on an arbitrary (not necessarily Hermitian) square matrix.
pub fn partial_trace_matrix(m: &Matrix, num_qubits: usize, traced: &[usize]) -> Result<Matrix> {
    if m.nrows() != 1 << num_qubits || m.ncols() != m.nrows() {
        return Err(QvoteError::Shape("matrix does not match qubit count".into()));
    }
    check_qubit_list(num_qubits, traced)?;
    if traced.len() >= num_qubits {
        return Err(QvoteError::Shape("cannot trace out every qubit".into()));
    }
    let kept: Vec<usize> = (0..num_qubits).filter(|q| !traced.contains(q)).collect();
    let keep_off = local_offsets(num_qubits, &kept);
    let trace_off = local_offsets(num_qubits, traced);
    let dim = keep_off.len();
    Ok(Matrix::from_fn(dim, dim, |i, j| {
        trace_off
            .iter()
            .map(|&s| m[(keep_off[i] + s, keep_off[j] + s)])
            .sum()
    }))
}

/// `G_full m`, where `G_full` is `gate` on `qubits` and identity elsewhere.
fn left_apply_local(m: &Matrix, num_qubits: usize, gate: &Matrix, qubits: &[usize]) -> Matrix {
    let dim = m.nrows();
    let offsets = local_offsets(num_qubits, qubits);
    let target_mask: usize = qubits.iter().map(|&q| bit_mask(num_qubits, q)).sum();
    let gd = offsets.len();
    let mut out = Matrix::zeros(dim, dim);
    let mut column = vec![Complex64::default(); gd];
    for base in (0..dim).filter(|b| b & target_mask == 0) {
        for col in 0..dim {
            for (k, off) in offsets.iter().enumerate() {
                column[k] = m[(base + off, col)];
            }
            for r in 0..gd {
                let mut acc = Complex64::default();
                for (k, v) in column.iter().enumerate() {
                    acc += gate[(r, k)] * v;
                }
                out[(base + offsets[r], col)] = acc;
            }
        }
    }
    out
}

/// `G_full m G_full†` on an arbitrary square matrix.
pub fn conjugate_local(m: &Matrix, num_qubits: usize, gate: &Matrix, qubits: &[usize]) -> Result<Matrix> {
    if m.nrows() != 1 << num_qubits || m.ncols() != m.nrows() {
        return Err(QvoteError::Shape("matrix does not match qubit count".into()));
    }
    check_qubit_list(num_qubits, qubits)?;
    if qubits.is_empty() || gate.nrows() != 1 << qubits.len() || gate.ncols() != gate.nrows() {
        return Err(QvoteError::Shape(format!(
            "gate of size {}x{} does not act on {} qubits",
            gate.nrows(),
            gate.ncols(),
            qubits.len()
        )));
    }
    let left = left_apply_local(m, num_qubits, gate, qubits);
    // (G (G L)†)† = L G†
    Ok(left_apply_local(&left.adjoint(), num_qubits, gate, qubits).adjoint())
}

/// A Hermitian idempotent measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    num_qubits: usize,
    entries: Matrix,
}

impl Projector {
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(QvoteError::Shape("projector must be square".into()));
        }
        let num_qubits = qubits_for_dim(entries.nrows())
            .ok_or_else(|| QvoteError::Shape("projector dimension is not a power of two".into()))?;
        if hermiticity_error(&entries) > STRUCTURAL_TOL {
            return Err(QvoteError::Validation("projector is not Hermitian".into()));
        }
        let idem = (&entries * &entries - &entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if idem > STRUCTURAL_TOL {
            return Err(QvoteError::Validation("projector is not idempotent".into()));
        }
        Ok(Self { num_qubits, entries })
    }

    /// `P1 = |1><1|`, the "agree" outcome.
    pub fn one() -> Self {
        let mut entries = Matrix::zeros(2, 2);
        entries[(1, 1)] = c(1.0);
        Self { num_qubits: 1, entries }
    }

    /// `P0 = |0><0|`.
    pub fn zero() -> Self {
        let mut entries = Matrix::zeros(2, 2);
        entries[(0, 0)] = c(1.0);
        Self { num_qubits: 1, entries }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }
}

/// `Tr(P m)` without any checks on `m`.
pub fn trace_product(p: &Matrix, m: &Matrix) -> Complex64 {
    let n = p.nrows();
    let mut acc = Complex64::default();
    for i in 0..n {
        for j in 0..n {
            acc += p[(i, j)] * m[(j, i)];
        }
    }
    acc
}

/// `Tr(P rho)`, clamped to `[0, 1]`.
pub fn projector_probability(rho: &DensityOperator, p: &Projector) -> Result<f64> {
    if rho.dim() != p.entries.nrows() {
        return Err(QvoteError::Shape(format!(
            "projector acts on {} qubits, state has {}",
            p.num_qubits, rho.num_qubits
        )));
    }
    let z = trace_product(&p.entries, &rho.entries);
    if !z.re.is_finite() || z.im.abs() > CORRUPTION_TOL {
        return Err(QvoteError::NumericalCorruption(format!(
            "measurement probability {z} has imaginary residue"
        )));
    }
    Ok(z.re.clamp(0.0, 1.0))
}

/// Winning probability `Tr(P1 rho)` of a single-qubit state.
pub fn winning_probability(rho: &DensityOperator) -> Result<f64> {
    projector_probability(rho, &Projector::one())
}

/// One projective measurement: returns 1 ("yes") with probability
/// `Tr(P rho)`.
pub fn sample_outcome<R: Rng + ?Sized>(rho: &DensityOperator, p: &Projector, rng: &mut R) -> Result<u8> {
    let prob = projector_probability(rho, p)?;
    Ok(u8::from(rng.random::<f64>() < prob))
}

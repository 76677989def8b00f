//! Dense operator algebra on finite tensor-product Hilbert spaces.
//!
//! Factor order is fixed per run. The convention used throughout the crate is
//! `[2 (atom), n_a (mode a or a_s), n_c (mode c)]`, with the atomic basis
//! ordered `|g> = 0`, `|e> = 1`. Tensor indices are row-major: the first
//! factor is the most significant digit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Slot of the atom in the standard three-factor space.
pub const ATOM: usize = 0;
/// Slot of the primary (squeezed) cavity mode.
pub const MODE_A: usize = 1;
/// Slot of the auxiliary cavity mode.
pub const MODE_C: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("slot {slot} out of range for a space with {factors} factors")]
    SlotOutOfRange { slot: usize, factors: usize },
    #[error("operator spaces differ: {left} vs {right}")]
    SpaceMismatch {
        left: HilbertSpace,
        right: HilbertSpace,
    },
    #[error("label {label} out of range for factor {factor} of dimension {dim}")]
    LabelOutOfRange {
        factor: usize,
        label: usize,
        dim: usize,
    },
    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
}

/// Ordered list of tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self, OperatorError> {
        if factor_dims.is_empty() {
            return Err(OperatorError::InvalidDimension {
                dim: 0,
                reason: "a space needs at least one factor",
            });
        }
        if let Some(&d) = factor_dims.iter().find(|&&d| d == 0) {
            return Err(OperatorError::InvalidDimension {
                dim: d,
                reason: "factor dimensions must be positive",
            });
        }
        Ok(Self { factor_dims })
    }

    /// `[2, n_a, n_c]`: atom, primary mode, auxiliary mode.
    pub fn atom_two_modes(n_a: usize, n_c: usize) -> Result<Self, OperatorError> {
        Self::new(vec![2, n_a, n_c])
    }

    /// `[2, n_c]`: the reduced space left after eliminating the primary mode.
    pub fn atom_mode(n_c: usize) -> Result<Self, OperatorError> {
        Self::new(vec![2, n_c])
    }

    pub fn single(dim: usize) -> Result<Self, OperatorError> {
        Self::new(vec![dim])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Flat index of a product basis state.
    pub fn index_of(&self, labels: &[usize]) -> Result<usize, OperatorError> {
        if labels.len() != self.factor_dims.len() {
            return Err(OperatorError::LabelCount {
                expected: self.factor_dims.len(),
                found: labels.len(),
            });
        }
        let mut idx = 0;
        for (factor, (&label, &dim)) in labels.iter().zip(&self.factor_dims).enumerate() {
            if label >= dim {
                return Err(OperatorError::LabelOutOfRange { factor, label, dim });
            }
            idx = idx * dim + label;
        }
        Ok(idx)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn labels_of(&self, mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; self.factor_dims.len()];
        for (slot, &dim) in self.factor_dims.iter().enumerate().rev() {
            labels[slot] = index % dim;
            index /= dim;
        }
        labels
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.factor_dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", dims.join(" x "))
    }
}

/// Dense complex matrix tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self, OperatorError> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(OperatorError::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    /// Diagonal operator from real entries.
    pub fn diagonal(space: &HilbertSpace, diag: &[f64]) -> Result<Self, OperatorError> {
        if diag.len() != space.dim() {
            return Err(OperatorError::DimensionMismatch {
                expected: space.dim(),
                found: diag.len(),
            });
        }
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok(Self {
            space: space.clone(),
            matrix: CMatrix::from_diagonal(&v),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_space(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_space(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_space(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
        })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(&self.space);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A - A^dagger|`, elementwise.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Elementwise maximum distance to another operator on the same space.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, OperatorError> {
        self.check_space(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues_of(&self.matrix)
    }

    fn check_space(&self, rhs: &Self) -> Result<(), OperatorError> {
        if self.space != rhs.space {
            return Err(OperatorError::SpaceMismatch {
                left: self.space.clone(),
                right: rhs.space.clone(),
            });
        }
        Ok(())
    }
}

// The operator overloads panic on mismatched spaces, like nalgebra does on
// mismatched shapes. Use the `try_*` methods when the spaces are not known
// to agree.
impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.try_mul(rhs)
            .expect("operator product on different spaces")
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).expect("operator sum on different spaces")
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_add(&-rhs)
            .expect("operator difference on different spaces")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Mul<&Operator> for Complex64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

/// Ascending eigenvalues of the Hermitian part of `m`.
///
/// nalgebra's symmetric eigensolvers return NaN for some density matrices
/// met during integration, so this goes through faer.
pub(crate) fn hermitian_eigenvalues_of(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let h = faer::Mat::<faer::c64>::from_fn(d, d, |i, j| {
        let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
        faer::c64::new(z.re, z.im)
    });
    match h.self_adjoint_eigenvalues(faer::Side::Lower) {
        Ok(mut vals) => {
            vals.sort_by(|a, b| a.total_cmp(b));
            vals
        }
        Err(_) => vec![f64::NAN; d],
    }
}

/// Truncated bosonic annihilation operator, `<n-1|a|n> = sqrt(n)`.
pub fn fock_destroy(dim: usize) -> Result<Operator, OperatorError> {
    if dim < 2 {
        return Err(OperatorError::InvalidDimension {
            dim,
            reason: "a truncated mode needs at least two levels",
        });
    }
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(HilbertSpace::single(dim)?, m)
}

/// Two-level atom operators in the basis `|g> = 0`, `|e> = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomOp {
    SigmaMinus,
    SigmaPlus,
    SigmaZ,
    ProjectorE,
    ProjectorG,
}

pub fn atom_op(kind: AtomOp) -> Operator {
    let (g, e) = (0, 1);
    let mut m = CMatrix::zeros(2, 2);
    match kind {
        AtomOp::SigmaMinus => m[(g, e)] = ONE,
        AtomOp::SigmaPlus => m[(e, g)] = ONE,
        AtomOp::SigmaZ => {
            m[(e, e)] = ONE;
            m[(g, g)] = -ONE;
        }
        AtomOp::ProjectorE => m[(e, e)] = ONE,
        AtomOp::ProjectorG => m[(g, g)] = ONE,
    }
    Operator {
        space: HilbertSpace {
            factor_dims: vec![2],
        },
        matrix: m,
    }
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` at `slot`.
pub fn embed(op: &Operator, slot: usize, space: &HilbertSpace) -> Result<Operator, OperatorError> {
    let dims = space.factor_dims();
    if slot >= dims.len() {
        return Err(OperatorError::SlotOutOfRange {
            slot,
            factors: dims.len(),
        });
    }
    if op.space.num_factors() != 1 || op.dim() != dims[slot] {
        return Err(OperatorError::DimensionMismatch {
            expected: dims[slot],
            found: op.dim(),
        });
    }
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    let m = CMatrix::identity(left, left)
        .kronecker(&op.matrix)
        .kronecker(&CMatrix::identity(right, right));
    Operator::new(space.clone(), m)
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: CVector,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero vector or wrong length.
    pub fn new(space: HilbertSpace, amplitudes: CVector) -> Result<Self, OperatorError> {
        if amplitudes.len() != space.dim() {
            return Err(OperatorError::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(OperatorError::InvalidDimension {
                dim: amplitudes.len(),
                reason: "cannot normalize a zero vector",
            });
        }
        Ok(Self {
            space,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Product basis state with one label per factor (atom: 0 = g, 1 = e).
pub fn basis_product_state(
    space: &HilbertSpace,
    labels: &[usize],
) -> Result<StateVector, OperatorError> {
    let idx = space.index_of(labels)?;
    let mut v = CVector::zeros(space.dim());
    v[idx] = ONE;
    Ok(StateVector {
        space: space.clone(),
        amplitudes: v,
    })
}

use num_complex::Complex64;
use serde::Serialize;

use crate::operator::{
    hermitian_eigenvalues_of, CMatrix, HilbertSpace, Operator, OperatorError, StateVector,
};

/// Tolerances used when a density matrix is checked.
pub const TRACE_TOL: f64 = 1e-8;
pub const HERM_TOL: f64 = 1e-10;
pub const MIN_EIG_TOL: f64 = 1e-7;

/// A density matrix on a composite space.
///
/// Construction only checks shapes; use [`validate_state`] for the physical
/// constraints. The integrator relies on being able to hold slightly invalid
/// intermediate states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self, OperatorError> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(OperatorError::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            space: state.space().clone(),
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Replace ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        hermitize_in_place(&mut self.matrix);
    }

    /// Partial trace keeping the listed factors, in their original order.
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<DensityMatrix, OperatorError> {
        let dims = self.space.factor_dims();
        for &k in keep {
            if k >= dims.len() {
                return Err(OperatorError::SlotOutOfRange {
                    slot: k,
                    factors: dims.len(),
                });
            }
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let kept = HilbertSpace::new(kept_dims)?;
        let dk = kept.dim();
        let mut out = CMatrix::zeros(dk, dk);
        let d = self.dim();
        let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
        for i in 0..d {
            let li = self.space.labels_of(i);
            let ri = kept.index_of(&keep.iter().map(|&k| li[k]).collect::<Vec<_>>())?;
            for j in 0..d {
                let lj = self.space.labels_of(j);
                if traced.iter().any(|&s| li[s] != lj[s]) {
                    continue;
                }
                let rj = kept.index_of(&keep.iter().map(|&k| lj[k]).collect::<Vec<_>>())?;
                out[(ri, rj)] += self.matrix[(i, j)];
            }
        }
        DensityMatrix::new(kept, out)
    }
}

pub(crate) fn hermitize_in_place(m: &mut CMatrix) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `tr(ρ·op)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<Complex64, OperatorError> {
    if rho.space() != op.space() {
        return Err(OperatorError::SpaceMismatch {
            left: rho.space().clone(),
            right: op.space().clone(),
        });
    }
    Ok(trace_of_product(rho.matrix(), op.matrix()))
}

/// `tr(A·B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub trace_err: f64,
    pub herm_err: f64,
    pub min_eig: f64,
    pub passed: bool,
}

impl StateDiagnostics {
    /// Componentwise worst case of two reports.
    pub fn worst(self, other: Self) -> Self {
        Self {
            trace_err: nan_or(self.trace_err, other.trace_err, f64::max),
            herm_err: nan_or(self.herm_err, other.herm_err, f64::max),
            min_eig: nan_or(self.min_eig, other.min_eig, f64::min),
            passed: self.passed && other.passed,
        }
    }

    pub fn ideal() -> Self {
        Self {
            trace_err: 0.0,
            herm_err: 0.0,
            min_eig: f64::INFINITY,
            passed: true,
        }
    }
}

// f64::max and f64::min drop NaN; a failed check must survive the fold
fn nan_or(a: f64, b: f64, f: fn(f64, f64) -> f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        f(a, b)
    }
}

/// Report trace, Hermiticity and positivity deviations.
///
/// `tol` scales the default thresholds: the state passes when
/// `trace_err <= tol.trace`, `herm_err <= tol.herm` and `min_eig >= -tol.min_eig`.
pub fn validate_state(rho: &DensityMatrix, tol: &StateTolerance) -> StateDiagnostics {
    let m = rho.matrix();
    let d = m.nrows();
    let trace_err = (m.trace() - Complex64::new(1.0, 0.0)).norm();
    let mut herm_err: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            herm_err = herm_err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let min_eig = hermitian_eigenvalues_of(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    let passed = trace_err <= tol.trace && herm_err <= tol.herm && min_eig >= -tol.min_eig;
    StateDiagnostics {
        trace_err,
        herm_err,
        min_eig,
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub trace: f64,
    pub herm: f64,
    pub min_eig: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self {
            trace: TRACE_TOL,
            herm: HERM_TOL,
            min_eig: MIN_EIG_TOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{atom_op, basis_product_state, embed, fock_destroy, AtomOp};

    fn space() -> HilbertSpace {
        HilbertSpace::atom_two_modes(3, 3).unwrap()
    }

    #[test]
    fn vacuum_photon_number_is_zero() {
        let s = space();
        let rho = DensityMatrix::from_pure(&basis_product_state(&s, &[0, 0, 0]).unwrap());
        let a = embed(&fock_destroy(3).unwrap(), 1, &s).unwrap();
        let n = &a.dagger() * &a;
        assert_eq!(expectation(&rho, &n).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn excited_projector_expectation() {
        let s = space();
        let rho = DensityMatrix::from_pure(&basis_product_state(&s, &[1, 0, 0]).unwrap());
        let pe = embed(&atom_op(AtomOp::ProjectorE), 0, &s).unwrap();
        assert!((expectation(&rho, &pe).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn mixed_state_identity() {
        let s = HilbertSpace::single(7).unwrap();
        let rho = DensityMatrix::maximally_mixed(&s);
        let v = expectation(&rho, &Operator::identity(&s)).unwrap();
        assert!((v - 1.0).norm() < 1e-14);
    }

    #[test]
    fn expectation_space_mismatch() {
        let rho = DensityMatrix::maximally_mixed(&space());
        let op = Operator::identity(&HilbertSpace::atom_two_modes(3, 4).unwrap());
        assert!(matches!(
            expectation(&rho, &op),
            Err(OperatorError::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn diagnostics_pure_state() {
        let s = space();
        let rho = DensityMatrix::from_pure(&basis_product_state(&s, &[1, 2, 0]).unwrap());
        let d = validate_state(&rho, &StateTolerance::default());
        assert!(d.passed);
        assert!(d.trace_err < 1e-15 && d.herm_err == 0.0 && d.min_eig.abs() < 1e-12);
    }

    #[test]
    fn diagnostics_flag_scaled_trace() {
        let s = space();
        let rho = DensityMatrix::from_pure(&basis_product_state(&s, &[0, 0, 0]).unwrap());
        let scaled = DensityMatrix::new(s, rho.matrix() * Complex64::new(1.01, 0.0)).unwrap();
        let d = validate_state(&scaled, &StateTolerance::default());
        assert!((d.trace_err - 0.01).abs() < 1e-12);
        assert!(!d.passed);
    }

    #[test]
    fn diagnostics_flag_non_hermitian() {
        let s = space();
        let mut rho = DensityMatrix::maximally_mixed(&s);
        let eps = 1e-6;
        rho.matrix_mut()[(0, 1)] += Complex64::new(eps, 0.0);
        let d = validate_state(&rho, &StateTolerance::default());
        assert!((d.herm_err - eps).abs() < 1e-15);
        assert!(!d.passed);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = space();
        let rho = DensityMatrix::from_pure(&basis_product_state(&s, &[1, 0, 2]).unwrap());
        let red = rho.partial_trace_keep(&[0, 2]).unwrap();
        assert_eq!(red.space().factor_dims(), &[2, 3]);
        assert!((red.matrix()[(5, 5)] - 1.0).norm() < 1e-15);
        assert!((red.trace() - 1.0).norm() < 1e-15);
    }
}

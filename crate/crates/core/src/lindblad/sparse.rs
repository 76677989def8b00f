//! Compressed-row matrices and the dense-times-sparse products the generator needs.
//!
//! Dense matrices are nalgebra's column-major storage viewed as slices, so
//! element `(i, j)` of an `n × n` matrix sits at `j * n + i`.

use num_complex::Complex64;

use crate::operator::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<Complex64>,
}

impl Csr {
    /// Keep every entry that is not exactly zero.
    pub fn from_dense(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    col.push(j);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        Self {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, slot) in d.iter_mut().enumerate() {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[p] == i {
                    *slot += self.val[p];
                }
            }
        }
        d
    }

    /// `out += coeff · (self · x)`.
    pub fn left_mul_acc(&self, coeff: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for (xc, oc) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            for (i, o) in oc.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.val[p] * xc[self.col[p]];
                }
                *o += coeff * s;
            }
        }
    }

    /// `out = self · x`.
    pub fn left_mul(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        self.left_mul_acc(Complex64::new(1.0, 0.0), x, out);
    }

    /// Treat each stored row `j` as column `j` of the right factor:
    /// `out[:, j] += coeff · Σ_k f(self[j, k]) · t[:, k]`, with `f = conj` when `conjugate`.
    ///
    /// With `self = L` and `conjugate` this is `out += coeff · t · L†`; with
    /// `self = Oᵀ` and no conjugation it is `out += coeff · t · O`.
    pub fn right_mul_rows_acc(
        &self,
        coeff: Complex64,
        conjugate: bool,
        t: &[Complex64],
        out: &mut [Complex64],
    ) {
        let n = self.n;
        for (j, oc) in out.chunks_exact_mut(n).enumerate() {
            for p in self.row_ptr[j]..self.row_ptr[j + 1] {
                let k = self.col[p];
                let v = if conjugate {
                    self.val[p].conj()
                } else {
                    self.val[p]
                };
                let w = coeff * v;
                let tc = &t[k * n..(k + 1) * n];
                for (o, &x) in oc.iter_mut().zip(tc) {
                    *o += w * x;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mx(m: CMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn arb(n: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0u8..3), n * n).prop_map(move |v| {
            CMatrix::from_iterator(
                n,
                n,
                v.into_iter().map(|(re, im, keep)| {
                    if keep == 0 {
                        Complex64::new(re, im)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn products_match_dense(l in arb(5), x in arb(5)) {
            let csr = Csr::from_dense(&l);
            let lt = Csr::from_dense(&l.transpose());
            let coeff = Complex64::new(0.3, -1.2);

            let mut out = CMatrix::zeros(5, 5);
            csr.left_mul_acc(coeff, x.as_slice(), out.as_mut_slice());
            prop_assert!(mx(out - &l * &x * coeff) < 1e-12);

            let mut out = CMatrix::zeros(5, 5);
            csr.right_mul_rows_acc(coeff, true, x.as_slice(), out.as_mut_slice());
            prop_assert!(mx(out - &x * l.adjoint() * coeff) < 1e-12);

            let mut out = CMatrix::zeros(5, 5);
            lt.right_mul_rows_acc(coeff, false, x.as_slice(), out.as_mut_slice());
            prop_assert!(mx(out - &x * &l * coeff) < 1e-12);

            let d = csr.diagonal();
            for (i, v) in d.iter().enumerate() {
                prop_assert_eq!(*v, l[(i, i)]);
            }
        }
    }
}

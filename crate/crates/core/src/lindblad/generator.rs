use num_complex::Complex64;

use super::sparse::Csr;
use super::LindbladError;
use crate::density::DensityMatrix;
use crate::operator::{CMatrix, HilbertSpace, Operator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `H(t) = H0 + Σ_k (e^{iω_k t} V_k + e^{−iω_k t} V_k†)`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    h0: Operator,
    terms: Vec<(Operator, f64)>,
}

impl Hamiltonian {
    pub fn constant(h0: Operator) -> Self {
        Self {
            h0,
            terms: Vec::new(),
        }
    }

    /// Add `e^{iωt}V + h.c.`.
    pub fn with_term(mut self, v: Operator, omega: f64) -> Result<Self, LindbladError> {
        if v.space() != self.h0.space() {
            return Err(LindbladError::SpaceMismatch(v.space().clone()));
        }
        self.terms.push((v, omega));
        Ok(self)
    }

    pub fn space(&self) -> &HilbertSpace {
        self.h0.space()
    }

    pub fn static_part(&self) -> &Operator {
        &self.h0
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms.iter().any(|(_, w)| *w != 0.0)
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut h = self.h0.clone();
        for (v, w) in &self.terms {
            let x = Complex64::from_polar(1.0, w * t) * v;
            h = &h + &(&x + &x.dagger());
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorKind {
    /// `κ(oρo† − {o†o, ρ}/2)`.
    Standard,
    /// `−μ(oρo − {oo, ρ}/2)`.
    TwoPhoton,
}

#[derive(Debug, Clone)]
pub struct DissipatorSpec {
    pub kind: DissipatorKind,
    pub operator: Operator,
    pub coefficient: Complex64,
}

impl DissipatorSpec {
    pub fn standard(operator: Operator, rate: f64) -> Result<Self, LindbladError> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(LindbladError::InvalidDissipator(format!(
                "standard rate must be real and nonnegative, got {rate}"
            )));
        }
        Ok(Self {
            kind: DissipatorKind::Standard,
            operator,
            coefficient: Complex64::new(rate, 0.0),
        })
    }

    /// Both members of a two-photon pair: `(o, μ)` and `(o†, μ*)`.
    pub fn two_photon_pair(operator: Operator, mu: Complex64) -> [Self; 2] {
        let dag = operator.dagger();
        [
            Self {
                kind: DissipatorKind::TwoPhoton,
                operator,
                coefficient: mu,
            },
            Self {
                kind: DissipatorKind::TwoPhoton,
                operator: dag,
                coefficient: mu.conj(),
            },
        ]
    }

    pub fn two_photon(operator: Operator, mu: Complex64) -> Self {
        Self {
            kind: DissipatorKind::TwoPhoton,
            operator,
            coefficient: mu,
        }
    }
}

/// Compiled Lindblad generator, evaluated as `dρ/dt = X + X†` with
/// `X = Aρ + ½Σκ LρL† − Σ' μ oρo` and
/// `A = −iH − ½Σκ L†L + ½Σ' (μ oo + μ* o†o†)`, where `Σ'` runs over
/// conjugate pairs once.
#[derive(Debug, Clone)]
pub struct Generator {
    space: HilbertSpace,
    dim: usize,
    a_const: Csr,
    oscillating: Vec<(Csr, Csr, f64)>,
    standard: Vec<(Csr, f64)>,
    pairs: Vec<(Csr, Csr, Complex64)>,
}

fn same_operator(a: &Operator, b: &Operator) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    a.max_abs_diff(b)
        .map(|d| d <= 1e-13 * scale)
        .unwrap_or(false)
}

impl Generator {
    pub fn new(h: &Hamiltonian, dissipators: &[DissipatorSpec]) -> Result<Self, LindbladError> {
        let space = h.space().clone();
        for d in dissipators {
            if d.operator.space() != &space {
                return Err(LindbladError::SpaceMismatch(d.operator.space().clone()));
            }
        }
        let dim = space.dim();
        let mut a = h.static_part().matrix() * Complex64::new(0.0, -1.0);
        let mut standard = Vec::new();
        for d in dissipators
            .iter()
            .filter(|d| d.kind == DissipatorKind::Standard)
        {
            let k = d.coefficient;
            if k.im != 0.0 || k.re < 0.0 {
                return Err(LindbladError::InvalidDissipator(format!(
                    "standard coefficient must be real and nonnegative, got {k}"
                )));
            }
            if k.re == 0.0 {
                continue;
            }
            let l = d.operator.matrix();
            a -= l.adjoint() * l * Complex64::new(0.5 * k.re, 0.0);
            standard.push((Csr::from_dense(l), k.re));
        }

        let two: Vec<&DissipatorSpec> = dissipators
            .iter()
            .filter(|d| d.kind == DissipatorKind::TwoPhoton)
            .collect();
        let mut used = vec![false; two.len()];
        let mut pairs = Vec::new();
        for i in 0..two.len() {
            if used[i] {
                continue;
            }
            let (o, mu) = (&two[i].operator, two[i].coefficient);
            let od = o.dagger();
            // a self-conjugate dissipator is its own partner and enters at half weight
            let self_conjugate =
                same_operator(o, &od) && (mu - mu.conj()).norm() <= 1e-13 * mu.norm().max(1.0);
            let partner = if self_conjugate {
                Some(i)
            } else {
                (0..two.len()).find(|&k| {
                    k != i
                        && !used[k]
                        && same_operator(&two[k].operator, &od)
                        && (two[k].coefficient - mu.conj()).norm() <= 1e-13 * mu.norm().max(1.0)
                })
            };
            let Some(k) = partner else {
                return Err(LindbladError::UnpairedTwoPhoton { index: i });
            };
            used[i] = true;
            used[k] = true;
            let weight = if self_conjugate { mu * 0.5 } else { mu };
            if weight.norm() == 0.0 {
                continue;
            }
            let om = o.matrix();
            let oo = om * om;
            a += (&oo * weight + oo.adjoint() * weight.conj()) * Complex64::new(0.5, 0.0);
            pairs.push((
                Csr::from_dense(om),
                Csr::from_dense(&om.transpose()),
                weight,
            ));
        }

        let oscillating = h
            .terms
            .iter()
            .map(|(v, w)| {
                (
                    Csr::from_dense(v.matrix()),
                    Csr::from_dense(&v.matrix().adjoint()),
                    *w,
                )
            })
            .collect();

        Ok(Self {
            space,
            dim,
            a_const: Csr::from_dense(&a),
            oscillating,
            standard,
            pairs,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_time_dependent(&self) -> bool {
        self.oscillating.iter().any(|(_, _, w)| *w != 0.0)
    }

    /// Diagonal of the constant part of `A`.
    pub fn a_diagonal(&self) -> Vec<Complex64> {
        self.a_const.diagonal()
    }

    /// Nonzeros across all compiled operators (a cost indicator).
    pub fn nnz(&self) -> usize {
        self.a_const.nnz()
            + self
                .oscillating
                .iter()
                .map(|(v, _, _)| 2 * v.nnz())
                .sum::<usize>()
            + self
                .standard
                .iter()
                .map(|(l, _)| 2 * l.nnz())
                .sum::<usize>()
            + self
                .pairs
                .iter()
                .map(|(o, _, _)| 2 * o.nnz())
                .sum::<usize>()
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            t: CMatrix::zeros(self.dim, self.dim),
        }
    }

    /// `out = dρ/dt` at time `t`.
    pub fn rhs_into(&self, t: f64, rho: &CMatrix, out: &mut CMatrix, scratch: &mut Scratch) {
        let n = self.dim;
        let x = rho.as_slice();
        let o = out.as_mut_slice();
        o.fill(ZERO);
        self.a_const.left_mul_acc(ONE, x, o);
        let minus_i = Complex64::new(0.0, -1.0);
        for (v, vd, w) in &self.oscillating {
            let ph = Complex64::from_polar(1.0, w * t);
            v.left_mul_acc(minus_i * ph, x, o);
            vd.left_mul_acc(minus_i * ph.conj(), x, o);
        }
        let tbuf = scratch.t.as_mut_slice();
        for (l, k) in &self.standard {
            l.left_mul(x, tbuf);
            l.right_mul_rows_acc(Complex64::new(0.5 * k, 0.0), true, tbuf, o);
        }
        for (op, op_t, mu) in &self.pairs {
            op.left_mul(x, tbuf);
            op_t.right_mul_rows_acc(-*mu, false, tbuf, o);
        }
        // out ← X + X†
        for j in 0..n {
            o[j * n + j] = Complex64::new(2.0 * o[j * n + j].re, 0.0);
            for i in (j + 1)..n {
                let s = o[j * n + i] + o[i * n + j].conj();
                o[j * n + i] = s;
                o[i * n + j] = s.conj();
            }
        }
    }

    pub fn rhs(&self, t: f64, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut s = self.scratch();
        self.rhs_into(t, rho, &mut out, &mut s);
        out
    }
}

/// Work buffer reused across right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct Scratch {
    t: CMatrix,
}

/// `dρ/dt` for a Hamiltonian and dissipator list.
pub fn master_rhs(
    h: &Hamiltonian,
    dissipators: &[DissipatorSpec],
    rho: &DensityMatrix,
    t: f64,
) -> Result<CMatrix, LindbladError> {
    if rho.space() != h.space() {
        return Err(LindbladError::SpaceMismatch(rho.space().clone()));
    }
    Ok(Generator::new(h, dissipators)?.rhs(t, rho.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::trace_of_product;
    use crate::operator::{fock_destroy, HilbertSpace};
    use proptest::prelude::*;

    // Textbook superoperator form, written out with dense products.
    fn reference_rhs(h: &CMatrix, specs: &[DissipatorSpec], rho: &CMatrix) -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        let mut out = (rho * h - h * rho) * i;
        for d in specs {
            let o = d.operator.matrix();
            match d.kind {
                DissipatorKind::Standard => {
                    let od = o.adjoint();
                    let odo = &od * o;
                    out += (o * rho * &od - (&odo * rho + rho * &odo) * Complex64::new(0.5, 0.0))
                        * d.coefficient;
                }
                DissipatorKind::TwoPhoton => {
                    let oo = o * o;
                    out -= (o * rho * o - (&oo * rho + rho * &oo) * Complex64::new(0.5, 0.0))
                        * d.coefficient;
                }
            }
        }
        out
    }

    fn mx(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn random_state(d: usize, seed: &[(f64, f64)]) -> CMatrix {
        let m = CMatrix::from_iterator(d, d, seed.iter().map(|&(a, b)| Complex64::new(a, b)));
        let rho = &m * m.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn zero_generator() {
        let s = HilbertSpace::single(4).unwrap();
        let h = Hamiltonian::constant(Operator::zeros(&s));
        let rho = DensityMatrix::maximally_mixed(&s);
        assert_eq!(mx(&master_rhs(&h, &[], &rho, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn single_photon_decay_rate() {
        let s = HilbertSpace::single(4).unwrap();
        let a = fock_destroy(4).unwrap();
        let n = &a.dagger() * &a;
        let h = Hamiltonian::constant(Operator::zeros(&s));
        let mut rho = CMatrix::zeros(4, 4);
        rho[(1, 1)] = ONE;
        let rho = DensityMatrix::new(s, rho).unwrap();
        let d = master_rhs(&h, &[DissipatorSpec::standard(a, 0.7).unwrap()], &rho, 0.0).unwrap();
        let dn = trace_of_product(&d, n.matrix());
        assert!((dn.re + 0.7).abs() < 1e-14 && dn.im.abs() < 1e-14);
    }

    #[test]
    fn unpaired_two_photon_rejected() {
        let s = HilbertSpace::single(3).unwrap();
        let a = fock_destroy(3).unwrap();
        let h = Hamiltonian::constant(Operator::zeros(&s));
        let err = Generator::new(
            &h,
            &[DissipatorSpec::two_photon(a, Complex64::new(0.3, 0.1))],
        );
        assert!(matches!(err, Err(LindbladError::UnpairedTwoPhoton { .. })));
    }

    #[test]
    fn negative_rate_rejected() {
        let a = fock_destroy(3).unwrap();
        assert!(DissipatorSpec::standard(a, -0.1).is_err());
    }

    #[test]
    fn time_dependent_term_matches_snapshot() {
        let a = fock_destroy(3).unwrap();
        let h = Hamiltonian::constant(0.5 * &(&a.dagger() * &a))
            .with_term(&a * &a, 2.3)
            .unwrap();
        let seed: Vec<(f64, f64)> = (0..9)
            .map(|k| ((k as f64).sin(), (k as f64 * 0.7).cos()))
            .collect();
        let rho = random_state(3, &seed);
        let g = Generator::new(&h, &[]).unwrap();
        for t in [0.0, 0.4, 3.1] {
            let want = reference_rhs(h.at(t).matrix(), &[], &rho);
            assert!(mx(&(g.rhs(t, &rho) - want)) < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn matches_reference_and_preserves_trace(
            seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            hseed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            k1 in 0.0f64..2.0,
            k2 in 0.0f64..2.0,
            mu_re in -1.0f64..1.0,
            mu_im in -1.0f64..1.0,
        ) {
            let s = HilbertSpace::new(vec![2, 3]).unwrap();
            let raw = CMatrix::from_iterator(6, 6, hseed.iter().map(|&(a, b)| Complex64::new(a, b)));
            let h = Operator::new(s.clone(), (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0)).unwrap();
            let a = crate::operator::embed(&fock_destroy(3).unwrap(), 1, &s).unwrap();
            let sm = crate::operator::embed(&crate::operator::atom_op(crate::operator::AtomOp::SigmaMinus), 0, &s).unwrap();
            let mu = Complex64::new(mu_re, mu_im);
            let mut specs = vec![
                DissipatorSpec::standard(a.clone(), k1).unwrap(),
                DissipatorSpec::standard(sm, k2).unwrap(),
            ];
            specs.extend(DissipatorSpec::two_photon_pair(a, mu));
            let rho = random_state(6, &seed);
            let g = Generator::new(&Hamiltonian::constant(h.clone()), &specs).unwrap();
            let got = g.rhs(0.0, &rho);
            let want = reference_rhs(h.matrix(), &specs, &rho);
            prop_assert!(mx(&(&got - &want)) < 1e-12);
            prop_assert!(got.trace().norm() < 1e-12);
            prop_assert!(mx(&(&got - got.adjoint())) == 0.0);
        }
    }
}

use num_complex::Complex64;

use super::params::{effective_detunings_and_coupling_1, g_eff_prime};
use super::{ModelError, SystemParams};
use crate::operator::{
    atom_op, embed, fock_destroy, AtomOp, HilbertSpace, Operator, ATOM, MODE_A, MODE_C,
};

/// Which interaction terms of the squeezed-frame Hamiltonian to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rwa {
    /// Rotating and counter-rotating terms.
    Full,
    /// Excitation-conserving terms only.
    RotatingOnly,
}

/// Embedded operators on `[2, n_a, n_c]`.
#[derive(Debug, Clone)]
pub struct ModelOperators {
    pub space: HilbertSpace,
    pub sm: Operator,
    pub sp: Operator,
    pub sz: Operator,
    pub pe: Operator,
    pub pg: Operator,
    pub a: Operator,
    pub c: Operator,
}

impl ModelOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self, ModelError> {
        let dims = space.factor_dims();
        if dims.len() != 3 || dims[ATOM] != 2 {
            return Err(ModelError::WrongSpace {
                expected: "[2, n_a, n_c]",
                found: space.clone(),
            });
        }
        let at = |k| embed(&atom_op(k), ATOM, space);
        Ok(Self {
            space: space.clone(),
            sm: at(AtomOp::SigmaMinus)?,
            sp: at(AtomOp::SigmaPlus)?,
            sz: at(AtomOp::SigmaZ)?,
            pe: at(AtomOp::ProjectorE)?,
            pg: at(AtomOp::ProjectorG)?,
            a: embed(&fock_destroy(dims[MODE_A])?, MODE_A, space)?,
            c: embed(&fock_destroy(dims[MODE_C])?, MODE_C, space)?,
        })
    }

    pub fn n_a(&self) -> Operator {
        &self.a.dagger() * &self.a
    }

    pub fn n_c(&self) -> Operator {
        &self.c.dagger() * &self.c
    }
}

/// Embedded operators on the reduced space `[2, n_c]`.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    pub space: HilbertSpace,
    pub sm: Operator,
    pub sp: Operator,
    pub pe: Operator,
    pub pg: Operator,
    pub c: Operator,
}

impl ReducedOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self, ModelError> {
        let dims = space.factor_dims();
        if dims.len() != 2 || dims[0] != 2 {
            return Err(ModelError::WrongSpace {
                expected: "[2, n_c]",
                found: space.clone(),
            });
        }
        let at = |k| embed(&atom_op(k), 0, space);
        Ok(Self {
            space: space.clone(),
            sm: at(AtomOp::SigmaMinus)?,
            sp: at(AtomOp::SigmaPlus)?,
            pe: at(AtomOp::ProjectorE)?,
            pg: at(AtomOp::ProjectorG)?,
            c: embed(&fock_destroy(dims[1])?, 1, space)?,
        })
    }

    pub fn n_c(&self) -> Operator {
        &self.c.dagger() * &self.c
    }
}

/// `X + X†`.
fn plus_hc(x: &Operator) -> Operator {
    x + &x.dagger()
}

/// `Δ_a a†a + Δ_c c†c + (Δ_q/2)σ_z + g(σ₊a + a†σ₋) + J(c†a + a†c) + (Ω_p/2)(e^{iθ_p}a² + h.c.)`.
pub fn hamiltonian_lab(p: &SystemParams, space: &HilbertSpace) -> Result<Operator, ModelError> {
    let o = ModelOperators::new(space)?;
    let mut h = p.delta_a * &o.n_a();
    h = &h + &(p.delta_c * &o.n_c());
    h = &h + &((0.5 * p.delta_q) * &o.sz);
    h = &h + &(p.g * &plus_hc(&(&o.sp * &o.a)));
    h = &h + &(p.j * &plus_hc(&(&o.c.dagger() * &o.a)));
    let pump = Complex64::from_polar(0.5 * p.omega_p(), p.theta_p) * &(&o.a * &o.a);
    Ok(&h + &plus_hc(&pump))
}

/// Hamiltonian in the frame of the Bogoliubov-transformed mode `a_s`.
///
/// Full form: `Δ_s a_s†a_s + Δ_c c†c + (Δ_q/2)σ_z + g cosh(r)(a_sσ₊ + h.c.)
/// + g sinh(r)(a_s†σ₊ + h.c.) + J cosh(r)(a_s c† + h.c.) + J sinh(r)(a_s†c† + h.c.)`.
pub fn hamiltonian_squeezed(
    p: &SystemParams,
    space: &HilbertSpace,
    rwa: Rwa,
) -> Result<Operator, ModelError> {
    if p.theta_p != 0.0 {
        return Err(ModelError::UnsupportedPhase { theta_p: p.theta_p });
    }
    let o = ModelOperators::new(space)?;
    let (ch, sh) = (p.r_p.cosh(), p.r_p.sinh());
    let ad = o.a.dagger();
    let cd = o.c.dagger();
    let mut h = p.delta_s() * &o.n_a();
    h = &h + &(p.delta_c * &o.n_c());
    h = &h + &((0.5 * p.delta_q) * &o.sz);
    h = &h + &((p.g * ch) * &plus_hc(&(&o.a * &o.sp)));
    h = &h + &((p.j * ch) * &plus_hc(&(&o.a * &cd)));
    if rwa == Rwa::Full {
        h = &h + &((p.g * sh) * &plus_hc(&(&ad * &o.sp)));
        h = &h + &((p.j * sh) * &plus_hc(&(&ad * &cd)));
    }
    Ok(h)
}

/// `N_exc = |e⟩⟨e| + a_s†a_s + c†c`.
pub fn excitation_number(space: &HilbertSpace) -> Result<Operator, ModelError> {
    let o = ModelOperators::new(space)?;
    Ok(&(&o.pe + &o.n_a()) + &o.n_c())
}

/// `(−1)^{N_exc}`, diagonal.
pub fn parity_operator(space: &HilbertSpace) -> Result<Operator, ModelError> {
    let diag: Vec<f64> = (0..space.dim())
        .map(|i| {
            let labels = space.labels_of(i);
            let n: usize = labels.iter().sum();
            if n.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Ok(Operator::diagonal(space, &diag)?)
}

/// Static part, coupling operator and phase frequency of the rotating-channel
/// effective Hamiltonian: `H(t) = H0 + e^{iωt}V + e^{−iωt}V†`.
#[derive(Debug, Clone)]
pub struct HeffParts {
    pub h0: Operator,
    pub v: Operator,
    pub omega: f64,
}

fn reduced_parts(
    space: &HilbertSpace,
) -> Result<(Operator, Operator, Operator, Operator), ModelError> {
    match space.num_factors() {
        2 => {
            let o = ReducedOperators::new(space)?;
            let nc = o.n_c();
            Ok((o.pe, o.sp, o.c, nc))
        }
        3 => {
            let o = ModelOperators::new(space)?;
            let nc = o.n_c();
            Ok((o.pe, o.sp, o.c, nc))
        }
        _ => Err(ModelError::WrongSpace {
            expected: "[2, n_c] or [2, n_a, n_c]",
            found: space.clone(),
        }),
    }
}

/// Parts of `Δ_c′c†c + Δ_e|e⟩⟨e| + g_eff[σ₊c e^{i(Δ_q−Δ_c)t} + h.c.]`.
///
/// On a three-factor space the `a_s` factor is a spectator.
pub fn h_eff_1_parts(p: &SystemParams, space: &HilbertSpace) -> Result<HeffParts, ModelError> {
    let eff = effective_detunings_and_coupling_1(p)?;
    let (pe, sp, c, nc) = reduced_parts(space)?;
    let h0 = &(eff.delta_c_prime * &nc) + &(eff.delta_e * &pe);
    Ok(HeffParts {
        h0,
        v: eff.g_eff * &(&sp * &c),
        omega: p.delta_q - p.delta_c,
    })
}

/// Rotating-channel effective Hamiltonian at time `t`.
pub fn h_eff_1(p: &SystemParams, space: &HilbertSpace, t: f64) -> Result<Operator, ModelError> {
    let parts = h_eff_1_parts(p, space)?;
    let v = Complex64::from_polar(1.0, parts.omega * t) * &parts.v;
    Ok(&parts.h0 + &plus_hc(&v))
}

/// Time-independent equivalent of [`h_eff_1`]:
/// `Δ_e|e⟩⟨e| + (Δ_c + Δ_c′ − Δ_q)c†c + g_eff(σ₊c + h.c.)`.
///
/// This is [`h_eff_1`] in the frame rotating at `(Δ_q − Δ_c)c†c`, so
/// populations and photon numbers agree exactly. The detuning vanishes on
/// resonance.
pub fn h_eff_1_static(p: &SystemParams, space: &HilbertSpace) -> Result<Operator, ModelError> {
    let eff = effective_detunings_and_coupling_1(p)?;
    let (pe, sp, c, nc) = reduced_parts(space)?;
    let mut h = eff.delta_e * &pe;
    h = &h + &((p.delta_c + eff.delta_c_prime - p.delta_q) * &nc);
    Ok(&h + &(eff.g_eff * &plus_hc(&(&sp * &c))))
}

/// Counter-rotating-channel effective Hamiltonian `g_eff′(σ₊c† + cσ₋)`.
///
/// Derived for `Δ_q = −Δ_c` and `g = J`; other parameters only log a warning.
pub fn h_eff_2(p: &SystemParams, space: &HilbertSpace) -> Result<Operator, ModelError> {
    let scale = p.frequency_scale();
    if (p.delta_q + p.delta_c).abs() > 1e-9 * scale
        || (p.g - p.j).abs() > 1e-12 * p.g.abs().max(1.0)
    {
        log::warn!(
            "h_eff_2 assumes delta_q = -delta_c and g = J (got delta_q={}, delta_c={}, g={}, J={})",
            p.delta_q,
            p.delta_c,
            p.g,
            p.j
        );
    }
    let gp = g_eff_prime(p)?;
    let (_, sp, c, _) = reduced_parts(space)?;
    Ok(gp * &plus_hc(&(&sp * &c.dagger())))
}

/// Lab-frame photon number `a†a` written in terms of `a_s`.
pub fn lab_photon_observable(
    r_p: f64,
    theta_p: f64,
    space: &HilbertSpace,
) -> Result<Operator, ModelError> {
    let dims = space.factor_dims();
    if dims.len() < 2 {
        return Err(ModelError::WrongSpace {
            expected: "a space with an a_s factor in slot 1",
            found: space.clone(),
        });
    }
    let a = embed(&fock_destroy(dims[MODE_A])?, MODE_A, space)?;
    let ad = a.dagger();
    let (ch, sh) = (r_p.cosh(), r_p.sinh());
    let mut n = (ch * ch) * &(&ad * &a);
    n = &n + &((sh * sh) * &(&a * &ad));
    let pair = Complex64::from_polar(ch * sh, theta_p) * &(&a * &a);
    Ok(&n - &plus_hc(&pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{expectation, DensityMatrix};
    use crate::model::params::lab_detuning;
    use crate::operator::{basis_product_state, CMatrix};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn base(r_p: f64) -> SystemParams {
        SystemParams {
            g: 1.0,
            j: 2.0,
            kappa1: 0.0,
            kappa2: 0.0,
            gamma: 0.0,
            r_p,
            theta_p: 0.0,
            r_e: 0.0,
            theta_e: 0.0,
            delta_a: lab_detuning(7.0, r_p),
            delta_c: 3.0,
            delta_q: -2.0,
        }
    }

    fn space() -> HilbertSpace {
        HilbertSpace::atom_two_modes(4, 3).unwrap()
    }

    #[test]
    fn bare_detunings_are_diagonal() {
        let p = SystemParams {
            g: 0.0,
            j: 0.0,
            ..base(0.0)
        };
        let s = space();
        let h = hamiltonian_lab(&p, &s).unwrap();
        for i in 0..s.dim() {
            let l = s.labels_of(i);
            let expected = p.delta_a * l[1] as f64
                + p.delta_c * l[2] as f64
                + 0.5 * p.delta_q * if l[0] == 1 { 1.0 } else { -1.0 };
            for j in 0..s.dim() {
                let want = if i == j { expected } else { 0.0 };
                assert!((h.get(i, j) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonians_are_exactly_hermitian() {
        let s = space();
        let p = SystemParams {
            theta_p: 0.7,
            ..base(0.9)
        };
        assert_eq!(hamiltonian_lab(&p, &s).unwrap().hermiticity_error(), 0.0);
        for rwa in [Rwa::Full, Rwa::RotatingOnly] {
            let h = hamiltonian_squeezed(&base(0.9), &s, rwa).unwrap();
            assert_eq!(h.hermiticity_error(), 0.0);
        }
    }

    #[test]
    fn unsqueezed_frames_coincide() {
        let s = space();
        let p = base(0.0);
        let lab = hamiltonian_lab(&p, &s).unwrap();
        for rwa in [Rwa::Full, Rwa::RotatingOnly] {
            let sq = hamiltonian_squeezed(&p, &s, rwa).unwrap();
            assert!(lab.max_abs_diff(&sq).unwrap() < 1e-15);
        }
    }

    #[test]
    fn counter_rotating_coefficient() {
        let s = space();
        let p = SystemParams {
            j: 0.0,
            ..base(0.8)
        };
        let h = hamiltonian_squeezed(&p, &s, Rwa::Full).unwrap();
        let from = s.index_of(&[0, 0, 0]).unwrap();
        let to = s.index_of(&[1, 1, 0]).unwrap();
        let expected = 0.5 * (0.8f64.exp() - (-0.8f64).exp());
        assert!((h.get(to, from).re - expected).abs() < 1e-14);
    }

    #[test]
    fn counter_rotating_part_changes_excitation_by_two() {
        let s = space();
        let p = base(1.1);
        let diff = &hamiltonian_squeezed(&p, &s, Rwa::Full).unwrap()
            - &hamiltonian_squeezed(&p, &s, Rwa::RotatingOnly).unwrap();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                if diff.get(i, j).norm() > 0.0 {
                    let ni: i64 = s.labels_of(i).iter().sum::<usize>() as i64;
                    let nj: i64 = s.labels_of(j).iter().sum::<usize>() as i64;
                    assert_eq!((ni - nj).abs(), 2);
                }
            }
        }
        let n = excitation_number(&s).unwrap();
        let rot = hamiltonian_squeezed(&p, &s, Rwa::RotatingOnly).unwrap();
        assert!(rot.commutator(&n).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn squeezed_builder_rejects_phase() {
        let p = SystemParams {
            theta_p: 0.1,
            ..base(1.0)
        };
        assert!(matches!(
            hamiltonian_squeezed(&p, &space(), Rwa::Full),
            Err(ModelError::UnsupportedPhase { .. })
        ));
    }

    #[test]
    fn h_eff_1_properties() {
        let s = HilbertSpace::atom_mode(3).unwrap();
        let mut p = base(0.5);
        p.delta_c = p.delta_q;
        let h0 = h_eff_1(&p, &s, 0.0).unwrap();
        let h1 = h_eff_1(&p, &s, 13.7).unwrap();
        assert_eq!(h0, h1);

        let p = base(0.5);
        let parts = h_eff_1_parts(&p, &s).unwrap();
        let eff = effective_detunings_and_coupling_1(&p).unwrap();
        let at0 = h_eff_1(&p, &s, 0.0).unwrap();
        let cpl = &at0 - &parts.h0;
        let o = ReducedOperators::new(&s).unwrap();
        let want = eff.g_eff * &plus_hc(&(&o.sp * &o.c));
        assert!(cpl.max_abs_diff(&want).unwrap() < 1e-15);

        let norm = |h: &Operator| h.matrix().norm();
        for t in [0.0, 0.3, 5.0, 117.0] {
            let h = h_eff_1(&p, &s, t).unwrap();
            assert!(h.hermiticity_error() < 1e-15);
            assert!((norm(&h) - norm(&at0)).abs() < 1e-12);
        }
    }

    #[test]
    fn h_eff_2_vanishes_without_squeezing() {
        let s = HilbertSpace::atom_mode(3).unwrap();
        let p = SystemParams {
            j: 1.0,
            delta_c: 2.0,
            ..base(0.0)
        };
        assert_eq!(h_eff_2(&p, &s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lab_photon_number() {
        let s = HilbertSpace::atom_two_modes(6, 2).unwrap();
        assert!(
            lab_photon_observable(0.0, 0.0, &s)
                .unwrap()
                .max_abs_diff(&ModelOperators::new(&s).unwrap().n_a())
                .unwrap()
                == 0.0
        );
        let vac = DensityMatrix::from_pure(&basis_product_state(&s, &[0, 0, 0]).unwrap());
        for r in [0.3, 1.0, 2.5] {
            let n = lab_photon_observable(r, 0.4, &s).unwrap();
            assert!(n.hermiticity_error() < 1e-14);
            let v = expectation(&vac, &n).unwrap();
            assert!((v.re - r.sinh().powi(2)).abs() < 1e-12);
        }
        let v = expectation(&vac, &lab_photon_observable(1.0, 0.0, &s).unwrap()).unwrap();
        assert!((v.re - 1.3811).abs() < 1e-4);
    }

    // Single-mode squeeze exp[(r/2)(a² − a†²)] via nalgebra's matrix exponential.
    fn squeeze_matrix(n: usize, r: f64) -> CMatrix {
        let a = fock_destroy(n).unwrap().into_matrix();
        let ad = a.adjoint();
        let k = (&a * &a - &ad * &ad) * Complex64::new(0.5 * r, 0.0);
        k.exp()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        // The squeezed-frame Hamiltonian follows from the lab one by the
        // squeeze unitary followed by the gauge exp(−iπ N_exc / 2), up to the
        // constant (Δ_s − Δ_a)/2. Truncation errors reflect off the cutoff, so
        // the check uses a large mode-a space and the lowest a_s levels.
        #[test]
        fn frame_consistency(
            r in 0.0f64..1.0,
            g in 0.2f64..2.0,
            j in 0.2f64..2.0,
            ds in 1.0f64..20.0,
            dc in -10.0f64..10.0,
            dq in -10.0f64..10.0,
        ) {
            let na = 128;
            let s = HilbertSpace::atom_two_modes(na, 2).unwrap();
            let p = SystemParams { g, j, r_p: r, delta_a: lab_detuning(ds, r), delta_c: dc, delta_q: dq, ..base(r) };
            let lab = hamiltonian_lab(&p, &s).unwrap();
            let sq = hamiltonian_squeezed(&p, &s, Rwa::Full).unwrap();

            let s1 = squeeze_matrix(na, r);
            let id2 = DMatrix::<Complex64>::identity(2, 2);
            let big = id2.kronecker(&s1).kronecker(&id2);
            let gauge: Vec<Complex64> = (0..s.dim())
                .map(|i| {
                    let n: usize = s.labels_of(i).iter().sum();
                    Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * n as f64)
                })
                .collect();
            let mut u = big;
            for (col, ph) in gauge.iter().enumerate() {
                for row in 0..s.dim() {
                    u[(row, col)] *= ph;
                }
            }
            let transformed = u.adjoint() * lab.matrix() * &u;
            let shift = 0.5 * (p.delta_s() - p.delta_a);
            let mut worst: f64 = 0.0;
            for i in 0..s.dim() {
                for k in 0..s.dim() {
                    if s.labels_of(i)[1] > 3 || s.labels_of(k)[1] > 3 {
                        continue;
                    }
                    let offset = if i == k { shift } else { 0.0 };
                    let diff = transformed[(i, k)] - sq.get(i, k) - Complex64::new(offset, 0.0);
                    worst = worst.max(diff.norm());
                }
            }
            prop_assert!(worst < 1e-6, "deviation {}", worst);
        }
    }
}

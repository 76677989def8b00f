//! Assembly of the model's master equations from Hamiltonians and reservoir statistics.

use num_complex::Complex64;

use crate::lindblad::{DissipatorSpec, Hamiltonian, LindbladError};
use crate::model::{
    hamiltonian_lab, hamiltonian_squeezed, lab_reservoir_stats, reservoir_stats, ModelError,
    ModelOperators, Rwa, SystemParams,
};
use crate::operator::{HilbertSpace, Operator};

#[derive(Debug, thiserror::Error)]
pub enum MasterError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
}

/// Reservoir terms for a mode `o` coupled at rate `κ` to a bath with
/// occupation `n` and two-photon correlation `m`:
/// `κ(n+1)L[o] + κn L[o†] − κm L′[o] − κm* L′[o†]`.
pub fn reservoir_dissipators(
    o: &Operator,
    kappa: f64,
    n: f64,
    m: Complex64,
) -> Result<Vec<DissipatorSpec>, LindbladError> {
    let mut out = vec![DissipatorSpec::standard(o.clone(), kappa * (n + 1.0))?];
    if n != 0.0 {
        out.push(DissipatorSpec::standard(o.dagger(), kappa * n)?);
    }
    if m.norm() != 0.0 {
        out.extend(DissipatorSpec::two_photon_pair(o.clone(), m * kappa));
    }
    Ok(out)
}

/// Which frame the primary mode's reservoir is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReservoirFrame {
    /// Mode `a` with `N = sinh²(r_e)`, `M = cosh(r_e) sinh(r_e) e^{iθ_e}`.
    Lab,
    /// Mode `a_s` with the transformed statistics `N_s`, `M_s`.
    Squeezed,
}

/// Primary-mode reservoir plus `κ₂L[c] + γL[σ₋]`.
pub fn model_dissipators(
    p: &SystemParams,
    ops: &ModelOperators,
    frame: ReservoirFrame,
) -> Result<Vec<DissipatorSpec>, LindbladError> {
    let (n, m) = match frame {
        ReservoirFrame::Lab => lab_reservoir_stats(p.r_e, p.theta_e),
        ReservoirFrame::Squeezed => reservoir_stats(p.r_p, p.theta_p, p.r_e, p.theta_e),
    };
    let mut out = reservoir_dissipators(&ops.a, p.kappa1, n, m)?;
    out.push(DissipatorSpec::standard(ops.c.clone(), p.kappa2)?);
    out.push(DissipatorSpec::standard(ops.sm.clone(), p.gamma)?);
    Ok(out)
}

/// Lab-frame Hamiltonian with the lab-frame squeezed reservoir.
pub fn lab_master_equation(
    p: &SystemParams,
    space: &HilbertSpace,
) -> Result<(Hamiltonian, Vec<DissipatorSpec>), MasterError> {
    let ops = ModelOperators::new(space)?;
    let h = hamiltonian_lab(p, space)?;
    Ok((
        Hamiltonian::constant(h),
        model_dissipators(p, &ops, ReservoirFrame::Lab)?,
    ))
}

/// Squeezed-frame Hamiltonian with the transformed reservoir. With matched
/// squeezing the reservoir reduces to plain decay `κ₁L[a_s]`.
pub fn squeezed_master_equation(
    p: &SystemParams,
    space: &HilbertSpace,
    rwa: Rwa,
) -> Result<(Hamiltonian, Vec<DissipatorSpec>), MasterError> {
    let ops = ModelOperators::new(space)?;
    let h = hamiltonian_squeezed(p, space, rwa)?;
    Ok((
        Hamiltonian::constant(h),
        model_dissipators(p, &ops, ReservoirFrame::Squeezed)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityMatrix;
    use crate::lindblad::Generator;
    use crate::model::lab_detuning;
    use crate::operator::CMatrix;

    fn params(r_e: f64, theta_e: f64) -> SystemParams {
        SystemParams {
            g: 1.0,
            j: 2.0,
            kappa1: 3.0,
            kappa2: 0.2,
            gamma: 0.1,
            r_p: 0.0,
            theta_p: 0.0,
            r_e,
            theta_e,
            delta_a: lab_detuning(5.0, 0.0),
            delta_c: 1.0,
            delta_q: -1.0,
        }
    }

    #[test]
    fn frames_agree_without_cavity_squeezing() {
        let space = HilbertSpace::atom_two_modes(4, 3).unwrap();
        let d = space.dim();
        let m = CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(
                ((i * 7 + j * 3) % 11) as f64 - 5.0,
                ((i + 2 * j) % 5) as f64 - 2.0,
            )
        });
        let rho = &m * m.adjoint();
        let rho = DensityMatrix::new(space.clone(), &rho / rho.trace()).unwrap();
        for (re, te) in [(0.0, 0.0), (0.7, 0.4), (1.2, std::f64::consts::PI)] {
            let p = params(re, te);
            let (hl, dl) = lab_master_equation(&p, &space).unwrap();
            let (hs, ds) = squeezed_master_equation(&p, &space, Rwa::Full).unwrap();
            let a = Generator::new(&hl, &dl).unwrap().rhs(0.0, rho.matrix());
            let b = Generator::new(&hs, &ds).unwrap().rhs(0.0, rho.matrix());
            let diff = (a - b).iter().fold(0.0f64, |x, z| x.max(z.norm()));
            assert!(diff < 1e-12, "r_e={re}: {diff}");
        }
    }

    #[test]
    fn matched_reservoir_is_plain_decay() {
        let space = HilbertSpace::atom_two_modes(3, 3).unwrap();
        let p = SystemParams {
            r_p: 2.0,
            r_e: 2.0,
            theta_e: std::f64::consts::PI,
            delta_a: lab_detuning(5.0, 2.0),
            ..params(0.0, 0.0)
        };
        let (_, d) = squeezed_master_equation(&p, &space, Rwa::RotatingOnly).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d[0].coefficient, Complex64::new(3.0, 0.0));
    }
}

//! Property tests over random parameters: reservoir identities, state
//! invariants of the master equation, conservation laws and agreement
//! between integrators.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use cqed_squeeze::density::StateTolerance;
use cqed_squeeze::lindblad::{
    evolve, master_rhs, DissipatorSpec, Hamiltonian, IntegratorConfig, Method,
};
use cqed_squeeze::master::squeezed_master_equation;
use cqed_squeeze::model::{
    excitation_number, lab_reservoir_stats, parity_operator, reservoir_stats, Rwa,
};
use cqed_squeeze::{
    basis_product_state, expectation, fock_destroy, validate_state, DensityMatrix, HilbertSpace,
    Operator, SystemParams,
};

fn params(g: f64, j: f64, r_p: f64, detunings: [f64; 3], rates: [f64; 3]) -> SystemParams {
    SystemParams {
        g,
        j,
        kappa1: rates[0],
        kappa2: rates[1],
        gamma: rates[2],
        r_p,
        theta_p: 0.0,
        r_e: r_p,
        theta_e: PI,
        delta_a: detunings[0] * (2.0 * r_p).cosh(),
        delta_c: detunings[1],
        delta_q: detunings[2],
    }
}

fn drift(values: &[f64]) -> f64 {
    values
        .iter()
        .fold(0.0f64, |m, x| m.max((x - values[0]).abs()))
}

fn exact(t_final: f64, rows: usize) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::Propagator,
        dt: t_final / rows as f64,
        t_final,
        record_stride: 1,
        hermitize_every: 0,
        check_positivity: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // the squeezed-frame reservoir is a Bogoliubov image of a squeezed vacuum,
    // hence still pure: |M|² = N(N + 1)
    #[test]
    fn reservoir_stays_pure(r_p in 0.0f64..2.5, theta_p in -PI..PI, r_e in 0.0f64..2.5, theta_e in -PI..PI) {
        let (n, m) = reservoir_stats(r_p, theta_p, r_e, theta_e);
        prop_assert!(n >= 0.0);
        let lhs = m.norm_sqr();
        let rhs = n * (n + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs), "|M|² {lhs} vs N(N+1) {rhs}");
    }

    #[test]
    fn unsqueezed_cavity_sees_the_lab_reservoir(r_e in 0.0f64..3.0, theta_e in -PI..PI) {
        let (n, m) = reservoir_stats(0.0, 0.0, r_e, theta_e);
        let (n0, m0) = lab_reservoir_stats(r_e, theta_e);
        prop_assert!((n - n0).abs() <= 1e-12 * (1.0 + n0));
        prop_assert!((m - m0).norm() <= 1e-12 * (1.0 + m0.norm()));
    }

    #[test]
    fn matched_reservoir_vanishes(r_p in 0.0f64..4.0, theta_p in -3.0f64..3.0) {
        let theta_e = PI - theta_p;
        prop_assume!(theta_e + theta_p == PI);
        let (n, m) = reservoir_stats(r_p, theta_p, r_p, theta_e);
        prop_assert!(n.abs() <= 1e-14 && m.norm() <= 1e-14, "N {n:e} M {m}");
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        g in 0.1f64..2.0, j in 0.1f64..2.0, r_p in 0.0f64..1.5,
        da in -5.0f64..5.0, dc in -5.0f64..5.0, dq in -5.0f64..5.0,
        k1 in 0.0f64..3.0, k2 in 0.0f64..1.0, gam in 0.0f64..1.0,
        r_e in 0.0f64..1.5, theta_e in -PI..PI,
    ) {
        let mut p = params(g, j, r_p, [da, dc, dq], [k1, k2, gam]);
        p.r_e = r_e;
        p.theta_e = theta_e;
        let space = HilbertSpace::new(vec![2, 3, 3]).unwrap();
        let (h, d) = squeezed_master_equation(&p, &space, Rwa::Full).unwrap();
        let psi = basis_product_state(&space, &[1, 1, 0]).unwrap();
        let phi = basis_product_state(&space, &[0, 2, 1]).unwrap();
        let mut rho = DensityMatrix::from_pure(&psi).into_matrix() * Complex64::from(0.6)
            + DensityMatrix::from_pure(&phi).into_matrix() * Complex64::from(0.4);
        rho[(0, 1)] += Complex64::from(0.01);
        rho[(1, 0)] += Complex64::from(0.01);
        let rho = DensityMatrix::new(space.clone(), rho).unwrap();
        let drho = master_rhs(&h, &d, &rho, 0.0).unwrap();
        prop_assert!(drho.trace().norm() < 1e-10);
        prop_assert!((&drho - drho.adjoint()).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn rotating_model_conserves_excitations(
        g in 0.2f64..2.0, j in 0.2f64..2.0, r_p in 0.0f64..1.5,
        da in -3.0f64..3.0, dc in -3.0f64..3.0, dq in -3.0f64..3.0,
    ) {
        let p = params(g, j, r_p, [da, dc, dq], [0.0; 3]);
        let space = HilbertSpace::new(vec![2, 3, 3]).unwrap();
        let (h, d) = squeezed_master_equation(&p, &space, Rwa::RotatingOnly).unwrap();
        let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0, 0]).unwrap());
        let obs = [("N".to_string(), excitation_number(&space).unwrap())];
        let ev = evolve(&rho0, &h, &d, &exact(10.0, 50), &obs).unwrap();
        prop_assert!(drift(ev.series.trace("N").unwrap()) < 1e-8);
    }

    #[test]
    fn full_model_conserves_parity(
        g in 0.2f64..2.0, j in 0.2f64..2.0, r_p in 0.0f64..1.5,
        da in -3.0f64..3.0, dc in -3.0f64..3.0, dq in -3.0f64..3.0,
    ) {
        let p = params(g, j, r_p, [da, dc, dq], [0.0; 3]);
        let space = HilbertSpace::new(vec![2, 3, 3]).unwrap();
        let (h, d) = squeezed_master_equation(&p, &space, Rwa::Full).unwrap();
        let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0, 0]).unwrap());
        let obs = [("P".to_string(), parity_operator(&space).unwrap())];
        let ev = evolve(&rho0, &h, &d, &exact(10.0, 50), &obs).unwrap();
        prop_assert!(drift(ev.series.trace("P").unwrap()) < 1e-6);
    }

    #[test]
    fn evolved_states_stay_physical(
        g in 0.2f64..2.0, j in 0.2f64..2.0, r_p in 0.0f64..1.5,
        da in -3.0f64..3.0, k1 in 0.1f64..3.0, k2 in 0.0f64..0.5, gam in 0.0f64..0.5,
    ) {
        let p = params(g, j, r_p, [da, 0.5, -0.5], [k1, k2, gam]);
        let space = HilbertSpace::new(vec![2, 3, 3]).unwrap();
        let (h, d) = squeezed_master_equation(&p, &space, Rwa::Full).unwrap();
        let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0, 0]).unwrap());
        let ev = evolve(&rho0, &h, &d, &exact(5.0, 20), &[]).unwrap();
        let tol = StateTolerance { trace: 1e-8, herm: 1e-9, min_eig: 1e-7 };
        let diag = validate_state(&ev.final_state, &tol);
        prop_assert!(diag.passed, "{diag:?}");
    }

    #[test]
    fn integrators_agree(
        g in 0.2f64..1.5, j in 0.2f64..1.5, da in -2.0f64..2.0,
        k1 in 0.0f64..1.0, gam in 0.0f64..0.5,
    ) {
        let p = params(g, j, 0.3, [da, 0.4, -0.2], [k1, 0.1, gam]);
        let space = HilbertSpace::new(vec![2, 3, 3]).unwrap();
        let (h, d) = squeezed_master_equation(&p, &space, Rwa::Full).unwrap();
        let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0, 0]).unwrap());
        let reference = evolve(&rho0, &h, &d, &exact(3.0, 30), &[]).unwrap().final_state;
        for method in [Method::Rk4Fixed, Method::EtdRk4, Method::default()] {
            let cfg = IntegratorConfig { method, dt: 2e-3, record_stride: 50, ..exact(3.0, 30) };
            let got = evolve(&rho0, &h, &d, &cfg, &[]).unwrap().final_state;
            let dev = (got.matrix() - reference.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            prop_assert!(dev < 1e-6, "{method:?} deviates by {dev:e}");
        }
    }
}

// independent oracles: two-level Rabi flopping and thermal relaxation
#[test]
fn detuned_rabi_formula() {
    let (g, delta) = (0.7, 0.9);
    let p = SystemParams {
        g,
        j: 0.0,
        kappa1: 0.0,
        kappa2: 0.0,
        gamma: 0.0,
        r_p: 0.0,
        theta_p: 0.0,
        r_e: 0.0,
        theta_e: 0.0,
        delta_a: 0.0,
        delta_c: 0.0,
        delta_q: delta,
    };
    let sub = HilbertSpace::new(vec![2, 2, 2]).unwrap();
    let (h, d) = squeezed_master_equation(&p, &sub, Rwa::RotatingOnly).unwrap();
    let rho0 = DensityMatrix::from_pure(&basis_product_state(&sub, &[1, 0, 0]).unwrap());
    let ev = evolve(&rho0, &h, &d, &exact(8.0, 80), &[]).unwrap();
    // |e,0> ↔ |g,1> with splitting Δ_q: P_e = 1 − (4g²/Ω²) sin²(Ωt/2), Ω² = Δ² + 4g²
    let omega = (delta * delta + 4.0 * g * g).sqrt();
    let t = 8.0;
    let want = 1.0 - (4.0 * g * g / (omega * omega)) * (0.5 * omega * t).sin().powi(2);
    let pe = ev.final_state.matrix()[(
        sub.index_of(&[1, 0, 0]).unwrap(),
        sub.index_of(&[1, 0, 0]).unwrap(),
    )]
        .re;
    assert_abs_diff_eq!(pe, want, epsilon = 1e-9);
}

#[test]
fn thermal_bath_relaxes_to_bose_occupation() {
    // L[a] at rate κ(N+1) and L[a†] at rate κN drive ⟨n⟩ to N as N(1 − e^{−κt})
    let space = HilbertSpace::single(20).unwrap();
    let a = fock_destroy(20).unwrap();
    let n_op = &a.dagger() * &a;
    let (kappa, n_th) = (0.8, 0.3);
    let d = vec![
        DissipatorSpec::standard(a.clone(), kappa * (n_th + 1.0)).unwrap(),
        DissipatorSpec::standard(a.dagger(), kappa * n_th).unwrap(),
    ];
    let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[0]).unwrap());
    let h = Hamiltonian::constant(Operator::zeros(&space));
    let ev = evolve(&rho0, &h, &d, &exact(4.0, 40), &[]).unwrap();
    let got = expectation(&ev.final_state, &n_op).unwrap().re;
    let want = n_th * (1.0 - (-kappa * 4.0f64).exp());
    // the 20-photon cutoff leaves a tail far below the tolerance
    assert_abs_diff_eq!(got, want, epsilon = 1e-8);
}

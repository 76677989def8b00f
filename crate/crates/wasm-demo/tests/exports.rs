//! The exported functions called natively.

use cqed_squeeze_wasm::{effective_dynamics, enhancement_curve, occupation_map};

#[test]
fn curve_starts_at_one() {
    let c = enhancement_curve("fig2d", 4.0, 9).unwrap();
    assert!((c[0] - 1.0).abs() < 1e-12);
    assert!(c[8] > 10.0);
    // the rotating-channel ratio dips below one before it grows
    assert!(c[1..4].iter().any(|&r| r < 1.0));
}

#[test]
fn map_vanishes_on_matching_line() {
    let n = 5;
    let m = occupation_map(1.0, 0.0, 2.0, n);
    // r_e = 1 is row 2, θ_e = π is column 2
    assert!(m[2 * n + 2].abs() < 1e-12);
    // r_e = 0: unsqueezed bath seen through the squeezed mode, sinh²(r_p)
    assert!((m[0] - 1f64.sinh().powi(2)).abs() < 1e-12);
}

#[test]
fn dynamics_rows() {
    let v = effective_dynamics(2.0, 100.0, 1.0, 40).unwrap();
    assert_eq!(v.len(), 3 * 41);
    assert!((v[1] - 1.0).abs() < 1e-12);
    let max_nc = v.chunks(3).map(|r| r[2]).fold(0.0, f64::max);
    assert!(max_nc > 0.5);
}

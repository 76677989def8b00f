use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Physical parameters. Frequencies and rates are in units of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub g: f64,
    pub j: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma: f64,
    pub r_p: f64,
    #[serde(default)]
    pub theta_p: f64,
    #[serde(default)]
    pub r_e: f64,
    #[serde(default)]
    pub theta_e: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub delta_q: f64,
}

impl SystemParams {
    /// Reject negative rates or squeeze magnitudes and non-finite values.
    pub fn validate(&self) -> Result<(), ModelError> {
        let named = [
            ("g", self.g),
            ("j", self.j),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma", self.gamma),
            ("r_p", self.r_p),
            ("theta_p", self.theta_p),
            ("r_e", self.r_e),
            ("theta_e", self.theta_e),
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
            ("delta_q", self.delta_q),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        for (name, v) in [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma", self.gamma),
            ("r_p", self.r_p),
            ("r_e", self.r_e),
        ] {
            if v < 0.0 {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        Ok(())
    }

    pub fn delta_s(&self) -> f64 {
        squeezed_detuning(self.delta_a, self.r_p)
    }

    pub fn omega_p(&self) -> f64 {
        pump_from_squeeze(self.r_p, self.delta_a)
    }

    /// Largest frequency magnitude, used to scale degeneracy checks.
    pub fn frequency_scale(&self) -> f64 {
        [
            self.delta_a,
            self.delta_c,
            self.delta_q,
            self.g,
            self.j,
            1.0,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Builder-style copy with a different primary-mode decay rate.
    pub fn with_kappa1(mut self, kappa1: f64) -> Self {
        self.kappa1 = kappa1;
        self
    }
}

/// Quantities that follow from [`SystemParams`].
///
/// Couplings are `None` when their denominator is degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub delta_s: f64,
    pub omega_p_amp: f64,
    pub n_s: f64,
    pub m_s: Complex64,
    pub delta_c_prime: Option<f64>,
    pub delta_e: Option<f64>,
    pub g_eff: Option<f64>,
    pub g_eff_prime: Option<f64>,
}

impl DerivedParams {
    pub fn from_params(p: &SystemParams) -> Self {
        let (n_s, m_s) = reservoir_stats(p.r_p, p.theta_p, p.r_e, p.theta_e);
        let rot = effective_detunings_and_coupling_1(p).ok();
        Self {
            delta_s: p.delta_s(),
            omega_p_amp: p.omega_p(),
            n_s,
            m_s,
            delta_c_prime: rot.map(|r| r.delta_c_prime),
            delta_e: rot.map(|r| r.delta_e),
            g_eff: rot.map(|r| r.g_eff),
            g_eff_prime: g_eff_prime(p).ok(),
        }
    }
}

/// `r_p = arctanh(Ω_p/Δ_a)/2`.
pub fn squeeze_from_pump(omega_p: f64, delta_a: f64) -> Result<f64, ModelError> {
    if delta_a == 0.0 || omega_p.abs() >= delta_a.abs() {
        return Err(ModelError::AboveThreshold { omega_p, delta_a });
    }
    Ok(0.5 * (omega_p / delta_a).atanh())
}

/// `Ω_p = Δ_a tanh(2 r_p)`.
pub fn pump_from_squeeze(r_p: f64, delta_a: f64) -> f64 {
    delta_a * (2.0 * r_p).tanh()
}

/// `Δ_s = Δ_a sech(2 r_p)`.
pub fn squeezed_detuning(delta_a: f64, r_p: f64) -> f64 {
    delta_a / (2.0 * r_p).cosh()
}

/// `Δ_a = Δ_s cosh(2 r_p)`, the inverse of [`squeezed_detuning`].
pub fn lab_detuning(delta_s: f64, r_p: f64) -> f64 {
    delta_s * (2.0 * r_p).cosh()
}

/// cos(πx), exact at integers and half-integers.
pub(crate) fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r.abs() == 0.5 {
        0.0
    } else if r == 0.0 {
        1.0
    } else if r.abs() == 1.0 {
        -1.0
    } else {
        (PI * r).cos()
    }
}

/// sin(πx), exact at integers and half-integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    cos_pi(x - 0.5)
}

/// Reservoir occupation and two-photon correlation seen by the squeezed mode.
///
/// Evaluated in a rearranged form that is free of cancellation, so the
/// matched case `r_e = r_p`, `θ_e + θ_p = π` gives exactly zero. Phases are
/// reduced in units of π before taking trigonometric functions.
pub fn reservoir_stats(r_p: f64, theta_p: f64, r_e: f64, theta_e: f64) -> (f64, Complex64) {
    let half_turns = (theta_e + theta_p) / (2.0 * PI);
    let cos_half = cos_pi(half_turns);
    let sin_half = sin_pi(half_turns);
    let half_phase = Complex64::new(cos_half, sin_half);
    let (ch, sh) = (r_p.cosh(), r_p.sinh());
    let s2e = (2.0 * r_e).sinh();
    let s2p = (2.0 * r_p).sinh();

    let n_s = (r_e - r_p).sinh().powi(2) + s2e * s2p * cos_half * cos_half;
    let bracket = Complex64::new(0.5 * (2.0 * (r_p - r_e)).sinh(), 0.0)
        + s2e * cos_half * (half_phase * ch * ch + half_phase.conj() * sh * sh);
    let m_s = Complex64::from_polar(1.0, theta_p) * bracket;
    (n_s, m_s)
}

/// Lab-frame reservoir statistics `N = sinh²(r_e)`, `M = cosh(r_e) sinh(r_e) e^{iθ_e}`.
pub fn lab_reservoir_stats(r_e: f64, theta_e: f64) -> (f64, Complex64) {
    (
        r_e.sinh().powi(2),
        Complex64::from_polar(r_e.cosh() * r_e.sinh(), theta_e),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatingCoupling {
    pub delta_c_prime: f64,
    pub delta_e: f64,
    pub g_eff: f64,
}

fn check_denominator(name: &'static str, value: f64, scale: f64) -> Result<f64, ModelError> {
    if value.abs() < 1e-9 * scale {
        Err(ModelError::DegenerateDetuning { name, value })
    } else {
        Ok(value)
    }
}

/// Stark shifts and the atom–`c` coupling mediated by the rotating channel.
pub fn effective_detunings_and_coupling_1(
    p: &SystemParams,
) -> Result<RotatingCoupling, ModelError> {
    let ds = p.delta_s();
    let scale = p.frequency_scale();
    let dc = check_denominator("delta_c - delta_s", p.delta_c - ds, scale)?;
    let dq = check_denominator("delta_q - delta_s", p.delta_q - ds, scale)?;
    let ch2 = p.r_p.cosh().powi(2);
    Ok(RotatingCoupling {
        delta_c_prime: p.j * p.j * ch2 / dc,
        delta_e: p.g * p.g * ch2 / dq,
        g_eff: 0.5 * p.g * p.j * ch2 * (1.0 / dc + 1.0 / dq),
    })
}

/// Both roots of the resonance condition for `Δ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceRoots {
    /// The root closest to `Δ_q`.
    pub delta_c: f64,
    pub discarded: f64,
    /// `|Δ_e − Δ_c′ + Δ_q − Δ_c|` at the chosen root.
    pub residual: f64,
}

/// Solve `Δ_e − Δ_c′ + Δ_q − Δ_c = 0` for `Δ_c` at fixed `Δ_s`, `Δ_q`, `g`, `J`, `r_p`.
///
/// With `y = Δ_c − Δ_s` the condition is `y² − D y + K = 0`, where
/// `D = Δ_q + Δ_e − Δ_s` and `K = J² cosh²(r_p)`.
pub fn solve_resonance(
    g: f64,
    j: f64,
    r_p: f64,
    delta_s: f64,
    delta_q: f64,
) -> Result<ResonanceRoots, ModelError> {
    let ch2 = r_p.cosh().powi(2);
    let scale = delta_s.abs().max(delta_q.abs()).max(1.0);
    let dq = check_denominator("delta_q - delta_s", delta_q - delta_s, scale)?;
    let delta_e = g * g * ch2 / dq;
    let d = delta_q + delta_e - delta_s;
    let k = j * j * ch2;
    let disc = d * d - 4.0 * k;
    if disc < 0.0 {
        return Err(ModelError::NoResonance { discriminant: disc });
    }
    if d == 0.0 {
        // only reachable with K = 0: a double root at y = 0
        return Err(ModelError::DegenerateDetuning {
            name: "delta_c - delta_s",
            value: 0.0,
        });
    }
    let y_big = 0.5 * (d + d.signum() * disc.sqrt());
    let y_small = k / y_big;
    let candidates = [delta_s + y_big, delta_s + y_small];
    let (chosen, other) = if (candidates[0] - delta_q).abs() <= (candidates[1] - delta_q).abs() {
        (candidates[0], candidates[1])
    } else {
        (candidates[1], candidates[0])
    };
    let y = chosen - delta_s;
    if y.abs() < 1e-9 * scale {
        return Err(ModelError::DegenerateDetuning {
            name: "delta_c - delta_s",
            value: y,
        });
    }
    let residual = (delta_e - k / y + delta_q - chosen).abs();
    Ok(ResonanceRoots {
        delta_c: chosen,
        discarded: other,
        residual,
    })
}

/// Convenience wrapper: resonance `Δ_c` for the given parameters (ignores `p.delta_c`).
pub fn solve_resonance_delta_c(p: &SystemParams) -> Result<f64, ModelError> {
    let roots = solve_resonance(p.g, p.j, p.r_p, p.delta_s(), p.delta_q)?;
    let tol = 1e-10 * p.delta_q.abs().max(1.0);
    if roots.residual >= tol {
        return Err(ModelError::NoResonance {
            discriminant: f64::NAN,
        });
    }
    Ok(roots.delta_c)
}

/// Counter-rotating-channel coupling `g J cosh(r_p) sinh(r_p)/(Δ_s + Δ_q)`.
pub fn g_eff_prime(p: &SystemParams) -> Result<f64, ModelError> {
    let denom = check_denominator(
        "delta_s + delta_q",
        p.delta_s() + p.delta_q,
        p.frequency_scale(),
    )?;
    Ok(p.g * p.j * p.r_p.cosh() * p.r_p.sinh() / denom)
}

/// Smallest Fock dimension whose thermal tail mass above the cutoff is below `tail`.
pub fn thermal_cutoff(mean: f64, tail: f64) -> usize {
    if mean <= 0.0 {
        return 2;
    }
    let ratio = mean / (mean + 1.0);
    let n = (tail.ln() / ratio.ln()).ceil();
    (n as usize).max(2)
}

/// Thermal population at or above level `dim`, i.e. the mass a cutoff at `dim` discards.
pub fn thermal_tail_mass(mean: f64, dim: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    (mean / (mean + 1.0)).powi(dim as i32)
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::generator::{DissipatorSpec, Generator, Hamiltonian, Scratch};
use super::series::TimeSeries;
use super::LindbladError;
use crate::density::{
    hermitize_in_place, trace_of_product, validate_state, DensityMatrix, StateDiagnostics,
    StateTolerance,
};
use crate::operator::{CMatrix, CVector, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MethodRepr", into = "MethodRepr")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with step `dt`.
    Rk4Fixed,
    /// Dormand–Prince 5(4) with max-norm error control.
    Rk45Adaptive { rtol: f64, atol: f64 },
    /// Exponential time differencing RK4 (Cox–Matthews) with step `dt`.
    ///
    /// The diagonal of the generator is integrated exactly, which removes the
    /// stiffness coming from large bare detunings.
    EtdRk4,
    /// Exact exponential of the Liouvillian over one record interval, applied
    /// as a `d² × d²` matrix. Time-independent generators only; memory grows
    /// as `d⁴`.
    Propagator,
}

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodKind {
    Rk4Fixed,
    Rk45Adaptive,
    EtdRk4,
    Propagator,
}

// flat form so that unknown keys are rejected for every variant
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodRepr {
    kind: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atol: Option<f64>,
}

impl TryFrom<MethodRepr> for Method {
    type Error = String;

    fn try_from(r: MethodRepr) -> Result<Self, String> {
        let tolerances = r.rtol.is_some() || r.atol.is_some();
        match r.kind {
            MethodKind::Rk45Adaptive => Ok(Method::Rk45Adaptive {
                rtol: r.rtol.unwrap_or(DEFAULT_RTOL),
                atol: r.atol.unwrap_or(DEFAULT_ATOL),
            }),
            _ if tolerances => Err("rtol/atol only apply to rk45_adaptive".into()),
            MethodKind::Rk4Fixed => Ok(Method::Rk4Fixed),
            MethodKind::EtdRk4 => Ok(Method::EtdRk4),
            MethodKind::Propagator => Ok(Method::Propagator),
        }
    }
}

impl From<Method> for MethodRepr {
    fn from(m: Method) -> Self {
        match m {
            Method::Rk4Fixed => MethodRepr {
                kind: MethodKind::Rk4Fixed,
                rtol: None,
                atol: None,
            },
            Method::Rk45Adaptive { rtol, atol } => MethodRepr {
                kind: MethodKind::Rk45Adaptive,
                rtol: Some(rtol),
                atol: Some(atol),
            },
            Method::EtdRk4 => MethodRepr {
                kind: MethodKind::EtdRk4,
                rtol: None,
                atol: None,
            },
            Method::Propagator => MethodRepr {
                kind: MethodKind::Propagator,
                rtol: None,
                atol: None,
            },
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk45Adaptive {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step for the fixed-step methods; record spacing unit for all methods.
    pub dt: f64,
    pub t_final: f64,
    /// Observables are recorded every `record_stride · dt`.
    pub record_stride: usize,
    /// Symmetrize ρ every this many steps (0 disables).
    pub hermitize_every: usize,
    /// Compute the minimum eigenvalue at every record point.
    #[serde(default = "default_true")]
    pub check_positivity: bool,
}

fn default_true() -> bool {
    true
}

impl IntegratorConfig {
    pub fn adaptive(dt: f64, t_final: f64, record_stride: usize) -> Self {
        Self {
            method: Method::default(),
            dt,
            t_final,
            record_stride,
            hermitize_every: 100,
            check_positivity: true,
        }
    }

    pub fn validate(&self) -> Result<(), LindbladError> {
        let bad = |m: &str| Err(LindbladError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad("t_final must be positive");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1");
        }
        if let Method::Rk45Adaptive { rtol, atol } = self.method {
            if !(rtol > 0.0) || !(atol > 0.0) {
                return bad("rtol and atol must be positive");
            }
        }
        Ok(())
    }

    /// Spacing of recorded samples.
    pub fn record_interval(&self) -> f64 {
        self.dt * self.record_stride as f64
    }

    /// Number of recorded rows, `floor(t_final / (record_stride·dt)) + 1`.
    pub fn record_count(&self) -> usize {
        let q = self.t_final / self.record_interval();
        // tolerate t_final landing a rounding error short of a grid point
        (q * (1.0 + 1e-12)).floor() as usize + 1
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub final_state: DensityMatrix,
    /// Worst diagnostics over all record points.
    pub diagnostics: StateDiagnostics,
    pub steps: usize,
    pub rejected_steps: usize,
}

/// Named observable for recording.
pub type Observable = (String, Operator);

/// Integrate the master equation and record observables.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &Hamiltonian,
    dissipators: &[DissipatorSpec],
    config: &IntegratorConfig,
    observables: &[Observable],
) -> Result<Evolution, LindbladError> {
    let generator = Generator::new(h, dissipators)?;
    evolve_with(rho0, &generator, config, observables)
}

struct Recorder<'a> {
    observables: &'a [Observable],
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    diagnostics: StateDiagnostics,
    check_positivity: bool,
    tolerance: StateTolerance,
}

impl<'a> Recorder<'a> {
    fn new(observables: &'a [Observable], capacity: usize, check_positivity: bool) -> Self {
        Self {
            observables,
            times: Vec::with_capacity(capacity),
            values: vec![Vec::with_capacity(capacity); observables.len()],
            diagnostics: StateDiagnostics::ideal(),
            check_positivity,
            tolerance: StateTolerance::default(),
        }
    }

    fn record(&mut self, t: f64, rho: &DensityMatrix) {
        self.times.push(t);
        for (k, (_, op)) in self.observables.iter().enumerate() {
            self.values[k].push(trace_of_product(rho.matrix(), op.matrix()).re);
        }
        let diag = if self.check_positivity {
            validate_state(rho, &self.tolerance)
        } else {
            let m = rho.matrix();
            let trace_err = (m.trace() - Complex64::new(1.0, 0.0)).norm();
            let herm_err = (m - m.adjoint())
                .iter()
                .fold(0.0f64, |a, z| a.max(z.norm()));
            StateDiagnostics {
                trace_err,
                herm_err,
                min_eig: f64::NAN,
                passed: trace_err <= self.tolerance.trace && herm_err <= self.tolerance.herm,
            }
        };
        let diag = if diag.min_eig.is_nan() {
            StateDiagnostics {
                min_eig: self.diagnostics.min_eig,
                ..diag
            }
        } else {
            diag
        };
        self.diagnostics = self.diagnostics.worst(diag);
    }

    fn finish(self) -> Result<TimeSeries, LindbladError> {
        let names: Vec<String> = self.observables.iter().map(|(n, _)| n.clone()).collect();
        TimeSeries::new(self.times, names.into_iter().zip(self.values).collect())
    }
}

/// [`evolve`] with a precompiled generator.
pub fn evolve_with(
    rho0: &DensityMatrix,
    generator: &Generator,
    config: &IntegratorConfig,
    observables: &[Observable],
) -> Result<Evolution, LindbladError> {
    config.validate()?;
    if rho0.space() != generator.space() {
        return Err(LindbladError::SpaceMismatch(rho0.space().clone()));
    }
    for (_, op) in observables {
        if op.space() != generator.space() {
            return Err(LindbladError::SpaceMismatch(op.space().clone()));
        }
    }
    let n_records = config.record_count();
    let mut recorder = Recorder::new(observables, n_records, config.check_positivity);
    let mut rho = rho0.clone();
    recorder.record(0.0, &rho);

    let stepper = match config.method {
        Method::Rk4Fixed => Stepper::Rk4(Rk4::new(generator.dim())),
        Method::Rk45Adaptive { rtol, atol } => {
            Stepper::Dp(Dopri::new(generator.dim(), rtol, atol, config.dt))
        }
        Method::EtdRk4 => Stepper::Etd(Box::new(Etd::new(generator, config.dt))),
        Method::Propagator => {
            if generator.is_time_dependent() {
                return Err(LindbladError::InvalidConfig(
                    "the propagator method needs a time-independent generator".into(),
                ));
            }
            Stepper::Exp(Box::new(propagator(generator, config.record_interval())))
        }
    };
    let mut stepper = stepper;
    let mut scratch = generator.scratch();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let interval = config.record_interval();
    for k in 1..n_records {
        let target = k as f64 * interval;
        match &mut stepper {
            Stepper::Rk4(s) => {
                for _ in 0..config.record_stride {
                    s.step(generator, &mut scratch, t, config.dt, rho.matrix_mut());
                    steps += 1;
                    t += config.dt;
                    maybe_hermitize(config, steps, &mut rho);
                }
            }
            Stepper::Etd(s) => {
                for _ in 0..config.record_stride {
                    s.step(&mut scratch, t, rho.matrix_mut());
                    steps += 1;
                    t += config.dt;
                    maybe_hermitize(config, steps, &mut rho);
                }
            }
            Stepper::Exp(p) => {
                let v = &**p * CVector::from_column_slice(rho.matrix().as_slice());
                rho.matrix_mut()
                    .as_mut_slice()
                    .copy_from_slice(v.as_slice());
                steps += 1;
                maybe_hermitize(config, steps, &mut rho);
            }
            Stepper::Dp(s) => {
                let (acc, rej) = s.advance(generator, &mut scratch, t, target, &mut rho, config)?;
                steps += acc;
                rejected += rej;
            }
        }
        t = target;
        recorder.record(t, &rho);
    }

    let diagnostics = recorder.diagnostics;
    Ok(Evolution {
        series: recorder.finish()?,
        final_state: rho,
        diagnostics,
        steps,
        rejected_steps: rejected,
    })
}

fn maybe_hermitize(config: &IntegratorConfig, steps: usize, rho: &mut DensityMatrix) {
    if config.hermitize_every > 0 && steps.is_multiple_of(config.hermitize_every) {
        rho.hermitize();
    }
}

enum Stepper {
    Rk4(Rk4),
    Dp(Dopri),
    Etd(Box<Etd>),
    Exp(Box<CMatrix>),
}

/// `exp(h·L)` on column-major `vec(ρ)`.
fn propagator(g: &Generator, h: f64) -> CMatrix {
    (liouvillian(g) * Complex64::new(h, 0.0)).exp()
}

/// The generator as a `d² × d²` matrix on column-major `vec(ρ)`.
fn liouvillian(g: &Generator) -> CMatrix {
    let d = g.dim();
    let mut l = CMatrix::zeros(d * d, d * d);
    let mut basis = CMatrix::zeros(d, d);
    // the generator is evaluated on Hermitian inputs only:
    // E_ij = ((E_ij + E_ji) − i·i(E_ij − E_ji)) / 2
    let i_unit = Complex64::new(0.0, 1.0);
    for j in 0..d {
        for i in 0..=j {
            basis.fill(Complex64::new(0.0, 0.0));
            basis[(i, j)] = Complex64::new(1.0, 0.0);
            basis[(j, i)] = Complex64::new(1.0, 0.0);
            let sym = g.rhs(0.0, &basis);
            if i == j {
                l.column_mut(j * d + i).copy_from_slice(sym.as_slice());
                continue;
            }
            basis[(i, j)] = i_unit;
            basis[(j, i)] = -i_unit;
            let anti = g.rhs(0.0, &basis);
            let e_ij = (&sym - &anti * i_unit) * Complex64::new(0.5, 0.0);
            let e_ji = (&sym + &anti * i_unit) * Complex64::new(0.5, 0.0);
            l.column_mut(j * d + i).copy_from_slice(e_ij.as_slice());
            l.column_mut(i * d + j).copy_from_slice(e_ji.as_slice());
        }
    }
    l
}

/// `y ← y + Σ c_k k_k`.
fn axpy_many(y: &mut CMatrix, base: &CMatrix, terms: &[(f64, &CMatrix)]) {
    let out = y.as_mut_slice();
    let b = base.as_slice();
    for (idx, o) in out.iter_mut().enumerate() {
        let mut acc = b[idx];
        for (c, k) in terms {
            if *c != 0.0 {
                acc += k.as_slice()[idx] * *c;
            }
        }
        *o = acc;
    }
}

struct Rk4 {
    k: [CMatrix; 4],
    tmp: CMatrix,
}

impl Rk4 {
    fn new(d: usize) -> Self {
        let z = || CMatrix::zeros(d, d);
        Self {
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    fn step(&mut self, g: &Generator, s: &mut Scratch, t: f64, h: f64, y: &mut CMatrix) {
        let [k1, k2, k3, k4] = &mut self.k;
        g.rhs_into(t, y, k1, s);
        axpy_many(&mut self.tmp, y, &[(0.5 * h, k1)]);
        g.rhs_into(t + 0.5 * h, &self.tmp, k2, s);
        axpy_many(&mut self.tmp, y, &[(0.5 * h, k2)]);
        g.rhs_into(t + 0.5 * h, &self.tmp, k3, s);
        axpy_many(&mut self.tmp, y, &[(h, k3)]);
        g.rhs_into(t + h, &self.tmp, k4, s);
        let y0 = y.clone();
        axpy_many(
            y,
            &y0,
            &[(h / 6.0, k1), (h / 3.0, k2), (h / 3.0, k3), (h / 6.0, k4)],
        );
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri {
    k: Vec<CMatrix>,
    y_new: CMatrix,
    tmp: CMatrix,
    rtol: f64,
    atol: f64,
    h: f64,
    fsal_valid: bool,
    min_step: f64,
}

impl Dopri {
    fn new(d: usize, rtol: f64, atol: f64, h0: f64) -> Self {
        Self {
            k: (0..7).map(|_| CMatrix::zeros(d, d)).collect(),
            y_new: CMatrix::zeros(d, d),
            tmp: CMatrix::zeros(d, d),
            rtol,
            atol,
            h: h0,
            fsal_valid: false,
            min_step: f64::INFINITY,
        }
    }

    /// Step from `t0` to exactly `t1`; returns (accepted, rejected) counts.
    fn advance(
        &mut self,
        g: &Generator,
        s: &mut Scratch,
        t0: f64,
        t1: f64,
        rho: &mut DensityMatrix,
        config: &IntegratorConfig,
    ) -> Result<(usize, usize), LindbladError> {
        let mut t = t0;
        let (mut acc, mut rej) = (0, 0);
        while t < t1 {
            let remaining = t1 - t;
            let last = self.h >= remaining * (1.0 - 1e-12);
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * t1.abs().max(1.0) && !last {
                return Err(LindbladError::StepUnderflow {
                    t,
                    h_min: self.min_step.min(h),
                });
            }
            let y = rho.matrix();
            if !self.fsal_valid {
                let (k0, _) = self.k.split_at_mut(1);
                g.rhs_into(t, y, &mut k0[0], s);
            }
            for stage in 1..7 {
                let terms: Vec<(f64, &CMatrix)> = (0..stage)
                    .filter(|&j| A[stage][j] != 0.0)
                    .map(|j| (h * A[stage][j], &self.k[j]))
                    .collect();
                if stage == 6 {
                    axpy_many(&mut self.y_new, y, &terms);
                    let (head, tail) = self.k.split_at_mut(6);
                    let _ = head;
                    g.rhs_into(t + C[stage] * h, &self.y_new, &mut tail[0], s);
                } else {
                    axpy_many(&mut self.tmp, y, &terms);
                    let (_, tail) = self.k.split_at_mut(stage);
                    g.rhs_into(t + C[stage] * h, &self.tmp, &mut tail[0], s);
                }
            }
            // error estimate in max-norm
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            let ys = y.as_slice();
            let yn = self.y_new.as_slice();
            for idx in 0..ys.len() {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, &ej) in E.iter().enumerate() {
                    if ej != 0.0 {
                        e += self.k[j].as_slice()[idx] * ej;
                    }
                }
                err = err.max(e.norm());
                scale = scale.max(ys[idx].norm()).max(yn[idx].norm());
            }
            let err = h * err / (self.rtol * scale + self.atol);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                std::mem::swap(rho.matrix_mut(), &mut self.y_new);
                self.k.swap(0, 6);
                self.fsal_valid = true;
                acc += 1;
                self.min_step = self.min_step.min(h);
                if config.hermitize_every > 0 && acc % config.hermitize_every == 0 {
                    hermitize_in_place(rho.matrix_mut());
                    self.fsal_valid = false;
                }
                // a step shortened to land on t1 says nothing about the step size
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
                self.min_step = self.min_step.min(self.h);
                rej += 1;
                if self.h < 1e-14 * t1.abs().max(1.0) {
                    return Err(LindbladError::StepUnderflow { t, h_min: self.h });
                }
            }
        }
        Ok((acc, rej))
    }
}

/// φ_1, φ_2, φ_3 at `z`.
fn phi123(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        // Taylor: φ_k(z) = Σ_n z^n / (n + k)!
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let k = k + 1;
            let mut term = Complex64::new(1.0 / factorial(k), 0.0);
            let mut acc = term;
            for n in 1..30 {
                term = term * z / (n + k) as f64;
                acc += term;
                if term.norm() < 1e-18 * acc.norm() {
                    break;
                }
            }
            *slot = acc;
        }
        out
    } else {
        let p1 = (z.exp() - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

struct Etd {
    generator: Generator,
    lambda: Vec<Complex64>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    h: f64,
    nu: CMatrix,
    na: CMatrix,
    nb: CMatrix,
    nc: CMatrix,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
}

impl Etd {
    fn new(g: &Generator, h: f64) -> Self {
        let d = g.dim();
        let generator = g.clone();
        let diag = generator.a_diagonal();
        // column-major: element (m, n) at n*d + m. Populations are left in the
        // explicit part so that every stage has the same trace.
        let mut lambda = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                lambda.push(if m == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    diag[m] + diag[n].conj()
                });
            }
        }
        let mut e = Vec::with_capacity(d * d);
        let mut e2 = Vec::with_capacity(d * d);
        let mut q = Vec::with_capacity(d * d);
        let mut f1 = Vec::with_capacity(d * d);
        let mut f2 = Vec::with_capacity(d * d);
        let mut f3 = Vec::with_capacity(d * d);
        for &l in &lambda {
            let z = l * h;
            let [p1, p2, p3] = phi123(z);
            let [p1h, _, _] = phi123(z * 0.5);
            e.push(z.exp());
            e2.push((z * 0.5).exp());
            q.push(p1h * (0.5 * h));
            f1.push((p1 - p2 * 3.0 + p3 * 4.0) * h);
            f2.push((p2 - p3 * 2.0) * h);
            f3.push((-p2 + p3 * 4.0) * h);
        }
        let z = || CMatrix::zeros(d, d);
        Self {
            generator,
            lambda,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            h,
            nu: z(),
            na: z(),
            nb: z(),
            nc: z(),
            a: z(),
            b: z(),
            c: z(),
        }
    }

    /// `out = rhs(y) − λ∘y`.
    fn nonlinear(&self, s: &mut Scratch, t: f64, y: &CMatrix, out: &mut CMatrix) {
        self.generator.rhs_into(t, y, out, s);
        for ((o, &l), &v) in out
            .as_mut_slice()
            .iter_mut()
            .zip(&self.lambda)
            .zip(y.as_slice())
        {
            *o -= l * v;
        }
    }

    fn step(&mut self, s: &mut Scratch, t: f64, y: &mut CMatrix) {
        let h = self.h;
        let mut nu = std::mem::replace(&mut self.nu, CMatrix::zeros(0, 0));
        let mut na = std::mem::replace(&mut self.na, CMatrix::zeros(0, 0));
        let mut nb = std::mem::replace(&mut self.nb, CMatrix::zeros(0, 0));
        let mut nc = std::mem::replace(&mut self.nc, CMatrix::zeros(0, 0));

        self.nonlinear(s, t, y, &mut nu);
        {
            let (a, u, n) = (self.a.as_mut_slice(), y.as_slice(), nu.as_slice());
            for i in 0..a.len() {
                a[i] = self.e2[i] * u[i] + self.q[i] * n[i];
            }
        }
        let a_state = std::mem::replace(&mut self.a, CMatrix::zeros(0, 0));
        self.nonlinear(s, t + 0.5 * h, &a_state, &mut na);
        {
            let (b, u, n) = (self.b.as_mut_slice(), y.as_slice(), na.as_slice());
            for i in 0..b.len() {
                b[i] = self.e2[i] * u[i] + self.q[i] * n[i];
            }
        }
        let b_state = std::mem::replace(&mut self.b, CMatrix::zeros(0, 0));
        self.nonlinear(s, t + 0.5 * h, &b_state, &mut nb);
        {
            let (c, av, nbv, nuv) = (
                self.c.as_mut_slice(),
                a_state.as_slice(),
                nb.as_slice(),
                nu.as_slice(),
            );
            for i in 0..c.len() {
                c[i] = self.e2[i] * av[i] + self.q[i] * (nbv[i] * 2.0 - nuv[i]);
            }
        }
        let c_state = std::mem::replace(&mut self.c, CMatrix::zeros(0, 0));
        self.nonlinear(s, t + h, &c_state, &mut nc);
        {
            let u = y.as_mut_slice();
            let (nuv, nav, nbv, ncv) = (nu.as_slice(), na.as_slice(), nb.as_slice(), nc.as_slice());
            for i in 0..u.len() {
                u[i] = self.e[i] * u[i]
                    + self.f1[i] * nuv[i]
                    + self.f2[i] * (nav[i] + nbv[i]) * 2.0
                    + self.f3[i] * ncv[i];
            }
        }
        self.a = a_state;
        self.b = b_state;
        self.c = c_state;
        self.nu = nu;
        self.na = na;
        self.nb = nb;
        self.nc = nc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_branches_agree_at_boundary() {
        for z in [
            Complex64::new(0.999_999, 0.0),
            Complex64::new(-0.2, 0.979),
            Complex64::new(0.0, -0.9999),
        ] {
            let inner = phi123(z);
            let outer = phi123(z * 1.000_002);
            for k in 0..3 {
                assert!(
                    (inner[k] - outer[k]).norm() < 1e-5,
                    "{k}: {} {}",
                    inner[k],
                    outer[k]
                );
            }
        }
        let p = phi123(Complex64::new(0.0, 0.0));
        assert!((p[0] - 1.0).norm() < 1e-16);
        assert!((p[1] - 0.5).norm() < 1e-16);
        assert!((p[2] - 1.0 / 6.0).norm() < 1e-16);
    }

    #[test]
    fn liouvillian_matches_rhs() {
        use crate::operator::{atom_op, embed, fock_destroy, AtomOp, HilbertSpace};
        let space = HilbertSpace::new(vec![2, 3]).unwrap();
        let a = embed(&fock_destroy(3).unwrap(), 1, &space).unwrap();
        let sm = embed(&atom_op(AtomOp::SigmaMinus), 0, &space).unwrap();
        let hop = &(&sm.dagger() * &a) + &(&a.dagger() * &sm);
        let h0 = &(1.3 * &(&a.dagger() * &a)) + &(0.7 * &hop);
        let mut ds = vec![
            DissipatorSpec::standard(a.clone(), 0.4).unwrap(),
            DissipatorSpec::standard(sm.clone(), 0.2).unwrap(),
        ];
        ds.extend(DissipatorSpec::two_photon_pair(
            a.clone(),
            Complex64::new(0.1, 0.05),
        ));
        let g = Generator::new(&Hamiltonian::constant(h0), &ds).unwrap();
        let l = liouvillian(&g);
        let d = 6;
        let rho = CMatrix::from_fn(d, d, |i, j| {
            let x = Complex64::new(((i * 7 + j * 3) % 5 + 1) as f64, (i as f64) - (j as f64));
            if i == j {
                Complex64::new(x.re, 0.0)
            } else {
                x
            }
        });
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let direct = g.rhs(0.0, &rho);
        let via = &l * CVector::from_column_slice(rho.as_slice());
        let err = direct
            .as_slice()
            .iter()
            .zip(via.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn record_count_arithmetic() {
        let c = IntegratorConfig::adaptive(0.01, 1.0, 10);
        assert_eq!(c.record_count(), 11);
        let c = IntegratorConfig::adaptive(0.01, 1.05, 10);
        assert_eq!(c.record_count(), 11);
        let c = IntegratorConfig::adaptive(0.1, 0.3, 1);
        assert_eq!(c.record_count(), 4);
    }

    #[test]
    fn config_validation() {
        let mut c = IntegratorConfig::adaptive(0.01, 1.0, 10);
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        c.dt = 0.1;
        c.record_stride = 0;
        assert!(c.validate().is_err());
    }
}

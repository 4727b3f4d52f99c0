//! Time-dependent Schrödinger integration and the observables built on it.
//!
//! The integrator is the fourth-order commutator-free Magnus scheme with two
//! exponentials per step, evaluated at the Gauss-Legendre nodes. Each
//! exponential is applied by Lanczos, so no matrix exponential is formed.
//! Step size is controlled by step doubling.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::hilbert::{norm, Basis, Factor, HilbertError, Operator, StateVector};
use crate::linalg::{expv_lanczos, Chebyshev, LinalgError};
use crate::special::ln_factorial;

#[derive(Debug, Error)]
pub enum PropagateError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },
    #[error("norm drift {drift:e} exceeds tolerance {tol:e}")]
    NormDrift { drift: f64, tol: f64 },
    #[error("initial state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("time grid must start at 0 and be nondecreasing")]
    BadGrid,
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("operator is not Hermitian (defect {0:e}); use expectation_complex")]
    NonHermitian(f64),
    #[error("averaging window is empty or outside the series")]
    EmptyWindow,
    #[error("coherent-state tail mass {0:e} exceeds the hard limit 1e-4")]
    TailTooLarge(f64),
    #[error("coefficient is not periodic with period {0}")]
    NotPeriodic(f64),
    #[error(transparent)]
    Krylov(#[from] LinalgError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Real scalar multiplying one operator of a drive protocol.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `amplitude * cos(omega t + phase)`
    Cosine { amplitude: f64, omega: f64, phase: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn cos(amplitude: f64, omega: f64) -> Self {
        Coefficient::Cosine {
            amplitude,
            omega,
            phase: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Cosine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).cos(),
            Coefficient::Custom(f) => f(t),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Cosine {
                amplitude,
                omega,
                phase,
            } => write!(f, "Cosine({amplitude}, ω={omega}, φ={phase})"),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DriveTerm {
    pub op: Operator,
    pub coeff: Coefficient,
}

/// `H(t) = Σ_k f_k(t) O_k` with Hermitian `O_k` and real `f_k`.
#[derive(Clone, Debug)]
pub struct DriveProtocol {
    basis: Basis,
    terms: Vec<DriveTerm>,
    period: Option<f64>,
}

impl DriveProtocol {
    pub fn new(basis: Basis) -> Self {
        Self {
            basis,
            terms: Vec::new(),
            period: None,
        }
    }

    pub fn with_term(mut self, op: Operator, coeff: Coefficient) -> Result<Self, PropagateError> {
        if op.dim() != self.basis.dim() {
            return Err(PropagateError::BasisMismatch(format!(
                "term of dimension {} on basis {}",
                op.dim(),
                self.basis
            )));
        }
        self.terms.push(DriveTerm { op, coeff });
        Ok(self)
    }

    /// Flags the protocol periodic after checking every coefficient at
    /// sampled times.
    pub fn with_period(mut self, period: f64) -> Result<Self, PropagateError> {
        for term in &self.terms {
            for k in 0..32 {
                let t = period * (k as f64 * 0.37 + 0.011);
                let (a, b) = (term.coeff.eval(t), term.coeff.eval(t + period));
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(PropagateError::NotPeriodic(period));
                }
            }
        }
        self.period = Some(period);
        Ok(self)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        self.terms
            .iter()
            .fold(Operator::zeros(self.basis.clone()), |acc, term| {
                &acc + &term.op.scale_real(term.coeff.eval(t))
            })
    }

    /// `out += Σ_j w_j H(t_j) x`
    fn apply_mix(&self, mix: &[(f64, f64)], x: &[C64], out: &mut [C64]) {
        for term in &self.terms {
            let s: f64 = mix.iter().map(|&(t, w)| w * term.coeff.eval(t)).sum();
            if s != 0.0 {
                term.op.apply_add(C64::new(s, 0.0), x, out);
            }
        }
    }

    /// Cheap upper bound on `max_t ||H(t)||` from the term norms.
    fn norm_bound(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coeff.eval(t).abs().max(1e-300) * term.op.row_sum_norm())
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Bound on `| ||ψ|| - 1 |` over the trajectory.
    pub tol: f64,
    /// Step-doubling error target per step.
    pub local_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub krylov_dim: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            local_tol: 1e-10,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
            krylov_dim: 48,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub norm_drift: f64,
}

impl Trajectory {
    pub fn basis(&self) -> &Basis {
        self.states[0].basis()
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn cfm4_step(
    h_t: &DriveProtocol,
    psi: &[C64],
    t: f64,
    h: f64,
    opts: &EvolveOptions,
) -> Result<Vec<C64>, PropagateError> {
    let t1 = t + (0.5 - SQRT3 / 6.0) * h;
    let t2 = t + (0.5 + SQRT3 / 6.0) * h;
    let a1 = 0.25 + SQRT3 / 6.0;
    let a2 = 0.25 - SQRT3 / 6.0;
    let ktol = opts.local_tol * 1e-2;
    let first = [(t1, a1), (t2, a2)];
    let second = [(t1, a2), (t2, a1)];
    let (mid, _) = expv_lanczos(
        |x, out| h_t.apply_mix(&first, x, out),
        psi,
        h,
        ktol,
        opts.krylov_dim,
    )?;
    let (end, _) = expv_lanczos(
        |x, out| h_t.apply_mix(&second, x, out),
        &mid,
        h,
        ktol,
        opts.krylov_dim,
    )?;
    Ok(end)
}

/// Integrates `i dψ/dt = H(t) ψ` and calls `observe(index, t, ψ)` at every
/// grid time. Returns the maximal norm drift seen on the grid.
pub fn evolve_observe<F>(
    h_t: &DriveProtocol,
    psi0: &StateVector,
    t_grid: &[f64],
    opts: &EvolveOptions,
    mut observe: F,
) -> Result<f64, PropagateError>
where
    F: FnMut(usize, f64, &[C64]),
{
    check_inputs(h_t.basis(), psi0, t_grid)?;
    let mut psi = psi0.amplitudes().to_vec();
    let mut t = 0.0;
    let mut drift: f64 = 0.0;
    let mut steps = 0usize;
    let mut h = (0.1 / h_t.norm_bound(0.0).max(1e-3)).min(opts.max_step);
    for (idx, &target) in t_grid.iter().enumerate() {
        while t < target {
            let remaining = target - t;
            let hh = h.min(remaining);
            let full = cfm4_step(h_t, &psi, t, hh, opts)?;
            let half = cfm4_step(h_t, &psi, t, 0.5 * hh, opts)?;
            let half = cfm4_step(h_t, &half, t + 0.5 * hh, 0.5 * hh, opts)?;
            let err = full
                .iter()
                .zip(&half)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            steps += 1;
            if steps > opts.max_steps {
                return Err(PropagateError::StepBudget { t, steps });
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (opts.local_tol / err).powf(0.2)).clamp(0.2, 4.0)
            };
            if err <= opts.local_tol {
                psi = half;
                t = if hh == remaining { target } else { t + hh };
                // a grid-clipped step says nothing about the natural step size
                if hh == h || factor < 1.0 {
                    h = (hh * factor).min(opts.max_step);
                }
            } else {
                h = hh * factor;
                if h < opts.min_step {
                    return Err(PropagateError::StepUnderflow { t });
                }
            }
        }
        let n = norm(&psi);
        drift = drift.max((n - 1.0).abs());
        if drift >= opts.tol {
            return Err(PropagateError::NormDrift {
                drift,
                tol: opts.tol,
            });
        }
        observe(idx, target, &psi);
    }
    Ok(drift)
}

fn check_inputs(basis: &Basis, psi0: &StateVector, t_grid: &[f64]) -> Result<(), PropagateError> {
    if psi0.dim() != basis.dim() {
        return Err(PropagateError::BasisMismatch(format!(
            "state of dimension {} on basis {}",
            psi0.dim(),
            basis
        )));
    }
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(PropagateError::NotNormalized(n));
    }
    if t_grid.first() != Some(&0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(PropagateError::BadGrid);
    }
    Ok(())
}

/// Stores the state at every grid time.
pub fn evolve(
    h_t: &DriveProtocol,
    psi0: &StateVector,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory, PropagateError> {
    let basis = psi0.basis().clone();
    let mut states = Vec::with_capacity(t_grid.len());
    let drift = evolve_observe(h_t, psi0, t_grid, opts, |_, _, psi| {
        states.push(StateVector::from_raw(basis.clone(), psi.to_vec()));
    })?;
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        norm_drift: drift,
    })
}

/// Evolution under a time-independent Hermitian operator with a Chebyshev
/// expansion between consecutive grid points.
pub fn evolve_static(
    h: &Operator,
    psi0: &StateVector,
    t_grid: &[f64],
    tol: f64,
) -> Result<Trajectory, PropagateError> {
    let mut states = Vec::with_capacity(t_grid.len());
    let drift = evolve_static_observe(h, psi0, t_grid, tol, |_, _, psi| {
        states.push(StateVector::from_raw(psi0.basis().clone(), psi.to_vec()));
    })?;
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        norm_drift: drift,
    })
}

pub fn evolve_static_observe<F>(
    h: &Operator,
    psi0: &StateVector,
    t_grid: &[f64],
    tol: f64,
    mut observe: F,
) -> Result<f64, PropagateError>
where
    F: FnMut(usize, f64, &[C64]),
{
    check_inputs(h.basis(), psi0, t_grid)?;
    let cheb = Chebyshev::new(h, tol * 1e-4);
    let mut psi = psi0.amplitudes().to_vec();
    let mut t = 0.0;
    let mut drift: f64 = 0.0;
    for (idx, &target) in t_grid.iter().enumerate() {
        if target > t {
            psi = cheb.step(&psi, target - t);
            t = target;
        }
        drift = drift.max((norm(&psi) - 1.0).abs());
        if drift >= tol {
            return Err(PropagateError::NormDrift { drift, tol });
        }
        observe(idx, target, &psi);
    }
    Ok(drift)
}

/// `<ψ(t)|O|ψ(t)>` for Hermitian `O`, reported as real.
pub fn expectation(traj: &Trajectory, op: &Operator) -> Result<Vec<f64>, PropagateError> {
    let defect = op.hermiticity_defect();
    if defect > 1e-12 {
        return Err(PropagateError::NonHermitian(defect));
    }
    Ok(expectation_complex(traj, op)?
        .into_iter()
        .map(|v| v.re)
        .collect())
}

pub fn expectation_complex(traj: &Trajectory, op: &Operator) -> Result<Vec<C64>, PropagateError> {
    if op.dim() != traj.basis().dim() {
        return Err(PropagateError::BasisMismatch(format!(
            "observable of dimension {} on basis {}",
            op.dim(),
            traj.basis()
        )));
    }
    Ok(traj.states.iter().map(|s| s.expectation(op)).collect())
}

/// Linear interpolation of a sampled series.
fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x < t);
    if k == 0 {
        return values[0];
    }
    if k >= times.len() {
        return values[times.len() - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    if t1 == t0 {
        return values[k];
    }
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Trapezoidal mean of a sampled series over `[start, end]`.
pub fn time_average(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<f64, PropagateError> {
    let (a, b) = window;
    if times.len() < 2
        || times.len() != values.len()
        || !(b > a)
        || a < times[0] - 1e-12
        || b > times[times.len() - 1] + 1e-12
    {
        return Err(PropagateError::EmptyWindow);
    }
    let mut pts: Vec<(f64, f64)> = vec![(a, interpolate(times, values, a))];
    for (&t, &v) in times.iter().zip(values) {
        if t > a && t < b {
            pts.push((t, v));
        }
    }
    pts.push((b, interpolate(times, values, b)));
    let integral: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(integral / (b - a))
}

/// Time average over `[0, horizon]` plus the doubling-convergence check:
/// the average over `[0, horizon/2]` must agree with it to `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckedAverage {
    pub value: f64,
    pub half_horizon_value: f64,
    pub converged: bool,
}

pub fn checked_time_average(
    times: &[f64],
    values: &[f64],
    horizon: f64,
    eps: f64,
) -> Result<CheckedAverage, PropagateError> {
    let value = time_average(times, values, (0.0, horizon))?;
    let half = time_average(times, values, (0.0, 0.5 * horizon))?;
    Ok(CheckedAverage {
        value,
        half_horizon_value: half,
        converged: (value - half).abs() < eps,
    })
}

#[derive(Clone, Debug)]
pub struct CoherentState {
    pub state: StateVector,
    /// Poisson weight lost to the truncation, before renormalization.
    pub tail_mass: f64,
}

/// Truncated Glauber coherent state `|α>` on `|0>..|n_max>`.
pub fn coherent_state(alpha: C64, n_max: usize) -> Result<CoherentState, PropagateError> {
    let basis = Basis::single(Factor::Boson { n_max });
    let r2 = alpha.norm_sqr();
    let weight = |n: usize| -> f64 {
        if r2 == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-r2 + n as f64 * r2.ln() - ln_factorial(n as u64)).exp()
        }
    };
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let w = weight(n);
        tail += w;
        if (n as f64 > r2 && w < 1e-18 * (1.0 + tail)) || n > n_max + 10_000 {
            break;
        }
        n += 1;
    }
    if tail > 1e-4 {
        return Err(PropagateError::TailTooLarge(tail));
    }
    if tail > 1e-8 {
        log::warn!("coherent state |α|²={r2} on n_max={n_max} loses tail mass {tail:e}");
    }
    let phase = alpha.arg();
    let amps = (0..=n_max)
        .map(|k| C64::from_polar(weight(k).sqrt(), phase * k as f64))
        .collect();
    Ok(CoherentState {
        state: StateVector::new(basis, amps)?,
        tail_mass: tail,
    })
}

/// Writes `t`, optional Re/Im amplitude columns and named series as CSV.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    series: &[(&str, &[f64])],
    amplitudes: bool,
) -> std::io::Result<()> {
    let mut header = vec!["t".to_string()];
    if amplitudes {
        for k in 0..traj.basis().dim() {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
    }
    header.extend(series.iter().map(|(name, _)| name.to_string()));
    writeln!(w, "{}", header.join(","))?;
    for (i, t) in traj.times.iter().enumerate() {
        let mut row = vec![format!("{t}")];
        if amplitudes {
            for a in traj.states[i].amplitudes() {
                row.push(format!("{}", a.re));
                row.push(format!("{}", a.im));
            }
        }
        row.extend(series.iter().map(|(_, s)| format!("{}", s[i])));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Uniform grid `0, dt, ..., t_max` (last point exactly `t_max`).
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                t_max
            } else {
                t_max * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

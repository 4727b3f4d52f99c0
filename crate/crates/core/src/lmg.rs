//! Driven Lipkin-Meshkov-Glick model `H(t) = Δ cos(ωt) Sz - (λ/S) Sx²`.
//!
//! Spin bases are ordered `m = -S..=S`. Spin coherent states follow
//! `|θ,φ⟩ = exp[iθ(Sx cos φ - Sy sin φ)] |S,S⟩`, so `|θ=π⟩ ∝ |S,-S⟩` sits at
//! the south pole of the Husimi sphere.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floquet::{build_floquet_harmonic, FloquetError, FloquetSpec};
use crate::hilbert::{
    euclidean_ops, phase_state, spin_ops, tensor, two_s_from, Basis, Boundary, Factor,
    HilbertError, Operator, StateVector,
};
use crate::linalg::{eigvals_general, Chebyshev, LinalgError};
use crate::propagate::{
    evolve_observe, time_average, Coefficient, DriveProtocol, EvolveOptions, PropagateError,
};
use crate::special::{gauss_legendre, ln_binomial};

#[derive(Debug, Error)]
pub enum LmgError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Husimi field integrates to {0}, not 1")]
    Unnormalized(f64),
    #[error("state is zero")]
    ZeroState,
    #[error("no plateaus found; the series is outside the slow-drive regime")]
    NoPlateaus,
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LMGParams {
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub omega: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

fn default_lambda() -> f64 {
    1.0
}

impl LMGParams {
    pub fn new(delta: f64, omega: f64, s: f64) -> Self {
        Self {
            delta,
            lambda: 1.0,
            omega,
            s,
        }
    }

    pub fn two_s(&self) -> Result<u32, LmgError> {
        Ok(two_s_from(self.s)?)
    }

    pub fn validate(&self) -> Result<u32, LmgError> {
        if !(self.lambda > 0.0) {
            return Err(LmgError::InvalidParams(format!("lambda = {}", self.lambda)));
        }
        if !(self.omega > 0.0) {
            return Err(LmgError::InvalidParams(format!("omega = {}", self.omega)));
        }
        if !self.delta.is_finite() {
            return Err(LmgError::InvalidParams(format!("Delta = {}", self.delta)));
        }
        self.two_s()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Default parameters of the delocalized reference point A.
pub fn point_a() -> LMGParams {
    LMGParams::new(3.0, 2.0, 10.0)
}

/// Default parameters of the localized reference point B.
pub fn point_b() -> LMGParams {
    LMGParams::new(10.0, 4.0, 10.0)
}

fn spin_basis(two_s: u32) -> Basis {
    Basis::single(Factor::Spin { two_s })
}

pub fn lmg_hamiltonian(p: &LMGParams) -> Result<DriveProtocol, LmgError> {
    let two_s = p.validate()?;
    let ops = spin_ops(two_s)?;
    let s = two_s as f64 / 2.0;
    Ok(DriveProtocol::new(spin_basis(two_s))
        .with_term(ops.sz.clone(), Coefficient::cos(p.delta, p.omega))?
        .with_term(ops.sx.matmul(&ops.sx), Coefficient::Constant(-p.lambda / s))?
        .with_period(p.period())?)
}

/// The Dicke state `|S,-S⟩`.
pub fn south_pole(two_s: u32) -> StateVector {
    StateVector::basis_state(spin_basis(two_s), 0)
}

/// Coefficients of `|θ,φ⟩` on `|S, S-k⟩`, `k = 0..=2S`:
/// `sqrt(C(2S,k)) cos^{2S-k}(θ/2) sin^k(θ/2) (i e^{-iφ})^k`.
fn coherent_coefficients(theta: f64, phi: f64, two_s: u32) -> Vec<C64> {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let rot = C64::new(0.0, 1.0) * C64::from_polar(1.0, -phi);
    let n = two_s as u64;
    (0..=n)
        .map(|k| {
            let mag = if c == 0.0 && k < n || s == 0.0 && k > 0 {
                0.0
            } else {
                (0.5 * ln_binomial(n, k)).exp()
                    * c.abs().powi((n - k) as i32)
                    * s.abs().powi(k as i32)
                    * c.signum().powi((n - k) as i32)
            };
            rot.powu(k as u32) * mag
        })
        .collect()
}

pub fn spin_coherent_state(theta: f64, phi: f64, two_s: u32) -> StateVector {
    let coeff = coherent_coefficients(theta, phi, two_s);
    let d = two_s as usize + 1;
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for (k, c) in coeff.into_iter().enumerate() {
        amps[d - 1 - k] = c;
    }
    StateVector::new(spin_basis(two_s), amps).expect("coherent state has unit norm")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `dθ dφ`
    #[default]
    Plain,
    /// `sin θ dθ dφ`
    Spherical,
}

/// Gauss-Legendre rule in `θ`, uniform periodic rule in `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub measure: Measure,
}

impl HusimiGrid {
    /// `4(2S+1)` points per axis.
    pub fn default_for(two_s: u32) -> Self {
        let n = 4 * (two_s as usize + 1);
        Self {
            n_theta: n,
            n_phi: n,
            measure: Measure::Plain,
        }
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn thetas(&self) -> Vec<f64> {
        gauss_legendre(self.n_theta)
            .0
            .into_iter()
            .map(|x| 0.5 * PI * (x + 1.0))
            .collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|j| 2.0 * PI * j as f64 / self.n_phi as f64)
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let (x, w) = gauss_legendre(self.n_theta);
        x.into_iter()
            .zip(w)
            .map(|(x, w)| {
                let cell = 0.5 * PI * w * dphi;
                match self.measure {
                    Measure::Plain => cell,
                    Measure::Spherical => cell * (0.5 * PI * (x + 1.0)).sin(),
                }
            })
            .collect()
    }
}

/// Sampled `Q(θ,φ)`, normalized to unit integral over `grid.measure`.
#[derive(Clone, Debug, Serialize)]
pub struct HusimiField {
    pub grid: HusimiGrid,
    pub two_s: u32,
    /// Row-major, `values[i * n_phi + j] = Q(θ_i, φ_j)`.
    pub values: Vec<f64>,
    /// Integral of the raw overlaps before normalization.
    pub raw_integral: f64,
}

impl HusimiField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_phi + j]
    }

    pub fn integral(&self) -> f64 {
        integrate(&self.grid, &self.values)
    }

    /// Grid point of the maximum as `(θ, φ)`.
    pub fn argmax(&self) -> (f64, f64) {
        let k = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|x| x.0)
            .unwrap_or(0);
        let (i, j) = (k / self.grid.n_phi, k % self.grid.n_phi);
        (self.grid.thetas()[i], self.grid.phis()[j])
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,phi,q")?;
        let (ts, ps) = (self.grid.thetas(), self.grid.phis());
        for (i, t) in ts.iter().enumerate() {
            for (j, p) in ps.iter().enumerate() {
                writeln!(w, "{t},{p},{}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn integrate(grid: &HusimiGrid, values: &[f64]) -> f64 {
    let w = grid.weights();
    values
        .chunks(grid.n_phi)
        .zip(&w)
        .map(|(row, wi)| wi * row.iter().sum::<f64>())
        .sum()
}

fn normalize_field(grid: HusimiGrid, two_s: u32, raw: Vec<f64>) -> HusimiField {
    let raw_integral = integrate(&grid, &raw);
    let values = raw.into_iter().map(|q| q / raw_integral).collect();
    HusimiField {
        grid,
        two_s,
        values,
        raw_integral,
    }
}

/// `⟨θ,φ|ψ⟩` on the product of the given nodes, θ-major.
fn overlaps(amps: &[C64], two_s: u32, thetas: &[f64], phis: &[f64]) -> Vec<C64> {
    let d = two_s as usize + 1;
    let mut out = Vec::with_capacity(thetas.len() * phis.len());
    for &theta in thetas {
        // conj of the coefficients with the φ-dependence split off
        let mags = coherent_coefficients(theta, 0.0, two_s);
        let b: Vec<C64> = (0..d)
            .map(|k| mags[k].conj() * amps[d - 1 - k])
            .collect();
        for &phi in phis {
            let z = C64::from_polar(1.0, phi);
            // Σ_k b_k z^k by Horner
            let v = b.iter().rev().fold(C64::new(0.0, 0.0), |acc, bk| acc * z + bk);
            out.push(v);
        }
    }
    out
}

pub fn husimi(psi: &StateVector, grid: &HusimiGrid) -> Result<HusimiField, LmgError> {
    let two_s = match psi.basis().factors() {
        [Factor::Spin { two_s }] => *two_s,
        _ => {
            return Err(LmgError::InvalidParams(format!(
                "Husimi function needs a single spin factor, got {}",
                psi.basis()
            )))
        }
    };
    let raw = overlaps(psi.amplitudes(), two_s, &grid.thetas(), &grid.phis())
        .into_iter()
        .map(|v| v.norm_sqr())
        .collect();
    Ok(normalize_field(*grid, two_s, raw))
}

/// `Q = ⟨θ,φ|ρ|θ,φ⟩` for a density matrix on the spin space.
pub fn husimi_mixed(rho: &Mat<C64>, two_s: u32, grid: &HusimiGrid) -> Result<HusimiField, LmgError> {
    let d = two_s as usize + 1;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(LmgError::InvalidParams(format!(
            "{}x{} density matrix for 2S = {two_s}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut raw = Vec::with_capacity(grid.n_theta * grid.n_phi);
    for theta in grid.thetas() {
        for phi in grid.phis() {
            let c = spin_coherent_state(theta, phi, two_s);
            let c = c.amplitudes();
            let mut q = C64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    q += c[a].conj() * rho[(a, b)] * c[b];
                }
            }
            raw.push(q.re);
        }
    }
    Ok(normalize_field(*grid, two_s, raw))
}

fn calibration_cache() -> &'static Mutex<HashMap<(u32, Measure), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, Measure), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `∫Q²` of the normalized reference coherent state `|θ=π/2, φ=0⟩`. The
/// φ-rule is exact for the band-limited integrand and θ uses Gauss-Legendre
/// nodes. Any coherent state gives the same value under the spherical
/// measure.
pub fn calibration_constant(two_s: u32, measure: Measure) -> f64 {
    if let Some(v) = calibration_cache().lock().unwrap().get(&(two_s, measure)) {
        return *v;
    }
    let n = two_s as usize;
    let (x, w) = gauss_legendre(4 * n + 64);
    let thetas: Vec<f64> = x.iter().map(|x| 0.5 * PI * (x + 1.0)).collect();
    let n_phi = 4 * n + 4;
    let phis: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    let psi = spin_coherent_state(0.5 * PI, 0.0, two_s);
    let q = overlaps(psi.amplitudes(), two_s, &thetas, &phis);
    let (mut int_q, mut int_q2) = (0.0, 0.0);
    for (i, (theta, wi)) in thetas.iter().zip(&w).enumerate() {
        let jac = 0.5 * PI * wi * 2.0 * PI / n_phi as f64 * match measure {
            Measure::Plain => 1.0,
            Measure::Spherical => theta.sin(),
        };
        for v in &q[i * n_phi..(i + 1) * n_phi] {
            let v = v.norm_sqr();
            int_q += jac * v;
            int_q2 += jac * v * v;
        }
    }
    let c = int_q2 / (int_q * int_q);
    calibration_cache().lock().unwrap().insert((two_s, measure), c);
    c
}

/// `∫Q²` over the field's measure divided by the coherent-state value.
pub fn partition_ratio(field: &HusimiField) -> Result<f64, LmgError> {
    let total = field.integral();
    if (total - 1.0).abs() > 1e-6 {
        return Err(LmgError::Unnormalized(total));
    }
    let sq: Vec<f64> = field.values.iter().map(|v| v * v).collect();
    Ok(integrate(&field.grid, &sq) / calibration_constant(field.two_s, field.grid.measure))
}

/// Convenience: partition ratio of a pure state on the default grid.
pub fn state_partition_ratio(psi: &StateVector) -> Result<f64, LmgError> {
    let two_s = (psi.dim() - 1) as u32;
    partition_ratio(&husimi(psi, &HusimiGrid::default_for(two_s))?)
}

/// Zeros of the Husimi function from the roots of the Majorana polynomial
/// `P(u) = Σ_j sqrt(C(2S,j)) ψ_{m=j-S} u^j`. A root `u` sits at
/// `θ = 2 atan(1/|u|)`, `φ = arg(i/u)`; the `2S - deg P` roots at infinity
/// all sit at the north pole.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StellarZeros {
    pub two_s: u32,
    /// Finite roots of the polynomial.
    pub roots: Vec<C64>,
    /// `(θ, φ)` of each finite root.
    pub points: Vec<(f64, f64)>,
    /// Degree of the polynomial, the number of finite zeros.
    pub z: usize,
    /// Multiplicity of the root at infinity (north pole).
    pub at_infinity: usize,
}

impl StellarZeros {
    /// Zeros as `(θ, φ, multiplicity)`, the polar one last when present.
    pub fn listing(&self) -> Vec<(f64, f64, usize)> {
        let mut out: Vec<(f64, f64, usize)> = self.points.iter().map(|&(t, p)| (t, p, 1)).collect();
        if self.at_infinity > 0 {
            out.push((0.0, 0.0, self.at_infinity));
        }
        out
    }
}

fn majorana_coefficients(amps: &[C64]) -> Vec<C64> {
    let n = (amps.len() - 1) as u64;
    amps.iter()
        .enumerate()
        .map(|(j, a)| a * (0.5 * ln_binomial(n, j as u64)).exp())
        .collect()
}

pub fn husimi_zeros(psi: &StateVector) -> Result<StellarZeros, LmgError> {
    let amps = psi.amplitudes();
    let two_s = (amps.len() - 1) as u32;
    let a = majorana_coefficients(amps);
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(LmgError::ZeroState);
    }
    let degree = a
        .iter()
        .rposition(|c| c.norm() > 1e-14 * scale)
        .unwrap_or(0);
    let roots = if degree == 0 {
        Vec::new()
    } else {
        // companion matrix of the monic polynomial
        let lead = a[degree];
        let mut comp = Mat::<C64>::zeros(degree, degree);
        for i in 1..degree {
            comp[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for j in 0..degree {
            comp[(j, degree - 1)] = -a[j] / lead;
        }
        let mut r = eigvals_general(&comp)?;
        for u in r.iter_mut() {
            *u = polish_root(&a[..=degree], *u);
        }
        r.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        r
    };
    let points = roots
        .iter()
        .map(|u| {
            let theta = 2.0 * (1.0 / u.norm()).atan();
            let phi = (C64::new(0.0, 1.0) / u).arg().rem_euclid(2.0 * PI);
            (theta, phi)
        })
        .collect();
    Ok(StellarZeros {
        two_s,
        roots,
        points,
        z: degree,
        at_infinity: two_s as usize - degree,
    })
}

fn polish_root(a: &[C64], mut u: C64) -> C64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for c in a.iter().rev() {
            dp = dp * u + p;
            p = p * u + c;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.norm() > 1e-3 * (1.0 + u.norm()) {
            break;
        }
        u -= step;
    }
    u
}

/// Rebuilds the state (up to a global phase) from its stellar zeros.
pub fn stellar_reconstruction(zeros: &StellarZeros) -> Result<StateVector, LmgError> {
    let n = zeros.two_s as usize;
    let mut poly = vec![C64::new(1.0, 0.0)];
    for r in &zeros.roots {
        let mut next = vec![C64::new(0.0, 0.0); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * r;
        }
        poly = next;
    }
    let mut amps = vec![C64::new(0.0, 0.0); n + 1];
    for (j, c) in poly.into_iter().enumerate() {
        amps[j] = c / (0.5 * ln_binomial(n as u64, j as u64)).exp();
    }
    StateVector::new(spin_basis(zeros.two_s), amps).map_err(|_| LmgError::ZeroState)
}

/// A detected magnetization jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub t: f64,
    pub before: f64,
    pub after: f64,
}

impl Jump {
    pub fn size(&self) -> f64 {
        self.after - self.before
    }
}

/// Mean of `values` over samples with `times` in `[a, b]`, or `None`.
fn window_mean(times: &[f64], values: &[f64], a: f64, b: f64) -> Option<f64> {
    let lo = times.partition_point(|&t| t < a);
    let hi = times.partition_point(|&t| t <= b);
    (hi > lo).then(|| values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64)
}

/// Plateau and jump detection on a sampled `⟨Sz⟩(t)`.
///
/// The window `w` is a quarter drive period. At each sample the means over
/// `[t-w, t]` and `[t, t+w]` are compared; samples where they differ by
/// less than three times the fast-oscillation amplitude belong to plateaus.
/// A jump is reported between consecutive plateaus whose means differ by
/// more than the same threshold, at the sample of largest contrast.
pub fn detect_jumps(times: &[f64], sz: &[f64], omega: f64) -> Result<Vec<Jump>, LmgError> {
    if times.len() != sz.len() || times.len() < 3 || !(omega > 0.0) {
        return Err(LmgError::InvalidParams("series too short or ω ≤ 0".into()));
    }
    let w = 0.5 * PI / omega;
    let (t0, t1) = (times[0], times[times.len() - 1]);
    // fast-oscillation amplitude: median absolute deviation from the
    // centred sliding mean, scaled to a sinusoid amplitude
    let mut dev: Vec<f64> = times
        .iter()
        .zip(sz)
        .filter_map(|(&t, &v)| window_mean(times, sz, t - 0.5 * w, t + 0.5 * w).map(|m| (v - m).abs()))
        .collect();
    dev.sort_by(f64::total_cmp);
    let amplitude = dev[dev.len() / 2] / std::f64::consts::FRAC_1_SQRT_2;
    let threshold = 3.0 * amplitude;

    let mut contrast = vec![f64::NAN; times.len()];
    for (i, &t) in times.iter().enumerate() {
        if t - w < t0 || t + w > t1 {
            continue;
        }
        if let (Some(l), Some(r)) = (
            window_mean(times, sz, t - w, t),
            window_mean(times, sz, t, t + w),
        ) {
            contrast[i] = r - l;
        }
    }
    // plateaus: maximal runs of stable samples
    let mut plateaus: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for i in 0..=times.len() {
        let stable = i < times.len() && contrast[i].is_finite() && contrast[i].abs() <= threshold;
        match (stable, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                plateaus.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if plateaus.is_empty() {
        return Err(LmgError::NoPlateaus);
    }
    let level = |(s, e): (usize, usize)| sz[s..e].iter().sum::<f64>() / (e - s) as f64;
    let mut jumps = Vec::new();
    for pair in plateaus.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (before, after) = (level(a), level(b));
        if (after - before).abs() <= threshold {
            continue;
        }
        let k = (a.1..b.0)
            .filter(|&i| contrast[i].is_finite())
            .max_by(|&x, &y| contrast[x].abs().total_cmp(&contrast[y].abs()));
        if let Some(k) = k {
            jumps.push(Jump {
                t: times[k],
                before,
                after,
            });
        }
    }
    Ok(jumps)
}

/// Mean-field trajectory on the unit sphere.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub n: Vec<[f64; 3]>,
    /// `max | |n| - 1 |` over the grid.
    pub norm_defect: f64,
}

/// Mean-field field `B = (-2λ n_x, 0, Δ cos ωt)`; the spin obeys `dn/dt = B × n`.
fn classical_rhs(p: &LMGParams, t: f64, n: [f64; 3]) -> [f64; 3] {
    let b = [-2.0 * p.lambda * n[0], 0.0, p.delta * (p.omega * t).cos()];
    [
        b[1] * n[2] - b[2] * n[1],
        b[2] * n[0] - b[0] * n[2],
        b[0] * n[1] - b[1] * n[0],
    ]
}

/// One step of the two-stage Gauss-Legendre collocation method, which
/// preserves `|n|` up to the stage-solve tolerance.
fn gauss_legendre_step(p: &LMGParams, t: f64, n: [f64; 3], h: f64) -> [f64; 3] {
    const S3: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
    let a = [[0.25, 0.25 - S3], [0.25 + S3, 0.25]];
    let c = [0.5 - S3, 0.5 + S3];
    let mut k = [classical_rhs(p, t, n); 2];
    for _ in 0..100 {
        let mut next = k;
        let mut change: f64 = 0.0;
        for i in 0..2 {
            let mut y = n;
            for d in 0..3 {
                y[d] += h * (a[i][0] * k[0][d] + a[i][1] * k[1][d]);
            }
            next[i] = classical_rhs(p, t + c[i] * h, y);
            for d in 0..3 {
                change = change.max((next[i][d] - k[i][d]).abs());
            }
        }
        k = next;
        if change * h < 1e-16 {
            break;
        }
    }
    let mut out = n;
    for d in 0..3 {
        out[d] += 0.5 * h * (k[0][d] + k[1][d]);
    }
    out
}

/// Largest step used by the mean-field integrator.
pub fn classical_step(p: &LMGParams) -> f64 {
    0.02 / (p.delta.abs() + 2.0 * p.lambda + p.omega).max(1e-3)
}

fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    // mean spin of |θ,φ⟩ under the generator convention of the coherent state
    [
        theta.sin() * phi.sin(),
        theta.sin() * phi.cos(),
        theta.cos(),
    ]
}

/// Integrates the mean-field equations from the mean spin direction of
/// `|θ0,φ0⟩`, reporting `n` on `t_grid` (which must start at 0).
pub fn semiclassical_evolve(
    theta0: f64,
    phi0: f64,
    p: &LMGParams,
    t_grid: &[f64],
) -> Result<ClassicalTrajectory, LmgError> {
    if t_grid.first() != Some(&0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(LmgError::Propagate(PropagateError::BadGrid));
    }
    let h_max = classical_step(p);
    let mut n = unit_vector(theta0, phi0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut defect: f64 = 0.0;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil() as usize;
            let h = span / steps as f64;
            for k in 0..steps {
                n = gauss_legendre_step(p, t + k as f64 * h, n, h);
            }
            t = target;
        }
        defect = defect.max(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs());
        out.push(n);
    }
    Ok(ClassicalTrajectory {
        times: t_grid.to_vec(),
        n: out,
        norm_defect: defect,
    })
}

/// Plateau magnetizations `n_z` of one mean-field run: the mean over a
/// quarter-period window centred on each `t = kπ/ω` (`k ≥ 1`), where the
/// field is strongest, for `count` consecutive plateaus.
pub fn semiclassical_plateaus(
    theta0: f64,
    phi0: f64,
    p: &LMGParams,
    count: usize,
) -> Result<Vec<f64>, LmgError> {
    let half = PI / p.omega;
    let w = 0.5 * PI / p.omega;
    let samples_per_window = 64;
    let mut grid = vec![0.0];
    for k in 1..=count {
        let c = k as f64 * half;
        for s in 0..=samples_per_window {
            grid.push(c - 0.5 * w + w * s as f64 / samples_per_window as f64);
        }
    }
    let traj = semiclassical_evolve(theta0, phi0, p, &grid)?;
    Ok((0..count)
        .map(|k| {
            let lo = 1 + k * (samples_per_window + 1);
            let hi = lo + samples_per_window + 1;
            let ts = &traj.times[lo..hi];
            let zs: Vec<f64> = traj.n[lo..hi].iter().map(|n| n[2]).collect();
            time_average(ts, &zs, (ts[0], ts[ts.len() - 1])).unwrap_or(f64::NAN)
        })
        .collect())
}

/// One grid point of the `(Δ, ω)` sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhasePoint {
    pub delta: f64,
    pub omega: f64,
    pub sz_mean: f64,
    pub pr_mean: f64,
    /// `|avg over [0,T] - avg over [0,T/2]|` of the magnetization.
    pub sz_convergence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub deltas: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Row-major over `(ω, Δ)`: `points[i_omega * deltas.len() + i_delta]`.
    pub points: Vec<Option<PhasePoint>>,
    pub failures: Vec<(f64, f64, String)>,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Horizon in drive periods.
    pub periods: f64,
    /// Cap on the horizon in time units.
    pub max_time: f64,
    /// Samples over the horizon for the averages.
    pub samples: usize,
    pub grid: Option<HusimiGrid>,
    pub evolve: EvolveOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            periods: 200.0,
            max_time: 400.0,
            samples: 400,
            grid: None,
            evolve: EvolveOptions {
                tol: 1e-6,
                local_tol: 1e-8,
                ..EvolveOptions::default()
            },
        }
    }
}

/// Time averages of `⟨Sz⟩` and PR for one parameter set from `|S,-S⟩`.
pub fn phase_point(p: &LMGParams, opts: &SweepOptions) -> Result<PhasePoint, LmgError> {
    let two_s = p.validate()?;
    let h = lmg_hamiltonian(p)?;
    let sz = spin_ops(two_s)?.sz;
    let horizon = (opts.periods * p.period()).min(opts.max_time);
    let times = crate::propagate::uniform_grid(horizon, opts.samples.max(3));
    let grid = opts.grid.unwrap_or_else(|| HusimiGrid::default_for(two_s));
    let mut m = vec![0.0; times.len()];
    let mut pr = vec![0.0; times.len()];
    let basis = spin_basis(two_s);
    let mut failure = None;
    evolve_observe(&h, &south_pole(two_s), &times, &opts.evolve, |i, _, psi| {
        let state = StateVector::from_raw(basis.clone(), psi.to_vec());
        m[i] = state.expectation(&sz).re;
        match husimi(&state, &grid).and_then(|f| partition_ratio(&f)) {
            Ok(v) => pr[i] = v,
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let sz_mean = time_average(&times, &m, (0.0, horizon))?;
    let half = time_average(&times, &m, (0.0, 0.5 * horizon))?;
    Ok(PhasePoint {
        delta: p.delta,
        omega: p.omega,
        sz_mean,
        pr_mean: time_average(&times, &pr, (0.0, horizon))?,
        sz_convergence: (sz_mean - half).abs(),
    })
}

/// Sweeps `(Δ, ω)` in parallel; failed points are recorded and skipped.
pub fn phase_diagram(
    deltas: &[f64],
    omegas: &[f64],
    base: &LMGParams,
    opts: &SweepOptions,
) -> PhaseDiagram {
    let cells: Vec<(f64, f64)> = omegas
        .iter()
        .flat_map(|&w| deltas.iter().map(move |&d| (d, w)))
        .collect();
    let results: Vec<Result<PhasePoint, String>> = cells
        .par_iter()
        .map(|&(delta, omega)| {
            let p = LMGParams {
                delta,
                omega,
                ..*base
            };
            phase_point(&p, opts).map_err(|e| e.to_string())
        })
        .collect();
    let mut points = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for ((d, w), r) in cells.into_iter().zip(results) {
        match r {
            Ok(pt) => points.push(Some(pt)),
            Err(e) => {
                log::warn!("phase-diagram point Δ={d}, ω={w} failed: {e}");
                failures.push((d, w, e));
                points.push(None);
            }
        }
    }
    PhaseDiagram {
        deltas: deltas.to_vec(),
        omegas: omegas.to_vec(),
        points,
        failures,
    }
}

/// `ωE0 + (Δ/2)(E+ + E-)Sz - (λ/S)Sx²` on spin ⊗ lattice.
pub fn lmg_floquet(p: &LMGParams, spec: &FloquetSpec) -> Result<Operator, LmgError> {
    let two_s = p.validate()?;
    let ops = spin_ops(two_s)?;
    let s = two_s as f64 / 2.0;
    Ok(build_floquet_harmonic(
        &ops.sx.matmul(&ops.sx).scale_real(-p.lambda / s),
        &ops.sz.scale_real(p.delta),
        spec,
    )?)
}

/// Spin part `X D` of the first parity and `X` of the second, where
/// `X|m⟩ = |-m⟩` and `D = e^{iπ Sz}`. For half-integer `S` the phase
/// `e^{iπm} = ±i` is what makes `XD` an involution.
fn spin_parities(two_s: u32) -> (Operator, Operator) {
    let basis = spin_basis(two_s);
    let d = two_s as usize + 1;
    let x: Vec<(usize, usize, C64)> = (0..d).map(|i| (d - 1 - i, i, C64::new(1.0, 0.0))).collect();
    let x = Operator::from_triplets(basis.clone(), x);
    let dmat = Operator::from_triplets(
        basis,
        (0..d)
            .map(|i| {
                let m = i as f64 - two_s as f64 / 2.0;
                let phase = match (2.0 * m).rem_euclid(4.0) as u32 {
                    0 => C64::new(1.0, 0.0),
                    1 => C64::new(0.0, 1.0),
                    2 => C64::new(-1.0, 0.0),
                    _ => C64::new(0.0, -1.0),
                };
                (i, i, phase)
            })
            .collect(),
    );
    (x.matmul(&dmat), x)
}

/// Rotation by π about z, `(-1)^{m+S}`: the symmetry of `H(t)` itself.
pub fn spin_z_parity(two_s: u32) -> Operator {
    let d = two_s as usize + 1;
    Operator::diagonal(
        spin_basis(two_s),
        &(0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
    )
}

/// The two parities of the Floquet operator, acting as
/// `(E±, Sx, Sy, Sz) → (-E±, -Sx, Sy, -Sz)` and `(-E±, Sx, -Sy, -Sz)`.
pub fn parity_operators(two_s: u32, m: usize) -> Result<(Operator, Operator), LmgError> {
    let (p1s, p2s) = spin_parities(two_s);
    let sites = 2 * m + 1;
    let lattice = Operator::diagonal(
        Basis::single(Factor::Euclidean { m }),
        &(0..sites)
            .map(|i| if (i + m) % 2 == 0 { 1.0 } else { -1.0 })
            .collect::<Vec<_>>(),
    );
    Ok((p1s.kron(&lattice), p2s.kron(&lattice)))
}

/// Extended-space evolution from `|S,-S⟩ ⊗ |θ=0⟩` for one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct FloquetRun {
    pub params: LMGParams,
    pub sz: Vec<f64>,
    pub e0: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig7 {
    pub times: Vec<f64>,
    pub sites: usize,
    pub a: FloquetRun,
    pub b: FloquetRun,
}

pub fn floquet_run(p: &LMGParams, sites: usize, times: &[f64], tol: f64) -> Result<FloquetRun, LmgError> {
    let two_s = p.validate()?;
    if sites % 2 == 0 || sites < 3 {
        return Err(LmgError::InvalidParams(format!("odd lattice size needed, got {sites}")));
    }
    let spec = FloquetSpec::new(p.omega, sites / 2)?;
    let hf = lmg_floquet(p, &spec)?;
    let basis = hf.basis().clone();
    let sz = tensor(&basis, &[(0, &spin_ops(two_s)?.sz)])?;
    let e0 = tensor(&basis, &[(1, &euclidean_ops(spec.m, Boundary::Open)?.e0)])?;
    let cheb = Chebyshev::new(&hf, tol);
    let mut psi = south_pole(two_s).kron(&phase_state(spec.m, 0.0)).into_amplitudes();
    let mut t = 0.0;
    let (mut out_sz, mut out_e0) = (Vec::new(), Vec::new());
    for &target in times {
        if target > t {
            psi = cheb.step(&psi, target - t);
            t = target;
        }
        let state = StateVector::from_raw(basis.clone(), psi.clone());
        out_sz.push(state.expectation(&sz).re);
        out_e0.push(state.expectation(&e0).re);
    }
    Ok(FloquetRun {
        params: *p,
        sz: out_sz,
        e0: out_e0,
    })
}

pub fn run_fig7(a: &LMGParams, b: &LMGParams, sites: usize, times: &[f64], tol: f64) -> Result<Fig7, LmgError> {
    Ok(Fig7 {
        times: times.to_vec(),
        sites,
        a: floquet_run(a, sites, times, tol)?,
        b: floquet_run(b, sites, times, tol)?,
    })
}

/// Number of slow oscillations of a series. The series is first averaged
/// over a centred window of width `smooth` (one drive period removes the
/// Bloch oscillations), then maxima are counted with a hysteresis of
/// `prominence` times the smoothed range.
pub fn oscillation_count(times: &[f64], values: &[f64], smooth: f64, prominence: f64) -> usize {
    let smoothed: Vec<f64> = times
        .iter()
        .filter_map(|&t| window_mean(times, values, t - 0.5 * smooth, t + 0.5 * smooth))
        .collect();
    let Some(&first) = smoothed.first() else {
        return 0;
    };
    let hi = smoothed.iter().copied().fold(f64::MIN, f64::max);
    let lo = smoothed.iter().copied().fold(f64::MAX, f64::min);
    let step = prominence * (hi - lo);
    if step <= 0.0 {
        return 0;
    }
    let mut count = 0;
    let mut rising: Option<bool> = None;
    let mut extreme = first;
    for v in smoothed {
        match rising {
            None if v > extreme + step => (rising, extreme) = (Some(true), v),
            None if v < extreme - step => (rising, extreme) = (Some(false), v),
            None => {}
            Some(true) if v > extreme => extreme = v,
            Some(true) if v < extreme - step => {
                count += 1;
                (rising, extreme) = (Some(false), v);
            }
            Some(false) if v < extreme => extreme = v,
            Some(false) if v > extreme + step => (rising, extreme) = (Some(true), v),
            _ => {}
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, eigh_dense};
    use crate::propagate::evolve;

    /// `exp(iθ(Sx cos φ - Sy sin φ)) |S,S⟩` by eigendecomposition.
    fn coherent_by_exponential(theta: f64, phi: f64, two_s: u32) -> StateVector {
        let ops = spin_ops(two_s).unwrap();
        let gen = &ops.sx.scale_real(phi.cos()) - &ops.sy.scale_real(phi.sin());
        let e = eigh(&gen).unwrap();
        let d = two_s as usize + 1;
        let top = d - 1;
        let mut out = vec![C64::new(0.0, 0.0); d];
        for k in 0..d {
            let w = C64::from_polar(1.0, theta * e.values[k]) * e.component(top, k).conj();
            for (r, o) in out.iter_mut().enumerate() {
                *o += e.component(r, k) * w;
            }
        }
        StateVector::new(spin_basis(two_s), out).unwrap()
    }

    #[test]
    fn coherent_state_matches_exponential() {
        for &two_s in &[1u32, 4, 7, 20] {
            for &(theta, phi) in &[(0.0, 0.0), (0.3, 1.1), (PI / 2.0, 0.0), (2.5, 4.0), (PI, 0.7)] {
                let a = spin_coherent_state(theta, phi, two_s);
                let b = coherent_by_exponential(theta, phi, two_s);
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert!((x - y).norm() < 1e-10, "2S={two_s} θ={theta} φ={phi}");
                }
                let ops = spin_ops(two_s).unwrap();
                let s = two_s as f64 / 2.0;
                assert!((a.expectation(&ops.sz).re - s * theta.cos()).abs() < 1e-10);
            }
        }
        let north = spin_coherent_state(0.0, 0.3, 6);
        assert_eq!(north.amplitudes()[6], C64::new(1.0, 0.0));
        let south = spin_coherent_state(PI, 0.3, 6);
        assert!((south.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        let eq = spin_coherent_state(PI / 2.0, 0.0, 20);
        let ops = spin_ops(20).unwrap();
        assert!(eq.expectation(&ops.sz).re.abs() < 1e-10);
        assert!(eq.expectation(&ops.sx).re.abs() < 1e-10);
        assert!((eq.expectation(&ops.sy).re - 10.0).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_structure() {
        let p = LMGParams::new(1.5, 0.5, 3.0);
        let h = lmg_hamiltonian(&p).unwrap();
        let ops = spin_ops(6).unwrap();
        let t = 0.5 * PI / p.omega;
        let at = h.hamiltonian_at(t);
        let expected = ops.sx.matmul(&ops.sx).scale_real(-1.0 / 3.0);
        assert!(at.max_abs_diff(&expected) < 1e-12);
        let pz = spin_z_parity(6);
        let (_, x) = spin_parities(6);
        for k in 0..7 {
            let t = 0.83 * k as f64;
            let ht = h.hamiltonian_at(t);
            assert!(ht.commutator(&pz).max_abs() < 1e-12);
            // the spin flip maps H(t) to H(t + T/2)
            let flipped = x.matmul(&ht).matmul(&x);
            assert!(flipped.max_abs_diff(&h.hamiltonian_at(t + 0.5 * p.period())) < 1e-12);
        }
        // spin 1/2: Sx² = 1/4
        let half = spin_ops(1).unwrap();
        let sx2 = half.sx.matmul(&half.sx);
        assert!(sx2.max_abs_diff(&Operator::identity(sx2.basis().clone()).scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn total_spin_conserved() {
        let p = LMGParams::new(2.0, 0.7, 4.0);
        let h = lmg_hamiltonian(&p).unwrap();
        let ops = spin_ops(8).unwrap();
        let s2 = &(&ops.sx.matmul(&ops.sx) + &ops.sy.matmul(&ops.sy)) + &ops.sz.matmul(&ops.sz);
        let times = crate::propagate::uniform_grid(20.0, 21);
        let traj = evolve(&h, &south_pole(8), &times, &EvolveOptions::default()).unwrap();
        for st in &traj.states {
            assert!((st.expectation(&s2).re - 20.0).abs() < 1e-8);
        }
    }

    #[test]
    fn husimi_basics() {
        let two_s = 10;
        let grid = HusimiGrid::default_for(two_s);
        let c = spin_coherent_state(1.2, 2.0, two_s);
        let f = husimi(&c, &grid).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-12);
        assert!(f.values.iter().all(|&v| v >= -1e-14));
        let (t, p) = f.argmax();
        assert!((t - 1.2).abs() < PI / grid.n_theta as f64 + 1e-12);
        assert!((p - 2.0).abs() < 2.0 * PI / grid.n_phi as f64 + 1e-12);

        let d = two_s as usize + 1;
        let rho = Mat::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(1.0 / d as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mixed = husimi_mixed(&rho, two_s, &grid).unwrap();
        // raw overlaps are all exactly 1/(2S+1)
        let expected_raw = (1.0 / d as f64) * 2.0 * PI * PI;
        assert!((mixed.raw_integral - expected_raw).abs() < 1e-12);
        let pr_mixed = partition_ratio(&mixed).unwrap();
        let pr_coherent = partition_ratio(&husimi(&spin_coherent_state(PI / 2.0, 0.0, two_s), &grid).unwrap()).unwrap();
        assert!((pr_coherent - 1.0).abs() < 1e-3);
        assert!(pr_mixed < 0.2 * pr_coherent);
    }

    #[test]
    fn spherical_calibration_is_closed_form() {
        // ∫Q² dΩ of a normalized coherent-state Q is (2S+1)²/(4π(4S+1))
        for &two_s in &[2u32, 10, 20] {
            let n = two_s as f64;
            let exact = (n + 1.0).powi(2) / (4.0 * PI * (2.0 * n + 1.0));
            let c = calibration_constant(two_s, Measure::Spherical);
            assert!((c - exact).abs() < 1e-12 * exact, "{c} vs {exact}");
            let grid = HusimiGrid::default_for(two_s).with_measure(Measure::Spherical);
            let f = husimi(&spin_coherent_state(2.1, 5.0, two_s), &grid).unwrap();
            assert!((partition_ratio(&f).unwrap() - 1.0).abs() < 1e-3);
        }
        let mut bad = husimi(&south_pole(4), &HusimiGrid::default_for(4)).unwrap();
        bad.values.iter_mut().for_each(|v| *v *= 2.0);
        assert!(matches!(partition_ratio(&bad), Err(LmgError::Unnormalized(_))));
    }

    #[test]
    fn oscillation_counts_ignore_fast_ripple() {
        let times: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
        // three slow cycles plus a fast ripple of period 0.5
        let v: Vec<f64> = times
            .iter()
            .map(|t| -(2.0 * PI * 3.0 * t / 40.0).cos() + 0.8 * (2.0 * PI * t / 0.5).sin())
            .collect();
        assert_eq!(oscillation_count(&times, &v, 0.5, 0.5), 3);
        let doubled: Vec<f64> = times.iter().map(|t| -(2.0 * PI * 6.0 * t / 40.0).cos()).collect();
        assert_eq!(oscillation_count(&times, &doubled, 0.5, 0.5), 6);
        assert_eq!(oscillation_count(&times, &vec![1.0; times.len()], 0.5, 0.5), 0);
    }

    #[test]
    fn zeros_of_simple_states() {
        let z = husimi_zeros(&south_pole(8)).unwrap();
        assert_eq!((z.z, z.at_infinity), (0, 8));
        let basis = spin_basis(8);
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        amps[0] = C64::new(1.0, 0.0);
        amps[8] = C64::new(1.0, 0.0);
        let cat = StateVector::new(basis, amps).unwrap();
        let z = husimi_zeros(&cat).unwrap();
        assert_eq!(z.z, 8);
        // u^8 = -1: a ring on the equator with 8-fold symmetry
        let mut phis: Vec<f64> = z.points.iter().map(|p| p.1).collect();
        phis.sort_by(f64::total_cmp);
        for (k, &(theta, _)) in z.points.iter().enumerate() {
            assert!((theta - PI / 2.0).abs() < 1e-10, "root {k}");
        }
        for w in phis.windows(2) {
            assert!((w[1] - w[0] - PI / 4.0).abs() < 1e-10);
        }
        let zero = StateVector::from_raw(spin_basis(2), vec![C64::new(0.0, 0.0); 3]);
        assert!(matches!(husimi_zeros(&zero), Err(LmgError::ZeroState)));
    }

    #[test]
    fn zeros_are_zeros_of_q_and_reconstruct() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for two_s in 1..=10u32 {
            let amps: Vec<C64> = (0..=two_s)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let psi = StateVector::new(spin_basis(two_s), amps).unwrap();
            let z = husimi_zeros(&psi).unwrap();
            assert_eq!(z.z + z.at_infinity, two_s as usize);
            for &(theta, phi) in &z.points {
                let c = spin_coherent_state(theta, phi, two_s);
                assert!(c.inner(&psi).norm_sqr() < 1e-16, "2S={two_s}");
            }
            let back = stellar_reconstruction(&z).unwrap();
            assert!(back.fidelity(&psi) > 1.0 - 1e-8);
        }
    }

    #[test]
    fn jump_detector_on_synthetic_staircase() {
        let omega = 0.05;
        let times = crate::propagate::uniform_grid(6.0 * 2.0 * PI / omega, 6001);
        let levels = [-8.0, 3.0, -2.0, 7.0, 0.5, -6.0, 4.0, -1.0, 9.0, -4.0, 2.0, -7.0, 5.0];
        let series: Vec<f64> = times
            .iter()
            .map(|&t| {
                let k = ((t * omega / PI) + 0.5).floor() as usize;
                levels[k.min(levels.len() - 1)] + 0.3 * (3.0 * t).sin()
            })
            .collect();
        let jumps = detect_jumps(&times, &series, omega).unwrap();
        assert!(jumps.len() >= 10);
        for j in &jumps {
            let k = ((j.t * omega / PI) - 0.5).round();
            let target = (k + 0.5) * PI / omega;
            assert!((j.t - target).abs() < 0.25 * PI / omega);
        }
        let flat = vec![1.5; times.len()];
        assert!(detect_jumps(&times, &flat, omega).unwrap().is_empty());
    }

    #[test]
    fn semiclassical_limits() {
        let p = LMGParams {
            lambda: 1e-300,
            ..LMGParams::new(3.0, 0.4, 10.0)
        };
        let grid = crate::propagate::uniform_grid(10.0, 11);
        let tr = semiclassical_evolve(1.0, 0.2, &p, &grid).unwrap();
        assert!(tr.norm_defect < 1e-10);
        for n in &tr.n {
            assert!((n[2] - 1.0f64.cos()).abs() < 1e-12);
        }
        // azimuth advances by ∫Δ cos ωt dt = Δ sin(ωt)/ω in the precession sense
        let last = tr.n[10];
        let start = unit_vector(1.0, 0.2);
        let rot = (last[1] * start[0] - last[0] * start[1]).atan2(last[0] * start[0] + last[1] * start[1]);
        let expected = p.delta * (p.omega * 10.0).sin() / p.omega;
        assert!((fold_angle(rot - expected)).abs() < 1e-8);

        let p = LMGParams::new(3.0, 0.4, 10.0);
        let tr = semiclassical_evolve(PI, 0.0, &p, &grid).unwrap();
        for n in &tr.n {
            assert!(n[0].abs() < 1e-15 && n[1].abs() < 1e-15);
        }
        let tr = semiclassical_evolve(2.0, 1.0, &p, &crate::propagate::uniform_grid(200.0, 5)).unwrap();
        assert!(tr.norm_defect < 1e-10);
    }

    fn fold_angle(x: f64) -> f64 {
        (x + PI).rem_euclid(2.0 * PI) - PI
    }

    #[test]
    fn semiclassical_matches_large_spin_quantum_short_time() {
        // mean-field and quantum magnetization agree for S = 200 at short times
        let p = LMGParams::new(1.0, 0.8, 200.0);
        let two_s = 400;
        let (theta, phi) = (2.0, 0.5);
        let h = lmg_hamiltonian(&p).unwrap();
        let times = [0.0, 0.5, 1.0];
        let traj = evolve(&h, &spin_coherent_state(theta, phi, two_s), &times, &EvolveOptions::default()).unwrap();
        let cl = semiclassical_evolve(theta, phi, &p, &times).unwrap();
        let ops = spin_ops(two_s).unwrap();
        for (k, st) in traj.states.iter().enumerate() {
            let q = [
                st.expectation(&ops.sx).re / 200.0,
                st.expectation(&ops.sy).re / 200.0,
                st.expectation(&ops.sz).re / 200.0,
            ];
            for d in 0..3 {
                assert!((q[d] - cl.n[k][d]).abs() < 2e-2, "t={} axis {d}: {} vs {}", times[k], q[d], cl.n[k][d]);
            }
        }
    }

    #[test]
    fn floquet_operator_and_parities() {
        for &two_s in &[3u32, 4] {
            let p = LMGParams::new(2.0, 0.25, two_s as f64 / 2.0);
            let spec = FloquetSpec::new(p.omega, 6).unwrap();
            let hf = lmg_floquet(&p, &spec).unwrap();
            assert!(hf.hermiticity_defect() < 1e-12);
            let (p1, p2) = parity_operators(two_s, spec.m).unwrap();
            let id = Operator::identity(hf.basis().clone());
            for par in [&p1, &p2] {
                assert!(par.matmul(par).max_abs_diff(&id) < 1e-15);
                assert!(par.hermiticity_defect() < 1e-15);
                assert!(par.commutator(&hf).max_abs() < 1e-12);
                let ev = eigh(par).unwrap().values;
                assert!(ev.iter().all(|v| (v.abs() - 1.0).abs() < 1e-12));
            }
            let ops = spin_ops(two_s).unwrap();
            let e = euclidean_ops(spec.m, Boundary::Open).unwrap();
            let b = hf.basis().clone();
            let lift = |k: usize, op: &Operator| tensor(&b, &[(k, op)]).unwrap();
            let conj = |par: &Operator, op: &Operator| par.matmul(op).matmul(par);
            let (sx, sy, sz, ep) = (lift(0, &ops.sx), lift(0, &ops.sy), lift(0, &ops.sz), lift(1, &e.eplus));
            assert!(conj(&p1, &sx).max_abs_diff(&-&sx) < 1e-14);
            assert!(conj(&p1, &sy).max_abs_diff(&sy) < 1e-14);
            assert!(conj(&p1, &sz).max_abs_diff(&-&sz) < 1e-14);
            assert!(conj(&p1, &ep).max_abs_diff(&-&ep) < 1e-14);
            assert!(conj(&p2, &sx).max_abs_diff(&sx) < 1e-14);
            assert!(conj(&p2, &sy).max_abs_diff(&-&sy) < 1e-14);
            assert!(conj(&p2, &sz).max_abs_diff(&-&sz) < 1e-14);
            assert!(conj(&p2, &ep).max_abs_diff(&-&ep) < 1e-14);
        }
    }

    #[test]
    fn undriven_floquet_spectrum_is_tensor_sum() {
        let p = LMGParams::new(0.0, 0.3, 2.0);
        let spec = FloquetSpec::new(p.omega, 3).unwrap();
        let hf = lmg_floquet(&p, &spec).unwrap();
        let ops = spin_ops(4).unwrap();
        let st = eigh(&ops.sx.matmul(&ops.sx).scale_real(-0.5)).unwrap().values;
        let mut expected: Vec<f64> = st
            .iter()
            .flat_map(|e| (-3..=3).map(move |m| e + m as f64 * 0.3))
            .collect();
        expected.sort_by(f64::total_cmp);
        let got = eigh_dense(&hf.to_dense()).unwrap().values;
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fig7_initial_values() {
        let times = [0.0, 0.5];
        let run = floquet_run(&LMGParams::new(2.0, 1.0, 3.0), 21, &times, 1e-10).unwrap();
        assert!(run.e0[0].abs() < 1e-12);
        assert!((run.sz[0] + 3.0).abs() < 1e-12);
    }
}

//! Jaynes-Cummings model with a harmonically modulated coupling
//! `g(t) = g0 cos(ωt)`.
//!
//! The Hilbert space is qubit ⊗ boson. Excitation block `n` is spanned by
//! `|n,e⟩` and `|n+1,g⟩`, coupled by `g(t) sqrt(n+1)`. In the Floquet
//! pipeline a block is stored on a qubit factor with `|g⟩ ↔ |n+1,g⟩` and
//! `|e⟩ ↔ |n,e⟩`, tensored with the Fourier lattice.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floquet::{
    accumulate_momentum, build_floquet_harmonic, momenta, project_physical, FloquetError,
    FloquetSpec,
};
use crate::hilbert::{
    boson_ops, euclidean_ops, phase_state, qubit_ops, tensor, Basis, Boundary, Factor,
    HilbertError, Operator, StateVector,
};
use crate::linalg::Chebyshev;
use crate::propagate::{
    coherent_state, evolve_observe, Coefficient, DriveProtocol, EvolveOptions, PropagateError,
};
use crate::special::{bessel_j, ln_factorial};

#[derive(Debug, Error)]
pub enum JcError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("closed-form inversion needs zero detuning (got Δ = {0})")]
    DetunedClosedForm(f64),
    #[error("localization radius {radius:.1} does not fit on M = {m} sites with |j| = {j}")]
    LocalizationExceeds { radius: f64, m: usize, j: i64 },
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AtomState {
    #[default]
    Excited,
    Ground,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub g0: f64,
    pub omega: f64,
    /// Real coherent amplitude of the initial field.
    pub alpha: f64,
    pub n_max: usize,
    #[serde(default)]
    pub atom: AtomState,
}

impl Default for JCParams {
    fn default() -> Self {
        Self::new(0.0, 1.0, 0.025, 5.0)
    }
}

impl JCParams {
    /// Parameters with the default photon cutoff `ceil(|α|² + 6|α|)`.
    pub fn new(delta: f64, g0: f64, omega: f64, alpha: f64) -> Self {
        Self {
            delta,
            g0,
            omega,
            alpha,
            n_max: Self::default_cutoff(alpha),
            atom: AtomState::Excited,
        }
    }

    pub fn default_cutoff(alpha: f64) -> usize {
        (alpha * alpha + 6.0 * alpha.abs()).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<(), JcError> {
        if !(self.g0 >= 0.0) {
            return Err(JcError::InvalidParams(format!("g0 = {}", self.g0)));
        }
        if !(self.omega > 0.0) {
            return Err(JcError::InvalidParams(format!("omega = {}", self.omega)));
        }
        if self.n_max < Self::default_cutoff(self.alpha) {
            return Err(JcError::InvalidParams(format!(
                "n_max = {} below ceil(|α|² + 6|α|) = {}",
                self.n_max,
                Self::default_cutoff(self.alpha)
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn timescales(&self) -> JCTimescales {
        let pi = std::f64::consts::PI;
        let a = self.alpha.abs();
        JCTimescales {
            t_tr: pi / (2.0 * self.omega),
            t_r: 2.0 * pi * a / self.g0,
            t_rabi: pi / (self.g0 * a),
            t_c: 1.0 / (2.0 * self.g0),
        }
    }

    /// Poisson weight of photon number `n` in the initial coherent state.
    pub fn poisson(&self, n: usize) -> f64 {
        let r2 = self.alpha * self.alpha;
        if r2 == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        (-r2 + n as f64 * r2.ln() - ln_factorial(n as u64)).exp()
    }
}

/// Time reversal point, first revival, Rabi time and collapse time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JCTimescales {
    pub t_tr: f64,
    pub t_r: f64,
    pub t_rabi: f64,
    pub t_c: f64,
}

pub fn jc_basis(n_max: usize) -> Basis {
    Basis::new(vec![Factor::Qubit, Factor::Boson { n_max }])
}

/// `(Δ/2)σz + g0 cos(ωt)(a†σ- + aσ+)` on qubit ⊗ boson.
pub fn jc_hamiltonian(p: &JCParams) -> Result<DriveProtocol, JcError> {
    p.validate()?;
    let basis = jc_basis(p.n_max);
    let q = qubit_ops();
    let b = boson_ops(p.n_max)?;
    let detuning = tensor(&basis, &[(0, &q.sz)])?.scale_real(0.5 * p.delta);
    let hop = &tensor(&basis, &[(0, &q.sminus), (1, &b.a_dag)])?
        + &tensor(&basis, &[(0, &q.splus), (1, &b.a)])?;
    Ok(DriveProtocol::new(basis)
        .with_term(detuning, Coefficient::Constant(1.0))?
        .with_term(hop, Coefficient::cos(p.g0, p.omega))?
        .with_period(p.period())?)
}

/// `n̂ + σz/2`, conserved by the JC Hamiltonian.
pub fn excitation_number(n_max: usize) -> Result<Operator, JcError> {
    let basis = jc_basis(n_max);
    let q = qubit_ops();
    let b = boson_ops(n_max)?;
    Ok(&tensor(&basis, &[(1, &b.n)])? + &tensor(&basis, &[(0, &q.sz.scale_real(0.5))])?)
}

pub fn inversion_operator(n_max: usize) -> Result<Operator, JcError> {
    Ok(tensor(&jc_basis(n_max), &[(0, &qubit_ops().sz)])?)
}

/// Initial product state of atom and coherent field.
pub fn initial_state(p: &JCParams) -> Result<StateVector, JcError> {
    let field = coherent_state(C64::new(p.alpha, 0.0), p.n_max)?.state;
    let atom = StateVector::basis_state(
        Basis::single(Factor::Qubit),
        match p.atom {
            AtomState::Excited => 1,
            AtomState::Ground => 0,
        },
    );
    Ok(atom.kron(&field))
}

/// Closed-form inversion at zero detuning:
/// `W(t) = ± Σ_n p_n cos(2Ω_{n+s}(t))`, `Ω_n(t) = sqrt(n) g0 sin(ωt)/ω`,
/// with `s = 1` and sign `+` for an excited atom and `s = 0`, sign `-` for
/// a ground-state atom.
pub fn analytic_inversion(p: &JCParams, t: f64) -> Result<f64, JcError> {
    if p.delta != 0.0 {
        return Err(JcError::DetunedClosedForm(p.delta));
    }
    let big_g = p.g0 * (p.omega * t).sin() / p.omega;
    let (shift, sign) = match p.atom {
        AtomState::Excited => (1.0, 1.0),
        AtomState::Ground => (0.0, -1.0),
    };
    let r2 = p.alpha * p.alpha;
    let mut acc = 0.0;
    let mut mass = 0.0;
    let mut n = 0usize;
    loop {
        let w = p.poisson(n);
        acc += w * (2.0 * ((n as f64 + shift).sqrt() * big_g)).cos();
        mass += w;
        if n as f64 > r2 && 1.0 - mass < 1e-12 {
            break;
        }
        n += 1;
    }
    Ok(sign * acc)
}

/// Second-RWA block `(Δ-ω)/2 σz + (g0/2) sqrt(n) σx`.
pub fn rwa_block(n: usize, p: &JCParams) -> Operator {
    if p.omega < p.g0 {
        log::warn!(
            "ω = {} below g0 = {}: the second rotating-wave approximation is dubious",
            p.omega,
            p.g0
        );
    }
    let q = qubit_ops();
    &q.sz.scale_real(0.5 * (p.delta - p.omega)) + &q.sx.scale_real(0.5 * p.g0 * (n as f64).sqrt())
}

/// Tilted chain `ωE0 + τ (g0 sqrt(n)/2)(E+ + E-)` on `2M+1` sites.
pub fn wannier_stark_chain(n: usize, g0: f64, omega: f64, m: usize, tau: f64) -> Result<Operator, JcError> {
    let e = euclidean_ops(m, Boundary::Open)?;
    Ok(&e.e0.scale_real(omega) + &e.hopping().scale_real(0.5 * tau * g0 * (n as f64).sqrt()))
}

/// Ladder energy `jω` and eigenvector `J_{j-m}(g0 sqrt(n)/ω)` of the
/// `τ = +1` chain.
pub fn wannier_stark_analytic(
    n: usize,
    g0: f64,
    omega: f64,
    j: i64,
    m: usize,
) -> Result<(f64, StateVector), JcError> {
    let x = g0 * (n as f64).sqrt() / omega;
    if x + j.unsigned_abs() as f64 > m as f64 {
        return Err(JcError::LocalizationExceeds {
            radius: x,
            m,
            j,
        });
    }
    let mm = m as i64;
    let amps: Vec<C64> = (-mm..=mm)
        .map(|site| C64::new(bessel_j(j - site, x), 0.0))
        .collect();
    let state = StateVector::new(Basis::single(Factor::Euclidean { m }), amps)?;
    Ok((j as f64 * omega, state))
}

/// Extended-space operator of excitation block `n`:
/// `(Δ/2)σz + g0 sqrt(n+1) σx (E+ + E-)/2 + ωE0`.
pub fn jc_block_floquet(n: usize, p: &JCParams, spec: &FloquetSpec) -> Result<Operator, JcError> {
    let q = qubit_ops();
    Ok(build_floquet_harmonic(
        &q.sz.scale_real(0.5 * p.delta),
        &q.sx.scale_real(p.g0 * ((n + 1) as f64).sqrt()),
        spec,
    )?)
}

/// Three inversion curves on a shared grid.
#[derive(Clone, Debug, Serialize)]
pub struct Fig1 {
    pub times: Vec<f64>,
    pub analytic: Vec<f64>,
    pub timeint: Vec<f64>,
    pub floquet: Vec<f64>,
    pub sites: usize,
    /// Smallest norm of the projected physical state over blocks and times,
    /// a truncation diagnostic (1 on an infinite lattice).
    pub min_projected_norm: f64,
}

#[derive(Clone, Debug)]
pub struct Fig1Options {
    pub points: usize,
    pub t_max: f64,
    pub evolve: EvolveOptions,
    /// Chebyshev accuracy in the Floquet pipeline.
    pub floquet_tol: f64,
}

impl Fig1Options {
    pub fn for_params(p: &JCParams) -> Self {
        Self {
            points: 1001,
            t_max: p.period(),
            evolve: EvolveOptions::default(),
            floquet_tol: 1e-9,
        }
    }
}

fn uniform(t_max: f64, points: usize) -> Vec<f64> {
    crate::propagate::uniform_grid(t_max, points)
}

/// Direct time integration on qubit ⊗ boson.
pub fn inversion_timeint(p: &JCParams, times: &[f64], opts: &EvolveOptions) -> Result<Vec<f64>, JcError> {
    let h = jc_hamiltonian(p)?;
    let psi0 = initial_state(p)?;
    let nb = p.n_max + 1;
    let mut w = vec![0.0; times.len()];
    evolve_observe(&h, &psi0, times, opts, |i, _, psi| {
        let (g, e) = psi.split_at(nb);
        w[i] = e.iter().map(|a| a.norm_sqr()).sum::<f64>() - g.iter().map(|a| a.norm_sqr()).sum::<f64>();
    })?;
    Ok(w)
}

/// Blocks that carry the initial state: `(block index, weight, qubit slot)`.
fn initial_blocks(p: &JCParams) -> (Vec<(usize, f64, usize)>, f64) {
    let mut blocks = Vec::new();
    let mut decoupled = 0.0;
    for n in 0..=p.n_max {
        let w = p.poisson(n);
        if w < 1e-16 {
            continue;
        }
        match p.atom {
            AtomState::Excited => blocks.push((n, w, 1)),
            AtomState::Ground if n == 0 => decoupled += w,
            AtomState::Ground => blocks.push((n - 1, w, 0)),
        }
    }
    let total: f64 = blocks.iter().map(|b| b.1).sum::<f64>() + decoupled;
    for b in &mut blocks {
        b.1 /= total;
    }
    (blocks, decoupled / total)
}

/// Evolves one block in the extended space starting from
/// `|slot⟩ ⊗ |θ=0⟩` and hands each grid time to `observe`.
fn evolve_block<F>(
    block: usize,
    slot: usize,
    p: &JCParams,
    spec: &FloquetSpec,
    times: &[f64],
    tol: f64,
    mut observe: F,
) -> Result<(), JcError>
where
    F: FnMut(usize, f64, &[C64]),
{
    let hf = jc_block_floquet(block, p, spec)?;
    let cheb = Chebyshev::new(&hf, tol);
    let start = StateVector::basis_state(Basis::single(Factor::Qubit), slot).kron(&phase_state(spec.m, 0.0));
    let mut psi = start.into_amplitudes();
    let mut t = 0.0;
    for (i, &target) in times.iter().enumerate() {
        if target > t {
            psi = cheb.step(&psi, target - t);
            t = target;
        }
        observe(i, target, &psi);
    }
    Ok(())
}

/// Floquet-pipeline inversion: per-block extended-space evolution of the
/// phase-state initial condition, projected back to the physical space.
pub fn inversion_floquet(
    p: &JCParams,
    sites: usize,
    times: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64), JcError> {
    let spec = spec_for_sites(p, sites)?;
    spec.check_radius(p.g0 * ((p.n_max + 1) as f64).sqrt() / p.omega);
    let (blocks, decoupled) = initial_blocks(p);
    let parts: Vec<Result<(Vec<f64>, f64), JcError>> = blocks
        .par_iter()
        .map(|&(n, w, slot)| {
            let mut out = vec![0.0; times.len()];
            let mut min_norm = f64::INFINITY;
            evolve_block(n, slot, p, &spec, times, tol, |i, t, psi| {
                let (v, nv) = project_physical(psi, &spec, t);
                min_norm = min_norm.min(nv);
                out[i] = w * (v[1].norm_sqr() - v[0].norm_sqr());
            })?;
            Ok((out, min_norm))
        })
        .collect();
    let mut w = vec![-decoupled; times.len()];
    let mut min_norm = f64::INFINITY;
    for part in parts {
        let (curve, nv) = part?;
        min_norm = min_norm.min(nv);
        w.iter_mut().zip(curve).for_each(|(a, b)| *a += b);
    }
    Ok((w, min_norm))
}

fn spec_for_sites(p: &JCParams, sites: usize) -> Result<FloquetSpec, JcError> {
    if sites % 2 == 0 || sites < 3 {
        return Err(JcError::InvalidParams(format!(
            "lattice needs an odd number of sites ≥ 3, got {sites}"
        )));
    }
    Ok(FloquetSpec::new(p.omega, sites / 2)?)
}

pub fn run_fig1(p: &JCParams, sites: usize, opts: &Fig1Options) -> Result<Fig1, JcError> {
    p.validate()?;
    let times = uniform(opts.t_max, opts.points);
    let analytic = if p.delta == 0.0 {
        times
            .iter()
            .map(|&t| analytic_inversion(p, t))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![f64::NAN; times.len()]
    };
    let timeint = inversion_timeint(p, &times, &opts.evolve)?;
    let (floquet, min_projected_norm) = inversion_floquet(p, sites, &times, opts.floquet_tol)?;
    Ok(Fig1 {
        times,
        analytic,
        timeint,
        floquet,
        sites,
        min_projected_norm,
    })
}

/// Time-resolved momentum distribution of the Fourier lattice.
#[derive(Clone, Debug, Serialize)]
pub struct MomentumMap {
    pub times: Vec<f64>,
    pub momenta: Vec<f64>,
    /// `p[t][k]`
    pub p: Vec<Vec<f64>>,
    pub omega: f64,
}

/// Least-squares line through the unwrapped ridge.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RidgeFit {
    pub slope: f64,
    pub intercept: f64,
}

impl MomentumMap {
    /// Momentum of the most populated bin at every time.
    pub fn ridge(&self) -> Vec<f64> {
        self.p
            .iter()
            .map(|row| {
                let j = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|x| x.0)
                    .unwrap_or(0);
                self.momenta[j]
            })
            .collect()
    }

    pub fn fit_ridge(&self) -> RidgeFit {
        let two_pi = 2.0 * std::f64::consts::PI;
        let raw = self.ridge();
        let mut unwrapped = Vec::with_capacity(raw.len());
        let mut offset = 0.0;
        for (i, &k) in raw.iter().enumerate() {
            if i > 0 {
                let prev = raw[i - 1];
                if k - prev > std::f64::consts::PI {
                    offset -= two_pi;
                } else if k - prev < -std::f64::consts::PI {
                    offset += two_pi;
                }
            }
            unwrapped.push(k + offset);
        }
        let n = self.times.len() as f64;
        let mt = self.times.iter().sum::<f64>() / n;
        let mk = unwrapped.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, k) in self.times.iter().zip(&unwrapped) {
            sxy += (t - mt) * (k - mk);
            sxx += (t - mt) * (t - mt);
        }
        let slope = sxy / sxx;
        RidgeFit {
            slope,
            intercept: mk - slope * mt,
        }
    }

    /// Largest population found farther than `width` (in momentum, on the
    /// circle) from the ridge `k = -ωt`, over all times.
    pub fn off_ridge_mass(&self, width: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.times
            .iter()
            .zip(&self.p)
            .map(|(t, row)| {
                let centre = -self.omega * t;
                row.iter()
                    .zip(&self.momenta)
                    .filter(|(_, k)| {
                        let d = (*k - centre).rem_euclid(two_pi);
                        d.min(two_pi - d) > width
                    })
                    .map(|(v, _)| *v)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

pub fn run_fig2(p: &JCParams, sites: usize, times: &[f64], tol: f64) -> Result<MomentumMap, JcError> {
    p.validate()?;
    let spec = spec_for_sites(p, sites)?;
    let (blocks, decoupled) = initial_blocks(p);
    let n = spec.sites();
    let parts: Vec<Result<Vec<Vec<f64>>, JcError>> = blocks
        .par_iter()
        .map(|&(b, w, slot)| {
            let mut out = vec![vec![0.0; n]; times.len()];
            evolve_block(b, slot, p, &spec, times, tol, |i, _, psi| {
                accumulate_momentum(psi, &spec, w, &mut out[i]);
            })?;
            Ok(out)
        })
        .collect();
    let mut map = vec![vec![0.0; n]; times.len()];
    // the decoupled vacuum stays in the phase state under ωE0
    if decoupled > 0.0 {
        let e = euclidean_ops(spec.m, Boundary::Open)?;
        let h = e.e0.scale_real(p.omega);
        let cheb = Chebyshev::new(&h, tol);
        let mut psi = phase_state(spec.m, 0.0).into_amplitudes();
        let mut t = 0.0;
        for (i, &target) in times.iter().enumerate() {
            if target > t {
                psi = cheb.step(&psi, target - t);
                t = target;
            }
            accumulate_momentum(&psi, &spec, decoupled, &mut map[i]);
        }
    }
    for part in parts {
        for (row, add) in map.iter_mut().zip(part?) {
            row.iter_mut().zip(add).for_each(|(a, b)| *a += b);
        }
    }
    Ok(MomentumMap {
        times: times.to_vec(),
        momenta: momenta(&spec),
        p: map,
        omega: p.omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::quasienergies;
    use crate::hilbert::Operator;
    use crate::linalg::eigh;
    use std::f64::consts::PI;

    #[test]
    fn block_structure_and_symmetry() {
        let p = JCParams {
            n_max: 12,
            ..JCParams::new(0.3, 1.0, 0.5, 1.0)
        };
        let h = jc_hamiltonian(&p).unwrap();
        let n = excitation_number(p.n_max).unwrap();
        let basis = jc_basis(p.n_max);
        let t = 0.37 / p.omega;
        let ht = h.hamiltonian_at(t);
        assert!(ht.commutator(&n).max_abs() < 1e-12);
        // |3,e⟩ couples to |4,g⟩ with g0 cos(ωt) sqrt(4)
        let e3 = basis.compose(&[1, 3]);
        let g4 = basis.compose(&[0, 4]);
        let expected = p.g0 * (p.omega * t).cos() * 2.0;
        assert!((ht.get(e3, g4).re - expected).abs() < 1e-14);
        assert!((ht.get(g4, e3).re - expected).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_keeps_populations() {
        let p = JCParams {
            n_max: 10,
            ..JCParams::new(0.7, 0.0, 0.5, 1.0)
        };
        let times = uniform(20.0, 11);
        let w = inversion_timeint(&p, &times, &EvolveOptions::default()).unwrap();
        assert!(w.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn analytic_identities() {
        let p = JCParams::default();
        assert!((analytic_inversion(&p, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let t_tr = p.timescales().t_tr;
        assert!((t_tr - 62.831_853_071_795_86).abs() < 1e-12);
        assert_eq!(analytic_inversion(&p, 2.0 * t_tr).unwrap(), analytic_inversion(&p, 0.0).unwrap());
        for k in 1..4 {
            let w = analytic_inversion(&p, 2.0 * k as f64 * t_tr).unwrap();
            assert!((w - 1.0).abs() < 1e-12);
        }
        for &s in &[0.5, 3.0, 17.0, 40.0] {
            let a = analytic_inversion(&p, t_tr + s).unwrap();
            let b = analytic_inversion(&p, t_tr - s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let detuned = JCParams::new(0.1, 1.0, 0.025, 5.0);
        assert!(matches!(analytic_inversion(&detuned, 1.0), Err(JcError::DetunedClosedForm(_))));
    }

    #[test]
    fn timeint_matches_closed_form_short_window() {
        for atom in [AtomState::Excited, AtomState::Ground] {
            let p = JCParams {
                atom,
                n_max: 30,
                ..JCParams::new(0.0, 1.0, 0.2, 2.0)
            };
            let times = uniform(p.period(), 201);
            let w = inversion_timeint(&p, &times, &EvolveOptions::default()).unwrap();
            for (t, v) in times.iter().zip(&w) {
                let a = analytic_inversion(&p, *t).unwrap();
                assert!((a - v).abs() < 1e-6, "{atom:?} t={t}: {v} vs {a}");
            }
        }
    }

    #[test]
    fn rwa_block_spectrum() {
        let p = JCParams::new(1.0, 1.0, 1.0, 1.0);
        let b = rwa_block(4, &p);
        let e = eigh(&b).unwrap().values;
        assert!((e[1] - e[0] - 2.0).abs() < 1e-12);
        let p = JCParams::new(0.3, 1.0, 1.1, 1.0);
        let b = rwa_block(0, &p);
        assert_eq!(b.get(0, 1), C64::new(0.0, 0.0));
        let b = rwa_block(3, &p);
        let e = eigh(&b).unwrap().values;
        let r = ((0.3f64 - 1.1).powi(2) / 4.0 + 3.0 / 4.0).sqrt();
        assert!((e[0] + r).abs() < 1e-12 && (e[1] - r).abs() < 1e-12);
    }

    #[test]
    fn wannier_stark_states() {
        let (eps, s) = wannier_stark_analytic(5, 0.0, 0.3, 2, 10).unwrap();
        assert_eq!(eps, 0.6);
        assert_eq!(s.amplitudes()[12], C64::new(1.0, 0.0));
        let (_, s) = wannier_stark_analytic(9, 1.0, 0.25, -3, 60).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        let raw: f64 = (-60i64..=60).map(|m| bessel_j(-3 - m, 12.0).powi(2)).sum();
        assert!((raw - 1.0).abs() < 1e-10);
        assert!(wannier_stark_analytic(9, 1.0, 0.25, 0, 10).is_err());

        // numerically diagonalized chain against the closed form
        let (n, g0, omega, m) = (4, 1.0, 0.2, 60);
        let h = wannier_stark_chain(n, g0, omega, m, 1.0).unwrap();
        let e = eigh(&h).unwrap();
        for j in -5i64..=5 {
            let (eps, s) = wannier_stark_analytic(n, g0, omega, j, m).unwrap();
            let idx = (j + m as i64) as usize;
            assert!((e.values[idx] - eps).abs() < 1e-10);
            let v = StateVector::new(s.basis().clone(), e.vector(idx)).unwrap();
            assert!(v.fidelity(&s) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn x_basis_block_is_tilted_chain() {
        // Hadamard rotation of a resonant block turns σx into σz
        let p = JCParams::new(0.0, 1.0, 0.3, 1.0);
        let spec = FloquetSpec::new(p.omega, 8).unwrap();
        let n = 3;
        let hf = jc_block_floquet(n, &p, &spec).unwrap();
        let basis = hf.basis().clone();
        let s = 1.0 / 2f64.sqrt();
        let had = Operator::from_triplets(
            Basis::single(Factor::Qubit),
            vec![
                (0, 0, C64::new(s, 0.0)),
                (0, 1, C64::new(s, 0.0)),
                (1, 0, C64::new(s, 0.0)),
                (1, 1, C64::new(-s, 0.0)),
            ],
        );
        let u = tensor(&basis, &[(0, &had)]).unwrap();
        let rotated = u.matmul(&hf).matmul(&u);
        // with |g⟩ first the Hadamard image of σx is -σz, the other sign of τ
        let tau = -&qubit_ops().sz;
        let e = euclidean_ops(spec.m, Boundary::Open).unwrap();
        let expected = &tensor(&basis, &[(1, &e.e0.scale_real(p.omega))]).unwrap()
            + &tensor(
                &basis,
                &[(0, &tau), (1, &e.hopping().scale_real(0.5 * p.g0 * ((n + 1) as f64).sqrt()))],
            )
            .unwrap();
        assert!(rotated.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn bloch_period_recurrence() {
        let (n, g0, omega, m) = (4, 1.0, 0.2, 80);
        let h = wannier_stark_chain(n, g0, omega, m, 1.0).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 2 * m + 1];
        for k in 0..9 {
            amps[m - 4 + k] = C64::new(1.0, 0.2 * k as f64);
        }
        let psi0 = StateVector::new(h.basis().clone(), amps).unwrap();
        let cheb = Chebyshev::new(&h, 1e-12);
        let back = cheb.step(psi0.amplitudes(), 2.0 * PI / omega);
        let psi = StateVector::new(h.basis().clone(), back).unwrap();
        assert!(psi.fidelity(&psi0) > 1.0 - 1e-4);
    }

    #[test]
    fn ladder_spacing_independent_of_coupling() {
        let omega = 0.2;
        let spec = FloquetSpec::new(omega, 100).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for g0 in [0.5, 1.0, 2.0] {
            let h = wannier_stark_chain(4, g0, omega, spec.m, 1.0).unwrap();
            let qs = quasienergies(&h, &spec).unwrap();
            let window = qs.interior(0.6);
            let gaps: Vec<f64> = qs.raw[window.clone()].windows(2).map(|w| w[1] - w[0]).collect();
            assert!(gaps.iter().all(|g| (g - omega).abs() < 1e-6));
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&gaps) {
                    assert!((a - b).abs() < 1e-6);
                }
            }
            prev = Some(gaps);
        }
    }

    #[test]
    fn floquet_pipeline_short_times() {
        let p = JCParams::new(0.0, 1.0, 0.2, 2.0);
        let times = uniform(2.0, 21);
        let (w, min_norm) = inversion_floquet(&p, 401, &times, 1e-10).unwrap();
        assert!(min_norm > 0.9);
        for (t, v) in times.iter().zip(&w) {
            let a = analytic_inversion(&p, *t).unwrap();
            assert!((a - v).abs() < 1e-2, "t={t}: {v} vs {a}");
        }
    }

    #[test]
    fn momentum_ridge_starts_at_zero() {
        let p = JCParams::new(0.0, 1.0, 0.2, 1.0);
        let map = run_fig2(&p, 201, &[0.0], 1e-10).unwrap();
        assert!((map.p[0][100] - 1.0).abs() < 1e-10);
        assert!((map.p[0].iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

//! Floquet Hamiltonians on the extended space `H ⊗ T`, where `T` is the
//! lattice of Fourier indices `m = -M..=M` carrying the Euclidean algebra.
//!
//! Conventions used throughout:
//!
//! * `H(t) = Σ_k H^(k) e^{ikωt}`; the extended operator has `H^(0) + mω` on
//!   diagonal block `m` and `H^(m-m')` on block `(m, m')`.
//! * A solution reads `ψ(t) = e^{-iεt} Σ_m e^{imωt} φ_m`.
//! * The physical factor comes first and the Euclidean factor last, so the
//!   flat index is `p (2M+1) + (m + M)`.

use std::collections::BTreeMap;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{
    euclidean_ops, norm, qubit_ops, Basis, Boundary, Factor, HilbertError, Operator, StateVector,
};
use crate::linalg::{eigh, eigvals_general, Eigh, LinalgError};
use crate::propagate::{evolve, Coefficient, DriveProtocol, EvolveOptions, PropagateError};

#[derive(Debug, Error)]
pub enum FloquetError {
    #[error("invalid Floquet truncation: {0}")]
    InvalidSpec(String),
    #[error("blocks H^({m}) and H^(-{m}) are not adjoints (defect {defect:e})")]
    NonHermitianBlocks { m: i64, defect: f64 },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("state has no Euclidean factor")]
    NoEuclideanFactor,
    #[error("index {index} out of range for {len} Floquet states")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Floquet state {index} carries weight {edge_weight:.3e} on the outer 10% of sites")]
    TruncationContaminated { index: usize, edge_weight: f64 },
    #[error("one-period propagator is not unitary (defect {0:e})")]
    UnitarityDefect(f64),
    #[error("drive protocol has no period or a non-harmonic coefficient")]
    NotHarmonic,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpec {
    pub omega: f64,
    /// Half-width `M`; the lattice has `2M+1` sites.
    pub m: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl FloquetSpec {
    pub fn new(omega: f64, m: usize) -> Result<Self, FloquetError> {
        let spec = Self {
            omega,
            m,
            boundary: Boundary::Open,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec whose lattice is just wide enough to hold a Bessel profile of
    /// localization radius `radius` with a 25% margin.
    pub fn for_radius(omega: f64, radius: f64) -> Result<Self, FloquetError> {
        Self::new(omega, ((1.25 * radius).ceil() as usize).max(1))
    }

    pub fn validate(&self) -> Result<(), FloquetError> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(FloquetError::InvalidSpec(format!("omega = {}", self.omega)));
        }
        if self.m == 0 {
            return Err(FloquetError::InvalidSpec("M = 0".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        2 * self.m + 1
    }

    pub fn factor(&self) -> Factor {
        Factor::Euclidean { m: self.m }
    }

    /// Logs a warning when a localization radius does not fit with margin.
    pub fn check_radius(&self, radius: f64) -> bool {
        let ok = 1.25 * radius <= self.m as f64;
        if !ok {
            log::warn!(
                "localization radius {radius:.1} exceeds M/1.25 = {:.1}; expect truncation effects",
                self.m as f64 / 1.25
            );
        }
        ok
    }
}

/// Maps a quasienergy into `[-ω/2, ω/2)`.
pub fn fold(eps: f64, omega: f64) -> f64 {
    let mut r = (eps + 0.5 * omega).rem_euclid(omega);
    if r >= omega {
        r -= omega;
    }
    r - 0.5 * omega
}

/// Distance between two quasienergies on the circle of circumference `ω`.
pub fn folded_distance(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).abs()
}

/// Assembles the extended operator from Fourier blocks `H^(k)`.
pub fn build_floquet_from_blocks(
    blocks: &BTreeMap<i64, Operator>,
    spec: &FloquetSpec,
) -> Result<Operator, FloquetError> {
    spec.validate()?;
    let phys = blocks
        .values()
        .next()
        .ok_or_else(|| FloquetError::BasisMismatch("no blocks given".into()))?
        .basis()
        .clone();
    for (&k, op) in blocks {
        if op.basis() != &phys {
            return Err(FloquetError::BasisMismatch(format!(
                "block {k} lives on {} instead of {phys}",
                op.basis()
            )));
        }
        let partner = blocks.get(&-k);
        let defect = match partner {
            Some(p) => op.adjoint().max_abs_diff(p),
            None => op.max_abs(),
        };
        if defect > 1e-12 {
            return Err(FloquetError::NonHermitianBlocks { m: k.abs(), defect });
        }
    }
    let n = spec.sites() as i64;
    let mm = spec.m as i64;
    let basis = phys.product(&Basis::single(spec.factor()));
    let mut triplets = Vec::new();
    let site = |m: i64| -> Option<usize> {
        let shifted = m + mm;
        if (0..n).contains(&shifted) {
            Some(shifted as usize)
        } else if spec.boundary == Boundary::Periodic {
            Some(shifted.rem_euclid(n) as usize)
        } else {
            None
        }
    };
    for (&k, op) in blocks {
        for (r, c, v) in op.iter() {
            for col_m in -mm..=mm {
                let Some(row_site) = site(col_m + k) else {
                    continue;
                };
                if k != 0 && spec.boundary == Boundary::Periodic && k.abs() >= n {
                    continue;
                }
                let col_site = (col_m + mm) as usize;
                triplets.push((r * n as usize + row_site, c * n as usize + col_site, v));
            }
        }
    }
    for p in 0..phys.dim() {
        for m in -mm..=mm {
            let i = p * n as usize + (m + mm) as usize;
            triplets.push((i, i, C64::new(m as f64 * spec.omega, 0.0)));
        }
    }
    Ok(Operator::from_triplets(basis, triplets))
}

/// Harmonic substitution for `H(t) = H_static + cos(ωt) H_drive`:
/// `H_static ⊗ I + H_drive ⊗ (E+ + E-)/2 + I ⊗ ωE0`.
pub fn build_floquet_harmonic(
    h_static: &Operator,
    h_drive: &Operator,
    spec: &FloquetSpec,
) -> Result<Operator, FloquetError> {
    spec.validate()?;
    if h_static.basis() != h_drive.basis() {
        return Err(FloquetError::BasisMismatch(format!(
            "static part on {}, drive part on {}",
            h_static.basis(),
            h_drive.basis()
        )));
    }
    let e = euclidean_ops(spec.m, spec.boundary)?;
    let phys = h_static.basis().clone();
    let id_phys = Operator::identity(phys);
    let id_t = Operator::identity(Basis::single(spec.factor()));
    let out = &(&h_static.kron(&id_t) + &h_drive.kron(&e.hopping().scale_real(0.5)))
        + &id_phys.kron(&e.e0.scale_real(spec.omega));
    Ok(out)
}

/// Fourier blocks of a drive protocol whose coefficients are constants or
/// cosines at the protocol frequency.
pub fn blocks_from_protocol(
    protocol: &DriveProtocol,
    omega: f64,
) -> Result<BTreeMap<i64, Operator>, FloquetError> {
    let zero = Operator::zeros(protocol.basis().clone());
    let mut blocks: BTreeMap<i64, Operator> = BTreeMap::new();
    let mut add = |k: i64, op: Operator| {
        let entry = blocks.entry(k).or_insert_with(|| zero.clone());
        *entry = &*entry + &op;
    };
    for term in protocol.terms() {
        match &term.coeff {
            Coefficient::Constant(c) => add(0, term.op.scale_real(*c)),
            Coefficient::Cosine {
                amplitude,
                omega: w,
                phase,
            } if (w - omega).abs() <= 1e-14 * omega => {
                add(1, term.op.scale(C64::from_polar(0.5 * amplitude, *phase)));
                add(-1, term.op.scale(C64::from_polar(0.5 * amplitude, -*phase)));
            }
            _ => return Err(FloquetError::NotHarmonic),
        }
    }
    blocks.entry(0).or_insert(zero);
    Ok(blocks)
}

/// Eigen-decomposition of a Floquet operator with folded quasienergies.
#[derive(Clone, Debug)]
pub struct QuasiSpectrum {
    pub spec: FloquetSpec,
    pub basis: Basis,
    /// Nondecreasing raw eigenvalues.
    pub raw: Vec<f64>,
    /// `fold(raw[i])`, index-aligned with `raw`.
    pub folded: Vec<f64>,
    pub eigen: Eigh,
}

impl QuasiSpectrum {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn physical_dim(&self) -> usize {
        self.len() / self.spec.sites()
    }

    /// Indices of the central `fraction` of raw eigenvalues.
    pub fn interior(&self, fraction: f64) -> std::ops::Range<usize> {
        let n = self.len();
        let keep = ((n as f64) * fraction).round() as usize;
        let start = (n - keep.min(n)) / 2;
        start..start + keep.min(n)
    }

    /// Weight of eigenvector `index` on the outermost 10% of lattice sites.
    pub fn edge_weight(&self, index: usize) -> f64 {
        let n = self.spec.sites();
        let band = ((n as f64) * 0.05).ceil() as usize;
        let mut w = 0.0;
        for p in 0..self.physical_dim() {
            for i in (0..band).chain(n - band..n) {
                w += self.eigen.component(p * n + i, index).norm_sqr();
            }
        }
        w
    }

    pub fn is_boundary_clean(&self, index: usize) -> bool {
        self.edge_weight(index) <= 0.01
    }

    pub fn export_json<W: Write>(&self, w: W) -> serde_json::Result<()> {
        #[derive(Serialize)]
        struct Out<'a> {
            omega: f64,
            #[serde(rename = "M")]
            m: usize,
            raw: &'a [f64],
            folded: &'a [f64],
        }
        serde_json::to_writer_pretty(
            w,
            &Out {
                omega: self.spec.omega,
                m: self.spec.m,
                raw: &self.raw,
                folded: &self.folded,
            },
        )
    }

    /// One `re im` pair per line.
    pub fn export_vector<W: Write>(&self, mut w: W, index: usize) -> std::io::Result<()> {
        for v in self.eigen.vector(index) {
            writeln!(w, "{:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Full dense eigensolve of a Floquet operator.
pub fn quasienergies(hf: &Operator, spec: &FloquetSpec) -> Result<QuasiSpectrum, FloquetError> {
    spec.validate()?;
    if hf.basis().factors().last() != Some(&spec.factor()) {
        return Err(FloquetError::BasisMismatch(format!(
            "{} does not end in a {}-site lattice",
            hf.basis(),
            spec.sites()
        )));
    }
    let eigen = eigh(hf)?;
    let raw = eigen.values.clone();
    let folded = raw.iter().map(|&e| fold(e, spec.omega)).collect();
    Ok(QuasiSpectrum {
        spec: *spec,
        basis: hf.basis().clone(),
        raw,
        folded,
        eigen,
    })
}

/// Collapses an extended-space vector to the physical space:
/// `Σ_m w_m Ψ_{p,m}`.
fn collapse(ext: &[C64], sites: usize, weights: &[C64]) -> Vec<C64> {
    ext.chunks(sites)
        .map(|row| row.iter().zip(weights).map(|(a, w)| a * w).sum())
        .collect()
}

fn fourier_weights(spec: &FloquetSpec, t: f64) -> Vec<C64> {
    let mm = spec.m as i64;
    (-mm..=mm)
        .map(|m| C64::from_polar(1.0, m as f64 * spec.omega * t))
        .collect()
}

fn physical_basis(basis: &Basis) -> Basis {
    let f = basis.factors();
    Basis::new(f[..f.len() - 1].to_vec())
}

/// Physical Floquet solution `e^{-iε_n t} Σ_m e^{imωt} φ_{n,m}`.
pub fn floquet_state(qs: &QuasiSpectrum, index: usize, t: f64) -> Result<StateVector, FloquetError> {
    if index >= qs.len() {
        return Err(FloquetError::IndexOutOfRange {
            index,
            len: qs.len(),
        });
    }
    let edge_weight = qs.edge_weight(index);
    if edge_weight > 0.01 {
        return Err(FloquetError::TruncationContaminated { index, edge_weight });
    }
    let phase = C64::from_polar(1.0, -qs.raw[index] * t);
    let v = collapse(
        &qs.eigen.vector(index),
        qs.spec.sites(),
        &fourier_weights(&qs.spec, t),
    );
    Ok(StateVector::new(
        physical_basis(&qs.basis),
        v.into_iter().map(|a| a * phase).collect(),
    )?)
}

/// Physical state read off an extended-space state that started as
/// `ψ0 ⊗ |θ=0⟩`: `Σ_m e^{imωt} Ψ_m(t) / sqrt(2M+1)`, renormalized to absorb
/// truncation losses. Also returns the norm before renormalization.
pub fn project_physical(
    ext: &[C64],
    spec: &FloquetSpec,
    t: f64,
) -> (Vec<C64>, f64) {
    let n = spec.sites();
    let mut v = collapse(ext, n, &fourier_weights(spec, t));
    let s = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|a| *a *= s);
    let nv = norm(&v);
    if nv > 0.0 {
        v.iter_mut().for_each(|a| *a /= nv);
    }
    (v, nv)
}

/// One-period propagator from column-wise evolution of basis states.
pub fn monodromy(
    h: &DriveProtocol,
    period: f64,
    opts: &EvolveOptions,
) -> Result<Operator, FloquetError> {
    let d = h.dim();
    let mut u = Mat::<C64>::zeros(d, d);
    for c in 0..d {
        let e = StateVector::basis_state(h.basis().clone(), c);
        let traj = evolve(h, &e, &[0.0, period], opts)?;
        for (r, a) in traj.states[1].amplitudes().iter().enumerate() {
            u[(r, c)] = *a;
        }
    }
    let defect = unitarity_defect(&u);
    if defect > 1e-8 {
        return Err(FloquetError::UnitarityDefect(defect));
    }
    Ok(Operator::from_dense(h.basis().clone(), &u, 0.0))
}

fn unitarity_defect(u: &Mat<C64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// Quasienergies `-arg(λ)/T` of the eigenvalues `λ` of a one-period
/// propagator, folded into the zone.
pub fn monodromy_quasienergies(u: &Operator, period: f64) -> Result<Vec<f64>, FloquetError> {
    let omega = 2.0 * std::f64::consts::PI / period;
    let mut eps: Vec<f64> = eigvals_general(&u.to_dense())?
        .into_iter()
        .map(|l| fold(-l.arg() / period, omega))
        .collect();
    eps.sort_by(f64::total_cmp);
    Ok(eps)
}

/// Driven two-level system `Ω σz + g cos(ωt) σx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    pub g: f64,
    pub omega: f64,
}

impl RabiParams {
    pub fn new(big_omega: f64, g: f64, omega: f64) -> Self {
        Self { big_omega, g, omega }
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn protocol(&self) -> Result<DriveProtocol, FloquetError> {
        let q = qubit_ops();
        Ok(DriveProtocol::new(Basis::single(Factor::Qubit))
            .with_term(q.sz.clone(), Coefficient::Constant(self.big_omega))?
            .with_term(q.sx.clone(), Coefficient::cos(self.g, self.omega))?
            .with_period(self.period())?)
    }

    /// `ωE0 + Ωσz + (g/2)(E+ + E-)σx`.
    pub fn floquet(&self, spec: &FloquetSpec) -> Result<Operator, FloquetError> {
        let q = qubit_ops();
        build_floquet_harmonic(&q.sz.scale_real(self.big_omega), &q.sx.scale_real(self.g), spec)
    }
}

/// Agreement between stroboscopic quasienergies and the boundary-clean part
/// of a Floquet spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct MonodromyCheck {
    pub propagator: Vec<f64>,
    pub clean_states: usize,
    /// Largest folded distance from a clean Floquet level to the nearest
    /// propagator eigenphase.
    pub max_clean_deviation: f64,
    /// Largest folded distance from a propagator eigenphase to the nearest
    /// clean Floquet level.
    pub max_coverage_gap: f64,
}

impl MonodromyCheck {
    pub fn worst(&self) -> f64 {
        self.max_clean_deviation.max(self.max_coverage_gap)
    }
}

pub fn monodromy_check(
    h: &DriveProtocol,
    hf: &Operator,
    spec: &FloquetSpec,
    opts: &EvolveOptions,
) -> Result<MonodromyCheck, FloquetError> {
    let period = 2.0 * std::f64::consts::PI / spec.omega;
    let u = monodromy(h, period, opts)?;
    let prop = monodromy_quasienergies(&u, period)?;
    let qs = quasienergies(hf, spec)?;
    let clean: Vec<f64> = (0..qs.len())
        .filter(|&i| qs.is_boundary_clean(i))
        .map(|i| qs.folded[i])
        .collect();
    let nearest = |x: f64, set: &[f64]| {
        set.iter()
            .map(|&y| folded_distance(x, y, spec.omega))
            .fold(f64::INFINITY, f64::min)
    };
    Ok(MonodromyCheck {
        max_clean_deviation: clean.iter().map(|&e| nearest(e, &prop)).fold(0.0, f64::max),
        max_coverage_gap: prop.iter().map(|&e| nearest(e, &clean)).fold(0.0, f64::max),
        clean_states: clean.len(),
        propagator: prop,
    })
}

/// Discrete momenta `k_j = 2πj/(2M+1)` for `j = -M..=M`.
pub fn momenta(spec: &FloquetSpec) -> Vec<f64> {
    let n = spec.sites() as f64;
    let mm = spec.m as i64;
    (-mm..=mm)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n)
        .collect()
}

/// Accumulates `weight · |ψ̃(k)|²` for each contiguous lattice row of `ext`,
/// with `ψ̃(k) = Σ_m e^{-ikm} ψ_m / sqrt(2M+1)`. Output is indexed like
/// [`momenta`].
pub fn accumulate_momentum(ext: &[C64], spec: &FloquetSpec, weight: f64, out: &mut [f64]) {
    let n = spec.sites();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let s = weight / n as f64;
    for row in ext.chunks(n) {
        buf.copy_from_slice(row);
        fft.process(&mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            let q = (j + n - spec.m) % n;
            *o += s * buf[q].norm_sqr();
        }
    }
}

/// `P(k) = ⟨k|ρ_T|k⟩` for a pure state on any basis with one Euclidean factor.
pub fn momentum_distribution(psi: &StateVector, spec: &FloquetSpec) -> Result<Vec<f64>, FloquetError> {
    let pos = psi
        .basis()
        .euclidean_position()
        .ok_or(FloquetError::NoEuclideanFactor)?;
    if psi.basis().factors()[pos] != spec.factor() {
        return Err(FloquetError::BasisMismatch(format!(
            "{} vs a {}-site lattice",
            psi.basis(),
            spec.sites()
        )));
    }
    let n = spec.sites();
    let inner: usize = psi.basis().factors()[pos + 1..].iter().map(Factor::dim).product();
    let outer: usize = psi.basis().factors()[..pos].iter().map(Factor::dim).product();
    let amps = psi.amplitudes();
    let mut out = vec![0.0; n];
    let mut row = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            for (m, r) in row.iter_mut().enumerate() {
                *r = amps[(o * n + m) * inner + i];
            }
            accumulate_momentum(&row, spec, 1.0, &mut out);
        }
    }
    Ok(out)
}

/// `P(k)` from a reduced density matrix on the lattice.
pub fn momentum_distribution_mixed(rho: &Mat<C64>, spec: &FloquetSpec) -> Result<Vec<f64>, FloquetError> {
    let n = spec.sites();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(FloquetError::BasisMismatch(format!(
            "{}x{} density matrix for a {n}-site lattice",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mm = spec.m as f64;
    Ok(momenta(spec)
        .into_iter()
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    let phase = C64::from_polar(1.0, -k * ((a as f64 - mm) - (b as f64 - mm)));
                    acc += phase * rho[(a, b)];
                }
            }
            acc.re / n as f64
        })
        .collect())
}

//! Level-spacing statistics: polynomial unfolding of the counting staircase,
//! spacing histograms, Poisson and Wigner reference laws, and a small-spacing
//! repulsion metric.

use std::f64::consts::PI;
use std::ops::Range;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::Operator;
use crate::linalg::{eigh_dense, LinalgError};
use crate::special::gauss_legendre;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("{got} levels in the analysis window, at least {need} needed")]
    TooFewLevels { got: usize, need: usize },
    #[error("{0} spacings, at least 100 needed")]
    TooFewSpacings(usize),
    #[error("fitted staircase is not monotone in the window; lower the degree")]
    NonMonotone,
    #[error("eigenvalues are not sorted or not finite")]
    Unsorted,
    #[error("unsupported Wigner index beta = {0}")]
    UnsupportedBeta(u32),
    #[error("invalid window fraction {0}")]
    BadWindow(f64),
    #[error("operator is not a unitary involution with one nonzero per column")]
    NotMonomialInvolution,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Legendre polynomials `P_0..=P_n` at `x`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n > 0 {
        p.push(x);
    }
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
        p.push(next);
    }
    p
}

/// Derivatives `P_k'(x)` from `(1-x²)P_k' = k(P_{k-1} - x P_k)`, with the
/// interior-safe recurrence `P_k' = P_{k-2}' + (2k-1) P_{k-1}`.
fn legendre_derivs(n: usize, x: f64) -> Vec<f64> {
    let p = legendre_all(n, x);
    let mut d = vec![0.0; n + 1];
    for k in 1..=n {
        d[k] = (2 * k - 1) as f64 * p[k - 1] + if k >= 2 { d[k - 2] } else { 0.0 };
    }
    d
}

/// Least-squares polynomial for the staircase `N(E)`, in Legendre form on
/// energies mapped to `[-1, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaircaseFit {
    pub degree: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub coefficients: Vec<f64>,
}

impl StaircaseFit {
    fn x(&self, e: f64) -> f64 {
        if self.e_max > self.e_min {
            2.0 * (e - self.e_min) / (self.e_max - self.e_min) - 1.0
        } else {
            0.0
        }
    }

    pub fn eval(&self, e: f64) -> f64 {
        legendre_all(self.degree, self.x(e))
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| p * c)
            .sum()
    }

    /// `dR/dx` in normalized units; its sign is the sign of `dR/dE`.
    fn slope(&self, e: f64) -> f64 {
        legendre_derivs(self.degree, self.x(e))
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| p * c)
            .sum()
    }
}

/// Fit of `N(E_n) = n` over the given levels.
pub fn fit_staircase(levels: &[f64], degree: usize) -> StaircaseFit {
    let e_min = levels[0];
    let e_max = levels[levels.len() - 1];
    let mut fit = StaircaseFit {
        degree,
        e_min,
        e_max,
        coefficients: vec![0.0; degree + 1],
    };
    let a = Mat::from_fn(levels.len(), degree + 1, |i, k| legendre_all(degree, fit.x(levels[i]))[k]);
    let mut rhs = Mat::from_fn(levels.len(), 1, |i, _| i as f64);
    a.qr().solve_lstsq_in_place(rhs.as_mut());
    for k in 0..=degree {
        fit.coefficients[k] = rhs[(k, 0)];
    }
    fit
}

/// Index range of the central `fraction` of `n` items.
pub fn central_window(n: usize, fraction: f64) -> Range<usize> {
    let keep = ((n as f64 * fraction).round() as usize).clamp(0, n);
    let start = (n - keep) / 2;
    start..start + keep
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Unfolded {
    /// Index range of the levels used.
    pub window: Range<usize>,
    pub fit: StaircaseFit,
    /// `R(E_{n+1}) - R(E_n)` inside the window, zeros from degeneracies kept.
    pub spacings: Vec<f64>,
}

impl Unfolded {
    pub fn mean_spacing(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }
}

/// Unfold the central `window_fraction` of a sorted spectrum with a
/// least-squares polynomial of the given degree fitted to the staircase
/// over that window.
pub fn unfold(eigenvalues: &[f64], degree: usize, window_fraction: f64) -> Result<Unfolded, SpectraError> {
    if eigenvalues.iter().any(|e| !e.is_finite()) || eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectraError::Unsorted);
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(SpectraError::BadWindow(window_fraction));
    }
    let window = central_window(eigenvalues.len(), window_fraction);
    let need = 50.max(degree + 2);
    if window.len() < need {
        return Err(SpectraError::TooFewLevels {
            got: window.len(),
            need,
        });
    }
    let levels = &eigenvalues[window.clone()];
    let fit = fit_staircase(levels, degree);
    // monotone on every level and on a fine grid in between
    let probes = levels
        .iter()
        .copied()
        .chain((0..=1000).map(|i| fit.e_min + (fit.e_max - fit.e_min) * i as f64 / 1000.0));
    for e in probes {
        if fit.slope(e) <= 0.0 {
            return Err(SpectraError::NonMonotone);
        }
    }
    let unfolded: Vec<f64> = levels.iter().map(|&e| fit.eval(e)).collect();
    let spacings = unfolded.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(Unfolded { window, fit, spacings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Poisson,
    Wigner { beta: u32 },
}

/// `(a_β, b_β)` of `a s^β exp(-b s²)` with unit norm and unit mean.
pub fn wigner_constants(beta: u32) -> Result<(f64, f64), SpectraError> {
    match beta {
        1 => Ok((PI / 2.0, PI / 4.0)),
        2 => Ok((32.0 / (PI * PI), 4.0 / PI)),
        4 => Ok((2f64.powi(18) / (3f64.powi(6) * PI.powi(3)), 64.0 / (9.0 * PI))),
        b => Err(SpectraError::UnsupportedBeta(b)),
    }
}

impl Law {
    pub fn wigner(beta: u32) -> Result<Self, SpectraError> {
        wigner_constants(beta)?;
        Ok(Law::Wigner { beta })
    }

    pub fn density(&self, s: f64) -> f64 {
        match *self {
            Law::Poisson => (-s).exp(),
            Law::Wigner { beta } => {
                let (a, b) = wigner_constants(beta).expect("validated beta");
                a * s.powi(beta as i32) * (-b * s * s).exp()
            }
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match *self {
            Law::Poisson => 1.0 - (-s).exp(),
            Law::Wigner { beta: 1 } => 1.0 - (-PI * s * s / 4.0).exp(),
            Law::Wigner { .. } => {
                // the integrand is negligible beyond s = 6
                let hi = s.min(6.0);
                let (x, w) = gauss_legendre(80);
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * self.density(0.5 * hi * (x + 1.0)))
                    .sum();
                (0.5 * hi * q).min(1.0)
            }
        }
    }

    /// Inverse-CDF sample from a uniform draw `u ∈ [0, 1)`.
    fn sample(&self, u: f64) -> f64 {
        match *self {
            Law::Poisson => -(1.0 - u).ln(),
            Law::Wigner { beta: 1 } => (-4.0 * (1.0 - u).ln() / PI).sqrt(),
            Law::Wigner { .. } => {
                let (mut lo, mut hi) = (0.0, 8.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Density of a reference law; `kind` is `"poisson"` or `"wigner"`.
pub fn reference_law(kind: &str, beta: u32, s: f64) -> Result<f64, SpectraError> {
    let law = match kind {
        "poisson" => Law::Poisson,
        _ => Law::wigner(beta)?,
    };
    Ok(law.density(s))
}

/// A spectrum whose spacings are drawn from `law` (mean 1), seeded.
pub fn synthetic_spectrum(law: Law, n_levels: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = 0.0;
    let mut out = Vec::with_capacity(n_levels);
    for _ in 0..n_levels {
        out.push(e);
        e += law.sample(rng.gen::<f64>());
    }
    out
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence `1 - alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Samples beyond the last edge, excluded from the normalization.
    pub overflow: usize,
}

impl Histogram {
    /// Equal bins on `[lo, hi]`, normalized to unit area over the samples in range.
    pub fn new(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut overflow = 0;
        for &s in samples {
            if s < lo || s > hi {
                overflow += 1;
                continue;
            }
            counts[(((s - lo) / width) as usize).min(bins - 1)] += 1;
        }
        let inside = (samples.len() - overflow).max(1) as f64;
        Self {
            edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
            densities: counts.iter().map(|&c| c as f64 / (inside * width)).collect(),
            overflow,
        }
    }

    pub fn area(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lo,hi,density,poisson,wigner1")?;
        for (d, e) in self.densities.iter().zip(self.edges.windows(2)) {
            let mid = 0.5 * (e[0] + e[1]);
            writeln!(
                w,
                "{},{},{},{},{}",
                e[0],
                e[1],
                d,
                Law::Poisson.density(mid),
                Law::Wigner { beta: 1 }.density(mid)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Repulsion {
    pub s0: f64,
    pub frac_below: f64,
    pub poisson_expectation: f64,
    pub wigner_expectation: f64,
    /// Empirical fraction below the midpoint of the two references.
    pub verdict: bool,
}

impl Repulsion {
    /// Empirical fraction over the Poisson expectation.
    pub fn depletion(&self) -> f64 {
        self.frac_below / self.poisson_expectation
    }
}

pub const REPULSION_S0: f64 = 0.25;

pub fn repulsion_metric(spacings: &[f64]) -> Result<Repulsion, SpectraError> {
    repulsion_metric_at(spacings, REPULSION_S0)
}

pub fn repulsion_metric_at(spacings: &[f64], s0: f64) -> Result<Repulsion, SpectraError> {
    if spacings.len() < 100 {
        return Err(SpectraError::TooFewSpacings(spacings.len()));
    }
    let frac = spacings.iter().filter(|&&s| s < s0).count() as f64 / spacings.len() as f64;
    let poisson = Law::Poisson.cdf(s0);
    let wigner = Law::Wigner { beta: 1 }.cdf(s0);
    Ok(Repulsion {
        s0,
        frac_below: frac,
        poisson_expectation: poisson,
        wigner_expectation: wigner,
        verdict: frac < 0.5 * (poisson + wigner),
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct UnfoldOptions {
    pub degree: usize,
    pub window_fraction: f64,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        Self {
            degree: 7,
            window_fraction: 0.7,
        }
    }
}

/// A sorted spectrum with its unfolded spacings and their histogram.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralEnsemble {
    pub eigenvalues: Vec<f64>,
    pub window: Range<usize>,
    pub unfolded_spacings: Vec<f64>,
    pub histogram: Histogram,
}

impl SpectralEnsemble {
    pub fn new(mut eigenvalues: Vec<f64>, opts: UnfoldOptions) -> Result<Self, SpectraError> {
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(SpectraError::Unsorted);
        }
        eigenvalues.sort_by(f64::total_cmp);
        let u = unfold(&eigenvalues, opts.degree, opts.window_fraction)?;
        let histogram = Histogram::new(&u.spacings, 40, 0.0, 4.0);
        Ok(Self {
            eigenvalues,
            window: u.window,
            unfolded_spacings: u.spacings,
            histogram,
        })
    }

    pub fn mean_spacing(&self) -> f64 {
        self.unfolded_spacings.iter().sum::<f64>() / self.unfolded_spacings.len() as f64
    }

    pub fn report(&self) -> Result<LevelReport, SpectraError> {
        let r = repulsion_metric(&self.unfolded_spacings)?;
        Ok(LevelReport {
            n_levels: self.eigenvalues.len(),
            window: [self.window.start, self.window.end],
            n_spacings: self.unfolded_spacings.len(),
            mean_spacing: self.mean_spacing(),
            zero_spacings: self.unfolded_spacings.iter().filter(|&&s| s == 0.0).count(),
            frac_below: r.frac_below,
            references: References {
                s0: r.s0,
                poisson: r.poisson_expectation,
                wigner_beta1: r.wigner_expectation,
            },
            ks_poisson: ks_distance(&self.unfolded_spacings, |s| Law::Poisson.cdf(s)),
            ks_wigner: ks_distance(&self.unfolded_spacings, |s| Law::Wigner { beta: 1 }.cdf(s)),
            verdict: r.verdict,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct References {
    pub s0: f64,
    pub poisson: f64,
    pub wigner_beta1: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LevelReport {
    pub n_levels: usize,
    pub window: [usize; 2],
    pub n_spacings: usize,
    pub mean_spacing: f64,
    pub zero_spacings: usize,
    pub frac_below: f64,
    pub references: References,
    pub ks_poisson: f64,
    pub ks_wigner: f64,
    pub verdict: bool,
}

/// Orthonormal bases of the `+1` and `-1` eigenspaces of an involution that
/// maps each basis state to a phase times another basis state.
pub fn parity_sectors(p: &Operator) -> Result<[Vec<Vec<(usize, C64)>>; 2], SpectraError> {
    let d = p.dim();
    let mut image = vec![None; d];
    for (r, c, v) in p.iter() {
        if v.norm() > 1e-12 {
            if image[c].is_some() {
                return Err(SpectraError::NotMonomialInvolution);
            }
            image[c] = Some((r, v));
        }
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let (j, a) = image[i].ok_or(SpectraError::NotMonomialInvolution)?;
        if (a.norm() - 1.0).abs() > 1e-12 {
            return Err(SpectraError::NotMonomialInvolution);
        }
        let back = image[j].ok_or(SpectraError::NotMonomialInvolution)?;
        if back.0 != i || (back.1 * a - 1.0).norm() > 1e-12 {
            return Err(SpectraError::NotMonomialInvolution);
        }
        if j == i {
            if (a - 1.0).norm() < 1e-12 {
                plus.push(vec![(i, C64::new(1.0, 0.0))]);
            } else if (a + 1.0).norm() < 1e-12 {
                minus.push(vec![(i, C64::new(1.0, 0.0))]);
            } else {
                return Err(SpectraError::NotMonomialInvolution);
            }
        } else if i < j {
            // P(|i⟩ ± a|j⟩) = ±(|i⟩ ± a|j⟩)
            plus.push(vec![(i, C64::new(h, 0.0)), (j, a * h)]);
            minus.push(vec![(i, C64::new(h, 0.0)), (j, -a * h)]);
        }
    }
    Ok([plus, minus])
}

/// Eigenvalues of `h` restricted to each parity sector of `p`, `[+1, -1]`.
pub fn sector_spectra(h: &Operator, p: &Operator) -> Result<[Vec<f64>; 2], SpectraError> {
    let sectors = parity_sectors(p)?;
    let mut out: [Vec<f64>; 2] = Default::default();
    for (k, basis) in sectors.iter().enumerate() {
        // columns of H B, then B† (H B)
        let d = h.dim();
        let n = basis.len();
        let mut hb = Mat::<C64>::zeros(d, n);
        for (col, vec) in basis.iter().enumerate() {
            let mut x = vec![C64::new(0.0, 0.0); d];
            for &(i, v) in vec {
                x[i] = v;
            }
            for (r, v) in h.apply(&x).into_iter().enumerate() {
                hb[(r, col)] = v;
            }
        }
        let block = Mat::from_fn(n, n, |r, c| {
            basis[r].iter().map(|&(i, v)| v.conj() * hb[(i, c)]).sum::<C64>()
        });
        out[k] = eigh_dense(&block)?.values;
    }
    Ok(out)
}

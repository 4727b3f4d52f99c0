//! Fock bases, sparse operators and the operator algebras used by every model:
//! bosons, spins, qubits and the truncated Euclidean (Fourier-index) lattice.
//!
//! Operators are stored in compressed sparse row form with columns sorted
//! inside each row, so construction is bit-reproducible.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("boson truncation n_max must be at least 1")]
    EmptyBosonSpace,
    #[error("spin {0} is not a positive half-integer")]
    InvalidSpin(f64),
    #[error("Euclidean half-width must be at least 1")]
    EmptyEuclideanSpace,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("factor {index} does not match the declared basis")]
    FactorMismatch { index: usize },
    #[error("state vector has zero norm")]
    ZeroState,
}

/// One tensor factor of a product basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    Boson { n_max: usize },
    /// Spin `S = two_s / 2`.
    Spin { two_s: u32 },
    Qubit,
    /// Fourier-index lattice with sites `m = -M..=M`.
    Euclidean { m: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Boson { n_max } => n_max + 1,
            Factor::Spin { two_s } => two_s as usize + 1,
            Factor::Qubit => 2,
            Factor::Euclidean { m } => 2 * m + 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Factor::Boson { .. } => "boson",
            Factor::Spin { .. } => "spin",
            Factor::Qubit => "qubit",
            Factor::Euclidean { .. } => "euclidean",
        }
    }

    /// Quantum number carried by basis index `i`.
    ///
    /// Spin and Euclidean indices run upward from `-S` and `-M`; the qubit
    /// index 0 is `|g>` (`s = -1`) and index 1 is `|e>` (`s = +1`).
    pub fn quantum_number(&self, i: usize) -> f64 {
        match *self {
            Factor::Boson { .. } => i as f64,
            Factor::Spin { two_s } => i as f64 - two_s as f64 / 2.0,
            Factor::Qubit => {
                if i == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Factor::Euclidean { m } => i as f64 - m as f64,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Factor::Boson { n_max } => write!(f, "boson(n_max={n_max})"),
            Factor::Spin { two_s } => write!(f, "spin(S={})", two_s as f64 / 2.0),
            Factor::Qubit => write!(f, "qubit"),
            Factor::Euclidean { m } => write!(f, "euclidean(M={m})"),
        }
    }
}

/// Ordered list of tensor factors; the first factor is the slowest index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    factors: Vec<Factor>,
}

impl Basis {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self { factors }
    }

    pub fn single(factor: Factor) -> Self {
        Self {
            factors: vec![factor],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    /// Basis of `self ⊗ other`.
    pub fn product(&self, other: &Basis) -> Basis {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Basis { factors }
    }

    /// Splits a flat index into per-factor indices.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            let d = f.dim();
            out[k] = index % d;
            index /= d;
        }
        out
    }

    pub fn compose(&self, indices: &[usize]) -> usize {
        debug_assert_eq!(indices.len(), self.factors.len());
        self.factors
            .iter()
            .zip(indices)
            .fold(0, |acc, (f, &i)| acc * f.dim() + i)
    }

    /// Quantum numbers of every factor for a flat index.
    pub fn labels(&self, index: usize) -> Vec<f64> {
        self.decompose(index)
            .into_iter()
            .zip(&self.factors)
            .map(|(i, f)| f.quantum_number(i))
            .collect()
    }

    /// Position of the first Euclidean factor, if any.
    pub fn euclidean_position(&self) -> Option<usize> {
        self.factors
            .iter()
            .position(|f| matches!(f, Factor::Euclidean { .. }))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

/// Square sparse complex matrix tagged with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    basis: Basis,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Operator {
    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets(basis: Basis, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        let n = basis.dim();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside dimension {n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        let mut op = Self {
            basis,
            indptr,
            indices,
            values,
        };
        op.prune(0.0);
        op
    }

    pub fn zeros(basis: Basis) -> Self {
        let n = basis.dim();
        Self {
            basis,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.dim();
        Self::diagonal(basis, &vec![1.0; n])
    }

    pub fn diagonal(basis: Basis, diag: &[f64]) -> Self {
        assert_eq!(basis.dim(), diag.len());
        let t = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, i, C64::new(d, 0.0)))
            .collect();
        Self::from_triplets(basis, t)
    }

    /// Converts a dense matrix, dropping entries with magnitude `<= threshold`.
    pub fn from_dense(basis: Basis, m: &Mat<C64>, threshold: f64) -> Self {
        let n = basis.dim();
        assert_eq!(m.nrows(), n);
        assert_eq!(m.ncols(), n);
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v.norm() > threshold {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(basis, t)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Replaces the basis metadata; the dimension must agree.
    pub fn with_basis(mut self, basis: Basis) -> Result<Self, HilbertError> {
        if basis.dim() != self.dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.dim(),
                found: basis.dim(),
            });
        }
        self.basis = basis;
        Ok(self)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// Drops entries with magnitude `<= threshold`.
    pub fn prune(&mut self, threshold: f64) {
        let n = self.dim();
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].norm() > threshold {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.basis.clone(), t)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune(0.0);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimensions differ: {} vs {}",
            self.dim(),
            other.dim()
        );
        let t = self
            .iter()
            .chain(other.iter().map(|(r, c, v)| (r, c, v * sign)))
            .collect();
        Self::from_triplets(self.basis.clone(), t)
    }

    /// Sparse matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        let n = self.dim();
        let mut acc = vec![ZERO; n];
        let mut touched = vec![false; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut t = Vec::new();
        for r in 0..n {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                t.push((r, c, acc[c]));
                acc[c] = ZERO;
                touched[c] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.basis.clone(), t)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Kronecker product `self ⊗ other` with composed basis metadata.
    pub fn kron(&self, other: &Self) -> Self {
        let q = other.dim();
        let n = self.dim() * q;
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.dim() {
            for rb in 0..q {
                for (ca, va) in self.row(ra) {
                    for (cb, vb) in other.row(rb) {
                        indices.push(ca * q + cb);
                        values.push(va * vb);
                    }
                }
                indptr.push(indices.len());
            }
        }
        let mut op = Self {
            basis: self.basis.product(&other.basis),
            indptr,
            indices,
            values,
        };
        op.prune(0.0);
        op
    }

    /// `y += alpha * A x`
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *yr += alpha * s;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply_add(ONE, x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = Mat::<C64>::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_dense_real(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v.re;
        }
        m
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// `max |A - A†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval `[lo, hi]` enclosing the spectrum of a Hermitian operator.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim() {
            let mut d = 0.0;
            let mut off = 0.0;
            for (c, v) in self.row(r) {
                if c == r {
                    d = v.re;
                } else {
                    off += v.norm();
                }
            }
            lo = lo.min(d - off);
            hi = hi.max(d + off);
        }
        if self.dim() == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Mul<&Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

/// Normalized complex amplitude vector tagged with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: Vec<C64>,
}

impl StateVector {
    /// Normalizes `amps`; fails on a dimension mismatch or zero vector.
    pub fn new(basis: Basis, amps: Vec<C64>) -> Result<Self, HilbertError> {
        if amps.len() != basis.dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: basis.dim(),
                found: amps.len(),
            });
        }
        let n = norm(&amps);
        if n == 0.0 || !n.is_finite() {
            return Err(HilbertError::ZeroState);
        }
        let amps = amps.into_iter().map(|a| a / n).collect();
        Ok(Self { basis, amps })
    }

    /// Wraps amplitudes without renormalizing. Used by propagators whose
    /// output is unitary up to their own tolerance.
    pub(crate) fn from_raw(basis: Basis, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), basis.dim());
        Self { basis, amps }
    }

    pub fn basis_state(basis: Basis, index: usize) -> Self {
        let mut amps = vec![ZERO; basis.dim()];
        amps[index] = ONE;
        Self { basis, amps }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        dot(&self.amps, &other.amps)
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        dot(&self.amps, &op.apply(&self.amps))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            basis: self.basis.product(&other.basis),
            amps,
        }
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate-linear in the first argument.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Clone, Debug)]
pub struct BosonOps {
    pub a: Operator,
    pub a_dag: Operator,
    pub n: Operator,
}

/// Annihilation, creation and number operators on `|0>..|n_max>`.
pub fn boson_ops(n_max: usize) -> Result<BosonOps, HilbertError> {
    if n_max == 0 {
        return Err(HilbertError::EmptyBosonSpace);
    }
    let basis = Basis::single(Factor::Boson { n_max });
    let a = Operator::from_triplets(
        basis.clone(),
        (1..=n_max)
            .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
            .collect(),
    );
    let a_dag = a.adjoint();
    let n = Operator::diagonal(basis, &(0..=n_max).map(|k| k as f64).collect::<Vec<_>>());
    Ok(BosonOps { a, a_dag, n })
}

/// Converts a spin value to `2S`, rejecting anything that is not a positive
/// half-integer.
pub fn two_s_from(s: f64) -> Result<u32, HilbertError> {
    let two = 2.0 * s;
    if !(two.is_finite() && two >= 1.0 && (two - two.round()).abs() < 1e-12) {
        return Err(HilbertError::InvalidSpin(s));
    }
    Ok(two.round() as u32)
}

#[derive(Clone, Debug)]
pub struct SpinOps {
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub splus: Operator,
    pub sminus: Operator,
}

/// Ladder amplitude `sqrt(S(S+1) - m(m±1))` in terms of `2S` and `2m`.
pub fn ladder_amplitude(two_s: u32, two_m: i64, raise: bool) -> f64 {
    let s = two_s as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    let shifted = if raise { m + 1.0 } else { m - 1.0 };
    (s * (s + 1.0) - m * shifted).max(0.0).sqrt()
}

/// Spin-`S` operators in the `|S,m>` basis ordered `m = -S..=S`.
pub fn spin_ops(two_s: u32) -> Result<SpinOps, HilbertError> {
    if two_s == 0 {
        return Err(HilbertError::InvalidSpin(0.0));
    }
    let basis = Basis::single(Factor::Spin { two_s });
    let d = two_s as usize + 1;
    let two_m = |i: usize| 2 * i as i64 - two_s as i64;
    let splus = Operator::from_triplets(
        basis.clone(),
        (0..d - 1)
            .map(|i| (i + 1, i, C64::new(ladder_amplitude(two_s, two_m(i), true), 0.0)))
            .collect(),
    );
    let sminus = splus.adjoint();
    let sz = Operator::diagonal(
        basis,
        &(0..d).map(|i| two_m(i) as f64 / 2.0).collect::<Vec<_>>(),
    );
    let sx = (&splus + &sminus).scale_real(0.5);
    let sy = (&splus - &sminus).scale(C64::new(0.0, -0.5));
    Ok(SpinOps {
        sx,
        sy,
        sz,
        splus,
        sminus,
    })
}

#[derive(Clone, Debug)]
pub struct QubitOps {
    pub sz: Operator,
    pub sx: Operator,
    pub sy: Operator,
    /// `σ+ = |e><g|`
    pub splus: Operator,
    pub sminus: Operator,
}

/// Pauli operators with index 0 = `|g>`, index 1 = `|e>`.
pub fn qubit_ops() -> QubitOps {
    let basis = Basis::single(Factor::Qubit);
    let splus = Operator::from_triplets(basis.clone(), vec![(1, 0, ONE)]);
    let sminus = splus.adjoint();
    let sz = Operator::diagonal(basis, &[-1.0, 1.0]);
    let sx = &splus + &sminus;
    let sy = (&splus - &sminus).scale(C64::new(0.0, -1.0));
    QubitOps {
        sz,
        sx,
        sy,
        splus,
        sminus,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Clone, Debug)]
pub struct EuclideanOps {
    pub e0: Operator,
    pub eplus: Operator,
    pub eminus: Operator,
}

impl EuclideanOps {
    /// `E+ + E-`, the lattice image of `2 cos(ωt)`.
    pub fn hopping(&self) -> Operator {
        &self.eplus + &self.eminus
    }
}

/// Euclidean algebra on sites `m = -M..=M`.
pub fn euclidean_ops(m: usize, boundary: Boundary) -> Result<EuclideanOps, HilbertError> {
    if m == 0 {
        return Err(HilbertError::EmptyEuclideanSpace);
    }
    let basis = Basis::single(Factor::Euclidean { m });
    let d = 2 * m + 1;
    let mut t: Vec<_> = (0..d - 1).map(|i| (i + 1, i, ONE)).collect();
    if boundary == Boundary::Periodic {
        t.push((0, d - 1, ONE));
    }
    let eplus = Operator::from_triplets(basis.clone(), t);
    let eminus = eplus.adjoint();
    let e0 = Operator::diagonal(
        basis,
        &(0..d).map(|i| i as f64 - m as f64).collect::<Vec<_>>(),
    );
    Ok(EuclideanOps { e0, eplus, eminus })
}

/// Phase state with amplitudes `e^{-iθm} / sqrt(2M+1)`.
pub fn phase_state(m: usize, theta: f64) -> StateVector {
    let d = 2 * m + 1;
    let s = 1.0 / (d as f64).sqrt();
    let amps = (0..d)
        .map(|i| C64::from_polar(s, -theta * (i as f64 - m as f64)))
        .collect();
    StateVector::from_raw(Basis::single(Factor::Euclidean { m }), amps)
}

/// Embeds single-factor operators into `basis`, with identities on every
/// factor not listed. Each entry is `(factor position, operator)`.
pub fn tensor(basis: &Basis, ops: &[(usize, &Operator)]) -> Result<Operator, HilbertError> {
    let mut slots: Vec<Option<&Operator>> = vec![None; basis.factors().len()];
    for &(k, op) in ops {
        let f = basis
            .factors()
            .get(k)
            .ok_or(HilbertError::FactorMismatch { index: k })?;
        if op.basis().factors() != [*f] || slots[k].is_some() {
            return Err(HilbertError::FactorMismatch { index: k });
        }
        slots[k] = Some(op);
    }
    let mut out: Option<Operator> = None;
    for (k, f) in basis.factors().iter().enumerate() {
        let piece = match slots[k] {
            Some(op) => op.clone(),
            None => Operator::identity(Basis::single(*f)),
        };
        out = Some(match out {
            None => piece,
            Some(acc) => acc.kron(&piece),
        });
    }
    out.ok_or(HilbertError::DimensionMismatch {
        expected: 1,
        found: 0,
    })
}

/// Kronecker product of a full list of operators, in order.
pub fn kron_all(ops: &[&Operator]) -> Operator {
    let mut it = ops.iter();
    let first = (*it.next().expect("kron_all needs at least one operator")).clone();
    it.fold(first, |acc, op| acc.kron(op))
}

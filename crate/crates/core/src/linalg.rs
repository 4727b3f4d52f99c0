//! Dense Hermitian eigensolves (faer) and matrix-exponential-free propagators:
//! a Lanczos `exp(-iτA)v` for time-dependent steps and a Chebyshev expansion
//! for long evolutions under a fixed Hamiltonian.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::hilbert::{dot, norm, Operator};
use crate::special::bessel_j_all;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("Krylov expansion did not reach tolerance {tol:e} within {max_dim} vectors (estimate {estimate:e})")]
    KrylovBudget { tol: f64, max_dim: usize, estimate: f64 },
}

#[derive(Clone, Debug)]
enum Vectors {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

/// Eigenvalues in nondecreasing order and the matching orthonormal columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    vectors: Vectors,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, row: usize, col: usize) -> C64 {
        match &self.vectors {
            Vectors::Real(m) => C64::new(m[(row, col)], 0.0),
            Vectors::Complex(m) => m[(row, col)],
        }
    }

    pub fn vector(&self, col: usize) -> Vec<C64> {
        (0..self.dim()).map(|r| self.component(r, col)).collect()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, Vectors::Real(_))
    }
}

/// Full dense eigendecomposition of a Hermitian operator. Real symmetric
/// input takes the real path.
pub fn eigh(op: &Operator) -> Result<Eigh, LinalgError> {
    if op.is_real() {
        let m = op.to_dense_real();
        let e = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| LinalgError::NoConvergence)?;
        let values = (0..m.nrows()).map(|i| e.S()[i]).collect();
        Ok(Eigh {
            values,
            vectors: Vectors::Real(e.U().to_owned()),
        })
    } else {
        eigh_dense(&op.to_dense())
    }
}

pub fn eigh_dense(m: &Mat<C64>) -> Result<Eigh, LinalgError> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)?;
    let values = (0..m.nrows()).map(|i| e.S()[i].re).collect();
    Ok(Eigh {
        values,
        vectors: Vectors::Complex(e.U().to_owned()),
    })
}

/// Eigenvalues only, nondecreasing.
pub fn eigvalsh(op: &Operator) -> Result<Vec<f64>, LinalgError> {
    if op.is_real() {
        op.to_dense_real()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| LinalgError::NoConvergence)
    } else {
        op.to_dense()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| LinalgError::NoConvergence)
    }
}

/// Eigenvalues of a general complex matrix.
pub fn eigvals_general(m: &Mat<C64>) -> Result<Vec<C64>, LinalgError> {
    m.eigenvalues().map_err(|_| LinalgError::NoConvergence)
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL.
/// `diag` has length n, `off[i]` couples `i` and `i+1`. Returns eigenvalues
/// (unsorted) and the eigenvector matrix stored row-major, columns = vectors.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m as isize - 1;
            let mut early = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + iu + 1];
                    z[k * n + iu + 1] = s * z[k * n + iu] + c * f;
                    z[k * n + iu] = c * z[k * n + iu] - s * f;
                }
                i -= 1;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// `exp(-iτA) v` for Hermitian `A` given as a matvec closure, by Lanczos
/// with full reorthogonalization. Returns the result and the a-posteriori
/// error estimate.
pub fn expv_lanczos<F>(
    apply: F,
    v: &[C64],
    tau: f64,
    tol: f64,
    max_dim: usize,
) -> Result<(Vec<C64>, f64), LinalgError>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 || tau == 0.0 {
        return Ok((v.to_vec(), 0.0));
    }
    let max_dim = max_dim.min(n).max(1);
    let mut q: Vec<Vec<C64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let mut estimate = f64::INFINITY;
    for j in 0..max_dim {
        w.iter_mut().for_each(|x| *x = ZERO);
        apply(&q[j], &mut w);
        let a = dot(&q[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let k = j + 1;
        let (vals, vecs) = tridiagonal_eigen(&alpha, &beta)?;
        // c = V exp(-iτΛ) Vᵀ e1
        let coeff: Vec<C64> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|l| {
                        C64::from_polar(vecs[l] * vecs[r * k + l], -tau * vals[l])
                    })
                    .sum()
            })
            .collect();
        estimate = b * coeff[k - 1].norm() * beta0;
        let done = b <= 1e-13 * (1.0 + a.abs()) || estimate <= tol || k == n;
        if done {
            let mut out = vec![ZERO; n];
            for (qi, ci) in q.iter().zip(&coeff) {
                let s = ci * beta0;
                out.iter_mut().zip(qi).for_each(|(o, x)| *o += s * x);
            }
            let est = if b <= 1e-13 * (1.0 + a.abs()) || k == n { 0.0 } else { estimate };
            return Ok((out, est));
        }
        beta.push(b);
        q.push(w.iter().map(|x| x / b).collect());
    }
    Err(LinalgError::KrylovBudget {
        tol,
        max_dim,
        estimate,
    })
}

/// Chebyshev propagator `exp(-iHt)` for a fixed Hermitian operator.
#[derive(Clone, Debug)]
pub struct Chebyshev<'a> {
    op: &'a Operator,
    center: f64,
    half_width: f64,
    tol: f64,
}

impl<'a> Chebyshev<'a> {
    pub fn new(op: &'a Operator, tol: f64) -> Self {
        let (lo, hi) = op.gershgorin_bounds();
        let center = 0.5 * (lo + hi);
        let half_width = (0.5 * (hi - lo)).max(1e-12) * 1.01;
        Self {
            op,
            center,
            half_width,
            tol,
        }
    }

    /// Number of Chebyshev terms needed for a step of length `dt`.
    pub fn order(&self, dt: f64) -> usize {
        let x = self.half_width * dt.abs();
        let kmax = (x * 1.5) as usize + 40;
        let j = bessel_j_all(x, kmax);
        let mut k = kmax;
        while k > 1 && j[k].abs() < self.tol * 1e-2 && (k as f64) > x {
            k -= 1;
        }
        k + 1
    }

    pub fn step(&self, psi: &[C64], dt: f64) -> Vec<C64> {
        let n = psi.len();
        if dt == 0.0 {
            return psi.to_vec();
        }
        let x = self.half_width * dt;
        let order = self.order(dt);
        let j = bessel_j_all(x.abs(), order + 1);
        let scaled = |inp: &[C64], out: &mut [C64]| {
            // out = (H - c)/a · inp
            out.iter_mut().for_each(|v| *v = ZERO);
            self.op.apply_add(C64::new(1.0 / self.half_width, 0.0), inp, out);
            let s = self.center / self.half_width;
            out.iter_mut().zip(inp).for_each(|(o, i)| *o -= s * i);
        };
        // sign of dt enters through (-i)^k J_k(x) with J_k(-x) = (-1)^k J_k(x)
        let phase = |k: usize| -> C64 {
            let base = match k % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, -1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, 1.0),
            };
            let sign = if dt < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            base * sign * j[k] * if k == 0 { 1.0 } else { 2.0 }
        };
        let mut prev = psi.to_vec();
        let mut cur = vec![ZERO; n];
        scaled(&prev, &mut cur);
        let mut out: Vec<C64> = prev.iter().map(|v| v * phase(0)).collect();
        if order >= 1 {
            let c1 = phase(1);
            out.iter_mut().zip(&cur).for_each(|(o, v)| *o += c1 * v);
        }
        let mut next = vec![ZERO; n];
        for k in 2..=order {
            scaled(&cur, &mut next);
            next.iter_mut()
                .zip(&prev)
                .for_each(|(nx, p)| *nx = 2.0 * *nx - p);
            let ck = phase(k);
            out.iter_mut().zip(&next).for_each(|(o, v)| *o += ck * v);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        let g = C64::from_polar(1.0, -self.center * dt);
        out.iter_mut().for_each(|v| *v *= g);
        out
    }
}

//! Selected eigenpairs of real symmetric tridiagonal matrices.
//!
//! Eigenvalues come from Sturm-sequence bisection inside Gershgorin bounds,
//! eigenvectors from inverse iteration with a pivoted tridiagonal LU. A dense
//! cyclic Jacobi solver shares no code with either and serves as the oracle
//! in tests.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("tridiagonal matrix must be at least 1x1"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.diag[i].abs() + self.radius(i))
            .fold(0.0, f64::max)
    }

    #[inline]
    fn radius(&self, i: usize) -> f64 {
        let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
        let right = self.off.get(i).map_or(0.0, |e| e.abs());
        left + right
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Leading `(n-1) x (n-1)` principal submatrix.
    pub fn leading_minor(&self) -> Option<Self> {
        if self.len() < 2 {
            return None;
        }
        let n = self.len() - 1;
        Some(Self {
            diag: self.diag[..n].to_vec(),
            off: self.off[..n - 1].to_vec(),
        })
    }
}

/// Interval `[lo, hi]` containing every eigenvalue.
pub fn gershgorin_bounds(t: &SymTridiagonal) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..t.len() {
        let r = t.radius(i);
        lo = lo.min(t.diag[i] - r);
        hi = hi.max(t.diag[i] + r);
    }
    (lo, hi)
}

/// Reusable Sturm counter with the squared off-diagonal and pivot floor
/// precomputed.
struct SturmCounter<'a> {
    diag: &'a [f64],
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl<'a> SturmCounter<'a> {
    fn new(t: &'a SymTridiagonal) -> Self {
        let scale = t.norm_inf().max(f64::MIN_POSITIVE);
        Self {
            diag: &t.diag,
            off_sq: t.off.iter().map(|e| e * e).collect(),
            pivmin: f64::EPSILON * scale,
        }
    }

    /// Negative pivots of the LDL^T factorization of `T - x I`.
    fn count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.guard(self.diag[0] - x);
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            q = self.guard(self.diag[i] - x - self.off_sq[i - 1] / q);
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    #[inline]
    fn guard(&self, q: f64) -> f64 {
        if q.abs() < self.pivmin {
            -self.pivmin
        } else {
            q
        }
    }
}

/// Number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    SturmCounter::new(t).count(x)
}

/// The `k` smallest eigenvalues in ascending order, each within
/// `tol * max(1, |lambda|)`.
pub fn lowest_k(t: &SymTridiagonal, k: usize, tol: f64) -> Result<Vec<f64>> {
    if k == 0 || k > t.len() {
        return Err(Error::invalid(format!(
            "requested {k} eigenvalues of a {}x{} matrix",
            t.len(),
            t.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let counter = SturmCounter::new(t);
    let (glo, ghi) = gershgorin_bounds(t);
    let pad = 2.0 * counter.pivmin * t.len() as f64 + f64::MIN_POSITIVE;
    let (glo, ghi) = (
        glo - pad - glo.abs() * f64::EPSILON,
        ghi + pad + ghi.abs() * f64::EPSILON,
    );

    let mut out = Vec::with_capacity(k);
    let mut floor = glo;
    for j in 0..k {
        // Invariant: count(lo) <= j < count(hi).
        let mut lo = floor;
        let mut hi = ghi;
        loop {
            let mid = 0.5 * (lo + hi);
            let width = hi - lo;
            let scale = lo.abs().min(hi.abs()).max(1.0);
            if width <= 2.0 * tol * scale || mid <= lo || mid >= hi {
                break;
            }
            if counter.count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        floor = lo;
    }
    Ok(out)
}

/// Eigenvalue and unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||T v - value v||_2` at return.
    pub residual: f64,
}

const INVERSE_ITERATION_MAX: usize = 50;

/// Eigenvector for the eigenvalue nearest `lambda_hat`.
///
/// The start vector is the normalized all-ones vector. The returned vector
/// has its largest-magnitude entry positive and `value` is its Rayleigh
/// quotient.
pub fn inverse_iteration(t: &SymTridiagonal, lambda_hat: f64) -> Result<EigenPair> {
    let n = t.len();
    let norm = t.norm_inf();
    let target = 1e-8 * norm.max(f64::MIN_POSITIVE);
    let lu = ShiftedLu::factor(t, lambda_hat);

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut tx = vec![0.0; n];
    let mut last_residual = f64::INFINITY;
    for iter in 1..=INVERSE_ITERATION_MAX {
        lu.solve(&mut x);
        let nrm = l2(&x);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::Convergence {
                what: "inverse iteration",
                iterations: iter,
                residual: last_residual,
            });
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        t.apply(&x, &mut tx);
        let value = dot(&x, &tx);
        let residual = tx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        // One extra sweep past the first acceptable residual.
        if residual <= target && (iter >= 2 || n == 1) {
            fix_sign(&mut x);
            return Ok(EigenPair {
                value,
                vector: x,
                residual,
            });
        }
        last_residual = residual;
    }
    Err(Error::Convergence {
        what: "inverse iteration",
        iterations: INVERSE_ITERATION_MAX,
        residual: last_residual,
    })
}

fn fix_sign(x: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &v in x.iter() {
        if v.abs() > best {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// LU factorization of `T - sigma I` with partial pivoting (the banded
/// layout of LAPACK `dgttrf`). Tiny pivots are replaced by `eps * ||T||`.
struct ShiftedLu {
    /// Multipliers.
    l: Vec<f64>,
    /// U diagonal, first and second superdiagonals.
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, sigma: f64) -> Self {
        let n = t.len();
        let floor = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - sigma).collect();
        let mut du = t.off.clone();
        let dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i].abs() < floor {
                    floor.copysign(d[i])
                } else {
                    d[i]
                };
                d[i] = piv;
                let m = dl[i] / piv;
                l[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                // Swap rows i and i+1.
                let m = d[i] / dl[i];
                l[i] = m;
                d[i] = dl[i];
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -m;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].abs() < floor {
            d[n - 1] = if d[n - 1] == 0.0 {
                floor
            } else {
                floor.copysign(d[n - 1])
            };
        }
        Self {
            l,
            u0: d,
            u1: du,
            u2: du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.u0.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
                b[i + 1] -= self.l[i] * b[i];
            } else {
                b[i + 1] -= self.l[i] * b[i];
            }
        }
        b[n - 1] /= self.u0[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.u1[n - 2] * b[n - 1]) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.u1[i] * b[i + 1] - self.u2[i] * b[i + 2]) / self.u0[i];
        }
    }
}

/// Largest size accepted by [`dense_brute_force`].
pub const DENSE_ORACLE_MAX: usize = 200;

/// All eigenvalues, ascending, by cyclic Jacobi rotations on the dense
/// matrix. Independent of the Sturm/bisection path; meant for tests.
pub fn dense_brute_force(t: &SymTridiagonal) -> Result<Vec<f64>> {
    let n = t.len();
    if n > DENSE_ORACLE_MAX {
        return Err(Error::invalid(format!(
            "dense oracle limited to n <= {DENSE_ORACLE_MAX}, got {n}"
        )));
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = t.diag[i];
        if i + 1 < n {
            a[i * n + i + 1] = t.off[i];
            a[(i + 1) * n + i] = t.off[i];
        }
    }
    jacobi_eigenvalues(&mut a, n)?;
    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Result<()> {
    let total: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok(());
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Convergence {
        what: "dense Jacobi oracle",
        iterations: 100,
        residual: f64::NAN,
    })
}

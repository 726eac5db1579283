//! Brute-force two-dimensional discretization of `(i grad + A_kappa)^2 + V`
//! on the truncated annulus, solved without any angular-mode decomposition.
//!
//! Unknowns live on the polar grid `(r_i, theta_j)` in the Liouville variable
//! `g = sqrt(r) psi`, so the radial stencil matches the one-dimensional
//! pipeline. The operator is applied matrix-free; its smallest eigenvalues
//! come from shifted inverse power iteration with conjugate-gradient solves.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{build_mesh, NumericsConfig, PotentialSpec, RadialMesh};
use crate::spectrum::{adaptive_outer_radius, ground_state_on_mesh, FD_EIG_TOL};

/// Discretization of the angular part `(-i d/dtheta - kappa)^2 / r^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularScheme {
    /// Covariant differences `psi_{j+1} e^{-i kappa dtheta}`. Symbol
    /// `(2 - 2 cos((m - kappa) dtheta)) / dtheta^2`; exactly gauge covariant.
    #[default]
    Peierls,
    /// `-d^2/dtheta^2 + 2 i kappa d/dtheta + kappa^2` with periodic central
    /// differences. Symbol `(2 - 2 cos(m dtheta)) / dtheta^2
    /// - 2 kappa sin(m dtheta) / dtheta + kappa^2`.
    CentralDifference,
}

/// Matrix-free Hermitian operator on an `n_r x n_theta` polar grid.
#[derive(Debug, Clone)]
pub struct HermitianGridOperator {
    n_r: usize,
    n_theta: usize,
    kappa: f64,
    scheme: AngularScheme,
    mesh: RadialMesh,
    /// Diagonal entry for each radius (identical along theta).
    diag: Vec<f64>,
    /// Radial coupling `-1/h^2`.
    radial_off: f64,
    /// Coupling of `(i, j)` to `(i, j+1)`; `(i, j)` to `(i, j-1)` is its
    /// conjugate.
    theta_fwd: Vec<Complex64>,
    /// Diagonal of the theta-free radial operator
    /// `-d^2/dr^2 - 1/(4 r^2) + V`, whose spectrum bounds ours from below.
    base_diag: Vec<f64>,
}

pub fn assemble_2d(
    kappa: f64,
    spec: &PotentialSpec,
    n_r: usize,
    n_theta: usize,
    r_outer: f64,
) -> Result<HermitianGridOperator> {
    assemble_2d_with(kappa, spec, n_r, n_theta, r_outer, AngularScheme::default())
}

pub fn assemble_2d_with(
    kappa: f64,
    spec: &PotentialSpec,
    n_r: usize,
    n_theta: usize,
    r_outer: f64,
    scheme: AngularScheme,
) -> Result<HermitianGridOperator> {
    if n_r < 16 {
        return Err(Error::invalid(format!("n_r must be >= 16, got {n_r}")));
    }
    if n_theta < 8 || !n_theta.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n_theta must be even and >= 8, got {n_theta}"
        )));
    }
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa must be finite"));
    }
    let report = spec.validate();
    if !report.is_ok() {
        return Err(Error::invalid(format!("invalid potential: {report}")));
    }
    let mesh = build_mesh(spec.a, r_outer, n_r)?;
    let h = mesh.spacing();
    let inv_h2 = 1.0 / (h * h);
    let dtheta = TAU / n_theta as f64;
    let inv_dt2 = 1.0 / (dtheta * dtheta);

    let mut diag = Vec::with_capacity(n_r);
    let mut base_diag = Vec::with_capacity(n_r);
    let mut theta_fwd = Vec::with_capacity(n_r);
    for r in mesh.nodes() {
        let r2 = r * r;
        let base = 2.0 * inv_h2 - 0.25 / r2 + spec.evaluate(r)?;
        base_diag.push(base);
        let c = inv_dt2 / r2;
        match scheme {
            AngularScheme::Peierls => {
                diag.push(base + 2.0 * c);
                theta_fwd.push(-c * Complex64::from_polar(1.0, -kappa * dtheta));
            }
            AngularScheme::CentralDifference => {
                diag.push(base + 2.0 * c + kappa * kappa / r2);
                theta_fwd.push(Complex64::new(-c, kappa / (r2 * dtheta)));
            }
        }
    }
    Ok(HermitianGridOperator {
        n_r,
        n_theta,
        kappa,
        scheme,
        mesh,
        diag,
        radial_off: -inv_h2,
        theta_fwd,
        base_diag,
    })
}

impl HermitianGridOperator {
    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn scheme(&self) -> AngularScheme {
        self.scheme
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    /// Grid angle `theta_j`.
    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }

    /// Whether every coupling is real.
    pub fn is_real(&self) -> bool {
        self.theta_fwd.iter().all(|c| c.im == 0.0)
    }

    /// `out = T u`, with `u` indexed as `i * n_theta + j`.
    pub fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let (nr, nt) = (self.n_r, self.n_theta);
        assert_eq!(u.len(), nr * nt);
        assert_eq!(out.len(), nr * nt);
        for i in 0..nr {
            let row = i * nt;
            let d = self.diag[i];
            let fwd = self.theta_fwd[i];
            let bwd = fwd.conj();
            for j in 0..nt {
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let mut acc = u[row + j] * d + fwd * u[row + jp] + bwd * u[row + jm];
                if i > 0 {
                    acc += u[row - nt + j] * self.radial_off;
                }
                if i + 1 < nr {
                    acc += u[row + nt + j] * self.radial_off;
                }
                out[row + j] = acc;
            }
        }
    }

    /// `<u, T u> / <u, u>`.
    pub fn rayleigh_quotient(&self, u: &[Complex64]) -> f64 {
        let mut tu = vec![Complex64::default(); u.len()];
        self.apply(u, &mut tu);
        inner(u, &tu).re / inner(u, u).re
    }

    /// `|<T u, v> - <u, T v>| / (|<T u, v>| + |<u, T v>|)`.
    pub fn hermiticity_residual(&self, u: &[Complex64], v: &[Complex64]) -> f64 {
        let mut tu = vec![Complex64::default(); u.len()];
        let mut tv = vec![Complex64::default(); v.len()];
        self.apply(u, &mut tu);
        self.apply(v, &mut tv);
        let lhs = inner(&tu, v);
        let rhs = inner(u, &tv);
        let scale = lhs.norm() + rhs.norm();
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).norm() / scale
        }
    }

    /// Multiplies each grid value by `e^{i m theta_j}`.
    pub fn gauge_multiply(&self, u: &[Complex64], m: i64) -> Vec<Complex64> {
        let nt = self.n_theta;
        let phases: Vec<Complex64> = (0..nt)
            .map(|j| {
                // Reduce m j mod n_theta before forming the angle.
                let k = (m.rem_euclid(nt as i64) as usize * j) % nt;
                Complex64::from_polar(1.0, self.angle(k))
            })
            .collect();
        u.iter()
            .enumerate()
            .map(|(idx, v)| v * phases[idx % nt])
            .collect()
    }

    /// Ground energy of the theta-free radial operator: a lower bound for
    /// the Peierls spectrum, whose angular part is positive semidefinite.
    fn radial_floor(&self) -> Result<f64> {
        let n = self.n_r;
        let off = self.radial_off;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut acc = self.base_diag[i] * x[i];
                if i > 0 {
                    acc += off * x[i - 1];
                }
                if i + 1 < n {
                    acc += off * x[i + 1];
                }
                y[i] = acc;
            }
        };
        // Unshifted inverse iteration; the radial gap is wide.
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut y = vec![0.0; n];
        let mut rho = f64::INFINITY;
        for _ in 0..POWER_MAX {
            thomas_solve(&self.base_diag, off, &mut x).ok_or_else(|| {
                Error::Inconsistency("theta-free radial operator is singular".into())
            })?;
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
            apply(&x, &mut y);
            let next: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            if (next - rho).abs() <= 1e-13 * next.abs() {
                return Ok(next);
            }
            rho = next;
        }
        Err(Error::Convergence {
            what: "radial floor power iteration",
            iterations: POWER_MAX,
            residual: rho,
        })
    }
}

/// Solves a symmetric tridiagonal system with constant off-diagonal in
/// place, without pivoting. `None` on a zero pivot.
fn thomas_solve(diag: &[f64], off: f64, b: &mut [f64]) -> Option<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return None;
    }
    c[0] = off / denom;
    b[0] /= denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        if denom == 0.0 {
            return None;
        }
        c[i] = off / denom;
        b[i] = (b[i] - off * b[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        b[i] -= c[i] * b[i + 1];
    }
    Some(())
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

const POWER_MAX: usize = 2000;
const CG_TOL: f64 = 1e-11;

/// An eigenpair of the grid operator with solver statistics.
#[derive(Debug, Clone)]
pub struct GridEigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub power_iterations: usize,
    pub cg_iterations: usize,
}

enum CgFailure {
    Indefinite,
    Stalled(f64),
}

/// Conjugate gradients for `(T - shift) x = b`, starting from `x`.
fn conjugate_gradient(
    t: &HermitianGridOperator,
    shift: f64,
    b: &[Complex64],
    x: &mut [Complex64],
    max_iter: usize,
) -> std::result::Result<usize, CgFailure> {
    let n = b.len();
    let mut ap = vec![Complex64::default(); n];
    t.apply(x, &mut ap);
    let mut r: Vec<Complex64> = (0..n).map(|k| b[k] - (ap[k] - x[k] * shift)).collect();
    let mut p = r.clone();
    let mut rr = inner(&r, &r).re;
    let target = CG_TOL * norm(b);
    if rr.sqrt() <= target {
        return Ok(0);
    }
    for it in 1..=max_iter {
        t.apply(&p, &mut ap);
        ap.iter_mut().zip(&p).for_each(|(a, pk)| *a -= pk * shift);
        let pap = inner(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(CgFailure::Indefinite);
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += p[k] * alpha;
            r[k] -= ap[k] * alpha;
        }
        let rr_new = inner(&r, &r).re;
        if rr_new.sqrt() <= target {
            return Ok(it);
        }
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + p[k] * beta;
        }
        rr = rr_new;
    }
    Err(CgFailure::Stalled(
        rr.sqrt() / norm(b).max(f64::MIN_POSITIVE),
    ))
}

/// Seeded start vector with components in every angular mode.
fn start_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn project_out(x: &mut [Complex64], basis: &[GridEigenPair]) {
    for v in basis {
        let c = inner(&v.vector, x);
        x.iter_mut()
            .zip(&v.vector)
            .for_each(|(xk, vk)| *xk -= vk * c);
    }
}

/// Smallest eigenvalue by inverse power iteration; converged when successive
/// Rayleigh quotients differ by less than `tol` relative.
pub fn lowest_eigenvalue_2d(t: &HermitianGridOperator, tol: f64) -> Result<f64> {
    Ok(lowest_eigenpairs_2d(t, 1, tol)?.remove(0).value)
}

/// The `count` smallest eigenpairs. Each later pair is found by the same
/// iteration with the iterate orthogonalized against the earlier vectors at
/// every step.
///
/// Iterations run on `T - sigma` with `sigma` a little below the ground
/// energy of the theta-free radial operator, which bounds the spectrum from
/// below. If CG detects indefiniteness the shift is lowered and the solve
/// repeated.
pub fn lowest_eigenpairs_2d(
    t: &HermitianGridOperator,
    count: usize,
    tol: f64,
) -> Result<Vec<GridEigenPair>> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if count == 0 || count > t.len() {
        return Err(Error::invalid(format!("cannot compute {count} eigenpairs")));
    }
    let floor = t.radial_floor()?;
    let mut margin = 0.1 * floor.abs().max(1.0);
    let mut found: Vec<GridEigenPair> = Vec::with_capacity(count);
    let max_cg = 20 * t.len().max(100);

    'pairs: while found.len() < count {
        let shift = floor - margin;
        let mut x = start_vector(t.len(), 0x5eed + found.len() as u64);
        project_out(&mut x, &found);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut rho = t.rayleigh_quotient(&x);
        let mut cg_total = 0;
        for iter in 1..=POWER_MAX {
            let mut y: Vec<Complex64> = x.iter().map(|v| v / (rho - shift)).collect();
            match conjugate_gradient(t, shift, &x, &mut y, max_cg) {
                Ok(its) => cg_total += its,
                Err(CgFailure::Indefinite) => {
                    margin *= 4.0;
                    found.clear();
                    continue 'pairs;
                }
                Err(CgFailure::Stalled(res)) => {
                    return Err(Error::Convergence {
                        what: "conjugate gradient",
                        iterations: max_cg,
                        residual: res,
                    })
                }
            }
            project_out(&mut y, &found);
            let ny = norm(&y);
            y.iter_mut().for_each(|v| *v /= ny);
            x = y;
            let next = t.rayleigh_quotient(&x);
            let done = (next - rho).abs() <= tol * next.abs();
            rho = next;
            if done {
                found.push(GridEigenPair {
                    value: rho,
                    vector: x,
                    power_iterations: iter,
                    cg_iterations: cg_total,
                });
                continue 'pairs;
            }
        }
        return Err(Error::Convergence {
            what: "inverse power iteration",
            iterations: POWER_MAX,
            residual: rho,
        });
    }
    Ok(found)
}

/// Default relative tolerance of the 2D eigenvalue iteration.
pub const ORACLE_TOL: f64 = 1e-12;

/// Grid oracle against the radial pipeline at matched radial resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub kappa: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub outer_radius: f64,
    pub lambda_radial: f64,
    pub lambda_2d: f64,
    /// `|lambda_2d - lambda_radial| / lambda_radial`.
    pub discrepancy: f64,
    /// The same at `2 n_theta`.
    pub lambda_2d_refined: f64,
    pub discrepancy_refined: f64,
}

pub fn compare_with_radial(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    n_r: usize,
    n_theta: usize,
) -> Result<OracleComparison> {
    if n_r < 16 || n_theta < 8 || !n_theta.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "grid sizes n_r = {n_r}, n_theta = {n_theta} out of range (n_r >= 16, even n_theta >= 8)"
        )));
    }
    let r_outer = adaptive_outer_radius(kappa, spec, cfg)?;
    let mesh = build_mesh(spec.a, r_outer, n_r)?;
    let tight = NumericsConfig {
        eig_tol: cfg.eig_tol.min(FD_EIG_TOL),
        ..*cfg
    };
    let radial = ground_state_on_mesh(kappa, spec, &tight, &mesh)?.lambda1;
    let coarse = lowest_eigenvalue_2d(
        &assemble_2d(kappa, spec, n_r, n_theta, r_outer)?,
        ORACLE_TOL,
    )?;
    let fine = lowest_eigenvalue_2d(
        &assemble_2d(kappa, spec, n_r, 2 * n_theta, r_outer)?,
        ORACLE_TOL,
    )?;
    let rel = |x: f64| (x - radial).abs() / radial.abs();
    Ok(OracleComparison {
        kappa,
        n_r,
        n_theta,
        outer_radius: r_outer,
        lambda_radial: radial,
        lambda_2d: coarse,
        discrepancy: rel(coarse),
        lambda_2d_refined: fine,
        discrepancy_refined: rel(fine),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialBasis;

    fn spec() -> PotentialSpec {
        PotentialSpec::default()
    }

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        start_vector(n, seed)
    }

    #[test]
    fn size_guards() {
        assert!(assemble_2d(0.0, &spec(), 4, 16, 7.0).is_err());
        assert!(assemble_2d(0.0, &spec(), 32, 6, 7.0).is_err());
        assert!(assemble_2d(0.0, &spec(), 32, 15, 7.0).is_err());
        assert!(assemble_2d(0.0, &spec(), 32, 16, 0.5).is_err());
    }

    #[test]
    fn real_at_zero_flux() {
        for scheme in [AngularScheme::Peierls, AngularScheme::CentralDifference] {
            assert!(assemble_2d_with(0.0, &spec(), 32, 16, 7.0, scheme)
                .unwrap()
                .is_real());
            assert!(!assemble_2d_with(0.3, &spec(), 32, 16, 7.0, scheme)
                .unwrap()
                .is_real());
        }
    }

    #[test]
    fn hermitian_on_random_pairs() {
        for scheme in [AngularScheme::Peierls, AngularScheme::CentralDifference] {
            for kappa in [0.0, 0.3, 0.5, -1.7] {
                let t = assemble_2d_with(kappa, &spec(), 40, 16, 7.0, scheme).unwrap();
                for s in 0..20 {
                    let u = random(t.len(), 2 * s);
                    let v = random(t.len(), 2 * s + 1);
                    assert!(t.hermiticity_residual(&u, &v) <= 1e-12);
                    assert!(t.rayleigh_quotient(&u) > 0.0);
                }
            }
        }
    }

    #[test]
    fn theta_constant_vectors_see_the_radial_operator() {
        let r_outer = 7.0;
        let t0 = assemble_2d(0.0, &spec(), 40, 16, r_outer).unwrap();
        let mesh = build_mesh(1.0, r_outer, 40).unwrap();
        let radial = RadialBasis::new(&spec(), &mesh).unwrap().operator(0.0, 0);
        let profile: Vec<f64> = (0..40).map(|i| ((i + 1) as f64 * 0.3).sin()).collect();
        let mut expected = vec![0.0; 40];
        radial.matrix.apply(&profile, &mut expected);
        let u: Vec<Complex64> = profile
            .iter()
            .flat_map(|&p| std::iter::repeat_n(Complex64::new(p, 0.0), 16))
            .collect();
        let mut out = vec![Complex64::default(); u.len()];
        t0.apply(&u, &mut out);
        for i in 0..40 {
            for j in 0..16 {
                let got = out[i * 16 + j];
                assert!((got.re - expected[i]).abs() <= 1e-12 * expected[i].abs().max(1.0));
                assert!(got.im.abs() <= 1e-12);
            }
        }

        // Central differences keep kappa^2 / r^2 on constants for any kappa.
        let tc = assemble_2d_with(
            0.3,
            &spec(),
            40,
            16,
            r_outer,
            AngularScheme::CentralDifference,
        )
        .unwrap();
        let radial = RadialBasis::new(&spec(), &mesh).unwrap().operator(0.3, 0);
        radial.matrix.apply(&profile, &mut expected);
        tc.apply(&u, &mut out);
        for i in 0..40 {
            assert!((out[i * 16].re - expected[i]).abs() <= 1e-12 * expected[i].abs().max(1.0));
        }
    }

    #[test]
    fn gauge_shift_is_unitary_equivalence() {
        let t = assemble_2d(0.3, &spec(), 32, 16, 7.0).unwrap();
        let shifted = assemble_2d(1.3, &spec(), 32, 16, 7.0).unwrap();
        for s in 0..10 {
            let u = random(t.len(), 100 + s);
            let mapped = t.gauge_multiply(&u, 1);
            let a = t.rayleigh_quotient(&u);
            let b = shifted.rayleigh_quotient(&mapped);
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_flux_matches_radial_exactly() {
        let cfg = NumericsConfig::default();
        let c = compare_with_radial(0.0, &spec(), &cfg, 100, 16).unwrap();
        assert!(c.discrepancy <= 1e-8, "{c:?}");
    }

    #[test]
    fn half_flux_pair_is_degenerate() {
        let t = assemble_2d(0.5, &spec(), 64, 16, 7.0).unwrap();
        let pairs = lowest_eigenpairs_2d(&t, 2, ORACLE_TOL).unwrap();
        let (a, b) = (pairs[0].value, pairs[1].value);
        assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
        assert!(inner(&pairs[0].vector, &pairs[1].vector).norm() < 1e-8);
    }

    #[test]
    fn central_scheme_splits_the_half_flux_pair() {
        let t =
            assemble_2d_with(0.5, &spec(), 64, 16, 7.0, AngularScheme::CentralDifference).unwrap();
        let pairs = lowest_eigenpairs_2d(&t, 2, ORACLE_TOL).unwrap();
        assert!((pairs[1].value - pairs[0].value) > 1e-6);
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let diag = [4.0, 5.0, 6.0, 7.0];
        let mut b = [1.0, 2.0, 3.0, 4.0];
        thomas_solve(&diag, -1.0, &mut b).unwrap();
        let check = [
            4.0 * b[0] - b[1],
            -b[0] + 5.0 * b[1] - b[2],
            -b[1] + 6.0 * b[2] - b[3],
            -b[2] + 7.0 * b[3],
        ];
        for (c, e) in check.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((c - e).abs() < 1e-14);
        }
    }
}

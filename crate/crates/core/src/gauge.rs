//! Circulation of curl-free planar fields and gauge equivalence of
//! circulations.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{PotentialSpec, RadialMesh};
use crate::radial::RadialBasis;

type FieldFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;

/// A smooth vector potential defined on `|z| > a`.
#[derive(Clone)]
pub struct PlanarFieldSampler {
    a: f64,
    field: Arc<FieldFn>,
}

impl std::fmt::Debug for PlanarFieldSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarFieldSampler")
            .field("a", &self.a)
            .finish_non_exhaustive()
    }
}

impl PlanarFieldSampler {
    pub fn new<F>(a: f64, field: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        Self {
            a,
            field: Arc::new(field),
        }
    }

    /// `A_kappa(z) = kappa (-y, x) / |z|^2`.
    pub fn aharonov_bohm(kappa: f64, a: f64) -> Self {
        Self::new(a, move |x, y| {
            let r2 = x * x + y * y;
            [-kappa * y / r2, kappa * x / r2]
        })
    }

    /// Gradient of a single-valued function, supplied as its partials.
    pub fn gradient<F>(a: f64, grad: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        Self::new(a, grad)
    }

    pub fn inner_radius(&self) -> f64 {
        self.a
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        (self.field)(x, y)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (f, g) = (self.field.clone(), other.field.clone());
        Self::new(self.a.max(other.a), move |x, y| {
            let (u, v) = (f(x, y), g(x, y));
            [u[0] + v[0], u[1] + v[1]]
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (f, g) = (self.field.clone(), other.field.clone());
        Self::new(self.a.max(other.a), move |x, y| {
            let (u, v) = (f(x, y), g(x, y));
            [u[0] - v[0], u[1] - v[1]]
        })
    }
}

pub const DEFAULT_QUADRATURE_NODES: usize = 64;
pub const DEFAULT_GQR_TOL: f64 = 1e-9;

/// `(1/2 pi)` times the line integral of the field around the circle of
/// radius `rho`, by the periodic trapezoid rule with `n_quad` nodes.
pub fn circulation_of(field: &PlanarFieldSampler, rho: f64, n_quad: usize) -> Result<f64> {
    if !(rho > field.a) || !rho.is_finite() {
        return Err(Error::domain(format!(
            "circle radius {rho} must exceed the inner radius {}",
            field.a
        )));
    }
    if n_quad < 8 {
        return Err(Error::invalid(format!(
            "need at least 8 quadrature nodes, got {n_quad}"
        )));
    }
    let sum: f64 = (0..n_quad)
        .map(|k| {
            let theta = TAU * k as f64 / n_quad as f64;
            let (s, c) = theta.sin_cos();
            let [ax, ay] = field.eval(rho * c, rho * s);
            -ax * s + ay * c
        })
        .sum();
    Ok(rho * sum / n_quad as f64)
}

/// Whether `kappa2 - kappa1` is within `tol` of an integer.
pub fn is_gqr(kappa1: f64, kappa2: f64, tol: f64) -> bool {
    let d = kappa2 - kappa1;
    (d - d.round()).abs() <= tol
}

/// Largest entrywise difference between the radial matrix for
/// `(kappa, mode)` and the one for `(kappa + m_shift, mode + m_shift)`.
///
/// Multiplying by `e^{i m_shift theta}` maps the angular mode `mode` at
/// circulation `kappa` onto `mode + m_shift` at `kappa + m_shift`; both
/// carry the same `(mode - kappa)^2`.
pub fn conjugation_check(
    kappa: f64,
    m_shift: i64,
    mode: i64,
    mesh: &RadialMesh,
    spec: &PotentialSpec,
) -> Result<f64> {
    let basis = RadialBasis::new(spec, mesh)?;
    Ok(conjugation_residual(&basis, kappa, m_shift, mode))
}

pub(crate) fn conjugation_residual(
    basis: &RadialBasis,
    kappa: f64,
    m_shift: i64,
    mode: i64,
) -> f64 {
    let a = basis.operator(kappa, mode);
    let b = basis.operator(kappa + m_shift as f64, mode + m_shift);
    let diag = a.diag().iter().zip(b.diag()).map(|(x, y)| (x - y).abs());
    let off = a.off().iter().zip(b.off()).map(|(x, y)| (x - y).abs());
    diag.chain(off).fold(0.0, f64::max)
}

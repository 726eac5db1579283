//! Invariant checks run together at desk scale, each reporting the measured
//! quantity next to its threshold.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigensolve::{dense_brute_force, lowest_k, SymTridiagonal};
use crate::error::Result;
use crate::gauge::{conjugation_check, is_gqr, DEFAULT_GQR_TOL};
use crate::model::{build_mesh, NumericsConfig, PotentialSpec};
use crate::oracle2d::compare_with_radial;
use crate::spectrum::{
    adaptive_outer_radius, convergence_order, degeneracy_multiplicity, fd_derivative, ground_state,
    hf_derivative, nodal_ray_check, sweep,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<22} {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, res: Result<(bool, String)>) -> CheckOutcome {
    match res {
        Ok((passed, detail)) => CheckOutcome {
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

const SYMMETRY_KAPPAS: [f64; 4] = [-0.4, -0.1, 0.2, 0.5];
const SYMMETRY_TOL: f64 = 1e-12;
const HF_TOL: f64 = 1e-4;
const ORDER_BAND: (f64, f64) = (1.7, 2.3);
/// Largest acceptable Richardson estimate of the relative discretization
/// error at `n_default`.
const DISCRETIZATION_TOL: f64 = 1e-5;

/// Runs every check. An invalid potential is reported alone: the remaining
/// checks all need a valid one.
pub fn run_all(spec: &PotentialSpec, cfg: &NumericsConfig) -> Vec<CheckOutcome> {
    let report = spec.validate();
    let validity = CheckOutcome {
        name: "potential",
        passed: report.is_ok(),
        detail: report.to_string(),
    };
    if !validity.passed {
        return vec![validity];
    }
    if let Err(e) = cfg.validate() {
        return vec![
            validity,
            CheckOutcome {
                name: "numerics",
                passed: false,
                detail: e.to_string(),
            },
        ];
    }
    vec![
        validity,
        outcome("periodicity", periodicity(spec, cfg)),
        outcome("evenness", evenness(spec, cfg)),
        outcome("monotonicity", monotonicity(spec, cfg)),
        outcome("hellmann-feynman", hellmann_feynman(spec, cfg)),
        outcome("degeneracy", degeneracy(spec, cfg)),
        outcome("minimum at integer", minimum_at_integer(spec, cfg)),
        outcome("nodal ray", nodal_ray(spec, cfg)),
        outcome("gauge criterion", gauge(spec, cfg)),
        outcome("eigensolver oracle", Ok(eigensolver_oracle())),
        outcome("2d oracle", oracle(spec, cfg)),
        outcome("convergence order", order(spec, cfg)),
    ]
}

fn lambda(kappa: f64, spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<f64> {
    Ok(ground_state(kappa, spec, cfg)?.lambda1)
}

fn periodicity(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in SYMMETRY_KAPPAS {
        let (a, b) = (lambda(k, spec, cfg)?, lambda(k + 1.0, spec, cfg)?);
        worst = worst.max((b - a).abs() / a);
    }
    Ok((
        worst <= SYMMETRY_TOL,
        format!("max rel |l(k+1) - l(k)| = {worst:.3e}"),
    ))
}

fn evenness(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in SYMMETRY_KAPPAS {
        let (a, b) = (lambda(k, spec, cfg)?, lambda(-k, spec, cfg)?);
        worst = worst.max((b - a).abs() / a);
    }
    Ok((
        worst <= SYMMETRY_TOL,
        format!("max rel |l(-k) - l(k)| = {worst:.3e}"),
    ))
}

fn monotonicity(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let s = sweep(0.0, 0.5, 26, spec, cfg)?;
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    for w in s.lambdas.windows(2) {
        let floor = 10.0 * cfg.eig_tol * w[0];
        let gap = w[1] - w[0];
        ok &= gap >= floor && gap > 0.0;
        min_margin = min_margin.min(gap / floor);
    }
    Ok((
        ok,
        format!("min step / (10 eig_tol lambda) = {min_margin:.3e}"),
    ))
}

fn hellmann_feynman(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in [0.1, 0.25, 0.4] {
        let hf = hf_derivative(&ground_state(k, spec, cfg)?, cfg)?;
        let fd = fd_derivative(k, 1e-4, spec, cfg)?;
        worst = worst.max((hf - fd).abs() / fd.abs());
    }
    Ok((worst <= HF_TOL, format!("max rel |HF - FD| = {worst:.3e}")))
}

fn degeneracy(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let mut ok = true;
    for k in [0.0, 0.1, 0.25, 0.49] {
        ok &= degeneracy_multiplicity(k, spec, cfg)?.multiplicity == 1;
    }
    let d = degeneracy_multiplicity(0.5, spec, cfg)?;
    let split = if d.energies.len() == 2 {
        (d.energies[1] - d.energies[0]).abs() / d.energies[0]
    } else {
        f64::INFINITY
    };
    ok &= d.multiplicity == 2 && d.modes == [0, 1] && split <= SYMMETRY_TOL;
    Ok((
        ok,
        format!("at 1/2: modes {:?}, rel split {split:.3e}", d.modes),
    ))
}

fn minimum_at_integer(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let left = fd_derivative(-0.1, 1e-4, spec, cfg)?;
    let right = fd_derivative(0.1, 1e-4, spec, cfg)?;
    Ok((
        left < 0.0 && right > 0.0,
        format!("d/dk at -0.1: {left:.6e}, at 0.1: {right:.6e}"),
    ))
}

fn nodal_ray(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let r = nodal_ray_check(spec, cfg)?;
    let ok = r.max_on_ray == 0.0 && r.identity_residual <= 1e-14 && r.min_off_ray > 0.0;
    Ok((
        ok,
        format!(
            "max on ray {:.1e}, identity residual {:.1e}, min off ray {:.3e}",
            r.max_on_ray, r.identity_residual, r.min_off_ray
        ),
    ))
}

fn gauge(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let mut ok = true;
    let grid: Vec<f64> = (0..10).map(|i| -2.25 + 0.5 * i as f64).collect();
    for &k1 in &grid {
        for &k2 in &grid {
            let d = k2 - k1;
            ok &= is_gqr(k1, k2, DEFAULT_GQR_TOL) == ((d - d.round()).abs() <= DEFAULT_GQR_TOL);
        }
    }
    // Near misses on either side of the tolerance.
    ok &= is_gqr(0.3, 1.3 + 0.5e-9, DEFAULT_GQR_TOL);
    ok &= !is_gqr(0.3, 1.3 + 2e-9, DEFAULT_GQR_TOL);

    let r = adaptive_outer_radius(0.0, spec, cfg)?;
    let mesh = build_mesh(spec.a, r, cfg.n_default)?;
    let mut worst = 0.0f64;
    for k in [-0.4, -0.1, 0.0, 0.3, 0.5] {
        for shift in [-2, -1, 0, 1, 3] {
            for mode in [-2, -1, 0, 1, 2] {
                worst = worst.max(conjugation_check(k, shift, mode, &mesh, spec)?);
            }
        }
    }
    ok &= worst == 0.0;
    Ok((ok, format!("max conjugation residual {worst:.1e}")))
}

/// Bisection against dense Jacobi on 100 seeded random tridiagonals.
fn eigensolver_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xab);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let d = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let e = (0..n - 1).map(|_| rng.random_range(-5.0..5.0)).collect();
        let t = SymTridiagonal::new(d, e).expect("finite entries");
        let scale = t.norm_inf();
        let (Ok(fast), Ok(dense)) = (lowest_k(&t, n, 1e-14), dense_brute_force(&t)) else {
            return (false, "solver error".into());
        };
        for (a, b) in fast.iter().zip(&dense) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    (worst <= 1e-10, format!("max scaled difference {worst:.3e}"))
}

fn oracle(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let c = compare_with_radial(0.0, spec, cfg, 100, 16)?;
    Ok((
        c.discrepancy <= 1e-8,
        format!("kappa 0 discrepancy {:.3e}", c.discrepancy),
    ))
}

fn order(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<(bool, String)> {
    let base = cfg.n_default / 4;
    let study = convergence_order(0.3, spec, cfg, &[base, 2 * base, 4 * base])?;
    let finest = *study.lambdas.last().expect("three sizes");
    let error = (finest - study.extrapolated).abs() / study.extrapolated.abs();
    let ok = (ORDER_BAND.0..=ORDER_BAND.1).contains(&study.order) && error <= DISCRETIZATION_TOL;
    Ok((
        ok,
        format!(
            "order {:.4} at n = {:?}, estimated rel error {error:.2e} (limit {DISCRETIZATION_TOL:.0e})",
            study.order, study.sizes
        ),
    ))
}

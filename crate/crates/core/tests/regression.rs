//! Frozen reference values. The mesh eigenvalues were computed independently
//! with LAPACK `dstemr` (through SciPy's `eigh_tridiagonal`) on the same
//! three-point matrices, at the defaults `a = beta = omega = 1, p = q = 2`.

use ab_spectra_core::model::{build_mesh, NumericsConfig, PotentialSpec};
use ab_spectra_core::spectrum::{convergence_order, mode_ground_energy};
use approx::assert_relative_eq;

/// Adaptive outer radius at `kappa = 0` for the default configuration.
const OUTER_RADIUS: f64 = 7.138465383654086;

/// Lowest eigenvalue of the `m = 0`, `kappa = 0` matrix on `(1, OUTER_RADIUS)`.
const LAPACK_LAMBDA: [(usize, f64); 3] = [
    (1000, 4.185478735757529),
    (2000, 4.18549705278079),
    (4000, 4.185501722129119),
];

/// Richardson extrapolation of the three values above with their observed
/// order, 1.97189.
const LAPACK_EXTRAPOLATED: f64 = 4.1855033196769735;

#[test]
fn mesh_eigenvalues_match_lapack() {
    let spec = PotentialSpec::default();
    for (n, expected) in LAPACK_LAMBDA {
        let mesh = build_mesh(1.0, OUTER_RADIUS, n).unwrap();
        let got = mode_ground_energy(0.0, 0, &spec, &mesh, 1e-15).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-10);
    }
}

#[test]
fn convergence_study_matches_lapack_extrapolation() {
    let spec = PotentialSpec::default();
    let study =
        convergence_order(0.0, &spec, &NumericsConfig::default(), &[1000, 2000, 4000]).unwrap();
    assert_relative_eq!(study.outer_radius, OUTER_RADIUS, max_relative = 1e-12);
    assert_relative_eq!(study.order, 1.97189, epsilon = 1e-4);
    assert_relative_eq!(study.extrapolated, LAPACK_EXTRAPOLATED, max_relative = 1e-9);
}

#[test]
fn flux_raises_the_ground_energy_on_a_shared_mesh() {
    // On one mesh, lambda_1 at kappa = 0.3 and 0.5 sits above kappa = 0.
    let spec = PotentialSpec::default();
    let mesh = build_mesh(1.0, OUTER_RADIUS, 4000).unwrap();
    let base = mode_ground_energy(0.0, 0, &spec, &mesh, 1e-15).unwrap();
    let mid = mode_ground_energy(0.3, 0, &spec, &mesh, 1e-15).unwrap();
    let top = mode_ground_energy(0.5, 0, &spec, &mesh, 1e-15).unwrap();
    assert_relative_eq!(base, LAPACK_LAMBDA[2].1, max_relative = 1e-10);
    assert!(base < mid && mid < top);
}

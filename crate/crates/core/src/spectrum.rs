//! Ground eigenvalue of the full operator: minimum over angular modes,
//! circulation sweeps, the Hellmann-Feynman derivative, degeneracy and the
//! nodal ray at half-integer circulation, domain sizing and convergence order.

use rayon::prelude::*;

use crate::eigensolve::{inverse_iteration, lowest_k};
use crate::error::{Error, Result};
use crate::model::{build_mesh, canonical_circulation, NumericsConfig, PotentialSpec, RadialMesh};
use crate::radial::RadialBasis;

/// Bisection tolerance used when eigenvalues are differenced. Bisection then
/// runs until the bracket cannot shrink further.
pub const FD_EIG_TOL: f64 = 1e-15;

/// Step of the central differences attached to sweep points.
pub const SWEEP_FD_STEP: f64 = 1e-4;

/// Number of mode-window doublings tried before giving up.
const MODE_DOUBLINGS: u32 = 4;

/// Largest number of outer-radius expansions.
const MAX_EXPANSIONS: usize = 10;

/// Ground eigenvalue, its angular mode and radial eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub kappa: f64,
    pub lambda1: f64,
    pub mode_star: i64,
    /// Unit-norm eigenvector in the Liouville variable `g = sqrt(r) f`.
    pub g: Vec<f64>,
    pub mesh: RadialMesh,
    pub spec: PotentialSpec,
    /// Lowest eigenvalue of every mode in the final window, by mode.
    pub mode_energies: Vec<(i64, f64)>,
}

impl GroundState {
    /// Radial profile `f = g / sqrt(r)` on the mesh nodes.
    pub fn radial_profile(&self) -> Vec<f64> {
        self.mesh
            .nodes()
            .zip(&self.g)
            .map(|(r, g)| g / r.sqrt())
            .collect()
    }

    /// `sum g_i^2 / r_i^2`, the discrete `||psi/|z|||^2 / ||psi||^2`.
    pub fn inverse_square_radius_moment(&self) -> f64 {
        self.mesh
            .nodes()
            .zip(&self.g)
            .map(|(r, g)| g * g / (r * r))
            .sum()
    }
}

/// Mode energies on a fixed mesh.
pub(crate) struct ModeSolver {
    basis: RadialBasis,
}

struct ModeScan {
    energies: Vec<(i64, f64)>,
    star: i64,
    lambda: f64,
}

impl ModeSolver {
    pub(crate) fn new(spec: &PotentialSpec, mesh: &RadialMesh) -> Result<Self> {
        Ok(Self {
            basis: RadialBasis::new(spec, mesh)?,
        })
    }

    fn energy(&self, kappa: f64, mode: i64, tol: f64) -> Result<f64> {
        let t = self.basis.operator(kappa, mode);
        Ok(lowest_k(&t.matrix, 1, tol)?[0])
    }

    /// Minimizes over `m` in `[-M, M]`, doubling `M` while the minimizer sits
    /// on the window edge. Exact ties go to the smaller `|m|`, then smaller `m`.
    fn scan(&self, kappa: f64, max_mode: i64, tol: f64) -> Result<ModeScan> {
        let mut window = max_mode;
        for _ in 0..=MODE_DOUBLINGS {
            let energies = (-window..=window)
                .map(|m| Ok((m, self.energy(kappa, m, tol)?)))
                .collect::<Result<Vec<_>>>()?;
            let &(star, lambda) = energies
                .iter()
                .min_by(|a, b| {
                    a.1.total_cmp(&b.1)
                        .then(a.0.abs().cmp(&b.0.abs()))
                        .then(a.0.cmp(&b.0))
                })
                .expect("window is non-empty");
            if star.abs() < window {
                return Ok(ModeScan {
                    energies,
                    star,
                    lambda,
                });
            }
            window *= 2;
        }
        Err(Error::ModeRange {
            kappa,
            max_mode: window / 2,
        })
    }
}

/// Lowest eigenvalue of the radial operator for one mode.
pub fn mode_ground_energy(
    kappa: f64,
    mode: i64,
    spec: &PotentialSpec,
    mesh: &RadialMesh,
    eig_tol: f64,
) -> Result<f64> {
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa must be finite"));
    }
    ModeSolver::new(spec, mesh)?.energy(kappa, mode, eig_tol)
}

/// Ground state on a mesh of `cfg.n_default` nodes out to the adaptive radius.
pub fn ground_state(kappa: f64, spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<GroundState> {
    let mesh = default_mesh(kappa, spec, cfg)?;
    ground_state_on_mesh(kappa, spec, cfg, &mesh)
}

pub fn ground_state_on_mesh(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    mesh: &RadialMesh,
) -> Result<GroundState> {
    cfg.validate()?;
    canonical_circulation(kappa)?;
    let solver = ModeSolver::new(spec, mesh)?;
    ground_state_with(&solver, kappa, spec, cfg)
}

fn ground_state_with(
    solver: &ModeSolver,
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<GroundState> {
    let scan = solver.scan(kappa, cfg.max_mode, cfg.eig_tol)?;
    let t = solver.basis.operator(kappa, scan.star);
    let pair = inverse_iteration(&t.matrix, scan.lambda)?;
    Ok(GroundState {
        kappa,
        lambda1: scan.lambda,
        mode_star: scan.star,
        g: pair.vector,
        mesh: *solver.basis.mesh(),
        spec: *spec,
        mode_energies: scan.energies,
    })
}

fn default_mesh(kappa: f64, spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<RadialMesh> {
    let r = adaptive_outer_radius(kappa, spec, cfg)?;
    build_mesh(spec.a, r, cfg.n_default)
}

/// Whether the canonical circulation sits within `deg_tol` of 0 or 1/2.
fn at_endpoint(kappa: f64, cfg: &NumericsConfig) -> Result<Option<&'static str>> {
    let c = canonical_circulation(kappa)?.abs();
    Ok(if c <= cfg.deg_tol {
        Some("endpoint")
    } else if 0.5 - c <= cfg.deg_tol {
        Some("degenerate")
    } else {
        None
    })
}

/// `d lambda_1 / d kappa = 2 (kappa - m*) sum_i g_i^2 / r_i^2`.
///
/// On the branch `m* = 0` this is `2 kappa ||psi/|z|||^2` for the real,
/// normalized ground state. Other windings are relabeled to that branch.
pub fn hf_derivative(gs: &GroundState, cfg: &NumericsConfig) -> Result<f64> {
    if let Some(reason) = at_endpoint(gs.kappa, cfg)? {
        return Err(Error::UndefinedDerivative {
            kappa: gs.kappa,
            reason,
        });
    }
    let relabeled = gs.kappa - gs.mode_star as f64;
    Ok(2.0 * relabeled * gs.inverse_square_radius_moment())
}

/// Checks that `[kappa - h, kappa + h]` lies inside one open interval
/// `(j/2, (j+1)/2)` where the ground eigenvalue is smooth.
fn check_stencil(kappa: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) || !kappa.is_finite() {
        return Err(Error::invalid(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let (lo, hi) = (2.0 * (kappa - h), 2.0 * (kappa + h));
    let cell = lo.floor();
    if lo == cell || hi > cell + 1.0 || hi == cell + 1.0 {
        return Err(Error::invalid(format!(
            "stencil [{}, {}] crosses an integer or half-integer circulation",
            kappa - h,
            kappa + h
        )));
    }
    Ok(())
}

/// Central difference `(lambda_1(kappa + h) - lambda_1(kappa - h)) / 2h` on
/// the mesh chosen for `kappa`.
pub fn fd_derivative(
    kappa: f64,
    h: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<f64> {
    check_stencil(kappa, h)?;
    let mesh = default_mesh(kappa, spec, cfg)?;
    fd_derivative_on_mesh(kappa, h, spec, cfg, &mesh)
}

pub fn fd_derivative_on_mesh(
    kappa: f64,
    h: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    mesh: &RadialMesh,
) -> Result<f64> {
    check_stencil(kappa, h)?;
    cfg.validate()?;
    let solver = ModeSolver::new(spec, mesh)?;
    fd_with(&solver, kappa, h, cfg)
}

fn fd_with(solver: &ModeSolver, kappa: f64, h: f64, cfg: &NumericsConfig) -> Result<f64> {
    let tol = cfg.eig_tol.min(FD_EIG_TOL);
    let plus = solver.scan(kappa + h, cfg.max_mode, tol)?.lambda;
    let minus = solver.scan(kappa - h, cfg.max_mode, tol)?.lambda;
    Ok((plus - minus) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Degeneracy {
    pub multiplicity: usize,
    /// Modes whose lowest eigenvalue ties the ground eigenvalue, ascending.
    pub modes: Vec<i64>,
    /// The tying eigenvalues, in the order of `modes`.
    pub energies: Vec<f64>,
}

/// Counts modes whose lowest eigenvalue lies within
/// `deg_tol * max(1, |lambda_1|)` of the ground eigenvalue.
pub fn degeneracy_multiplicity(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<Degeneracy> {
    let mesh = default_mesh(kappa, spec, cfg)?;
    degeneracy_on_mesh(kappa, spec, cfg, &mesh)
}

pub fn degeneracy_on_mesh(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    mesh: &RadialMesh,
) -> Result<Degeneracy> {
    cfg.validate()?;
    canonical_circulation(kappa)?;
    let solver = ModeSolver::new(spec, mesh)?;
    let scan = solver.scan(kappa, cfg.max_mode, cfg.eig_tol)?;
    Ok(group_degenerate(&scan.energies, scan.lambda, cfg.deg_tol))
}

fn group_degenerate(energies: &[(i64, f64)], lambda: f64, deg_tol: f64) -> Degeneracy {
    let window = deg_tol * lambda.abs().max(1.0);
    let (modes, energies): (Vec<i64>, Vec<f64>) = energies
        .iter()
        .filter(|(_, e)| e - lambda <= window)
        .copied()
        .unzip();
    Degeneracy {
        multiplicity: modes.len(),
        modes,
        energies,
    }
}

impl GroundState {
    pub fn degeneracy(&self, cfg: &NumericsConfig) -> Degeneracy {
        group_degenerate(&self.mode_energies, self.lambda1, cfg.deg_tol)
    }
}

/// Ground eigenvalue on a uniform circulation grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub kappas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub modes: Vec<i64>,
    pub hf_derivs: Vec<Option<f64>>,
    pub fd_derivs: Vec<Option<f64>>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }
}

/// `kappa_i = from + (to - from) i / (steps - 1)`.
pub fn kappa_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::invalid("sweep bounds must be finite"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| from + (to - from) * (i as f64 / last))
        .collect())
}

/// Evaluates the ground state on every grid point using one shared mesh,
/// whose radius is the larger of the adaptive radii at the two endpoints.
pub fn sweep(
    kappa_from: f64,
    kappa_to: f64,
    steps: usize,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<SweepResult> {
    let grid = kappa_grid(kappa_from, kappa_to, steps)?;
    cfg.validate()?;
    let r = adaptive_outer_radius(kappa_from, spec, cfg)?
        .max(adaptive_outer_radius(kappa_to, spec, cfg)?);
    let mesh = build_mesh(spec.a, r, cfg.n_default)?;
    sweep_on_mesh(&grid, spec, cfg, &mesh)
}

pub fn sweep_on_mesh(
    grid: &[f64],
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    mesh: &RadialMesh,
) -> Result<SweepResult> {
    let solver = ModeSolver::new(spec, mesh)?;
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(index, &kappa)| {
            sweep_point(&solver, kappa, spec, cfg).map_err(|e| Error::SweepPoint {
                index,
                kappa,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SweepResult::default();
    for (kappa, (gs, hf, fd)) in grid.iter().zip(points) {
        out.kappas.push(*kappa);
        out.lambdas.push(gs.lambda1);
        out.modes.push(gs.mode_star);
        out.hf_derivs.push(hf);
        out.fd_derivs.push(fd);
    }
    Ok(out)
}

type SweepPoint = (GroundState, Option<f64>, Option<f64>);

fn sweep_point(
    solver: &ModeSolver,
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<SweepPoint> {
    let gs = ground_state_with(solver, kappa, spec, cfg)?;
    let hf = match hf_derivative(&gs, cfg) {
        Ok(v) => Some(v),
        Err(Error::UndefinedDerivative { .. }) => None,
        Err(e) => return Err(e),
    };
    let fd = if check_stencil(kappa, SWEEP_FD_STEP).is_ok() {
        Some(fd_with(solver, kappa, SWEEP_FD_STEP, cfg)?)
    } else {
        None
    };
    Ok((gs, hf, fd))
}

/// Samples of the degenerate ground state at half-integer circulation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalRayReport {
    /// Largest `|psi(r, pi)|` over the mesh.
    pub max_on_ray: f64,
    /// Smallest `|psi(r, theta)|`, `theta` in `{0, pi/2}`, where `|f|` exceeds
    /// 10% of its peak.
    pub min_off_ray: f64,
    /// Largest deviation of `|psi(r, theta)|` from `|f(r)| |cos(theta/2)|`
    /// over the sampled angles.
    pub identity_residual: f64,
    /// Peak of `|f|`, for scale.
    pub profile_peak: f64,
    pub degeneracy: Degeneracy,
}

/// `e^{2 pi i t}`, exact at quarter turns.
fn unit_phase(turns: f64) -> (f64, f64) {
    let t = turns - turns.floor();
    let quarter = 4.0 * t;
    if quarter == quarter.round() {
        match quarter as i64 % 4 {
            0 => return (1.0, 0.0),
            1 => return (0.0, 1.0),
            2 => return (-1.0, 0.0),
            _ => return (0.0, -1.0),
        }
    }
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    (c, s)
}

/// Angles, in turns, at which the identity `|psi| = |f| |cos(theta/2)|` is sampled.
const IDENTITY_SAMPLE_TURNS: [f64; 8] = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875];

/// Builds `psi(r, theta) = f(r) (1 + e^{i theta}) / 2` from the shared
/// radial ground state of modes 0 and 1 at `kappa = 1/2` and samples it.
pub fn nodal_ray_check(spec: &PotentialSpec, cfg: &NumericsConfig) -> Result<NodalRayReport> {
    let mesh = default_mesh(0.5, spec, cfg)?;
    let gs = ground_state_on_mesh(0.5, spec, cfg, &mesh)?;
    let degeneracy = gs.degeneracy(cfg);
    if degeneracy.multiplicity != 2 {
        return Err(Error::Inconsistency(format!(
            "expected a doubly degenerate ground state at kappa = 1/2, found multiplicity {} (modes {:?})",
            degeneracy.multiplicity, degeneracy.modes
        )));
    }
    let f = gs.radial_profile();
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let psi_abs = |fr: f64, turns: f64| {
        let (c, s) = unit_phase(turns);
        let re = fr * (1.0 + c) / 2.0;
        let im = fr * s / 2.0;
        re.hypot(im)
    };

    let max_on_ray = f.iter().map(|&fr| psi_abs(fr, 0.5)).fold(0.0, f64::max);
    let min_off_ray = f
        .iter()
        .filter(|fr| fr.abs() > 0.1 * peak)
        .flat_map(|&fr| [psi_abs(fr, 0.0), psi_abs(fr, 0.25)])
        .fold(f64::INFINITY, f64::min);
    let identity_residual = f
        .iter()
        .flat_map(|&fr| {
            IDENTITY_SAMPLE_TURNS.iter().map(move |&t| {
                let half = (std::f64::consts::PI * t).cos();
                (psi_abs(fr, t) - fr.abs() * half.abs()).abs()
            })
        })
        .fold(0.0, f64::max);

    Ok(NodalRayReport {
        max_on_ray,
        min_off_ray,
        identity_residual,
        profile_peak: peak,
        degeneracy,
    })
}

/// Spacing-preserving energy probe used for domain sizing: the outer
/// radius is always `a + k * spacing` for an integer `k`.
struct RadiusProbe<'a> {
    spec: &'a PotentialSpec,
    kappa: f64,
    spacing: f64,
    tol: f64,
}

impl RadiusProbe<'_> {
    fn snap(&self, extent: f64) -> f64 {
        self.spec.a + (extent / self.spacing).ceil().max(2.0) * self.spacing
    }

    fn energy(&self, r_outer: f64) -> Result<f64> {
        let cells = ((r_outer - self.spec.a) / self.spacing).round() as usize;
        let mesh = build_mesh(self.spec.a, r_outer, cells.max(2) - 1)?;
        mode_ground_energy(self.kappa, 0, self.spec, &mesh, self.tol)
    }
}

/// Outer truncation radius at which the ground eigenvalue is insensitive to
/// the domain size.
///
/// Starts at `R0 = a + 3 (lambda_est / omega)^(1/q)`, with `lambda_est` from a
/// coarse solve on `(a, a + 10)`, and multiplies `R` by `R_growth` until the
/// relative change is below `R_tol`. All probes share the coarse mesh
/// spacing, so only the truncation changes between radii. The result is the
/// last radius before the stable expansion. Probes run on the canonical
/// mode-0 branch with `|kappa|` reduced to `[0, 1/2]`.
pub fn adaptive_outer_radius(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
) -> Result<f64> {
    cfg.validate()?;
    let report = spec.validate();
    if !report.is_ok() {
        return Err(Error::invalid(format!("invalid potential: {report}")));
    }
    let probe = RadiusProbe {
        spec,
        kappa: canonical_circulation(kappa)?.abs(),
        spacing: 10.0 / (cfg.n_default as f64 + 1.0),
        tol: cfg.eig_tol.min(FD_EIG_TOL),
    };
    let estimate = probe.energy(spec.a + 10.0)?;
    let reach = 3.0 * (estimate.abs().max(f64::MIN_POSITIVE) / spec.omega).powf(1.0 / spec.q);
    let mut r = probe.snap(reach);
    let mut lambda = probe.energy(r)?;
    for _ in 0..MAX_EXPANSIONS {
        let next = probe.snap(r * cfg.r_growth - spec.a);
        let next_lambda = probe.energy(next)?;
        if (next_lambda - lambda).abs() <= cfg.r_tol * lambda.abs() {
            return Ok(r);
        }
        r = next;
        lambda = next_lambda;
    }
    Err(Error::domain(format!(
        "ground eigenvalue did not stabilize after {MAX_EXPANSIONS} domain expansions (R = {r})"
    )))
}

/// Ground eigenvalue under mesh refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub outer_radius: f64,
    /// `log2((l_n - l_2n) / (l_2n - l_4n))` over the last three sizes.
    pub order: f64,
    /// Richardson extrapolation with the observed order.
    pub extrapolated: f64,
}

pub fn convergence_order(
    kappa: f64,
    spec: &PotentialSpec,
    cfg: &NumericsConfig,
    n_list: &[usize],
) -> Result<ConvergenceStudy> {
    if n_list.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 mesh sizes, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[1] != 2 * w[0]) || n_list[0] == 0 {
        return Err(Error::invalid(format!(
            "mesh sizes {n_list:?} must double at each step"
        )));
    }
    cfg.validate()?;
    let r = adaptive_outer_radius(kappa, spec, cfg)?;
    let lambdas = n_list
        .par_iter()
        .map(|&n| {
            let mesh = build_mesh(spec.a, r, n)?;
            let solver = ModeSolver::new(spec, &mesh)?;
            Ok(solver
                .scan(kappa, cfg.max_mode, cfg.eig_tol.min(FD_EIG_TOL))?
                .lambda)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = lambdas.len();
    let coarse = lambdas[k - 3] - lambdas[k - 2];
    let fine = lambdas[k - 2] - lambdas[k - 1];
    if fine == 0.0 || coarse / fine <= 1.0 || !(coarse / fine).is_finite() {
        return Err(Error::Inconclusive(format!(
            "successive differences {coarse:e}, {fine:e} do not contract monotonically"
        )));
    }
    let order = (coarse / fine).log2();
    let extrapolated = lambdas[k - 1] - fine / (2f64.powf(order) - 1.0);
    Ok(ConvergenceStudy {
        sizes: n_list.to_vec(),
        lambdas,
        outer_radius: r,
        order,
        extrapolated,
    })
}

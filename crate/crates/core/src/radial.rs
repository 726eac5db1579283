//! Angular-mode reduction of the Hamiltonian.
//!
//! On the mode `e^{i m theta}` the operator acts on radial functions as
//! `-f'' - f'/r + (m - kappa)^2 f / r^2 + V f`. The substitution `g = sqrt(r) f`
//! turns this into `-g'' + W g` with
//! `W(r) = ((m - kappa)^2 - 1/4) / r^2 + V(r)`, which the three-point stencil
//! discretizes as a symmetric tridiagonal matrix in the flat inner product.

use std::io::Write;

use crate::eigensolve::{sturm_count, SymTridiagonal};
use crate::error::{Error, Result};
use crate::model::{PotentialSpec, RadialMesh};

/// `(m - kappa)^2 - 1/4`.
#[inline]
fn centrifugal(kappa: f64, mode: i64) -> f64 {
    let nu = mode as f64 - kappa;
    nu * nu - 0.25
}

/// `W(r) = ((m - kappa)^2 - 1/4)/r^2 + V(r)`.
pub fn effective_potential(kappa: f64, mode: i64, spec: &PotentialSpec, r: f64) -> Result<f64> {
    let v = spec.evaluate(r)?;
    Ok(centrifugal(kappa, mode) / (r * r) + v)
}

/// Discretized radial operator for one `(kappa, m)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub matrix: SymTridiagonal,
    pub mesh: RadialMesh,
    pub mode: i64,
    pub kappa: f64,
    /// No eigenvalue at or below zero. The Sturm solver does not need it.
    pub positive_definite: bool,
}

impl TridiagonalOperator {
    pub fn diag(&self) -> &[f64] {
        self.matrix.diag()
    }

    pub fn off(&self) -> &[f64] {
        self.matrix.off()
    }

    /// Two-column CSV `d,e`; the last row has an empty `e`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "d,e")?;
        let d = self.diag();
        let e = self.off();
        for (i, di) in d.iter().enumerate() {
            match e.get(i) {
                Some(ei) => writeln!(out, "{di:.16e},{ei:.16e}")?,
                None => writeln!(out, "{di:.16e},")?,
            }
        }
        Ok(())
    }
}

/// Mode-independent parts of the discretization on one mesh: `V(r_i)` and
/// `r_i^2`. Assembling many modes from one basis avoids re-evaluating `V`.
#[derive(Debug, Clone)]
pub struct RadialBasis {
    mesh: RadialMesh,
    inv_h2: f64,
    r2: Vec<f64>,
    v: Vec<f64>,
}

impl RadialBasis {
    pub fn new(spec: &PotentialSpec, mesh: &RadialMesh) -> Result<Self> {
        let report = spec.validate();
        if !report.is_ok() {
            return Err(Error::invalid(format!("invalid potential: {report}")));
        }
        if mesh.inner() != spec.a {
            return Err(Error::invalid(format!(
                "mesh starts at {} but the solenoid radius is {}",
                mesh.inner(),
                spec.a
            )));
        }
        let h = mesh.spacing();
        let mut r2 = Vec::with_capacity(mesh.len());
        let mut v = Vec::with_capacity(mesh.len());
        for r in mesh.nodes() {
            r2.push(r * r);
            v.push(spec.evaluate(r)?);
        }
        Ok(Self {
            mesh: *mesh,
            inv_h2: 1.0 / (h * h),
            r2,
            v,
        })
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    /// `r_i^2` at every node.
    pub fn r_squared(&self) -> &[f64] {
        &self.r2
    }

    #[inline]
    fn w(&self, c: f64, i: usize) -> f64 {
        c / self.r2[i] + self.v[i]
    }

    pub fn operator(&self, kappa: f64, mode: i64) -> TridiagonalOperator {
        let c = centrifugal(kappa, mode);
        let n = self.mesh.len();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * self.inv_h2 + self.w(c, i)).collect();
        let off = vec![-self.inv_h2; n - 1];
        let matrix = SymTridiagonal::new(diag, off).expect("assembled entries are finite");
        let positive_definite = sturm_count(&matrix, 0.0) == 0;
        TridiagonalOperator {
            matrix,
            mesh: self.mesh,
            mode,
            kappa,
            positive_definite,
        }
    }

    /// `g^T T g / g^T g`, evaluated as the discrete quadratic form
    /// `sum (g_{i+1} - g_i)^2 / h^2 + sum W_i g_i^2` with zero end values.
    /// The form avoids the cancellation in a plain `g^T T g` when `1/h^2` is
    /// large.
    pub fn rayleigh_quotient(&self, kappa: f64, mode: i64, g: &[f64]) -> Result<f64> {
        let n = self.mesh.len();
        if g.len() != n {
            return Err(Error::invalid(format!(
                "vector length {} does not match mesh size {n}",
                g.len()
            )));
        }
        let norm: f64 = g.iter().map(|x| x * x).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid(
                "Rayleigh quotient of a zero or non-finite vector",
            ));
        }
        let c = centrifugal(kappa, mode);
        let mut grad = g[0] * g[0];
        for i in 1..n {
            let d = g[i] - g[i - 1];
            grad += d * d;
        }
        grad += g[n - 1] * g[n - 1];
        let pot: f64 = (0..n).map(|i| self.w(c, i) * g[i] * g[i]).sum();
        Ok((grad * self.inv_h2 + pot) / norm)
    }
}

pub fn assemble_tridiagonal(
    kappa: f64,
    mode: i64,
    spec: &PotentialSpec,
    mesh: &RadialMesh,
) -> Result<TridiagonalOperator> {
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa must be finite"));
    }
    Ok(RadialBasis::new(spec, mesh)?.operator(kappa, mode))
}

pub fn rayleigh_quotient(
    kappa: f64,
    mode: i64,
    spec: &PotentialSpec,
    mesh: &RadialMesh,
    g: &[f64],
) -> Result<f64> {
    RadialBasis::new(spec, mesh)?.rayleigh_quotient(kappa, mode, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{dense_brute_force, inverse_iteration, lowest_k};
    use crate::model::build_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> PotentialSpec {
        PotentialSpec::default()
    }

    #[test]
    fn effective_potential_examples() {
        assert_eq!(effective_potential(0.0, 0, &spec(), 2.0).unwrap(), 1.9375);
        assert_eq!(effective_potential(0.5, 0, &spec(), 2.0).unwrap(), 2.0);
        assert_eq!(effective_potential(0.5, 1, &spec(), 2.0).unwrap(), 2.0);
        assert!(matches!(
            effective_potential(0.0, 0, &spec(), 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn one_node_operator() {
        let mesh = build_mesh(1.0, 3.0, 1).unwrap();
        let t = assemble_tridiagonal(0.0, 0, &spec(), &mesh).unwrap();
        assert_eq!(t.diag(), &[3.9375]);
        assert!(t.off().is_empty());
        assert_eq!(
            rayleigh_quotient(0.0, 0, &spec(), &mesh, &[1.0]).unwrap(),
            3.9375
        );
        assert!(t.positive_definite);
    }

    #[test]
    fn half_integer_modes_coincide() {
        let mesh = build_mesh(1.0, 8.0, 300).unwrap();
        let a = assemble_tridiagonal(0.5, 0, &spec(), &mesh).unwrap();
        let b = assemble_tridiagonal(0.5, 1, &spec(), &mesh).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn gauge_shift_and_reflection() {
        let mesh = build_mesh(1.0, 8.0, 300).unwrap();
        let base = assemble_tridiagonal(0.3, 0, &spec(), &mesh).unwrap();
        let shifted = assemble_tridiagonal(1.3, 1, &spec(), &mesh).unwrap();
        let reflected = assemble_tridiagonal(-0.3, 0, &spec(), &mesh).unwrap();
        for i in 0..mesh.len() {
            let d = base.diag()[i];
            assert!((shifted.diag()[i] - d).abs() <= 1e-14 * d.abs());
            assert_eq!(reflected.diag()[i], d);
        }
        assert_eq!(base.off(), shifted.off());

        for kappa in [-2.3, -0.7, 0.1, 0.45, 3.9] {
            for mode in -3..=3 {
                let p = assemble_tridiagonal(kappa, mode, &spec(), &mesh).unwrap();
                let s = assemble_tridiagonal(kappa + 1.0, mode + 1, &spec(), &mesh).unwrap();
                let r = assemble_tridiagonal(-kappa, -mode, &spec(), &mesh).unwrap();
                for i in 0..mesh.len() {
                    let d = p.diag()[i];
                    assert!((s.diag()[i] - d).abs() <= 1e-14 * d.abs());
                    assert!((r.diag()[i] - d).abs() <= 1e-14 * d.abs());
                }
            }
        }
    }

    #[test]
    fn mesh_must_start_at_solenoid() {
        let mesh = build_mesh(0.5, 8.0, 10).unwrap();
        assert!(assemble_tridiagonal(0.0, 0, &spec(), &mesh).is_err());
    }

    #[test]
    fn rayleigh_on_coordinate_vector_is_diagonal_entry() {
        let mesh = build_mesh(1.0, 8.0, 4000).unwrap();
        let t = assemble_tridiagonal(0.0, 0, &spec(), &mesh).unwrap();
        let mut g = vec![0.0; 4000];
        g[0] = 1.0;
        assert_eq!(
            rayleigh_quotient(0.0, 0, &spec(), &mesh, &g).unwrap(),
            t.diag()[0]
        );
        assert!(rayleigh_quotient(0.0, 0, &spec(), &mesh, &vec![0.0; 4000]).is_err());
        assert!(rayleigh_quotient(0.0, 0, &spec(), &mesh, &[1.0]).is_err());
    }

    #[test]
    fn quadratic_form_matches_matrix_product() {
        let mesh = build_mesh(1.0, 6.0, 60).unwrap();
        let t = assemble_tridiagonal(0.2, 1, &spec(), &mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut tg = vec![0.0; 60];
        t.matrix.apply(&g, &mut tg);
        let direct: f64 = g.iter().zip(&tg).map(|(a, b)| a * b).sum::<f64>()
            / g.iter().map(|x| x * x).sum::<f64>();
        let form = rayleigh_quotient(0.2, 1, &spec(), &mesh, &g).unwrap();
        assert!((direct - form).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn rayleigh_of_ground_vector_is_ground_energy() {
        let mesh = build_mesh(1.0, 8.0, 4000).unwrap();
        let basis = RadialBasis::new(&spec(), &mesh).unwrap();
        let t = basis.operator(0.3, 0);
        let lam = lowest_k(&t.matrix, 1, 1e-10).unwrap()[0];
        let pair = inverse_iteration(&t.matrix, lam).unwrap();
        let rq = basis.rayleigh_quotient(0.3, 0, &pair.vector).unwrap();
        assert!((rq - lam).abs() <= 1e-10 * lam);
    }

    #[test]
    fn random_vectors_bound_ground_energy_from_above() {
        let mesh = build_mesh(1.0, 8.0, 400).unwrap();
        let basis = RadialBasis::new(&spec(), &mesh).unwrap();
        let tol = 1e-10;
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for mode in [0, 2] {
            let t = basis.operator(0.25, mode);
            let lam = lowest_k(&t.matrix, 1, tol).unwrap()[0];
            for _ in 0..100 {
                let g: Vec<f64> = (0..mesh.len())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect();
                let rq = basis.rayleigh_quotient(0.25, mode, &g).unwrap();
                assert!(rq >= lam - tol * lam);
            }
        }
    }

    #[test]
    fn mode_energy_grows_with_centrifugal_term() {
        let mesh = build_mesh(1.0, 8.0, 800).unwrap();
        let basis = RadialBasis::new(&spec(), &mesh).unwrap();
        for kappa in [0.0, 0.2, 0.5] {
            let mut pairs: Vec<(f64, f64)> = (-3..=3)
                .map(|m| {
                    let nu = m as f64 - kappa;
                    let t = basis.operator(kappa, m);
                    (nu * nu, lowest_k(&t.matrix, 1, 1e-12).unwrap()[0])
                })
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in pairs.windows(2) {
                assert!(w[1].1 >= w[0].1);
            }
        }
    }

    #[test]
    fn coarse_operator_agrees_with_dense_oracle() {
        let mesh = build_mesh(1.0, 8.0, 200).unwrap();
        let t = assemble_tridiagonal(0.0, 0, &spec(), &mesh).unwrap();
        let dense = dense_brute_force(&t.matrix).unwrap();
        let fast = lowest_k(&t.matrix, 3, 1e-14).unwrap();
        let scale = t.matrix.norm_inf();
        for k in 0..3 {
            assert!((dense[k] - fast[k]).abs() <= 1e-10 * scale);
        }
    }
}

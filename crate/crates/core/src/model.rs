//! Domain types: circulation, the confining potential family, the radial
//! mesh and the numerical knobs shared by every solver.

use std::fmt;

use crate::error::{Error, Result};

/// Maps `kappa` to its representative in the half-open interval (-1/2, 1/2].
///
/// The subtraction is exact, so `kappa - result` is an integer-valued float.
/// Ties at -1/2 map to +1/2.
pub fn canonical_circulation(kappa: f64) -> Result<f64> {
    if !kappa.is_finite() {
        return Err(Error::invalid(format!(
            "circulation must be finite, got {kappa}"
        )));
    }
    Ok(kappa - (kappa - 0.5).ceil())
}

/// Scaled magnetic flux through the solenoid.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Circulation(f64);

impl Circulation {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::invalid(format!(
                "circulation must be finite, got {kappa}"
            )));
        }
        Ok(Self(kappa))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn canonical(self) -> f64 {
        self.0 - (self.0 - 0.5).ceil()
    }

    /// The integer `m` with `value = canonical + m`.
    pub fn winding(self) -> i64 {
        (self.0 - 0.5).ceil() as i64
    }
}

impl fmt::Display for Circulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Confining potential `V(r) = beta/(r-a)^p + omega*(r-a)^q` on `r > a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    /// Solenoid radius.
    pub a: f64,
    /// Border-barrier strength.
    pub beta: f64,
    /// Border exponent.
    pub p: f64,
    /// Confinement strength.
    pub omega: f64,
    /// Confinement exponent.
    pub q: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            a: 1.0,
            beta: 1.0,
            p: 2.0,
            omega: 1.0,
            q: 2.0,
        }
    }
}

/// A condition the potential family fails to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `V(r)(r-a)^2 >= 1` fails somewhere on `(a, a+1]`.
    BorderBound { worst: f64 },
    /// `V` does not diverge at infinity.
    Divergence,
    /// `V` is not strictly positive.
    Positivity,
    /// A parameter is non-finite or out of its admissible range.
    Parameter(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BorderBound { worst } => {
                write!(
                    f,
                    "border bound (min of V(r)(r-a)^2 on (a, a+1] is {worst})"
                )
            }
            Violation::Divergence => write!(f, "divergence (need omega > 0 and q >= 1)"),
            Violation::Positivity => write!(f, "positivity (need beta > 0 and omega > 0)"),
            Violation::Parameter(msg) => write!(f, "parameter: {msg}"),
        }
    }
}

impl Violation {
    /// Short name of the violated condition.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::BorderBound { .. } => "border bound",
            Violation::Divergence => "divergence",
            Violation::Positivity => "positivity",
            Violation::Parameter(_) => "parameter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.violations.iter().map(Violation::name).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl PotentialSpec {
    /// Checks the border bound on `(a, a+1]`, divergence at infinity and positivity.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let fields = [
            ("a", self.a),
            ("beta", self.beta),
            ("p", self.p),
            ("omega", self.omega),
            ("q", self.q),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                violations.push(Violation::Parameter(format!(
                    "{name} = {value} is not finite"
                )));
            }
        }
        if !violations.is_empty() {
            return ValidationReport { violations };
        }
        if self.a <= 0.0 {
            violations.push(Violation::Parameter(format!(
                "solenoid radius a = {} must be positive",
                self.a
            )));
        }
        if self.p < 2.0 {
            violations.push(Violation::Parameter(format!(
                "border exponent p = {} must be >= 2",
                self.p
            )));
        }
        if self.beta <= 0.0 || self.omega <= 0.0 {
            violations.push(Violation::Positivity);
        }
        if self.omega <= 0.0 || self.q < 1.0 {
            violations.push(Violation::Divergence);
        }
        let worst = self.border_bound_minimum();
        if !(worst >= 1.0) {
            violations.push(Violation::BorderBound { worst });
        }
        ValidationReport { violations }
    }

    /// Infimum of `V(r)(r-a)^2` over `r` in `(a, a+1]`.
    ///
    /// With `x = r - a` this is `beta x^(2-p) + omega x^(q+2)`. For `p = 2` the
    /// infimum is the limit `beta` at the border; for `p > 2` the function
    /// blows up at the border and has at most one interior critical point.
    pub fn border_bound_minimum(&self) -> f64 {
        let f = |x: f64| self.beta * x.powf(2.0 - self.p) + self.omega * x.powf(self.q + 2.0);
        if self.p < 2.0 {
            return 0.0;
        }
        if self.p == 2.0 {
            return self.beta.min(f(1.0));
        }
        let mut best = f(1.0);
        if self.beta > 0.0 && self.omega > 0.0 {
            let critical = (self.beta * (self.p - 2.0) / (self.omega * (self.q + 2.0)))
                .powf(1.0 / (self.p + self.q));
            if critical < 1.0 {
                best = best.min(f(critical));
            }
        } else if self.beta <= 0.0 {
            best = best.min(0.0);
        }
        best
    }

    /// `V(r)`; errors for `r <= a`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > self.a) {
            return Err(Error::domain(format!(
                "potential evaluated at r = {r}, outside r > a = {}",
                self.a
            )));
        }
        Ok(self.eval_unchecked(r))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        let x = r - self.a;
        self.beta / x.powf(self.p) + self.omega * x.powf(self.q)
    }

    /// Distance from the border at which `V` attains its minimum.
    pub fn minimizer_offset(&self) -> f64 {
        (self.p * self.beta / (self.q * self.omega)).powf(1.0 / (self.p + self.q))
    }

    /// Flat `key = value` representation, one key per line.
    pub fn to_config_string(&self) -> String {
        format!(
            "a = {:?}\nbeta = {:?}\np = {:?}\nomega = {:?}\nq = {:?}\n",
            self.a, self.beta, self.p, self.omega, self.q
        )
    }

    /// Parses the flat `key = value` format; missing keys keep their defaults.
    pub fn from_config_str(text: &str) -> Result<Self> {
        Ok(crate::config::RunConfig::from_config_str(text)?.potential)
    }
}

/// `V(r)` for a given potential; errors when `r <= a`.
pub fn evaluate_potential(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.evaluate(r)
}

pub fn validate_potential(spec: &PotentialSpec) -> ValidationReport {
    spec.validate()
}

/// Uniform mesh of `n` interior nodes `r_i = a + i h`, `i = 1..n`, with
/// `h = (R - a)/(n + 1)`. Both endpoints carry homogeneous Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMesh {
    a: f64,
    r_outer: f64,
    n: usize,
    h: f64,
}

impl RadialMesh {
    pub fn new(a: f64, r_outer: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !r_outer.is_finite() {
            return Err(Error::invalid("mesh bounds must be finite"));
        }
        if r_outer <= a {
            return Err(Error::invalid(format!(
                "outer radius {r_outer} must exceed inner radius {a}"
            )));
        }
        if n < 1 {
            return Err(Error::invalid("mesh needs at least one interior node"));
        }
        let h = (r_outer - a) / (n as f64 + 1.0);
        Ok(Self { a, r_outer, n, h })
    }

    pub fn inner(&self) -> f64 {
        self.a
    }

    pub fn outer(&self) -> f64 {
        self.r_outer
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Zero-based node `i`, i.e. `r_{i+1}`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

pub fn build_mesh(a: f64, r_outer: f64, n: usize) -> Result<RadialMesh> {
    RadialMesh::new(a, r_outer, n)
}

/// Numerical parameters shared by the spectral solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    /// Largest angular mode magnitude searched initially.
    pub max_mode: i64,
    /// Relative bisection tolerance.
    pub eig_tol: f64,
    /// Relative tolerance for grouping degenerate mode energies.
    pub deg_tol: f64,
    /// Outer-radius expansion factor.
    pub r_growth: f64,
    /// Relative eigenvalue change below which the domain is large enough.
    pub r_tol: f64,
    /// Interior mesh nodes.
    pub n_default: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            max_mode: 3,
            eig_tol: 1e-10,
            deg_tol: 1e-8,
            r_growth: 2.0,
            r_tol: 1e-8,
            n_default: 4000,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eig_tol", self.eig_tol),
            ("deg_tol", self.deg_tol),
            ("R_tol", self.r_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.max_mode < 1 {
            return Err(Error::invalid(format!(
                "M must be >= 1, got {}",
                self.max_mode
            )));
        }
        if !(self.r_growth > 1.0 && self.r_growth.is_finite()) {
            return Err(Error::invalid(format!(
                "R_growth must exceed 1, got {}",
                self.r_growth
            )));
        }
        if self.n_default < 1 {
            return Err(Error::invalid("n_default must be >= 1"));
        }
        Ok(())
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ab_spectra_core::config::RunConfig;
use ab_spectra_core::gauge::{conjugation_check, is_gqr, DEFAULT_GQR_TOL};
use ab_spectra_core::io::{write_ground_state, write_sweep_csv};
use ab_spectra_core::model::{build_mesh, canonical_circulation};
use ab_spectra_core::oracle2d::compare_with_radial;
use ab_spectra_core::radial::assemble_tridiagonal;
use ab_spectra_core::spectrum::{
    adaptive_outer_radius, convergence_order, ground_state, hf_derivative, sweep,
};
use ab_spectra_core::{verify, Error};
use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand};

/// Ground-state spectra of a confined particle around an Aharonov-Bohm
/// solenoid.
#[derive(Parser, Debug)]
#[command(name = "ab-spectra", version, about)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set n_default=2000`.
    /// Applied after --config; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground eigenvalue, its mode, multiplicity and derivative at one circulation.
    Spectrum {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// Write the ground-state record (header plus r, psi table).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Write the radial matrix of the ground-state mode as `d,e` CSV.
        #[arg(long, value_name = "FILE")]
        dump_matrix: Option<PathBuf>,
    },
    /// Ground eigenvalue on a uniform circulation grid, as CSV.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Output file; standard output if omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run every invariant check and report measured values.
    Verify,
    /// Whether two circulations are gauge related.
    Gauge {
        #[arg(long, allow_negative_numbers = true)]
        k1: f64,
        #[arg(long, allow_negative_numbers = true)]
        k2: f64,
    },
    /// Compare the radial ground energy with a full 2D polar-grid solve.
    Oracle {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = 200)]
        nr: usize,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
    },
    /// Mesh-refinement study at n = 1000, 2000, 4000.
    Convergence {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
    },
}

/// Exit status for each failure class.
const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(EXIT_INPUT);
        }
        Err(e) => e.exit(),
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_numerical));
            ExitCode::from(if numerical {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("AB_SPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("AB_SPECTRA_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for item in &cli.overrides {
        let (key, value) = item
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {item:?}"))?;
        cfg.set_str(key.trim(), value)?;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(&cli)?;
    let (spec, num) = (&cfg.potential, &cfg.numerics);
    if !matches!(cli.command, Command::Verify) {
        num.validate()?;
        let report = spec.validate();
        if !report.is_ok() {
            bail!(Error::InvalidArgument(format!(
                "invalid potential: {report}"
            )));
        }
    }

    match cli.command {
        Command::Spectrum {
            kappa,
            out,
            dump_matrix,
        } => {
            let gs = ground_state(kappa, spec, num)?;
            let deg = gs.degeneracy(num);
            let deriv = match hf_derivative(&gs, num) {
                Ok(d) => d.to_string(),
                Err(Error::UndefinedDerivative { reason, .. }) => format!("undefined ({reason})"),
                Err(e) => return Err(e.into()),
            };
            println!("kappa: {kappa}");
            println!("canonical kappa: {}", canonical_circulation(kappa)?);
            println!("lambda1: {}", gs.lambda1);
            println!("mode_star: {}", gs.mode_star);
            println!("multiplicity: {} (modes {:?})", deg.multiplicity, deg.modes);
            println!("dlambda1/dkappa: {deriv}");
            println!(
                "mesh: n = {}, r in ({}, {})",
                gs.mesh.len(),
                gs.mesh.inner(),
                gs.mesh.outer()
            );
            if let Some(path) = out {
                let mut w = create(&path)?;
                write_ground_state(&gs, &mut w)?;
                w.flush()?;
            }
            if let Some(path) = dump_matrix {
                let op = assemble_tridiagonal(kappa, gs.mode_star, spec, &gs.mesh)?;
                let mut w = create(&path)?;
                op.write_csv(&mut w)?;
                w.flush()?;
            }
        }
        Command::Sweep {
            from,
            to,
            steps,
            out,
        } => {
            let s = sweep(from, to, steps, spec, num)?;
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_sweep_csv(&s, &mut w)?;
                    w.flush()?;
                    eprintln!("wrote {} rows to {}", s.len(), path.display());
                }
                None => write_sweep_csv(&s, io::stdout().lock())?,
            }
        }
        Command::Verify => {
            let checks = verify::run_all(spec, num);
            for c in &checks {
                println!("{c}");
            }
            let failed: Vec<&str> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name)
                .collect();
            if !failed.is_empty() {
                println!(
                    "{} of {} checks failed: {}",
                    failed.len(),
                    checks.len(),
                    failed.join(", ")
                );
                return Ok(ExitCode::from(EXIT_VERIFY));
            }
            println!("all {} checks passed", checks.len());
        }
        Command::Gauge { k1, k2 } => {
            let related = is_gqr(k1, k2, DEFAULT_GQR_TOL);
            println!("GQR: {}", if related { "yes" } else { "no" });
            println!(
                "canonical: {} -> {}, {} -> {}",
                k1,
                canonical_circulation(k1)?,
                k2,
                canonical_circulation(k2)?
            );
            if related {
                let shift = (k2 - k1).round() as i64;
                let r = adaptive_outer_radius(k1, spec, num)?;
                let mesh = build_mesh(spec.a, r, num.n_default)?;
                let residual = conjugation_check(k1, shift, 0, &mesh, spec)?;
                println!("conjugation residual (shift {shift}): {residual}");
            } else {
                println!(
                    "conjugation residual: n/a (difference {} is not an integer)",
                    k2 - k1
                );
            }
        }
        Command::Oracle { kappa, nr, ntheta } => {
            let c = compare_with_radial(kappa, spec, num, nr, ntheta)?;
            println!(
                "grid: n_r = {}, n_theta = {}, r_outer = {}",
                c.n_r, c.n_theta, c.outer_radius
            );
            println!("lambda1 2d: {}", c.lambda_2d);
            println!("lambda1 radial: {}", c.lambda_radial);
            println!("discrepancy: {:e}", c.discrepancy);
            println!(
                "discrepancy at n_theta = {}: {:e}",
                2 * c.n_theta,
                c.discrepancy_refined
            );
        }
        Command::Convergence { kappa } => {
            let s = convergence_order(kappa, spec, num, &[1000, 2000, 4000])?;
            println!("r_outer: {}", s.outer_radius);
            for (n, l) in s.sizes.iter().zip(&s.lambdas) {
                println!("n = {n}: lambda1 = {l}");
            }
            println!("order: {}", s.order);
            println!("extrapolated: {}", s.extrapolated);
        }
    }
    Ok(ExitCode::SUCCESS)
}

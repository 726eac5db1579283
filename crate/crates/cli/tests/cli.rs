use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ab-spectra"));
    c.env_remove("AB_SPECTRA_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key:?} in output:\n{text}"))
}

#[test]
fn spectrum_at_half_flux_is_doubly_degenerate() {
    let o = run(&["spectrum", "--kappa", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(field(&text, "multiplicity").starts_with("2 "), "{text}");
    assert_eq!(field(&text, "dlambda1/dkappa"), "undefined (degenerate)");
}

#[test]
fn spectrum_at_zero_flux_has_undefined_derivative() {
    let o = run(&["spectrum", "--kappa", "0.0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(field(&text, "multiplicity").starts_with("1 "));
    assert_eq!(field(&text, "dlambda1/dkappa"), "undefined (endpoint)");
}

#[test]
fn spectrum_accepts_negative_flux() {
    let o = run(&["spectrum", "--kappa", "-0.3"]);
    assert!(o.status.success());
    let d: f64 = field(&stdout(&o), "dlambda1/dkappa").parse().unwrap();
    assert!(d < 0.0);
}

#[test]
fn unparsable_kappa_is_a_usage_error() {
    let o = run(&["spectrum", "--kappa", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn spectrum_writes_record_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("gs.txt");
    let mat = dir.path().join("t.csv");
    let o = run(&[
        "spectrum",
        "--kappa",
        "0.25",
        "--set",
        "n_default=200",
        "--out",
        rec.to_str().unwrap(),
        "--dump-matrix",
        mat.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(rec).unwrap();
    let (head, table) = text.split_once("\n\n").unwrap();
    assert!(head.lines().any(|l| l == "n: 200"));
    assert_eq!(table.lines().count(), 200);
    assert!(table.lines().all(|l| l.split('\t').count() == 2));
    let csv = fs::read_to_string(mat).unwrap();
    assert_eq!(csv.lines().next(), Some("d,e"));
    assert_eq!(csv.lines().count(), 201);
    assert!(csv.lines().last().unwrap().ends_with(','));
}

#[test]
fn sweep_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = run(&[
        "sweep",
        "--from",
        "-1.5",
        "--to",
        "1.5",
        "--steps",
        "121",
        "--set",
        "n_default=400",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kappa,lambda1,mode,deriv_hf,deriv_fd");
    assert_eq!(lines.len(), 122);
    // The integer point has no derivatives.
    assert!(lines[61].ends_with(",0,,"), "{}", lines[61]);
}

#[test]
fn sweep_output_is_byte_stable() {
    let args = [
        "sweep",
        "--from",
        "0",
        "--to",
        "0.5",
        "--steps",
        "11",
        "--set",
        "n_default=300",
    ];
    let a = run(&args);
    let b = bin()
        .args(args)
        .env("AB_SPECTRA_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn sweep_needs_two_steps() {
    let o = run(&["sweep", "--from", "0", "--to", "1", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let o = bin()
        .args(["gauge", "--k1", "0", "--k2", "1"])
        .env("AB_SPECTRA_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_at_defaults() {
    let o = run(&["verify"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
}

#[test]
fn verify_reports_invalid_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weak.conf");
    fs::write(&cfg, "beta = 0.5\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(
        text.contains("FAIL") && text.contains("border bound"),
        "{text}"
    );
}

#[test]
fn verify_flags_coarse_mesh() {
    let o = run(&["verify", "--set", "n_default=50"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(
        text.lines()
            .any(|l| l.starts_with("FAIL") && l.contains("convergence order")),
        "{text}"
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "[numerics]\nn_default = 100\n").unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = stdout(&run(&["spectrum", "--kappa", "0.1", "--config", path]));
    assert!(field(&from_file, "mesh").starts_with("n = 100,"));
    let overridden = stdout(&run(&[
        "spectrum",
        "--kappa",
        "0.1",
        "--config",
        path,
        "--set",
        "n_default=120",
    ]));
    assert!(field(&overridden, "mesh").starts_with("n = 120,"));
}

#[test]
fn malformed_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "frobnicate = 3\n").unwrap();
    let o = run(&[
        "spectrum",
        "--kappa",
        "0.1",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--kappa", "0.1", "--set", "beta"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gauge_examples() {
    let o = run(&["gauge", "--k1", "0.3", "--k2", "1.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(field(&text, "GQR"), "yes");
    assert!(
        text.contains("conjugation residual (shift 1): 0\n"),
        "{text}"
    );

    assert_eq!(
        field(
            &stdout(&run(&["gauge", "--k1", "0.3", "--k2", "0.7"])),
            "GQR"
        ),
        "no"
    );
    assert_eq!(
        field(
            &stdout(&run(&["gauge", "--k1", "0.5", "--k2", "-0.5"])),
            "GQR"
        ),
        "yes"
    );
    assert_eq!(
        run(&["gauge", "--k1", "x", "--k2", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn oracle_matches_at_zero_flux() {
    let o = run(&["oracle", "--kappa", "0.0", "--nr", "100", "--ntheta", "16"]);
    assert!(o.status.success());
    let d: f64 = field(&stdout(&o), "discrepancy").parse().unwrap();
    assert!(d <= 1e-8);
}

#[test]
fn oracle_rejects_tiny_grid() {
    let o = run(&["oracle", "--kappa", "0.3", "--nr", "4", "--ntheta", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_order_is_second() {
    for k in ["0.3", "0.0", "0.5"] {
        let o = run(&["convergence", "--kappa", k]);
        assert!(o.status.success());
        let order: f64 = field(&stdout(&o), "order").parse().unwrap();
        assert!((1.7..=2.3).contains(&order), "kappa {k}: {order}");
    }
}

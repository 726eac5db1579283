//! Plain-text serialization of sweeps and ground states.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so a written
//! file reads back bit-for-bit, and repeated runs produce identical bytes.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::spectrum::{GroundState, SweepResult};

pub const SWEEP_HEADER: [&str; 5] = ["kappa", "lambda1", "mode", "deriv_hf", "deriv_fd"];

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Inconsistency(format!("i/o: {e}"))
}

/// Writes a sweep as CSV; undefined derivatives are empty fields.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(io_err)?;
    for i in 0..sweep.len() {
        w.write_record([
            fmt_f64(sweep.kappas[i]),
            fmt_f64(sweep.lambdas[i]),
            sweep.modes[i].to_string(),
            fmt_opt(sweep.hf_derivs[i]),
            fmt_opt(sweep.fd_derivs[i]),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Parses CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rdr.headers().map_err(io_err)?.clone();
    if headers.iter().ne(SWEEP_HEADER) {
        return Err(Error::invalid(format!(
            "unexpected sweep header {headers:?}"
        )));
    }
    let mut out = SweepResult {
        kappas: Vec::new(),
        lambdas: Vec::new(),
        modes: Vec::new(),
        hf_derivs: Vec::new(),
        fd_derivs: Vec::new(),
    };
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            field(k).parse().map_err(|_| {
                Error::invalid(format!(
                    "row {}: bad {} {:?}",
                    line + 1,
                    SWEEP_HEADER[k],
                    field(k)
                ))
            })
        };
        let opt = |k: usize| -> Result<Option<f64>> {
            if field(k).is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        out.kappas.push(num(0)?);
        out.lambdas.push(num(1)?);
        out.modes.push(
            field(2).parse().map_err(|_| {
                Error::invalid(format!("row {}: bad mode {:?}", line + 1, field(2)))
            })?,
        );
        out.hf_derivs.push(opt(3)?);
        out.fd_derivs.push(opt(4)?);
    }
    Ok(out)
}

/// Writes `key: value` header lines, a blank line, then `r<TAB>psi` rows of
/// the radial profile.
pub fn write_ground_state<W: Write>(gs: &GroundState, mut out: W) -> Result<()> {
    let s = &gs.spec;
    let header: [(&str, String); 11] = [
        ("kappa", fmt_f64(gs.kappa)),
        ("lambda1", fmt_f64(gs.lambda1)),
        ("mode_star", gs.mode_star.to_string()),
        ("a", fmt_f64(s.a)),
        ("beta", fmt_f64(s.beta)),
        ("p", fmt_f64(s.p)),
        ("omega", fmt_f64(s.omega)),
        ("q", fmt_f64(s.q)),
        ("r_outer", fmt_f64(gs.mesh.outer())),
        ("n", gs.mesh.len().to_string()),
        (
            "normalization",
            "sum g_i^2 = 1, psi = g / sqrt(r)".to_string(),
        ),
    ];
    let mut body = String::new();
    for (k, v) in header {
        body.push_str(&format!("{k}: {v}\n"));
    }
    body.push('\n');
    for (r, f) in gs.mesh.nodes().zip(gs.radial_profile()) {
        body.push_str(&format!("{}\t{}\n", fmt_f64(r), fmt_f64(f)));
    }
    out.write_all(body.as_bytes()).map_err(io_err)
}

/// A ground-state record read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateRecord {
    pub header: Vec<(String, String)>,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
}

impl GroundStateRecord {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn read_ground_state<R: BufRead>(input: R) -> Result<GroundStateRecord> {
    let mut rec = GroundStateRecord {
        header: Vec::new(),
        r: Vec::new(),
        psi: Vec::new(),
    };
    let mut in_table = false;
    for line in input.lines() {
        let line = line.map_err(io_err)?;
        if !in_table {
            if line.is_empty() {
                in_table = true;
                continue;
            }
            let (k, v) = line
                .split_once(": ")
                .ok_or_else(|| Error::invalid(format!("malformed header line {line:?}")))?;
            rec.header.push((k.to_string(), v.to_string()));
            continue;
        }
        let (r, psi) = line
            .split_once('\t')
            .ok_or_else(|| Error::invalid(format!("malformed table row {line:?}")))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("malformed number {s:?}")))
        };
        rec.r.push(parse(r)?);
        rec.psi.push(parse(psi)?);
    }
    if !in_table {
        return Err(Error::invalid("ground-state record has no table"));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mesh, NumericsConfig, PotentialSpec};
    use crate::spectrum::ground_state_on_mesh;

    fn small_sweep() -> SweepResult {
        SweepResult {
            kappas: vec![-0.5, 0.0, 0.1],
            lambdas: vec![4.2, 4.1, 1.0 / 3.0],
            modes: vec![-1, 0, 0],
            hf_derivs: vec![None, None, Some(-0.012345678901234568)],
            fd_derivs: vec![None, Some(1e-300), Some(0.1)],
        }
    }

    #[test]
    fn sweep_csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&small_sweep(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], "kappa,lambda1,mode,deriv_hf,deriv_fd");
        assert_eq!(lines[1], "-5.0000000000000000e-1,4.2000000000000002e0,-1,,");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn sweep_csv_round_trips_exactly() {
        let s = small_sweep();
        let mut buf = Vec::new();
        write_sweep_csv(&s, &mut buf).unwrap();
        let back = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sweep_csv_rejects_bad_input() {
        assert!(read_sweep_csv("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "kappa,lambda1,mode,deriv_hf,deriv_fd\n0.1,x,0,,\n";
        assert!(read_sweep_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn ground_state_record_round_trips() {
        let spec = PotentialSpec::default();
        let mesh = build_mesh(1.0, 7.0, 50).unwrap();
        let gs = ground_state_on_mesh(0.5, &spec, &NumericsConfig::default(), &mesh).unwrap();
        let mut buf = Vec::new();
        write_ground_state(&gs, &mut buf).unwrap();
        let rec = read_ground_state(buf.as_slice()).unwrap();
        assert_eq!(
            rec.get("lambda1").unwrap().parse::<f64>().unwrap(),
            gs.lambda1
        );
        assert_eq!(rec.get("mode_star"), Some("0"));
        assert_eq!(rec.get("n"), Some("50"));
        assert_eq!(rec.r, mesh.nodes().collect::<Vec<_>>());
        assert_eq!(rec.psi, gs.radial_profile());
    }
}

//! CSV in and out: comma separated, header row mandatory, `-inf` for
//! negative infinity, shortest round-trip decimal floats.

use std::io::Write;
use std::path::Path;

use mgpx::Samples;

use crate::error::CliError;

pub fn format_f64(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "-inf" => Some(f64::NEG_INFINITY),
        "inf" => Some(f64::INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// Rows of `dim` numbers under a header line.
pub fn read_matrix(path: &Path, dim: usize) -> Result<Samples, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if header.len() != dim {
        return Err(CliError::Input(format!(
            "{} line 1: header has {} fields, expected {dim}",
            path.display(),
            header.len()
        )));
    }
    let mut out = Samples::with_capacity(dim, 0);
    let mut row = vec![0.0; dim];
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if rec.len() != dim {
            return Err(CliError::Input(format!(
                "{} line {line}: expected {dim} fields, found {}",
                path.display(),
                rec.len()
            )));
        }
        for (j, f) in rec.iter().enumerate() {
            row[j] = parse_f64(f).ok_or_else(|| {
                CliError::Input(format!("{} line {line}, field {}: not a number: {f:?}", path.display(), j + 1))
            })?;
        }
        out.push(&row)
            .map_err(|e| CliError::Input(format!("{} line {line}: {e}", path.display())))?;
    }
    Ok(out)
}

pub fn write_csv<W: Write>(out: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::Input(format!("writing CSV: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "output".into(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, -2.5e-300, 1e300, f64::NEG_INFINITY, 0.0, 3.0] {
            assert_eq!(parse_f64(&format_f64(v)).unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert!(parse_f64("nan").is_none());
        assert!(parse_f64("abc").is_none());
    }

    #[test]
    fn matrix_reading_reports_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "a,b\n0,-inf\n-1,0\n").unwrap();
        let m = read_matrix(&p, 2).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.row(0)[1], f64::NEG_INFINITY);
        std::fs::write(&p, "a,b\n0,x\n").unwrap();
        let e = read_matrix(&p, 2).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        std::fs::write(&p, "a,b\n0\n").unwrap();
        assert!(read_matrix(&p, 2).is_err());
    }
}

//! Plain-text input and trace serialization.
//!
//! Matrices and vectors are read from CSV: one row per line, comma-separated,
//! row-major, with blank lines and `#` comments ignored. Subspace files list
//! one basis vector per row. Traces are written as CSV (17 significant
//! digits, so equivalence checks reproduce byte-for-byte) or as JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::error::{Error, Result};
use crate::solvers::IterateTrace;
use crate::subspace::Subspace;

/// Parse CSV text into rows of floats. Blank lines and lines starting with
/// `#` (after leading whitespace) are skipped. Every row must have the same
/// number of entries.
fn parse_rows(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "{origin}:{}: cannot parse `{field}` as a number",
                    lineno + 1
                ))
            })?;
            row.push(value);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "{origin}:{}: row has {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{origin}: no numeric rows found")));
    }
    Ok(rows)
}

/// Read a dense matrix from a CSV file (row-major, `#` comments allowed).
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let rows = parse_rows(&text, &path.display().to_string())?;
    let (nrows, ncols) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Read a vector from a CSV file: all numeric entries, in row-major order,
/// flattened into one vector (one value per line and one comma-separated
/// line are both accepted).
pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let rows = parse_rows(&text, &path.display().to_string())?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DVector::from_vec(flat))
}

/// Read a subspace from a CSV file whose rows are basis vectors.
pub fn read_subspace_csv(path: impl AsRef<Path>) -> Result<Subspace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let rows = parse_rows(&text, &path.display().to_string())?;
    let basis: Vec<DVector<f64>> = rows.into_iter().map(DVector::from_vec).collect();
    Subspace::from_basis(&basis)
}

/// One scalar cell: 17 significant digits for finite values, `nan` / `inf`
/// / `-inf` otherwise, and `nan` for absent diagnostics.
pub fn csv_cell(value: Option<f64>) -> String {
    match value {
        None => "nan".into(),
        Some(v) if v.is_nan() => "nan".into(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) if v == f64::NEG_INFINITY => "-inf".into(),
        Some(v) => format!("{v:.16e}"),
    }
}

fn header_block(prefix: &str, n: usize, out: &mut String) {
    for i in 0..n {
        out.push(',');
        out.push_str(prefix);
        out.push('_');
        out.push_str(&i.to_string());
    }
}

/// Write a trace as CSV with header
/// `k,res,lyapunov,alpha,gap,x_0..x_{n-1},y_0..,xbar_0..,ybar_0..` and a
/// trailing `# status=...` footer (plus `# error=` / `# left_region=` /
/// `# alpha_bar=` lines when applicable).
pub fn write_trace_csv<W: Write>(mut w: W, trace: &IterateTrace) -> Result<()> {
    let n = trace.final_x.len();
    let mut header = String::from("k,res,lyapunov,alpha,gap");
    header_block("x", n, &mut header);
    header_block("y", n, &mut header);
    header_block("xbar", n, &mut header);
    header_block("ybar", n, &mut header);
    writeln!(w, "{header}")?;
    for row in &trace.rows {
        let mut line = format!(
            "{},{},{},{},{}",
            row.k,
            csv_cell(Some(row.res)),
            csv_cell(row.lyapunov),
            csv_cell(row.alpha),
            csv_cell(row.gap),
        );
        for block in [&row.x, &row.y, &row.xbar, &row.ybar] {
            for value in block.iter() {
                line.push(',');
                line.push_str(&csv_cell(Some(*value)));
            }
        }
        writeln!(w, "{line}")?;
    }
    writeln!(w, "# status={}", trace.status)?;
    if let Some(err) = &trace.error {
        writeln!(w, "# error={err}")?;
    }
    if trace.left_region {
        writeln!(w, "# left_region=true")?;
    }
    if let Some(alpha_bar) = trace.alpha_bar {
        writeln!(w, "# alpha_bar={}", csv_cell(Some(alpha_bar)))?;
    }
    Ok(())
}

fn json_vec(v: &DVector<f64>) -> serde_json::Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

/// Write a trace as JSON: the same per-row fields as the CSV (absent
/// diagnostics become `null`) plus a metadata object.
pub fn write_trace_json<W: Write>(mut w: W, trace: &IterateTrace) -> Result<()> {
    let rows: Vec<serde_json::Value> = trace
        .rows
        .iter()
        .map(|row| {
            json!({
                "k": row.k,
                "res": row.res,
                "lyapunov": row.lyapunov,
                "alpha": row.alpha,
                "gap": row.gap,
                "x": json_vec(&row.x),
                "y": json_vec(&row.y),
                "xbar": json_vec(&row.xbar),
                "ybar": json_vec(&row.ybar),
            })
        })
        .collect();
    let doc = json!({
        "status": trace.status.as_str(),
        "error": trace.error,
        "left_region": trace.left_region,
        "alpha_bar": trace.alpha_bar,
        "iterations": trace.iterations(),
        "final_x": json_vec(&trace.final_x),
        "final_y": json_vec(&trace.final_y),
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut w, &doc)
        .map_err(|e| Error::Parse(format!("json serialization: {e}")))?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{RunStatus, TraceRow};

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file.flush().unwrap();
        file
    }

    #[test]
    fn matrix_roundtrip_with_comments() {
        let file = write_temp("# a matrix\n1, 2.5\n\n  # more\n-3e-1, 4\n");
        let m = read_matrix_csv(file.path()).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.ncols(), 2);
        assert_eq!(m[(0, 1)], 2.5);
        assert_eq!(m[(1, 0)], -0.3);
    }

    #[test]
    fn vector_accepts_rows_or_lines() {
        let file = write_temp("1\n2\n3\n");
        let v = read_vector_csv(file.path()).unwrap();
        assert_eq!(v, DVector::from_vec(vec![1.0, 2.0, 3.0]));

        let file = write_temp("1, 2, 3\n");
        let v = read_vector_csv(file.path()).unwrap();
        assert_eq!(v, DVector::from_vec(vec![1.0, 2.0, 3.0]));
    }

    #[test]
    fn subspace_rows_are_basis_vectors() {
        let file = write_temp("1, 0, 0\n0, 0, 1\n");
        let s = read_subspace_csv(file.path()).unwrap();
        assert_eq!(s.dim_ambient(), 3);
        assert_eq!(s.dim(), 2);
        let direct = Subspace::from_basis(&[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        ])
        .unwrap();
        assert!((s.projector() - direct.projector()).norm() <= 1e-14);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let ragged = write_temp("1, 2\n3\n");
        assert!(matches!(
            read_matrix_csv(ragged.path()),
            Err(Error::Parse(_))
        ));

        let garbled = write_temp("1, two\n");
        match read_matrix_csv(garbled.path()) {
            Err(Error::Parse(msg)) => assert!(msg.contains("two") && msg.contains(":1")),
            other => panic!("expected parse error, got {other:?}"),
        }

        let empty = write_temp("# only comments\n\n");
        assert!(matches!(
            read_matrix_csv(empty.path()),
            Err(Error::Parse(_))
        ));

        assert!(matches!(
            read_matrix_csv("/nonexistent/definitely/missing.csv"),
            Err(Error::Io(_))
        ));
    }

    fn sample_trace() -> IterateTrace {
        IterateTrace {
            rows: vec![
                TraceRow {
                    k: 0,
                    res: 0.8,
                    lyapunov: Some(2.0),
                    alpha: None,
                    gap: None,
                    x: DVector::from_vec(vec![1.0, 0.0]),
                    y: DVector::from_vec(vec![0.0, 1.0]),
                    xbar: DVector::from_vec(vec![0.2, 0.0]),
                    ybar: DVector::from_vec(vec![0.0, 0.6]),
                },
                TraceRow {
                    k: 1,
                    res: 0.032,
                    lyapunov: Some(0.4),
                    alpha: Some(1.5),
                    gap: Some(0.0),
                    x: DVector::from_vec(vec![0.2, 0.0]),
                    y: DVector::from_vec(vec![0.0, 0.6]),
                    xbar: DVector::from_vec(vec![0.04, 0.0]),
                    ybar: DVector::from_vec(vec![0.0, 0.28]),
                },
            ],
            status: RunStatus::Converged,
            error: None,
            left_region: false,
            alpha_bar: Some(1.5),
            final_x: DVector::from_vec(vec![0.04, 0.0]),
            final_y: DVector::from_vec(vec![0.0, 0.28]),
        }
    }

    #[test]
    fn csv_format_is_frozen() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &sample_trace()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,res,lyapunov,alpha,gap,x_0,x_1,y_0,y_1,xbar_0,xbar_1,ybar_0,ybar_1"
        );
        assert_eq!(
            lines.next().unwrap(),
            "0,8.0000000000000004e-1,2.0000000000000000e0,nan,nan,\
             1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,\
             1.0000000000000000e0,2.0000000000000001e-1,0.0000000000000000e0,\
             0.0000000000000000e0,5.9999999999999998e-1"
        );
        assert!(lines.next().unwrap().starts_with("1,3.2000000000000001e-2"));
        assert_eq!(lines.next().unwrap(), "# status=Converged");
        assert_eq!(lines.next().unwrap(), "# alpha_bar=1.5000000000000000e0");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn csv_output_is_deterministic() {
        let trace = sample_trace();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trace_csv(&mut a, &trace).unwrap();
        write_trace_csv(&mut b, &trace).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let mut buf = Vec::new();
        write_trace_json(&mut buf, &sample_trace()).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["status"], "Converged");
        assert_eq!(doc["error"], serde_json::Value::Null);
        assert_eq!(doc["left_region"], false);
        assert_eq!(doc["iterations"], 2);
        assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
        // absent diagnostics are null, present ones are numbers
        assert!(doc["rows"][0]["alpha"].is_null());
        assert_eq!(doc["rows"][1]["alpha"], 1.5);
        assert_eq!(doc["rows"][0]["x"][0], 1.0);
        assert_eq!(doc["final_y"][1], 0.28);
    }

    #[test]
    fn error_status_lands_in_footer() {
        let mut trace = sample_trace();
        trace.status = RunStatus::Error;
        trace.error = Some("resolvent failed".into());
        trace.left_region = true;
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# status=Error"));
        assert!(text.contains("# error=resolvent failed"));
        assert!(text.contains("# left_region=true"));
    }
}

//! Convergence tables in CSV form.

use std::path::Path;

use crate::analysis::ErrorReport;
use crate::error::{Error, Result};

pub const ERROR_COLUMNS: [&str; 5] = ["err_u_L2", "err_u_energy", "err_p_L2", "err_T_L2", "err_T_dGT"];

pub fn header() -> Vec<String> {
    let mut cols: Vec<String> = ["scheme", "ell", "m", "one_over_h", "iters"].iter().map(|s| s.to_string()).collect();
    cols.extend(ERROR_COLUMNS.iter().map(|s| s.to_string()));
    cols.extend(ERROR_COLUMNS.iter().map(|s| format!("rate_{}", &s[4..])));
    cols
}

/// Rate of row `i` against row `i − 1`: algebraic in `h` when the mesh
/// changes, exponential in `ℓ` when only the degree changes.
fn row_rates(prev: &ErrorReport, cur: &ErrorReport) -> [Option<f64>; 5] {
    let (ep, ec) = (prev.errors(), cur.errors());
    let mut out = [None; 5];
    for c in 0..5 {
        let ratio = (ec[c] / ep[c]).ln();
        let r = if (prev.h - cur.h).abs() > 1e-12 * prev.h {
            ratio / (cur.h / prev.h).ln()
        } else if cur.degree != prev.degree {
            ratio / (cur.degree as f64 - prev.degree as f64)
        } else {
            f64::NAN
        };
        out[c] = r.is_finite().then_some(r);
    }
    out
}

fn sci(v: f64) -> String {
    format!("{v:.7e}")
}

/// Renders the table for `reports`, one row per report in order.
pub fn csv_string(reports: &[ErrorReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header()).map_err(io)?;
    for (i, r) in reports.iter().enumerate() {
        let rates = if i == 0 { [None; 5] } else { row_rates(&reports[i - 1], r) };
        let mut row = vec![
            r.scheme.name().to_string(),
            r.degree.to_string(),
            r.pressure_degree.to_string(),
            sci(r.one_over_h),
            r.iterations.to_string(),
        ];
        row.extend(r.errors().iter().map(|&e| sci(e)));
        row.extend(rates.iter().map(|x| x.map(sci).unwrap_or_default()));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_csv(reports: &[ErrorReport], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(reports)?)?;
    Ok(())
}

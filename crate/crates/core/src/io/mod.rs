//! Run configuration, convergence tables and field output.

mod config;
mod table;
mod vtk;

use std::path::Path;

pub use config::{parse_heat_velocity, parse_range, parse_sweep, Emit, MeshChoice, RunConfig};
pub use table::{csv_string, header, write_csv, ERROR_COLUMNS};
pub use vtk::{cell_values, vtk_string, write_vtk};

use crate::error::{Error, Result};
use crate::solver::SolveReport;

/// Per-iteration increment history of one solve as CSV.
pub fn history_csv_string(rep: &SolveReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["iteration", "relative", "inc_u", "inc_p", "inc_T", "inc_energy"]).map_err(io)?;
    for (k, inc) in rep.increments.iter().enumerate() {
        let row = [(k + 1).to_string()].into_iter().chain([inc.relative, inc.du, inc.dp, inc.dt, inc.energy].map(|v| format!("{v:.7e}")));
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_history_csv(rep: &SolveReport, path: &Path) -> Result<()> {
    std::fs::write(path, history_csv_string(rep)?)?;
    Ok(())
}

//! Command-line driver.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;

use crate::analysis::{self, ErrorReport};
use crate::cases::{case_by_name, CaseDefinition, Domain, MeshSpec};
use crate::error::{Error, Result};
use crate::forms::PenaltyConfig;
use crate::io::{self, Emit, MeshChoice, RunConfig};
use crate::mesh::{read_mesh, Mesh};
use crate::solver::{contraction_probe, divergence_norm, fixed_point_solve, SolveReport, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "dfheat", version, about = "Coupled Darcy-Forchheimer flow and heat transport with dG and RT-dG elements")]
struct Args {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// conv2d, conv3d, lshape2d or lshape3d.
    #[arg(long)]
    case: Option<String>,
    /// dg or rt.
    #[arg(long)]
    scheme: Option<String>,
    /// Temperature and DG velocity degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Pressure degree (default: degree - 1).
    #[arg(long)]
    pressure_degree: Option<usize>,
    /// Comma-separated values of 1/h for an h-convergence sweep.
    #[arg(long)]
    sweep: Option<String>,
    /// Degree range lo:hi for a p-convergence sweep.
    #[arg(long)]
    p_sweep: Option<String>,
    /// Mesh: <n>elems, <n>cells, inv:<1/h>, h:<h> or a mesh file.
    #[arg(long)]
    mesh: Option<String>,
    /// Target mesh size, same as --mesh h:<h>.
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated artifacts: csv, vtk, report.
    #[arg(long)]
    emit: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed-point tolerance on the largest relative increment.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Maximum number of fixed-point iterations.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Temperature interior-penalty scale.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Velocity normal-jump penalty scale.
    #[arg(long)]
    alpha2: Option<f64>,
    /// Pressure jump penalty scale (dG scheme).
    #[arg(long)]
    alpha3: Option<f64>,
    /// Velocity advecting the heat step: current or previous.
    #[arg(long)]
    heat_velocity: Option<String>,
    /// Also write per-vertex discontinuous values to the VTK files.
    #[arg(long)]
    vtk_discontinuous: bool,
}

impl Args {
    fn into_config(self) -> Result<(RunConfig, bool)> {
        let mut c = match &self.config {
            Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.case {
            c.case = v;
        }
        if let Some(v) = self.scheme {
            c.scheme = v.parse()?;
        }
        if let Some(v) = self.degree {
            c.degree = v;
        }
        if let Some(v) = self.pressure_degree {
            c.pressure_degree = Some(v);
        }
        if let Some(v) = self.sweep {
            c.sweep = io::parse_sweep(&v)?;
        }
        if let Some(v) = self.p_sweep {
            c.p_sweep = Some(io::parse_range(&v)?);
        }
        if let Some(v) = self.mesh {
            c.mesh = Some(v.parse()?);
        }
        if let Some(h) = self.h {
            c.mesh = Some(MeshChoice::Spec(MeshSpec::TargetH(h)));
        }
        if let Some(v) = self.emit {
            c.emit = v.parse::<Emit>()?;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
        if let Some(v) = self.rel_tol {
            c.rel_tol = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.alpha1 {
            c.alpha1 = v;
        }
        if let Some(v) = self.alpha2 {
            c.alpha2 = v;
        }
        if let Some(v) = self.alpha3 {
            c.alpha3 = v;
        }
        if let Some(v) = self.heat_velocity {
            c.heat_velocity = io::parse_heat_velocity(&v)?;
        }
        Ok((c, self.vtk_discontinuous))
    }
}

/// Solver settings of `run` at temperature degree `degree`.
pub fn solver_config(run: &RunConfig, degree: usize) -> SolverConfig {
    let mut c = SolverConfig::new(run.scheme, degree);
    c.pressure_degree = run.pressure_degree.unwrap_or(degree.saturating_sub(1));
    c.rel_tol = run.rel_tol;
    c.max_iter = run.max_iter;
    c.penalty = PenaltyConfig { alpha1: run.alpha1, alpha2: run.alpha2, alpha3: run.alpha3 };
    c.heat_velocity = run.heat_velocity;
    c
}

fn default_mesh(case: &CaseDefinition) -> MeshSpec {
    match (case.domain, case.dim) {
        (Domain::UnitBox, _) => MeshSpec::InverseH(8.0),
        (Domain::LShape, 2) => MeshSpec::TargetH(0.1),
        (Domain::LShape, _) => MeshSpec::TargetH(0.5),
    }
}

fn build_mesh(case: &CaseDefinition, choice: Option<&MeshChoice>) -> Result<Arc<Mesh>> {
    let mesh = match choice {
        None => case.build_mesh(default_mesh(case))?,
        Some(MeshChoice::Spec(s)) => case.build_mesh(*s)?,
        Some(MeshChoice::File(p)) => read_mesh(p)?,
    };
    if mesh.dim != case.dim {
        return Err(Error::InvalidArgument(format!("case {} needs a {}D mesh, got {}D", case.name, case.dim, mesh.dim)));
    }
    Ok(Arc::new(mesh))
}

/// Everything one invocation computed.
struct Outcome {
    reports: Vec<ErrorReport>,
    last: Option<SolveReport>,
    text: String,
    all_converged: bool,
}

fn record_solve(out: &mut Outcome, label: &str, rep: &SolveReport) -> Result<()> {
    let ratios = contraction_probe(rep);
    let worst = ratios.iter().skip(2).cloned().fold(f64::NAN, f64::max);
    let _ = writeln!(
        out.text,
        "{label}: {} iterations ({}), {:.2?}, div {:.3e}, max ratio after k=2 {:.3}",
        rep.iterations,
        if rep.converged { "converged" } else { "NOT converged" },
        rep.wall_time,
        divergence_norm(&rep.u)?,
        worst
    );
    out.all_converged &= rep.converged;
    Ok(())
}

fn run_studies(run: &RunConfig, case: &CaseDefinition) -> Result<Outcome> {
    let mut out = Outcome { reports: Vec::new(), last: None, text: String::new(), all_converged: true };
    let mut points: Vec<(SolverConfig, Option<MeshChoice>)> = Vec::new();
    if let Some((lo, hi)) = run.p_sweep {
        let mesh = run.mesh.clone().unwrap_or(MeshChoice::Spec(MeshSpec::Elements(64)));
        for l in lo..=hi {
            points.push((solver_config(run, l), Some(mesh.clone())));
        }
    } else if !run.sweep.is_empty() {
        for &v in &run.sweep {
            points.push((solver_config(run, run.degree), Some(MeshChoice::Spec(MeshSpec::InverseH(v)))));
        }
    } else {
        points.push((solver_config(run, run.degree), run.mesh.clone()));
    }
    for (config, choice) in points {
        config.validate()?;
        let mesh = build_mesh(case, choice.as_ref())?;
        let label = format!(
            "{} {} l={} m={} elements={} 1/h={:.2}",
            case.name,
            config.scheme.name(),
            config.degree,
            config.pressure_degree,
            mesh.n_elements(),
            1.0 / mesh.h_max()
        );
        let rep = if case.exact.is_some() {
            let (r, rep) = analysis::study_on_mesh(case, &config, mesh)?;
            let _ = writeln!(
                out.text,
                "{label}: errors u {:.3e} u_E {:.3e} p {:.3e} T {:.3e} T_dG {:.3e}",
                r.err_u_l2, r.err_u_energy, r.err_p_l2, r.err_t_l2, r.err_t_dgt
            );
            out.reports.push(r);
            rep
        } else {
            let rep = fixed_point_solve(case, mesh, &config)?;
            let (peak, at) = analysis::peak_centroid_speed(&rep.u)?;
            let _ = writeln!(
                out.text,
                "{label}: max |u| {peak:.4e} at ({:.3}, {:.3}, {:.3}), mean p {:.3e}",
                at[0],
                at[1],
                at[2],
                analysis::mean_value(&rep.p)?
            );
            rep
        };
        record_solve(&mut out, &label, &rep)?;
        out.last = Some(rep);
    }
    if out.reports.len() >= 2 {
        append_rates(&mut out.text, &out.reports, run.p_sweep.is_some())?;
    }
    Ok(out)
}

fn append_rates(text: &mut String, reports: &[ErrorReport], degree_sweep: bool) -> Result<()> {
    let tail = &reports[reports.len().saturating_sub(3)..];
    let names = ["u_L2", "u_energy", "p_L2", "T_L2", "T_dGT"];
    for (c, name) in names.iter().enumerate() {
        let e: Vec<f64> = tail.iter().map(|r| r.errors()[c]).collect();
        let slope = if degree_sweep {
            let all: Vec<f64> = reports.iter().map(|r| r.errors()[c]).collect();
            let l: Vec<f64> = reports.iter().map(|r| r.degree as f64).collect();
            analysis::exp_slope(&l, &all)?
        } else {
            let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
            analysis::lsq_slope(&h, &e)?
        };
        let kind = if degree_sweep { "exponential rate in l" } else { "rate over last meshes" };
        let _ = writeln!(text, "{kind} {name}: {slope:.3}");
    }
    Ok(())
}

fn write_artifacts(run: &RunConfig, case: &CaseDefinition, outcome: &Outcome, discontinuous: bool) -> Result<Vec<PathBuf>> {
    let emit = run.emit;
    if !(emit.csv || emit.vtk || emit.report) {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(&run.out)?;
    let stem = format!("{}_{}", case.name, run.scheme.name());
    let mut written = Vec::new();
    if emit.csv {
        let path = if case.exact.is_some() {
            let name = if run.p_sweep.is_some() { format!("{stem}_psweep.csv") } else { format!("{stem}.csv") };
            let path = run.out.join(name);
            io::write_csv(&outcome.reports, &path)?;
            path
        } else {
            let path = run.out.join(format!("{stem}_history.csv"));
            let rep = outcome.last.as_ref().ok_or_else(|| Error::InvalidArgument("nothing was solved".into()))?;
            io::write_history_csv(rep, &path)?;
            path
        };
        written.push(path);
    }
    if emit.vtk {
        if let Some(rep) = &outcome.last {
            for (name, field) in [("u", &rep.u), ("p", &rep.p), ("T", &rep.t)] {
                let path = run.out.join(format!("{stem}_{name}.vtk"));
                io::write_vtk(name, field, &path, discontinuous)?;
                written.push(path);
            }
        }
    }
    if emit.report {
        let path = run.out.join(format!("{stem}_report.txt"));
        std::fs::write(&path, format!("{}\n{}", run.serialize(), outcome.text))?;
        written.push(path);
    }
    Ok(written)
}

fn execute(run: &RunConfig, discontinuous: bool) -> Result<bool> {
    let case = case_by_name(&run.case)?;
    let outcome = run_studies(run, &case)?;
    print!("{}", outcome.text);
    for p in write_artifacts(run, &case, &outcome, discontinuous)? {
        println!("wrote {}", p.display());
    }
    Ok(outcome.all_converged)
}

/// Runs the driver on `argv` (including the program name). Returns 0 on
/// success, 2 when a fixed-point iteration did not converge and 1 on
/// usage or runtime errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (config, discontinuous) = match args.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match execute(&config, discontinuous) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("fixed-point iteration did not converge");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

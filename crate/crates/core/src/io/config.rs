//! Run configuration as flat `key = value` text.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cases::MeshSpec;
use crate::error::{Error, Result};
use crate::forms::Scheme;
use crate::solver::HeatVelocity;

/// Artifacts written by a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub vtk: bool,
    pub report: bool,
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Emit> {
        let mut e = Emit::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "csv" => e.csv = true,
                "vtk" => e.vtk = true,
                "report" => e.report = true,
                "none" => {}
                _ => return Err(Error::Parse(format!("unknown emit flag `{item}` (expected csv, vtk, report)"))),
            }
        }
        Ok(e)
    }
}

impl Emit {
    pub fn to_list(self) -> String {
        let names: Vec<&str> =
            [(self.csv, "csv"), (self.vtk, "vtk"), (self.report, "report")].iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        if names.is_empty() {
            "none".into()
        } else {
            names.join(",")
        }
    }
}

/// Mesh selection for single runs and degree sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshChoice {
    Spec(MeshSpec),
    File(PathBuf),
}

impl FromStr for MeshChoice {
    type Err = Error;

    /// Accepts `<n>elems`, `<n>cells`, `inv:<1/h>`, `h:<h>` or a mesh file path.
    fn from_str(s: &str) -> Result<MeshChoice> {
        let s = s.trim();
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("invalid mesh `{s}`: {e}"));
        if let Some(n) = s.strip_suffix("elems") {
            return Ok(MeshChoice::Spec(MeshSpec::Elements(n.parse().map_err(|e| bad(&e))?)));
        }
        if let Some(n) = s.strip_suffix("cells") {
            return Ok(MeshChoice::Spec(MeshSpec::Cells(n.parse().map_err(|e| bad(&e))?)));
        }
        if let Some(v) = s.strip_prefix("inv:") {
            return Ok(MeshChoice::Spec(MeshSpec::InverseH(v.parse().map_err(|e| bad(&e))?)));
        }
        if let Some(v) = s.strip_prefix("h:") {
            return Ok(MeshChoice::Spec(MeshSpec::TargetH(v.parse().map_err(|e| bad(&e))?)));
        }
        if s.is_empty() {
            return Err(Error::Parse("empty mesh".into()));
        }
        Ok(MeshChoice::File(PathBuf::from(s)))
    }
}

impl std::fmt::Display for MeshChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshChoice::Spec(MeshSpec::Elements(n)) => write!(f, "{n}elems"),
            MeshChoice::Spec(MeshSpec::Cells(n)) => write!(f, "{n}cells"),
            MeshChoice::Spec(MeshSpec::InverseH(v)) => write!(f, "inv:{v}"),
            MeshChoice::Spec(MeshSpec::TargetH(h)) => write!(f, "h:{h}"),
            MeshChoice::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub scheme: Scheme,
    pub degree: usize,
    /// Pressure degree; `ℓ − 1` when unset.
    pub pressure_degree: Option<usize>,
    /// Values of `1/h` for an h-convergence sweep.
    pub sweep: Vec<f64>,
    /// Inclusive degree range of a p-convergence sweep.
    pub p_sweep: Option<(usize, usize)>,
    pub mesh: Option<MeshChoice>,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub out: PathBuf,
    pub emit: Emit,
    pub heat_velocity: HeatVelocity,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: "conv2d".into(),
            scheme: Scheme::DgDgDg,
            degree: 2,
            pressure_degree: None,
            sweep: Vec::new(),
            p_sweep: None,
            mesh: None,
            rel_tol: 1e-8,
            max_iter: 50,
            alpha1: 10.0,
            alpha2: 10.0,
            alpha3: 10.0,
            out: PathBuf::from("out"),
            emit: Emit { csv: true, vtk: false, report: false },
            heat_velocity: HeatVelocity::Current,
        }
    }
}

pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(Error::Parse(format!("invalid 1/h value `{x}`"))),
        })
        .collect()
}

/// Parses `a:b` into an inclusive degree range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("invalid degree range `{s}` (expected lo:hi)"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn parse_heat_velocity(s: &str) -> Result<HeatVelocity> {
    match s {
        "current" => Ok(HeatVelocity::Current),
        "previous" => Ok(HeatVelocity::Previous),
        _ => Err(Error::Parse(format!("unknown heat velocity `{s}` (expected current or previous)"))),
    }
}

fn heat_velocity_name(h: HeatVelocity) -> &'static str {
    match h {
        HeatVelocity::Current => "current",
        HeatVelocity::Previous => "previous",
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("invalid value `{v}` for `{key}`")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "case" => self.case = v.to_string(),
            "scheme" => self.scheme = v.parse()?,
            "degree" => self.degree = num(key, v)?,
            "pressure_degree" => self.pressure_degree = if v.is_empty() { None } else { Some(num(key, v)?) },
            "sweep" => self.sweep = parse_sweep(v)?,
            "p_sweep" => self.p_sweep = if v.is_empty() { None } else { Some(parse_range(v)?) },
            "mesh" => self.mesh = if v.is_empty() { None } else { Some(v.parse()?) },
            "rel_tol" => self.rel_tol = num(key, v)?,
            "max_iter" => self.max_iter = num(key, v)?,
            "alpha1" => self.alpha1 = num(key, v)?,
            "alpha2" => self.alpha2 = num(key, v)?,
            "alpha3" => self.alpha3 = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "emit" => self.emit = v.parse()?,
            "heat_velocity" => self.heat_velocity = parse_heat_velocity(v)?,
            other => return Err(Error::Parse(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        c.apply(text)?;
        Ok(c)
    }

    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "scheme = {}", self.scheme.name());
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "pressure_degree = {}", self.pressure_degree.map(|m| m.to_string()).unwrap_or_default());
        let sweep: Vec<String> = self.sweep.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "sweep = {}", sweep.join(","));
        let _ = writeln!(s, "p_sweep = {}", self.p_sweep.map(|(a, b)| format!("{a}:{b}")).unwrap_or_default());
        let _ = writeln!(s, "mesh = {}", self.mesh.as_ref().map(|m| m.to_string()).unwrap_or_default());
        let _ = writeln!(s, "rel_tol = {:e}", self.rel_tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "alpha1 = {}", self.alpha1);
        let _ = writeln!(s, "alpha2 = {}", self.alpha2);
        let _ = writeln!(s, "alpha3 = {}", self.alpha3);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "emit = {}", self.emit.to_list());
        let _ = writeln!(s, "heat_velocity = {}", heat_velocity_name(self.heat_velocity));
        s
    }

    pub fn pressure_degree(&self) -> usize {
        self.pressure_degree.unwrap_or(self.degree.saturating_sub(1))
    }
}

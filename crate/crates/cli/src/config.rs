//! Run configuration: a single JSON document naming the operator, its
//! domain, the iteration scheme, sampling parameters and output paths.
//! Missing values fall back to the library defaults, and every resolved
//! value is echoed back into the emitted report so runs are
//! self-describing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fixpoint::tol::{
    DEFAULT_CYCLE_WINDOW, DEFAULT_DENSITY, DEFAULT_MAX_ITER, DEFAULT_SEED, DEFAULT_TOL,
};
use fixpoint::{Domain, OperatorDesc, OperatorSpec, Point};

use crate::commands::{CliError, Command};

/// On-disk configuration document.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Optional; must agree with the subcommand when present.
    pub command: Option<Command>,
    pub operator: OperatorDesc,
    pub domain: Domain,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub lambda: Option<LambdaSpec>,
    pub x0: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub cycle_window: Option<usize>,
    /// Known fixed point for rate comparison; probed when absent.
    pub fixed_point: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub density: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub trajectory_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

/// A step size: a number, the keyword "auto", or a pair for `compare`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(f64),
    Pair([f64; 2]),
    Keyword(String),
}

/// Fully resolved run parameters with all defaults applied.
#[derive(Debug)]
pub struct Resolved {
    pub command: Command,
    pub op: OperatorSpec,
    pub lambda: Option<LambdaSpec>,
    pub x0: Point,
    pub tol: f64,
    pub max_iter: usize,
    pub cycle_window: usize,
    pub density: usize,
    pub seed: u64,
    pub fixed_point: Option<Point>,
    pub trajectory_csv: PathBuf,
    pub report_json: PathBuf,
}

/// The shared parameters echoed into every report.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub command: &'static str,
    pub operator: OperatorDesc,
    pub domain: Domain,
    pub x0: Point,
    pub tol: f64,
    pub max_iter: usize,
    pub cycle_window: usize,
    pub density: usize,
    pub seed: u64,
}

impl Resolved {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            command: self.command.as_str(),
            operator: self.op.desc().clone(),
            domain: self.op.domain().clone(),
            x0: self.x0.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            cycle_window: self.cycle_window,
            density: self.density,
            seed: self.seed,
        }
    }
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
}

pub fn resolve(file: FileConfig, command: Command) -> Result<Resolved, CliError> {
    if let Some(declared) = file.command {
        if declared != command {
            return Err(CliError::config(format!(
                "config declares command `{}` but `{}` was invoked",
                declared.as_str(),
                command.as_str()
            )));
        }
    }

    let op = OperatorSpec::new(file.operator, file.domain)
        .map_err(|e| CliError::config(format!("invalid operator: {e}")))?;

    let x0 = match file.scheme.x0 {
        Some(coords) => {
            Point::new(coords).map_err(|e| CliError::config(format!("invalid x0: {e}")))?
        }
        None => op.domain().center(),
    };
    if x0.dim() != op.dim() {
        return Err(CliError::config(format!(
            "x0 has dimension {}, operator domain has dimension {}",
            x0.dim(),
            op.dim()
        )));
    }

    let fixed_point = match file.scheme.fixed_point {
        Some(coords) => Some(
            Point::new(coords).map_err(|e| CliError::config(format!("invalid fixed_point: {e}")))?,
        ),
        None => None,
    };

    let tol = file.scheme.tol.unwrap_or(DEFAULT_TOL);
    if !tol.is_finite() || tol <= 0.0 {
        return Err(CliError::config(format!("tol must be positive, got {tol}")));
    }
    let density = file.analysis.density.unwrap_or(DEFAULT_DENSITY);
    if density < 2 {
        return Err(CliError::config(format!("density must be >= 2, got {density}")));
    }

    Ok(Resolved {
        command,
        op,
        lambda: file.scheme.lambda,
        x0,
        tol,
        max_iter: file.scheme.max_iter.unwrap_or(DEFAULT_MAX_ITER),
        cycle_window: file.scheme.cycle_window.unwrap_or(DEFAULT_CYCLE_WINDOW),
        density,
        seed: file.analysis.seed.unwrap_or(DEFAULT_SEED),
        fixed_point,
        trajectory_csv: file
            .output
            .trajectory_csv
            .unwrap_or_else(|| PathBuf::from("trajectory.csv")),
        report_json: file
            .output
            .report_json
            .unwrap_or_else(|| PathBuf::from(format!("{}_report.json", command.as_str()))),
    })
}

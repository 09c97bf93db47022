//! Artifact writers and readers: plot-ready CSV plus machine-readable JSON.
//!
//! Every JSON artifact embeds the fully resolved scenario config (seed
//! included), so each file is re-derivable from itself. CSV numbers are
//! written in scientific notation with 13 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use txbeam_core::objective::CrossCorrelationEntry;
use txbeam_core::{
    CMatrix, Complex64, Covariance, CycleStats, DesignResult, DesignSpec, DesiredPattern, Selection,
};

use crate::config::ScenarioConfig;
use crate::error::CliError;

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn io_err(path: &Path, err: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {err}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// `beampattern.csv`: designed power and the scaled desired pattern per
/// grid angle.
pub fn write_beampattern_csv(
    path: &Path,
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    r: &Covariance,
    p: &Selection,
    alpha: f64,
) -> Result<(), CliError> {
    let mut out = String::from("theta_deg,designed_power,alpha_times_phi\n");
    for (k, &theta) in spec.geometry().angle_grid_deg().iter().enumerate() {
        let power = txbeam_core::array::beampattern_power(spec.geometry(), r, p, theta)
            .map_err(CliError::compute)?;
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(theta),
            fmt(power),
            fmt(alpha * pattern.value(k))
        ));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// `crosscorr.csv`: normalized cross-correlation magnitude per target pair.
pub fn write_crosscorr_csv(path: &Path, entries: &[CrossCorrelationEntry]) -> Result<(), CliError> {
    let mut out = String::from("theta_p_deg,theta_q_deg,normalized_magnitude\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(e.theta_deg),
            fmt(e.theta_bar_deg),
            fmt(e.normalized_magnitude)
        ));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// `covariance_real.csv` / `covariance_imag.csv`: M rows of M columns.
pub fn write_covariance_csv(
    real_path: &Path,
    imag_path: &Path,
    r: &Covariance,
) -> Result<(), CliError> {
    let m = r.dim();
    let mut real = String::new();
    let mut imag = String::new();
    for i in 0..m {
        let row_re: Vec<String> = (0..m).map(|j| fmt(r.matrix()[(i, j)].re)).collect();
        let row_im: Vec<String> = (0..m).map(|j| fmt(r.matrix()[(i, j)].im)).collect();
        real.push_str(&row_re.join(","));
        real.push('\n');
        imag.push_str(&row_im.join(","));
        imag.push('\n');
    }
    fs::write(real_path, real).map_err(|e| io_err(real_path, e))?;
    fs::write(imag_path, imag).map_err(|e| io_err(imag_path, e))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub bits: Vec<u8>,
    pub weight: usize,
    pub grid_indices: Vec<usize>,
}

pub fn write_selection_json(path: &Path, selection: &Selection) -> Result<(), CliError> {
    let artifact = SelectionArtifact {
        bits: selection.bits().to_vec(),
        weight: selection.weight(),
        grid_indices: selection.active_indices(),
    };
    write_json(path, &artifact)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CycleArtifact {
    pub solver_iterations: usize,
    pub solver_seconds: f64,
    pub search_generations: usize,
    pub fitness_evaluations: usize,
    pub search_seconds: f64,
    pub objective: f64,
}

impl From<&CycleStats> for CycleArtifact {
    fn from(c: &CycleStats) -> Self {
        Self {
            solver_iterations: c.solver_iterations,
            solver_seconds: c.solver_seconds,
            search_generations: c.search_generations,
            fitness_evaluations: c.fitness_evaluations,
            search_seconds: c.search_seconds,
            objective: c.objective,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultArtifact {
    pub final_objective: f64,
    pub alpha: f64,
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub total_fitness_evaluations: usize,
    pub cycles: Vec<CycleArtifact>,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
    pub selection_bits: Vec<u8>,
    pub config: ScenarioConfig,
}

pub fn write_result_json(
    path: &Path,
    result: &DesignResult,
    config: &ScenarioConfig,
) -> Result<(), CliError> {
    let artifact = ResultArtifact {
        final_objective: result.final_objective(),
        alpha: result.alpha,
        objective_trace: result.objective_trace.clone(),
        outer_iterations: result.outer_iterations,
        total_fitness_evaluations: result.total_fitness_evaluations(),
        cycles: result.cycles.iter().map(CycleArtifact::from).collect(),
        wall_seconds: result.wall_seconds,
        warnings: result.warnings.clone(),
        selection_bits: result.selection.bits().to_vec(),
        config: config.clone(),
    };
    write_json(path, &artifact)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalArtifact {
    pub objective_j: f64,
    pub objective_j2: f64,
    pub alpha: f64,
    pub selection_weight: usize,
    pub max_normalized_cross_correlation: Option<f64>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleArtifact {
    pub best_selection_bits: Vec<u8>,
    pub best_value: f64,
    pub evaluated_count: u64,
    pub greedy_selection_bits: Vec<u8>,
    pub greedy_value: f64,
    pub ratio: Option<f64>,
    pub alpha: f64,
    pub config: ScenarioConfig,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub beta: usize,
    pub m: usize,
    pub n: usize,
    pub wall_seconds: f64,
    pub outer_iterations: usize,
    pub inner_evaluations: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchArtifact {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of ln(evaluations) against ln(M).
    pub fit_exponent: f64,
    pub config: ScenarioConfig,
}

pub fn write_bench_csv(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut out = String::from("beta,m,n,wall_seconds,outer_iterations,inner_evaluations\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.beta,
            r.m,
            r.n,
            fmt(r.wall_seconds),
            r.outer_iterations,
            r.inner_evaluations
        ));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| io_err(path, e))?;
    file.write_all(b"\n").map_err(|e| io_err(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn read_selection_json(path: &Path) -> Result<Selection, CliError> {
    let artifact: SelectionArtifact = read_json(path)?;
    let selection = Selection::from_bits(artifact.bits).map_err(CliError::validation)?;
    if selection.weight() != artifact.weight {
        return Err(CliError::Validation(format!(
            "{}: recorded weight {} does not match the bits ({} ones)",
            path.display(),
            artifact.weight,
            selection.weight()
        )));
    }
    Ok(selection)
}

fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| {
            CliError::Validation(format!("{} line {}: {e}", path.display(), line_no + 1))
        })?);
    }
    Ok(rows)
}

/// Reads the covariance pair and validates the feasibility invariants;
/// violations carry the failing entry or eigenvalue.
pub fn read_covariance_csv(
    real_path: &Path,
    imag_path: &Path,
    power_budget: f64,
) -> Result<Covariance, CliError> {
    let real = read_matrix_csv(real_path)?;
    let imag = read_matrix_csv(imag_path)?;
    let m = real.len();
    if m == 0 || real.iter().any(|r| r.len() != m) {
        return Err(CliError::Validation(format!(
            "{}: expected a square matrix",
            real_path.display()
        )));
    }
    if imag.len() != m || imag.iter().any(|r| r.len() != m) {
        return Err(CliError::Validation(format!(
            "{}: imaginary part does not match a {m}x{m} real part",
            imag_path.display()
        )));
    }
    let matrix = CMatrix::from_fn(m, m, |i, j| Complex64::new(real[i][j], imag[i][j]));
    Covariance::new(matrix, power_budget).map_err(CliError::validation)
}

/// Columns of a `beampattern.csv` read back for verification.
pub struct BeampatternTable {
    pub theta_deg: Vec<f64>,
    pub designed_power: Vec<f64>,
    pub alpha_times_phi: Vec<f64>,
}

pub fn read_beampattern_csv(path: &Path) -> Result<BeampatternTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut table = BeampatternTable {
        theta_deg: Vec::new(),
        designed_power: Vec::new(),
        alpha_times_phi: Vec::new(),
    };
    for (line_no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Validation(format!(
                "{} line {}: expected 3 columns",
                path.display(),
                line_no + 1
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim().parse().map_err(|e| {
                CliError::Validation(format!("{} line {}: {e}", path.display(), line_no + 1))
            })
        };
        table.theta_deg.push(parse(fields[0])?);
        table.designed_power.push(parse(fields[1])?);
        table.alpha_times_phi.push(parse(fields[2])?);
    }
    Ok(table)
}

/// Standard artifact paths inside an output directory.
pub struct ArtifactPaths {
    pub beampattern: PathBuf,
    pub selection: PathBuf,
    pub covariance_real: PathBuf,
    pub covariance_imag: PathBuf,
    pub result: PathBuf,
    pub crosscorr: PathBuf,
    pub eval: PathBuf,
    pub oracle: PathBuf,
    pub bench_csv: PathBuf,
    pub bench_json: PathBuf,
}

impl ArtifactPaths {
    pub fn new(dir: &Path) -> Self {
        Self {
            beampattern: dir.join("beampattern.csv"),
            selection: dir.join("selection.json"),
            covariance_real: dir.join("covariance_real.csv"),
            covariance_imag: dir.join("covariance_imag.csv"),
            result: dir.join("result.json"),
            crosscorr: dir.join("crosscorr.csv"),
            eval: dir.join("eval.json"),
            oracle: dir.join("oracle.json"),
            bench_csv: dir.join("bench.csv"),
            bench_json: dir.join("bench.json"),
        }
    }
}

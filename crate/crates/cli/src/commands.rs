//! The four batch commands: design, eval, oracle, bench.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use txbeam_core::covariance::solve_covariance;
use txbeam_core::cyclic::design;
use txbeam_core::objective::{
    build_desired_pattern, normalized_cross_correlations, objective_j, objective_j2,
};
use txbeam_core::oracle::oracle_report;
use txbeam_core::selector::{SearchConfig, SearchMode};
use txbeam_core::{Covariance, DesignResult, Selection};

use crate::artifacts::{
    ensure_dir, read_covariance_csv, read_json, read_selection_json, write_beampattern_csv,
    write_bench_csv, write_covariance_csv, write_crosscorr_csv, write_json, write_result_json,
    write_selection_json, ArtifactPaths, BenchArtifact, BenchRow, EvalArtifact, OracleArtifact,
    ResultArtifact,
};
use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Runs the joint design and writes `beampattern.csv`, `selection.json`,
/// `covariance_real.csv`, `covariance_imag.csv` and `result.json`.
pub fn cmd_design(config: &ScenarioConfig) -> Result<DesignResult, CliError> {
    let resolved = config.resolve()?;
    let result =
        design(&resolved.spec, &resolved.solver, &resolved.options).map_err(CliError::compute)?;

    let paths = ArtifactPaths::new(&config.output_dir);
    ensure_dir(&config.output_dir)?;
    let pattern = build_desired_pattern(&resolved.spec);
    write_beampattern_csv(
        &paths.beampattern,
        &resolved.spec,
        &pattern,
        &result.covariance,
        &result.selection,
        result.alpha,
    )?;
    write_selection_json(&paths.selection, &result.selection)?;
    write_covariance_csv(
        &paths.covariance_real,
        &paths.covariance_imag,
        &result.covariance,
    )?;
    write_result_json(&paths.result, &result, config)?;
    Ok(result)
}

/// Input locations for [`cmd_eval`]; unset fields default to the
/// `cmd_design` artifact names inside `design_dir`.
#[derive(Debug, Default, Clone)]
pub struct EvalInputs {
    pub design_dir: Option<PathBuf>,
    pub selection: Option<PathBuf>,
    pub covariance_real: Option<PathBuf>,
    pub covariance_imag: Option<PathBuf>,
    pub alpha: Option<f64>,
}

impl EvalInputs {
    fn locate(&self, name: &str, explicit: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        if let Some(path) = explicit {
            return Ok(path.clone());
        }
        if let Some(dir) = &self.design_dir {
            return Ok(dir.join(name));
        }
        Err(CliError::Validation(format!(
            "no {name} given: pass --design-dir or the explicit file flag"
        )))
    }

    fn alpha(&self) -> Result<f64, CliError> {
        if let Some(alpha) = self.alpha {
            return Ok(alpha);
        }
        if let Some(dir) = &self.design_dir {
            let result: ResultArtifact = read_json(&dir.join("result.json"))?;
            return Ok(result.alpha);
        }
        Err(CliError::Validation(
            "no scaling factor given: pass --alpha or --design-dir".into(),
        ))
    }
}

/// Re-evaluates a stored design without optimizing: writes
/// `beampattern.csv`, `crosscorr.csv` and `eval.json`.
pub fn cmd_eval(config: &ScenarioConfig, inputs: &EvalInputs) -> Result<EvalArtifact, CliError> {
    let resolved = config.resolve()?;
    let spec = &resolved.spec;

    let selection = read_selection_json(&inputs.locate("selection.json", &inputs.selection)?)?;
    let covariance = read_covariance_csv(
        &inputs.locate("covariance_real.csv", &inputs.covariance_real)?,
        &inputs.locate("covariance_imag.csv", &inputs.covariance_imag)?,
        spec.power_budget(),
    )?;
    let alpha = inputs.alpha()?;

    let pattern = build_desired_pattern(spec);
    // Errors here stem from inconsistent input files, not from solving.
    let j = objective_j(spec, &pattern, &selection, &covariance, alpha)
        .map_err(CliError::validation)?;
    let j2 = objective_j2(spec, &pattern, &selection, &covariance, alpha)
        .map_err(CliError::validation)?;
    let cross = normalized_cross_correlations(spec, &covariance, &selection)
        .map_err(CliError::validation)?;

    let paths = ArtifactPaths::new(&config.output_dir);
    ensure_dir(&config.output_dir)?;
    write_beampattern_csv(
        &paths.beampattern,
        spec,
        &pattern,
        &covariance,
        &selection,
        alpha,
    )?;
    write_crosscorr_csv(&paths.crosscorr, &cross)?;
    let artifact = EvalArtifact {
        objective_j: j,
        objective_j2: j2,
        alpha,
        selection_weight: selection.weight(),
        max_normalized_cross_correlation: cross
            .iter()
            .map(|e| e.normalized_magnitude)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v)))),
        config: config.clone(),
    };
    write_json(&paths.eval, &artifact)?;
    Ok(artifact)
}

/// Compares the greedy placement against exhaustive enumeration on the
/// configured instance and writes `oracle.json`. The covariance is taken
/// from one solve against the full array.
pub fn cmd_oracle(config: &ScenarioConfig) -> Result<OracleArtifact, CliError> {
    let resolved = config.resolve()?;
    let spec = &resolved.spec;
    let m = spec.geometry().grid_points();
    let pattern = build_desired_pattern(spec);

    let solved = solve_covariance(
        spec,
        &pattern,
        &Selection::ones(m),
        &resolved.solver,
        &Covariance::uniform(m, spec.power_budget()),
    )
    .map_err(CliError::compute)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let search = SearchConfig {
        mode: SearchMode::Restricted,
        prob_mut: config.prob_mut,
    };
    let report = oracle_report(
        spec,
        &pattern,
        &solved.covariance,
        solved.alpha,
        &search,
        &mut rng,
    )
    .map_err(CliError::compute)?;

    let artifact = OracleArtifact {
        best_selection_bits: report.best_selection.bits().to_vec(),
        best_value: report.best_value,
        evaluated_count: report.evaluated_count,
        greedy_selection_bits: report.greedy_selection.bits().to_vec(),
        greedy_value: report.greedy_value,
        ratio: report.ratio,
        alpha: solved.alpha,
        config: config.clone(),
    };
    let paths = ArtifactPaths::new(&config.output_dir);
    ensure_dir(&config.output_dir)?;
    write_json(&paths.oracle, &artifact)?;
    Ok(artifact)
}

/// Scales the configured base instance by each factor, runs the design,
/// and writes `bench.csv` plus `bench.json` with the evaluation-count
/// scaling exponent.
pub fn cmd_bench(config: &ScenarioConfig, betas: &[usize]) -> Result<BenchArtifact, CliError> {
    if betas.is_empty() {
        return Err(CliError::Validation("no scale factors given".into()));
    }
    if betas.contains(&0) {
        return Err(CliError::Validation(
            "scale factors must be positive".into(),
        ));
    }
    let base_m = config.geometry.grid_points;
    let base_n = config.design.antenna_budget_n;

    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mut scaled = config.clone();
        scaled.geometry.grid_points = base_m * beta;
        scaled.design.antenna_budget_n = base_n * beta;
        // Deterministic per-point seed derived from the root seed.
        scaled.rng_seed = config.rng_seed.wrapping_add(beta as u64);
        let resolved = scaled.resolve()?;
        let started = Instant::now();
        let result = design(&resolved.spec, &resolved.solver, &resolved.options)
            .map_err(CliError::compute)?;
        rows.push(BenchRow {
            beta,
            m: scaled.geometry.grid_points,
            n: scaled.design.antenna_budget_n,
            wall_seconds: started.elapsed().as_secs_f64(),
            outer_iterations: result.outer_iterations,
            inner_evaluations: result.total_fitness_evaluations(),
        });
    }

    let fit_exponent = fit_log_slope(
        &rows.iter().map(|r| r.m as f64).collect::<Vec<_>>(),
        &rows
            .iter()
            .map(|r| r.inner_evaluations as f64)
            .collect::<Vec<_>>(),
    );

    let paths = ArtifactPaths::new(&config.output_dir);
    ensure_dir(&config.output_dir)?;
    write_bench_csv(&paths.bench_csv, &rows)?;
    let artifact = BenchArtifact {
        rows,
        fit_exponent,
        config: config.clone(),
    };
    write_json(&paths.bench_json, &artifact)?;
    Ok(artifact)
}

/// Least-squares slope of ln(y) on ln(x).
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1.0).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Artifact locations for a command's output directory.
pub fn artifact_paths(dir: &Path) -> ArtifactPaths {
    ArtifactPaths::new(dir)
}

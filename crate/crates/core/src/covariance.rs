//! The convex half of the design: for a fixed selection, minimize the cost
//! over the waveform covariance and the pattern scaling factor, subject to
//! the covariance being PSD with a uniform diagonal.
//!
//! The subproblem is solved with block-coordinate descent: the scaling
//! factor has a closed-form least-squares update, and the covariance takes
//! projected-gradient steps with an Armijo backtracking line search. The
//! feasibility projection is Dykstra's alternating scheme between the PSD
//! cone and the fixed-diagonal affine set.

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::array::Selection;
use crate::error::CoreError;
use crate::objective::{DesignSpec, DesiredPattern};
use crate::{CMatrix, CVector, Complex64};

/// Tolerance on `max |R - R^H|` for a covariance to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// A covariance is accepted as PSD when its smallest eigenvalue is above this.
pub const PSD_TOL: f64 = -1e-8;
/// Tolerance on `|R_mm - c/M|` for the uniform elemental power constraint.
pub const DIAG_TOL: f64 = 1e-6;
/// Positivity floor for the closed-form scaling factor.
pub const DEFAULT_ALPHA_FLOOR: f64 = 1e-9;

/// Validated transmit waveform covariance: Hermitian, positive semidefinite
/// and with every diagonal entry equal to `c / M`.
#[derive(Debug, Clone)]
pub struct Covariance {
    matrix: CMatrix,
    power_budget: f64,
}

impl Covariance {
    /// Validates and wraps a matrix. The matrix is stored as given; nothing
    /// is silently repaired.
    pub fn new(matrix: CMatrix, power_budget: f64) -> Result<Self, CoreError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CoreError::DimensionMismatch(format!(
                "covariance must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if power_budget <= 0.0 || !power_budget.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "power budget must be positive, got {power_budget}"
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(CoreError::NotHermitian {
                deviation,
                tol: HERMITIAN_TOL,
            });
        }
        let m = matrix.nrows();
        let target = power_budget / m as f64;
        for i in 0..m {
            let value = matrix[(i, i)].re;
            if (value - target).abs() > DIAG_TOL {
                return Err(CoreError::DiagonalMismatch {
                    index: i,
                    value,
                    expected: target,
                    tol: DIAG_TOL,
                });
            }
        }
        let min_eigenvalue = min_eigenvalue(&matrix);
        if min_eigenvalue < PSD_TOL {
            return Err(CoreError::NotPsd { min_eigenvalue });
        }
        Ok(Self {
            matrix,
            power_budget,
        })
    }

    /// The uniform-power covariance `(c/M) I`, feasible for any grid size.
    pub fn uniform(m: usize, power_budget: f64) -> Self {
        let target = Complex64::new(power_budget / m as f64, 0.0);
        let mut matrix = CMatrix::zeros(m, m);
        for i in 0..m {
            matrix[(i, i)] = target;
        }
        Self {
            matrix,
            power_budget,
        }
    }

    /// A random feasible covariance: a random Hermitian PSD matrix projected
    /// onto the feasible set. Used for Monte-Carlo initialization studies.
    pub fn random_feasible(m: usize, power_budget: f64, rng: &mut impl Rng) -> Self {
        let raw = CMatrix::from_fn(m, m, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psd = &raw * raw.adjoint();
        let projected = project_feasible(&psd, power_budget, 2000, 1e-12)
            .expect("projection of a Hermitian matrix cannot fail");
        Self::new(projected.matrix, power_budget)
            .expect("projected matrix must satisfy the covariance invariants")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// Smallest eigenvalue; useful for feasibility reporting.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

pub(crate) fn hermitize(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()).scale(0.5)
}

pub(crate) fn hermitian_deviation(x: &CMatrix) -> f64 {
    (x - x.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn min_eigenvalue(x: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitize(x))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Nearest PSD matrix in Frobenius norm: eigendecompose and clip negative
/// eigenvalues to zero.
fn project_psd(x: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(hermitize(x));
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let clipped = lambda.max(0.0);
        scaled.column_mut(j).scale_mut(clipped);
    }
    &scaled * eig.eigenvectors.adjoint()
}

fn overwrite_diagonal(x: &mut CMatrix, value: f64) {
    let m = x.nrows();
    for i in 0..m {
        x[(i, i)] = Complex64::new(value, 0.0);
    }
}

/// Result of a feasibility projection.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    /// Last Dykstra iterate (the projection when `converged`).
    pub matrix: CMatrix,
    /// Whether successive iterates met the tolerance before the round limit.
    pub converged: bool,
    /// Number of Dykstra rounds executed.
    pub rounds: usize,
}

/// Projects a Hermitian matrix onto `{PSD} ∩ {diag = c/M}` in Frobenius
/// norm with Dykstra's alternating projections.
///
/// Each round applies the PSD projection then the diagonal overwrite, with
/// the usual correction terms; iteration stops once successive iterates
/// differ by at most `tol` in Frobenius norm, or after `max_rounds`.
pub fn project_feasible(
    x: &CMatrix,
    power_budget: f64,
    max_rounds: usize,
    tol: f64,
) -> Result<ProjectionOutcome, CoreError> {
    if x.nrows() != x.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "projection input must be square, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let deviation = hermitian_deviation(x);
    if deviation > 1e-10 * scale {
        return Err(CoreError::NotHermitian {
            deviation,
            tol: 1e-10 * scale,
        });
    }
    let m = x.nrows();
    let target = power_budget / m as f64;

    let mut current = hermitize(x);
    let mut psd_corr = CMatrix::zeros(m, m);
    let mut diag_corr = CMatrix::zeros(m, m);
    let mut converged = false;
    let mut rounds = 0;

    for round in 1..=max_rounds {
        rounds = round;
        let psd_input = &current + &psd_corr;
        let y = project_psd(&psd_input);
        psd_corr = psd_input - &y;

        let diag_input = &y + &diag_corr;
        let mut next = diag_input.clone();
        overwrite_diagonal(&mut next, target);
        diag_corr = diag_input - &next;

        let step = (&next - &current).norm();
        current = next;
        if step <= tol {
            converged = true;
            break;
        }
    }

    Ok(ProjectionOutcome {
        matrix: current,
        converged,
        rounds,
    })
}

/// Knobs of the projected-gradient covariance solver.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Cap on outer (alpha update + gradient step) iterations.
    pub max_iterations: usize,
    /// Stop once the relative objective decrease of one iteration falls
    /// below this.
    pub rel_tolerance: f64,
    /// Fallback first trial step of the line search.
    pub initial_step: f64,
    /// Multiplicative backtracking factor.
    pub step_shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Round limit of each feasibility projection.
    pub dykstra_max: usize,
    /// Convergence tolerance of each feasibility projection.
    pub dykstra_tol: f64,
    /// Positivity floor for the scaling factor.
    pub alpha_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rel_tolerance: 1e-7,
            initial_step: 1.0,
            step_shrink: 0.5,
            sufficient_decrease: 1e-4,
            dykstra_max: 200,
            dykstra_tol: 1e-10,
            alpha_floor: DEFAULT_ALPHA_FLOOR,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), CoreError> {
        let positives = [
            ("rel_tolerance", self.rel_tolerance),
            ("initial_step", self.initial_step),
            ("step_shrink", self.step_shrink),
            ("sufficient_decrease", self.sufficient_decrease),
            ("dykstra_tol", self.dykstra_tol),
            ("alpha_floor", self.alpha_floor),
        ];
        for (name, value) in positives {
            if value <= 0.0 || !value.is_finite() {
                return Err(CoreError::InvalidSpec(format!(
                    "solver setting {name} must be positive, got {value}"
                )));
            }
        }
        if self.max_iterations == 0 || self.dykstra_max == 0 {
            return Err(CoreError::InvalidSpec(
                "solver iteration limits must be positive".into(),
            ));
        }
        if self.step_shrink >= 1.0 {
            return Err(CoreError::InvalidSpec(format!(
                "step_shrink must be below 1, got {}",
                self.step_shrink
            )));
        }
        Ok(())
    }
}

/// Masked steering data for a fixed selection; everything the solver
/// repeatedly evaluates is a quadratic form in these vectors.
struct SolveWorkspace<'a> {
    spec: &'a DesignSpec,
    pattern: &'a DesiredPattern,
    masked_grid: Vec<CVector>,
    masked_targets: Vec<CVector>,
    pairs: Vec<(usize, usize)>,
}

struct Residuals {
    /// Pattern residuals `P(θ_k) - α φ(θ_k)` per grid angle.
    errors: Vec<f64>,
    /// Cross-correlation values per target pair.
    crosses: Vec<f64>,
    objective: f64,
}

impl<'a> SolveWorkspace<'a> {
    fn new(
        spec: &'a DesignSpec,
        pattern: &'a DesiredPattern,
        p: &Selection,
    ) -> Result<Self, CoreError> {
        let geom = spec.geometry();
        if p.len() != geom.grid_points() {
            return Err(CoreError::DimensionMismatch(format!(
                "selection has length {} but the grid has {} points",
                p.len(),
                geom.grid_points()
            )));
        }
        if pattern.len() != geom.angle_count() {
            return Err(CoreError::DimensionMismatch(format!(
                "pattern has {} values for {} grid angles",
                pattern.len(),
                geom.angle_count()
            )));
        }
        let masked_grid = (0..geom.angle_count())
            .map(|k| p.mask(geom.steering_at(k)))
            .collect();
        let masked_targets = spec
            .target_indices()
            .iter()
            .map(|&k| p.mask(geom.steering_at(k)))
            .collect();
        Ok(Self {
            spec,
            pattern,
            masked_grid,
            masked_targets,
            pairs: if spec.cross_coefficient() > 0.0 {
                spec.target_pairs()
            } else {
                Vec::new()
            },
        })
    }

    fn residuals(&self, x: &CMatrix, alpha: f64) -> Residuals {
        let k_angles = self.masked_grid.len();
        let weights = self.spec.weights();
        let mut matching = 0.0;
        let mut errors = Vec::with_capacity(k_angles);
        for (k, v) in self.masked_grid.iter().enumerate() {
            let power = v.dotc(&(x * v)).re;
            let error = power - alpha * self.pattern.value(k);
            errors.push(error);
            matching += weights[k] * error * error;
        }
        matching /= k_angles as f64;

        let coef = self.spec.cross_coefficient();
        let mut crosses = Vec::with_capacity(self.pairs.len());
        let mut cross_sum = 0.0;
        for &(s, t) in &self.pairs {
            let value = self.masked_targets[s]
                .dotc(&(x * &self.masked_targets[t]))
                .re;
            crosses.push(value);
            cross_sum += value * value;
        }
        Residuals {
            errors,
            crosses,
            objective: matching + coef * cross_sum,
        }
    }

    fn objective(&self, x: &CMatrix, alpha: f64) -> f64 {
        self.residuals(x, alpha).objective
    }

    /// Closed-form least-squares minimizer of the cost over the scaling
    /// factor, clamped to the positivity floor.
    fn optimal_alpha(&self, x: &CMatrix, floor: f64) -> Result<f64, CoreError> {
        let weights = self.spec.weights();
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for (k, v) in self.masked_grid.iter().enumerate() {
            let phi = self.pattern.value(k);
            if phi == 0.0 || weights[k] == 0.0 {
                continue;
            }
            let power = v.dotc(&(x * v)).re;
            numerator += weights[k] * phi * power;
            denominator += weights[k] * phi * phi;
        }
        if denominator <= 0.0 {
            return Err(CoreError::DegeneratePattern);
        }
        Ok((numerator / denominator).max(floor))
    }

    /// Gradient of the cost with respect to the covariance, as a Hermitian
    /// matrix under the real Frobenius inner product.
    fn gradient(&self, res: &Residuals) -> CMatrix {
        let m = self.spec.geometry().grid_points();
        let k_angles = self.masked_grid.len() as f64;
        let weights = self.spec.weights();
        let mut grad = CMatrix::zeros(m, m);
        let one = Complex64::new(1.0, 0.0);
        for (k, v) in self.masked_grid.iter().enumerate() {
            let coeff = 2.0 / k_angles * weights[k] * res.errors[k];
            if coeff != 0.0 {
                grad.gerc(Complex64::new(coeff, 0.0), v, v, one);
            }
        }
        let coef = self.spec.cross_coefficient();
        for (i, &(s, t)) in self.pairs.iter().enumerate() {
            let coeff = Complex64::new(coef * 2.0 * res.crosses[i] * 0.5, 0.0);
            if coeff.re != 0.0 {
                grad.gerc(coeff, &self.masked_targets[t], &self.masked_targets[s], one);
                grad.gerc(coeff, &self.masked_targets[s], &self.masked_targets[t], one);
            }
        }
        hermitize(&grad)
    }

    /// Coefficients `(a, b)` of the exact quadratic
    /// `J(x + t d) = J(x) + b t + a t²` along a Hermitian direction `d`.
    fn directional_quadratic(&self, res: &Residuals, d: &CMatrix) -> (f64, f64) {
        let k_angles = self.masked_grid.len() as f64;
        let weights = self.spec.weights();
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, v) in self.masked_grid.iter().enumerate() {
            let slope = v.dotc(&(d * v)).re;
            a += weights[k] * slope * slope;
            b += weights[k] * res.errors[k] * slope;
        }
        a /= k_angles;
        b *= 2.0 / k_angles;

        let coef = self.spec.cross_coefficient();
        if coef > 0.0 {
            for (i, &(s, t)) in self.pairs.iter().enumerate() {
                let slope = self.masked_targets[s]
                    .dotc(&(d * &self.masked_targets[t]))
                    .re;
                a += coef * slope * slope;
                b += coef * 2.0 * res.crosses[i] * slope;
            }
        }
        (a, b)
    }
}

/// Real Frobenius inner product of two Hermitian matrices.
fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// The cost evaluated against a raw Hermitian matrix that need not satisfy
/// the feasibility invariants. Used by line searches and by independent
/// finite-difference checks.
pub fn objective_j_matrix(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    x: &CMatrix,
    alpha: f64,
) -> Result<f64, CoreError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(CoreError::NonPositiveAlpha(alpha));
    }
    if x.nrows() != x.ncols() || x.nrows() != spec.geometry().grid_points() {
        return Err(CoreError::DimensionMismatch(format!(
            "matrix is {}x{} but the grid has {} points",
            x.nrows(),
            x.ncols(),
            spec.geometry().grid_points()
        )));
    }
    let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let deviation = hermitian_deviation(x);
    if deviation > 1e-10 * scale {
        return Err(CoreError::NotHermitian {
            deviation,
            tol: 1e-10 * scale,
        });
    }
    let ws = SolveWorkspace::new(spec, pattern, p)?;
    Ok(ws.objective(x, alpha))
}

/// Closed-form optimal scaling factor for fixed covariance and selection:
/// `max(ε, Σ w_k φ_k P(θ_k) / Σ w_k φ_k²)`.
pub fn optimal_alpha(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
) -> Result<f64, CoreError> {
    let ws = SolveWorkspace::new(spec, pattern, p)?;
    ws.optimal_alpha(r.matrix(), DEFAULT_ALPHA_FLOOR)
}

/// Hermitian gradient of the cost with respect to the covariance at
/// `(R, α)`, for a fixed selection.
pub fn gradient_j_wrt_r(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
    alpha: f64,
) -> Result<CMatrix, CoreError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(CoreError::NonPositiveAlpha(alpha));
    }
    let ws = SolveWorkspace::new(spec, pattern, p)?;
    let res = ws.residuals(r.matrix(), alpha);
    Ok(ws.gradient(&res))
}

/// Output of [`solve_covariance`].
#[derive(Debug, Clone)]
pub struct CovarianceSolution {
    pub covariance: Covariance,
    pub alpha: f64,
    /// Objective values: the initial cost after the first alpha fit, then
    /// one value per iteration. Non-increasing by construction.
    pub trace: Vec<f64>,
    /// Gradient iterations executed.
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl CovarianceSolution {
    pub fn final_objective(&self) -> f64 {
        *self.trace.last().expect("trace is never empty")
    }
}

/// Solves the fixed-selection subproblem: minimize the cost over `(R, α)`
/// with `R` PSD, uniform-diagonal, and `α > 0`.
///
/// Alternates the closed-form alpha update with one projected-gradient step
/// per iteration. The first line-search trial is the exact minimizer of the
/// (quadratic) cost along the unprojected ray, then Armijo backtracking
/// applies on projected candidates.
pub fn solve_covariance(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    settings: &SolverSettings,
    r_init: &Covariance,
) -> Result<CovarianceSolution, CoreError> {
    settings.validate()?;
    let m = spec.geometry().grid_points();
    if r_init.dim() != m {
        return Err(CoreError::DimensionMismatch(format!(
            "initial covariance is {}x{} but the grid has {} points",
            r_init.dim(),
            r_init.dim(),
            m
        )));
    }
    let budget = spec.power_budget();
    if (r_init.power_budget() - budget).abs() > 1e-12 * budget.max(1.0) {
        return Err(CoreError::DimensionMismatch(format!(
            "initial covariance carries power budget {} but the scenario requires {}",
            r_init.power_budget(),
            budget
        )));
    }

    let ws = SolveWorkspace::new(spec, pattern, p)?;
    let mut x = r_init.matrix().clone();
    let mut alpha = ws.optimal_alpha(&x, settings.alpha_floor)?;
    let mut objective = ws.objective(&x, alpha);
    let mut trace = vec![objective];
    let mut warnings = Vec::new();
    let mut projection_misses = 0usize;
    let mut iterations = 0usize;

    for _ in 0..settings.max_iterations {
        iterations += 1;
        alpha = ws.optimal_alpha(&x, settings.alpha_floor)?;
        let res = ws.residuals(&x, alpha);
        let grad = ws.gradient(&res);
        let grad_norm_sq = frobenius_inner(&grad, &grad);
        if grad_norm_sq <= 1e-30 {
            // Unconstrained stationary point; nothing left to do.
            objective = res.objective;
            trace.push(objective);
            break;
        }

        // Exact step along -grad for the unprojected quadratic.
        let direction = grad.map(|z| -z);
        let (quad_a, quad_b) = ws.directional_quadratic(&res, &direction);
        let mut step = if quad_a > 1e-300 && quad_b < 0.0 {
            (-quad_b / (2.0 * quad_a)).min(1e12)
        } else {
            settings.initial_step
        };

        let mut accepted: Option<(CMatrix, f64)> = None;
        let mut last_delta = f64::NEG_INFINITY;
        for _ in 0..60 {
            let trial = &x + direction.scale(step);
            let projected =
                project_feasible(&trial, budget, settings.dykstra_max, settings.dykstra_tol)?;
            if !projected.converged {
                projection_misses += 1;
            }
            let delta = frobenius_inner(&grad, &(&projected.matrix - &x));
            last_delta = delta;
            let trial_objective = ws.objective(&projected.matrix, alpha);
            if delta < 0.0
                && trial_objective <= res.objective + settings.sufficient_decrease * delta
            {
                accepted = Some((projected.matrix, trial_objective));
                break;
            }
            step *= settings.step_shrink;
        }

        let previous = *trace.last().expect("trace is never empty");
        match accepted {
            Some((matrix, value)) => {
                x = matrix;
                objective = value;
                trace.push(objective);
            }
            None => {
                // No feasible descent along the gradient: constrained
                // stationarity. A positive delta at the smallest step means
                // the projection arc points uphill, which is the expected
                // signature; anything else is worth surfacing.
                objective = res.objective;
                trace.push(objective);
                if last_delta < 0.0 {
                    warnings.push(format!(
                        "line search exhausted its backtracking budget at iteration {iterations}"
                    ));
                }
                break;
            }
        }

        if previous - objective <= settings.rel_tolerance * previous.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    // Final closed-form alpha refresh so the reported pair is block-optimal.
    alpha = ws.optimal_alpha(&x, settings.alpha_floor)?;
    let final_objective = ws.objective(&x, alpha);
    if final_objective < *trace.last().expect("trace is never empty") {
        trace.push(final_objective);
    }

    if projection_misses > 0 {
        warnings.push(format!(
            "{projection_misses} feasibility projections stopped at the round limit"
        ));
    }

    let covariance = Covariance::new(hermitize(&x), budget)?;
    Ok(CovarianceSolution {
        covariance,
        alpha,
        trace,
        iterations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use crate::objective::{build_desired_pattern, DesignSpec};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn geom(m: usize) -> ArrayGeometry {
        ArrayGeometry::with_default_grid(m, 0.5, 1.0).unwrap()
    }

    fn random_hermitian(m: usize, seed: u64, scale: f64) -> CMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let raw = CMatrix::from_fn(m, m, |_, _| {
            Complex64::new(
                (rng.random::<f64>() - 0.5) * scale,
                (rng.random::<f64>() - 0.5) * scale,
            )
        });
        hermitize(&raw)
    }

    fn random_feasible(m: usize, c: f64, seed: u64) -> Covariance {
        let mut rng = StdRng::seed_from_u64(seed);
        Covariance::random_feasible(m, c, &mut rng)
    }

    #[test]
    fn uniform_covariance_is_feasible() {
        let r = Covariance::uniform(6, 1.0);
        assert_eq!(r.dim(), 6);
        assert!(Covariance::new(r.matrix().clone(), 1.0).is_ok());
    }

    #[test]
    fn covariance_validation_catches_violations() {
        // Non-Hermitian.
        let mut bad = Covariance::uniform(3, 1.0).matrix().clone();
        bad[(0, 1)] = Complex64::new(0.2, 0.1);
        assert!(matches!(
            Covariance::new(bad, 1.0),
            Err(CoreError::NotHermitian { .. })
        ));

        // Wrong diagonal.
        let mut wrong_diag = Covariance::uniform(3, 1.0).matrix().clone();
        wrong_diag[(1, 1)] = Complex64::new(0.4, 0.0);
        assert!(matches!(
            Covariance::new(wrong_diag, 1.0),
            Err(CoreError::DiagonalMismatch { index: 1, .. })
        ));

        // Indefinite: off-diagonal coupling larger than the diagonal.
        let mut indefinite = Covariance::uniform(2, 1.0).matrix().clone();
        indefinite[(0, 1)] = Complex64::new(0.9, 0.0);
        indefinite[(1, 0)] = Complex64::new(0.9, 0.0);
        assert!(matches!(
            Covariance::new(indefinite, 1.0),
            Err(CoreError::NotPsd { .. })
        ));
    }

    #[test]
    fn projection_is_a_fixed_point_on_feasible_input() {
        let r = random_feasible(4, 1.0, 5);
        let out = project_feasible(r.matrix(), 1.0, 200, 1e-10).unwrap();
        assert!(out.converged);
        assert!((r.matrix() - &out.matrix).norm() <= 1e-10);
    }

    #[test]
    fn projection_of_indefinite_diagonal_matrix() {
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 0)] = Complex64::new(1.0, 0.0);
        x[(1, 1)] = Complex64::new(-1.0, 0.0);
        let out = project_feasible(&x, 1.0, 200, 1e-10).unwrap();
        assert!(out.converged);
        assert_abs_diff_eq!(out.matrix[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert!(out.matrix[(0, 1)].norm() <= 1e-12);
        let min_eig = SymmetricEigen::new(out.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-12);
    }

    #[test]
    fn projection_self_consistency_at_tightened_tolerance() {
        let x = random_hermitian(4, 77, 2.0);
        let loose = project_feasible(&x, 1.0, 200, 1e-10).unwrap();
        let tight = project_feasible(&x, 1.0, 2000, 1e-11).unwrap();
        assert!(loose.converged && tight.converged);
        assert!((&loose.matrix - &tight.matrix).norm() <= 1e-7);
        // Output is feasible.
        let c = Covariance::new(loose.matrix.clone(), 1.0).unwrap();
        assert!(c.min_eigenvalue() >= PSD_TOL);
    }

    #[test]
    fn projection_is_idempotent() {
        let x = random_hermitian(5, 13, 3.0);
        let once = project_feasible(&x, 1.0, 500, 1e-11).unwrap();
        let twice = project_feasible(&once.matrix, 1.0, 500, 1e-11).unwrap();
        assert!((&once.matrix - &twice.matrix).norm() <= 1e-9);
    }

    #[test]
    fn projection_rejects_non_hermitian_input() {
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            project_feasible(&x, 1.0, 100, 1e-10),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    fn spec_with(m: usize, targets: Vec<f64>, omega_c: f64) -> DesignSpec {
        DesignSpec::builder(geom(m))
            .targets_deg(targets)
            .beamwidth_deg(20.0)
            .cross_weight(omega_c)
            .build()
            .unwrap()
    }

    #[test]
    fn optimal_alpha_fits_exactly_scaled_patterns() {
        // Identity covariance with the full selection radiates P ≡ 1; if the
        // pattern is 1 on some angles, the least-squares alpha is that power.
        let spec = spec_with(4, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(4, 2.0);
        let p = Selection::ones(4);
        // P(θ) = (c/M)·M = 2 everywhere.
        let alpha = optimal_alpha(&spec, &pattern, &p, &r).unwrap();
        assert_abs_diff_eq!(alpha, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn optimal_alpha_clamps_at_floor_for_zero_power() {
        let spec = spec_with(4, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(4, 1.0);
        let p = Selection::zeros(4);
        let alpha = optimal_alpha(&spec, &pattern, &p, &r).unwrap();
        assert_abs_diff_eq!(alpha, DEFAULT_ALPHA_FLOOR, epsilon = 1e-18);
    }

    #[test]
    fn optimal_alpha_rejects_empty_pattern() {
        let spec = DesignSpec::builder(geom(4)).build().unwrap();
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(4, 1.0);
        let p = Selection::ones(4);
        assert!(matches!(
            optimal_alpha(&spec, &pattern, &p, &r),
            Err(CoreError::DegeneratePattern)
        ));
    }

    #[test]
    fn optimal_alpha_matches_golden_section_search() {
        let spec = spec_with(5, vec![-20.0, 30.0], 1.0);
        let pattern = build_desired_pattern(&spec);
        let r = random_feasible(5, 1.0, 42);
        let p = Selection::from_bits(vec![1, 0, 1, 1, 1]).unwrap();
        let alpha = optimal_alpha(&spec, &pattern, &p, &r).unwrap();

        // Golden-section minimization of J over alpha.
        let j_of = |a: f64| crate::objective::objective_j(&spec, &pattern, &p, &r, a).unwrap();
        let (mut lo, mut hi) = (1e-9, 10.0);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (hi - ratio * (hi - lo), lo + ratio * (hi - lo));
        let (mut f1, mut f2) = (j_of(x1), j_of(x2));
        while hi - lo > 1e-9 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = j_of(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = j_of(x2);
            }
        }
        let golden = 0.5 * (lo + hi);
        assert_abs_diff_eq!(alpha, golden, epsilon = 1e-6);
    }

    #[test]
    fn optimal_alpha_is_the_global_minimizer() {
        let spec = spec_with(4, vec![10.0], 1.0);
        let pattern = build_desired_pattern(&spec);
        let r = random_feasible(4, 1.0, 7);
        let p = Selection::from_bits(vec![1, 1, 0, 1]).unwrap();
        let best = optimal_alpha(&spec, &pattern, &p, &r).unwrap();
        let j_best = crate::objective::objective_j(&spec, &pattern, &p, &r, best).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let alpha = 1e-9 + rng.random::<f64>() * 5.0;
            let j = crate::objective::objective_j(&spec, &pattern, &p, &r, alpha).unwrap();
            assert!(j_best <= j + 1e-12, "alpha {alpha} beat the closed form");
        }
    }

    /// Central-difference gradient of the cost in the real parametrization
    /// of Hermitian matrices.
    fn numerical_gradient(
        spec: &DesignSpec,
        pattern: &DesiredPattern,
        p: &Selection,
        x: &CMatrix,
        alpha: f64,
        h: f64,
    ) -> CMatrix {
        let m = x.nrows();
        let j_at = |mat: &CMatrix| objective_j_matrix(spec, pattern, p, mat, alpha).unwrap();
        let mut grad = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                if i == j {
                    let mut plus = x.clone();
                    plus[(i, i)] += Complex64::new(h, 0.0);
                    let mut minus = x.clone();
                    minus[(i, i)] -= Complex64::new(h, 0.0);
                    let d = (j_at(&plus) - j_at(&minus)) / (2.0 * h);
                    grad[(i, i)] = Complex64::new(d, 0.0);
                } else {
                    let mut re_plus = x.clone();
                    re_plus[(i, j)] += Complex64::new(h, 0.0);
                    re_plus[(j, i)] += Complex64::new(h, 0.0);
                    let mut re_minus = x.clone();
                    re_minus[(i, j)] -= Complex64::new(h, 0.0);
                    re_minus[(j, i)] -= Complex64::new(h, 0.0);
                    let d_re = (j_at(&re_plus) - j_at(&re_minus)) / (2.0 * h);

                    let mut im_plus = x.clone();
                    im_plus[(i, j)] += Complex64::new(0.0, h);
                    im_plus[(j, i)] -= Complex64::new(0.0, h);
                    let mut im_minus = x.clone();
                    im_minus[(i, j)] -= Complex64::new(0.0, h);
                    im_minus[(j, i)] += Complex64::new(0.0, h);
                    let d_im = (j_at(&im_plus) - j_at(&im_minus)) / (2.0 * h);

                    // d/dRe = 2 Re(G_ij), d/dIm = 2 Im(G_ij).
                    grad[(i, j)] = Complex64::new(d_re / 2.0, d_im / 2.0);
                    grad[(j, i)] = grad[(i, j)].conj();
                }
            }
        }
        grad
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let cases = [
            (3usize, vec![-30.0, 40.0], 1.0, 11u64),
            (4, vec![0.0], 0.0, 22),
            (4, vec![-50.0, 0.0, 50.0], 1.0, 33),
            (5, vec![-10.0, 25.0], 1.0, 44),
            (5, vec![60.0], 0.0, 55),
        ];
        for (m, targets, omega_c, seed) in cases {
            let spec = spec_with(m, targets, omega_c);
            let pattern = build_desired_pattern(&spec);
            let r = random_feasible(m, 1.0, seed);
            let p = Selection::ones(m);
            let alpha = 0.8;
            let analytic = gradient_j_wrt_r(&spec, &pattern, &p, &r, alpha).unwrap();
            let numeric = numerical_gradient(&spec, &pattern, &p, r.matrix(), alpha, 1e-5);
            let scale = numeric.iter().map(|z| z.norm()).fold(1e-12, f64::max);
            for (a, n) in analytic.iter().zip(numeric.iter()) {
                assert!(
                    (a - n).norm() / scale < 1e-5,
                    "gradient mismatch: analytic {a}, numeric {n} (m={m}, seed={seed})"
                );
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        // Flat pattern, full selection, identity covariance: residuals are
        // zero with the matched alpha, so the gradient must vanish.
        let g = geom(4);
        let spec = DesignSpec::builder(g)
            .targets_deg(vec![0.0])
            .beamwidth_deg(400.0)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(4, 1.0);
        let p = Selection::ones(4);
        let grad = gradient_j_wrt_r(&spec, &pattern, &p, &r, 1.0).unwrap();
        assert!(grad.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gradient_without_cross_weight_ignores_targets() {
        let r = random_feasible(4, 1.0, 9);
        let p = Selection::ones(4);
        let spec_a = spec_with(4, vec![-40.0, 10.0], 0.0);
        let spec_b = spec_with(4, vec![5.0, 70.0], 0.0);
        // Same desired pattern is required for identical first terms, so use
        // an all-zero pattern by evaluating with disjoint targets but the
        // same (empty) lobes: compare via a shared flat pattern instead.
        let pattern = build_desired_pattern(&spec_with(4, vec![0.0], 0.0));
        let ga = gradient_j_wrt_r(&spec_a, &pattern, &p, &r, 1.0).unwrap();
        let gb = gradient_j_wrt_r(&spec_b, &pattern, &p, &r, 1.0).unwrap();
        assert!((ga - gb).norm() < 1e-14);
    }

    #[test]
    fn solver_reaches_zero_on_flat_patterns() {
        let g = geom(6);
        let spec = DesignSpec::builder(g)
            .targets_deg(vec![0.0])
            .beamwidth_deg(400.0)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        let p = Selection::ones(6);
        let settings = SolverSettings::default();
        let init = Covariance::uniform(6, 1.0);
        let sol = solve_covariance(&spec, &pattern, &p, &settings, &init).unwrap();
        assert!(sol.final_objective() <= 1e-6);
    }

    #[test]
    fn solver_trace_is_monotone_and_feasible() {
        let spec = spec_with(5, vec![-30.0, 20.0], 1.0);
        let pattern = build_desired_pattern(&spec);
        let p = Selection::from_bits(vec![1, 1, 0, 1, 1]).unwrap();
        let settings = SolverSettings::default();
        let init = Covariance::uniform(5, 1.0);
        let sol = solve_covariance(&spec, &pattern, &p, &settings, &init).unwrap();
        for w in sol.trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "trace increased: {} -> {}",
                w[0],
                w[1]
            );
        }
        let c = &sol.covariance;
        assert!(c.min_eigenvalue() >= PSD_TOL);
        assert!(hermitian_deviation(c.matrix()) <= HERMITIAN_TOL);
        let target = spec.power_budget() / 5.0;
        for i in 0..5 {
            assert!((c.matrix()[(i, i)].re - target).abs() <= DIAG_TOL);
        }
        assert!(sol.alpha > 0.0);
    }

    #[test]
    fn solver_matches_tightened_run() {
        let spec = spec_with(4, vec![15.0], 0.0);
        let pattern = build_desired_pattern(&spec);
        let p = Selection::from_bits(vec![1, 1, 1, 0]).unwrap();
        let init = Covariance::uniform(4, 1.0);

        let normal =
            solve_covariance(&spec, &pattern, &p, &SolverSettings::default(), &init).unwrap();
        let tight = solve_covariance(
            &spec,
            &pattern,
            &p,
            &SolverSettings {
                max_iterations: 20_000,
                rel_tolerance: 1e-8,
                ..SolverSettings::default()
            },
            &init,
        )
        .unwrap();
        assert!(
            (normal.final_objective() - tight.final_objective()).abs() <= 1e-4,
            "normal {} vs tightened {}",
            normal.final_objective(),
            tight.final_objective()
        );
    }

    #[test]
    fn solver_rejects_mismatched_budget() {
        let spec = spec_with(4, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&spec);
        let p = Selection::ones(4);
        let init = Covariance::uniform(4, 2.0);
        assert!(solve_covariance(&spec, &pattern, &p, &SolverSettings::default(), &init).is_err());
    }
}

//! Independent brute-force references for tests and acceptance checks:
//! exhaustive enumeration of the selection subproblem and a termwise
//! recomputation of the cost with no precomputation shared with the main
//! evaluation paths.

use std::f64::consts::PI;

use rand::Rng;

use crate::array::Selection;
use crate::covariance::Covariance;
use crate::error::CoreError;
use crate::objective::{DesignSpec, DesiredPattern};
use crate::selector::{select_antennas, SearchConfig};
use crate::Complex64;

/// Refuse exhaustive enumeration beyond this many candidates.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// `C(m, n)` with saturation; the guard comparison handles the overflow.
fn binomial(m: usize, n: usize) -> u128 {
    let n = n.min(m - n.min(m));
    let mut result: u128 = 1;
    for i in 0..n {
        result = result.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    result
}

/// Exact minimizer of the selection subproblem by enumeration.
#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    pub best_selection: Selection,
    pub best_value: f64,
    pub evaluated_count: u64,
}

/// Side-by-side comparison of the exhaustive optimum and the greedy search.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub best_selection: Selection,
    pub best_value: f64,
    pub evaluated_count: u64,
    pub greedy_selection: Selection,
    pub greedy_value: f64,
    /// `greedy_value / best_value` when the optimum is positive.
    pub ratio: Option<f64>,
}

/// Steering entry computed from scratch; deliberately independent of the
/// cached geometry tables.
fn naive_steering_entry(spacing: f64, index: usize, theta_deg: f64) -> Complex64 {
    let phase = 2.0 * PI * spacing * index as f64 * theta_deg.to_radians().sin();
    Complex64::new(phase.cos(), phase.sin())
}

/// `p^T (R ⊙ (a(θ) a(θ̄)^H)*) p` by explicit double summation.
fn naive_bilinear(
    spacing: f64,
    r: &Covariance,
    p: &Selection,
    theta_deg: f64,
    theta_bar_deg: f64,
) -> Complex64 {
    let m = p.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for row in 0..m {
        if !p.is_active(row) {
            continue;
        }
        let a_row = naive_steering_entry(spacing, row, theta_deg);
        for col in 0..m {
            if !p.is_active(col) {
                continue;
            }
            let a_col = naive_steering_entry(spacing, col, theta_bar_deg);
            acc += r.matrix()[(row, col)] * (a_row * a_col.conj()).conj();
        }
    }
    acc
}

/// The two summands of the cost, recomputed termwise with naive loops.
/// Their sum equals the cost itself up to roundoff.
pub fn objective_termwise(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
    alpha: f64,
) -> Result<(f64, f64), CoreError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(CoreError::NonPositiveAlpha(alpha));
    }
    let geom = spec.geometry();
    if p.len() != geom.grid_points() || r.dim() != geom.grid_points() {
        return Err(CoreError::DimensionMismatch(format!(
            "selection {} / covariance {} against grid size {}",
            p.len(),
            r.dim(),
            geom.grid_points()
        )));
    }
    let spacing = geom.spacing_wavelengths();
    let angles = geom.angle_grid_deg();

    let mut matching = 0.0;
    for (k, &theta) in angles.iter().enumerate() {
        let power = naive_bilinear(spacing, r, p, theta, theta).re;
        let residual = power - alpha * pattern.value(k);
        matching += spec.weights()[k] * residual * residual;
    }
    matching /= angles.len() as f64;

    let snapped = spec.snapped_targets_deg();
    let k_targets = snapped.len();
    let mut cross = 0.0;
    if k_targets >= 2 && spec.cross_weight() > 0.0 {
        for s in 0..k_targets {
            for t in (s + 1)..k_targets {
                let value = naive_bilinear(spacing, r, p, snapped[s], snapped[t]).re;
                cross += value * value;
            }
        }
        cross *= 2.0 * spec.cross_weight() / (k_targets * (k_targets - 1)) as f64;
    }
    Ok((matching, cross))
}

fn recurse_combinations(
    m: usize,
    n: usize,
    start: usize,
    scratch: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if scratch.len() == n {
        visit(scratch);
        return;
    }
    let remaining = n - scratch.len();
    for i in start..=(m - remaining) {
        scratch.push(i);
        recurse_combinations(m, n, i + 1, scratch, visit);
        scratch.pop();
    }
}

/// Enumerates every selection with exactly `n` active bits, evaluates the
/// cost termwise, and returns the exact argmin; ties resolve to the
/// lexicographically smallest bit vector.
pub fn exhaustive_selection(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    r: &Covariance,
    alpha: f64,
    n: usize,
) -> Result<ExhaustiveResult, CoreError> {
    let m = spec.geometry().grid_points();
    if n == 0 || n > m {
        return Err(CoreError::InvalidSpec(format!(
            "enumeration budget must lie in 1..={m}, got {n}"
        )));
    }
    let count = binomial(m, n);
    if count > ENUMERATION_GUARD {
        return Err(CoreError::EnumerationGuard {
            m,
            n,
            count,
            limit: ENUMERATION_GUARD,
        });
    }

    let mut best: Option<(Selection, f64)> = None;
    let mut evaluated = 0u64;
    let mut scratch = Vec::with_capacity(n);
    let mut error: Option<CoreError> = None;
    recurse_combinations(m, n, 0, &mut scratch, &mut |active| {
        if error.is_some() {
            return;
        }
        let candidate =
            Selection::from_active_indices(m, active).expect("combination indices are in range");
        match objective_termwise(spec, pattern, &candidate, r, alpha) {
            Ok((matching, cross)) => {
                evaluated += 1;
                let value = matching + cross;
                let better = match &best {
                    None => true,
                    Some((best_sel, best_val)) => {
                        value < *best_val || (value == *best_val && candidate < *best_sel)
                    }
                };
                if better {
                    best = Some((candidate, value));
                }
            }
            Err(e) => error = Some(e),
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    let (best_selection, best_value) = best.expect("enumeration is never empty");
    Ok(ExhaustiveResult {
        best_selection,
        best_value,
        evaluated_count: evaluated,
    })
}

/// Runs the exhaustive enumeration and the greedy search on the same
/// instance and reports both, with the quality ratio.
pub fn oracle_report(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    r: &Covariance,
    alpha: f64,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<OracleReport, CoreError> {
    let exhaustive = exhaustive_selection(spec, pattern, r, alpha, spec.antenna_budget())?;
    let greedy = select_antennas(spec, pattern, r, alpha, config, rng)?;
    // Evaluate the greedy winner through the same termwise route so the
    // two values are directly comparable.
    let (matching, cross) = objective_termwise(spec, pattern, &greedy.selection, r, alpha)?;
    let greedy_value = matching + cross;
    let ratio = (exhaustive.best_value > 0.0).then(|| greedy_value / exhaustive.best_value);
    Ok(OracleReport {
        best_selection: exhaustive.best_selection,
        best_value: exhaustive.best_value,
        evaluated_count: exhaustive.evaluated_count,
        greedy_selection: greedy.selection,
        greedy_value,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use crate::objective::{build_desired_pattern, objective_j, DesignSpec};
    use crate::selector::SearchMode;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn spec(m: usize, n: usize, targets: Vec<f64>, omega_c: f64) -> DesignSpec {
        let geom = ArrayGeometry::with_default_grid(m, 0.5, 1.0).unwrap();
        DesignSpec::builder(geom)
            .targets_deg(targets)
            .beamwidth_deg(20.0)
            .cross_weight(omega_c)
            .antenna_budget(n)
            .build()
            .unwrap()
    }

    fn random_feasible(m: usize, seed: u64) -> Covariance {
        let mut rng = StdRng::seed_from_u64(seed);
        Covariance::random_feasible(m, 1.0, &mut rng)
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(6, 6), 1);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn termwise_sum_equals_the_objective() {
        for seed in 0..50u64 {
            let m = 3 + (seed % 4) as usize; // 3..=6
            let s = spec(
                m,
                m.min(3),
                vec![-35.0, 10.0],
                if seed % 2 == 0 { 1.0 } else { 0.0 },
            );
            let pattern = build_desired_pattern(&s);
            let r = random_feasible(m, 100 + seed);
            let mut rng = StdRng::seed_from_u64(seed);
            let bits: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1u8)).collect();
            let p = Selection::from_bits(bits).unwrap();
            let alpha = 0.3 + 0.1 * (seed % 7) as f64;
            let (matching, cross) = objective_termwise(&s, &pattern, &p, &r, alpha).unwrap();
            let j = objective_j(&s, &pattern, &p, &r, alpha).unwrap();
            let scale = j.abs().max(1.0);
            assert!(
                ((matching + cross) - j).abs() <= 1e-10 * scale,
                "termwise {} vs objective {} (seed {seed})",
                matching + cross,
                j
            );
        }
    }

    #[test]
    fn cross_term_vanishes_without_weight_or_pairs() {
        let s = spec(4, 2, vec![-35.0, 10.0], 0.0);
        let pattern = build_desired_pattern(&s);
        let r = random_feasible(4, 3);
        let p = Selection::ones(4);
        let (_, cross) = objective_termwise(&s, &pattern, &p, &r, 1.0).unwrap();
        assert_eq!(cross, 0.0);

        let single = spec(4, 2, vec![10.0], 1.0);
        let pattern = build_desired_pattern(&single);
        let (_, cross) = objective_termwise(&single, &pattern, &p, &r, 1.0).unwrap();
        assert_eq!(cross, 0.0);
    }

    #[test]
    fn identity_covariance_ties_resolve_lexicographically() {
        let s = spec(5, 2, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&s);
        let r = Covariance::uniform(5, 1.0);
        let result = exhaustive_selection(&s, &pattern, &r, 1.0, 2).unwrap();
        assert_eq!(result.evaluated_count, 10);
        assert_eq!(
            result.best_selection,
            Selection::from_bits(vec![0, 0, 0, 1, 1]).unwrap()
        );
    }

    #[test]
    fn full_budget_forces_the_all_ones_vector() {
        let s = spec(5, 5, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&s);
        let r = Covariance::uniform(5, 1.0);
        let result = exhaustive_selection(&s, &pattern, &r, 1.0, 5).unwrap();
        assert_eq!(result.evaluated_count, 1);
        assert_eq!(result.best_selection, Selection::ones(5));
    }

    #[test]
    fn enumeration_guard_refuses_large_instances() {
        let s = spec(30, 15, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&s);
        let r = Covariance::uniform(30, 1.0);
        assert!(matches!(
            exhaustive_selection(&s, &pattern, &r, 1.0, 15),
            Err(CoreError::EnumerationGuard { .. })
        ));
    }

    #[test]
    fn greedy_never_beats_the_oracle() {
        for seed in [1u64, 2, 3, 4, 5] {
            let s = spec(7, 3, vec![-30.0, 25.0], 1.0);
            let pattern = build_desired_pattern(&s);
            let r = random_feasible(7, 200 + seed);
            let mut rng = StdRng::seed_from_u64(seed);
            let config = SearchConfig {
                mode: SearchMode::Restricted,
                prob_mut: 0.1,
            };
            let report = oracle_report(&s, &pattern, &r, 0.8, &config, &mut rng).unwrap();
            assert!(
                report.greedy_value >= report.best_value - 1e-12,
                "greedy {} beat oracle {}",
                report.greedy_value,
                report.best_value
            );
            if let Some(ratio) = report.ratio {
                assert!(ratio >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn identity_instance_reports_unit_ratio() {
        let s = spec(5, 2, vec![0.0], 0.0);
        let pattern = build_desired_pattern(&s);
        let r = Covariance::uniform(5, 1.0);
        let mut rng = StdRng::seed_from_u64(0);
        let config = SearchConfig {
            mode: SearchMode::Restricted,
            prob_mut: 0.0,
        };
        let report = oracle_report(&s, &pattern, &r, 1.0, &config, &mut rng).unwrap();
        assert_abs_diff_eq!(report.ratio.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(report.best_selection, report.greedy_selection);
    }
}

//! Desired-pattern construction and the design cost: a weighted
//! least-squares pattern mismatch plus a cross-correlation penalty between
//! probing signals at the target directions.

use nalgebra::DMatrix;

use crate::array::{ArrayGeometry, Selection};
use crate::covariance::Covariance;
use crate::error::CoreError;
use crate::CMatrix;

/// Validated problem description: geometry, targets, weights and budgets.
///
/// The target list is snapped to the nearest grid angles at construction;
/// the snapped directions are the ones used for the cross-correlation terms.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    geom: ArrayGeometry,
    targets_deg: Vec<f64>,
    target_indices: Vec<usize>,
    beamwidth_deg: f64,
    weights: Vec<f64>,
    cross_weight: f64,
    power_budget: f64,
    antenna_budget: usize,
    penalty: f64,
    cross_outer_conj: Vec<CMatrix>,
}

impl DesignSpec {
    pub fn builder(geom: ArrayGeometry) -> DesignSpecBuilder {
        DesignSpecBuilder::new(geom)
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    /// Target directions as given, in degrees.
    pub fn targets_deg(&self) -> &[f64] {
        &self.targets_deg
    }

    /// Grid indices of the snapped target directions.
    pub fn target_indices(&self) -> &[usize] {
        &self.target_indices
    }

    /// Target directions snapped to the grid, in degrees.
    pub fn snapped_targets_deg(&self) -> Vec<f64> {
        self.target_indices
            .iter()
            .map(|&k| self.geom.angle_grid_deg()[k])
            .collect()
    }

    pub fn beamwidth_deg(&self) -> f64 {
        self.beamwidth_deg
    }

    /// Per-grid-angle pattern weights `w_k`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cross-correlation weight `ω_c`.
    pub fn cross_weight(&self) -> f64 {
        self.cross_weight
    }

    /// Total transmit power budget `c`; every diagonal entry of a feasible
    /// covariance equals `c / M`.
    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// Number of antennas to place in restricted mode, `N`.
    pub fn antenna_budget(&self) -> usize {
        self.antenna_budget
    }

    /// Penalty weight `ρ` on `|‖p‖₁ - N|` in generalized mode.
    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    /// Number of unordered target pairs entering the cross term.
    pub fn target_pair_count(&self) -> usize {
        let k = self.target_indices.len();
        k * k.saturating_sub(1) / 2
    }

    /// Normalization constant of the cross term, `2 ω_c / (K̃ (K̃ - 1))`;
    /// zero when fewer than two targets exist.
    pub fn cross_coefficient(&self) -> f64 {
        let k = self.target_indices.len();
        if k < 2 {
            0.0
        } else {
            2.0 * self.cross_weight / (k * (k - 1)) as f64
        }
    }

    /// Cached `(a(θ̃_s) a(θ̃_t)^H)*` for target pair index `i`, pairs ordered
    /// `(0,1), (0,2), …`.
    pub(crate) fn cross_outer_conj(&self, i: usize) -> &CMatrix {
        &self.cross_outer_conj[i]
    }

    /// Ordered unordered-pair indices `(s, t)` with `s < t` into the target
    /// list, matching the cross-term caches.
    pub fn target_pairs(&self) -> Vec<(usize, usize)> {
        let k = self.target_indices.len();
        let mut pairs = Vec::with_capacity(self.target_pair_count());
        for s in 0..k {
            for t in (s + 1)..k {
                pairs.push((s, t));
            }
        }
        pairs
    }
}

/// Builder for [`DesignSpec`]; unspecified fields take the documented
/// defaults.
#[derive(Debug, Clone)]
pub struct DesignSpecBuilder {
    geom: ArrayGeometry,
    targets_deg: Vec<f64>,
    beamwidth_deg: f64,
    weights: Option<Vec<f64>>,
    cross_weight: f64,
    power_budget: f64,
    antenna_budget: Option<usize>,
    penalty: f64,
}

impl DesignSpecBuilder {
    fn new(geom: ArrayGeometry) -> Self {
        Self {
            geom,
            targets_deg: Vec::new(),
            beamwidth_deg: 20.0,
            weights: None,
            cross_weight: 0.0,
            power_budget: 1.0,
            antenna_budget: None,
            penalty: 0.0,
        }
    }

    pub fn targets_deg(mut self, targets: Vec<f64>) -> Self {
        self.targets_deg = targets;
        self
    }

    pub fn beamwidth_deg(mut self, delta: f64) -> Self {
        self.beamwidth_deg = delta;
        self
    }

    /// Per-grid-angle weights; defaults to all ones.
    pub fn weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn cross_weight(mut self, omega_c: f64) -> Self {
        self.cross_weight = omega_c;
        self
    }

    pub fn power_budget(mut self, c: f64) -> Self {
        self.power_budget = c;
        self
    }

    /// Antenna budget `N`; defaults to the full grid size.
    pub fn antenna_budget(mut self, n: usize) -> Self {
        self.antenna_budget = Some(n);
        self
    }

    pub fn penalty(mut self, rho: f64) -> Self {
        self.penalty = rho;
        self
    }

    pub fn build(self) -> Result<DesignSpec, CoreError> {
        let geom = self.geom;
        let k_angles = geom.angle_count();
        let m = geom.grid_points();

        if self.beamwidth_deg <= 0.0 || !self.beamwidth_deg.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "beamwidth must be positive, got {}",
                self.beamwidth_deg
            )));
        }
        if self.cross_weight < 0.0 || !self.cross_weight.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "cross-correlation weight must be nonnegative, got {}",
                self.cross_weight
            )));
        }
        if self.power_budget <= 0.0 || !self.power_budget.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "power budget must be positive, got {}",
                self.power_budget
            )));
        }
        if self.penalty < 0.0 || !self.penalty.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "penalty must be nonnegative, got {}",
                self.penalty
            )));
        }
        let antenna_budget = self.antenna_budget.unwrap_or(m);
        if antenna_budget == 0 || antenna_budget > m {
            return Err(CoreError::InvalidSpec(format!(
                "antenna budget must lie in and 1..={m}, got {antenna_budget}"
            )));
        }

        let weights = self.weights.unwrap_or_else(|| vec![1.0; k_angles]);
        if weights.len() != k_angles {
            return Err(CoreError::InvalidSpec(format!(
                "got {} weights for {} grid angles",
                weights.len(),
                k_angles
            )));
        }
        if let Some(&bad) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(CoreError::InvalidSpec(format!(
                "weights must be nonnegative, got {bad}"
            )));
        }

        let grid = geom.angle_grid_deg();
        let (sector_lo, sector_hi) = (grid[0], grid[grid.len() - 1]);
        let mut target_indices = Vec::with_capacity(self.targets_deg.len());
        for &t in &self.targets_deg {
            if !t.is_finite() || t < sector_lo || t > sector_hi {
                return Err(CoreError::InvalidSpec(format!(
                    "target {t}° outside the grid sector [{sector_lo}°, {sector_hi}°]"
                )));
            }
            target_indices.push(geom.nearest_grid_index(t));
        }
        for (i, &a) in target_indices.iter().enumerate() {
            if target_indices[i + 1..].contains(&a) {
                return Err(CoreError::InvalidSpec(format!(
                    "two targets snap to the same grid angle {}°",
                    grid[a]
                )));
            }
        }

        // Cache the cross-pair steering outer products (a_s a_t^H)*.
        let mut cross_outer_conj = Vec::new();
        for s in 0..target_indices.len() {
            for t in (s + 1)..target_indices.len() {
                let a_s = geom.steering_at(target_indices[s]);
                let a_t = geom.steering_at(target_indices[t]);
                cross_outer_conj.push(DMatrix::from_fn(m, m, |r, c| {
                    (a_s[r] * a_t[c].conj()).conj()
                }));
            }
        }

        Ok(DesignSpec {
            geom,
            targets_deg: self.targets_deg,
            target_indices,
            beamwidth_deg: self.beamwidth_deg,
            weights,
            cross_weight: self.cross_weight,
            power_budget: self.power_budget,
            antenna_budget,
            penalty: self.penalty,
            cross_outer_conj,
        })
    }
}

/// 0/1 indicator of the desired beampattern on the angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredPattern {
    values: Vec<f64>,
}

impl DesiredPattern {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Number of grid angles inside a mainlobe.
    pub fn ones_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }
}

/// Indicator pattern: 1 on every grid angle within half a beamwidth of some
/// target (endpoints inclusive), 0 elsewhere.
pub fn build_desired_pattern(spec: &DesignSpec) -> DesiredPattern {
    let half = spec.beamwidth_deg() / 2.0;
    let values = spec
        .geometry()
        .angle_grid_deg()
        .iter()
        .map(|&theta| {
            let inside = spec
                .targets_deg()
                .iter()
                .any(|&t| theta >= t - half && theta <= t + half);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    DesiredPattern { values }
}

fn check_objective_args(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
    alpha: f64,
) -> Result<(), CoreError> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(CoreError::NonPositiveAlpha(alpha));
    }
    let m = spec.geometry().grid_points();
    if r.dim() != m || p.len() != m {
        return Err(CoreError::DimensionMismatch(format!(
            "covariance {}x{} / selection {} against grid size {m}",
            r.dim(),
            r.dim(),
            p.len()
        )));
    }
    if pattern.len() != spec.geometry().angle_count() {
        return Err(CoreError::DimensionMismatch(format!(
            "pattern has {} values for {} grid angles",
            pattern.len(),
            spec.geometry().angle_count()
        )));
    }
    Ok(())
}

/// Precomputed real quadratic forms of a fixed covariance, for repeated
/// objective evaluations over many selections.
///
/// For binary `p` and Hermitian `Q`, `p^T Q p = p^T Re(Q) p`, so one real
/// symmetric matrix per grid angle (and per target pair) suffices.
pub struct ObjectiveEvaluator<'a> {
    spec: &'a DesignSpec,
    pattern: &'a DesiredPattern,
    alpha: f64,
    grid_forms: Vec<DMatrix<f64>>,
    cross_forms: Vec<DMatrix<f64>>,
}

impl<'a> ObjectiveEvaluator<'a> {
    pub fn new(
        spec: &'a DesignSpec,
        pattern: &'a DesiredPattern,
        r: &Covariance,
        alpha: f64,
    ) -> Result<Self, CoreError> {
        check_objective_args(spec, pattern, &Selection::ones(r.dim()), r, alpha)?;
        let geom = spec.geometry();
        let rm = r.matrix();
        let grid_forms = (0..geom.angle_count())
            .map(|k| {
                let outer = geom.steering_outer_conj_at(k);
                DMatrix::from_fn(rm.nrows(), rm.ncols(), |i, j| {
                    (rm[(i, j)] * outer[(i, j)]).re
                })
            })
            .collect();
        let cross_forms = (0..spec.target_pair_count())
            .map(|i| {
                let outer = spec.cross_outer_conj(i);
                DMatrix::from_fn(rm.nrows(), rm.ncols(), |r_, c_| {
                    (rm[(r_, c_)] * outer[(r_, c_)]).re
                })
            })
            .collect();
        Ok(Self {
            spec,
            pattern,
            alpha,
            grid_forms,
            cross_forms,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Beampattern value at grid angle `k` for selection `p`.
    pub fn power_at(&self, k: usize, p: &Selection) -> f64 {
        quad_form(&self.grid_forms[k], p)
    }

    /// Cross-correlation value for target pair `i`.
    pub fn cross_at(&self, i: usize, p: &Selection) -> f64 {
        quad_form(&self.cross_forms[i], p)
    }

    /// The cost `J` for a selection under the fixed covariance and scaling.
    pub fn objective(&self, p: &Selection) -> f64 {
        let spec = self.spec;
        let k_angles = self.grid_forms.len();
        let mut matching = 0.0;
        for k in 0..k_angles {
            let w = spec.weights()[k];
            if w == 0.0 {
                continue;
            }
            let residual = self.power_at(k, p) - self.alpha * self.pattern.value(k);
            matching += w * residual * residual;
        }
        matching /= k_angles as f64;

        let coef = spec.cross_coefficient();
        let mut cross = 0.0;
        if coef > 0.0 {
            for i in 0..self.cross_forms.len() {
                let value = self.cross_at(i, p);
                cross += value * value;
            }
            cross *= coef;
        }
        matching + cross
    }

    /// The penalized cost `J₂ = J + ρ |‖p‖₁ - N|`.
    pub fn objective_penalized(&self, p: &Selection) -> f64 {
        let deviation = (p.weight() as f64 - self.spec.antenna_budget() as f64).abs();
        self.objective(p) + self.spec.penalty() * deviation
    }
}

fn quad_form(form: &DMatrix<f64>, p: &Selection) -> f64 {
    let mut acc = 0.0;
    for i in 0..p.len() {
        if !p.is_active(i) {
            continue;
        }
        for j in 0..p.len() {
            if p.is_active(j) {
                acc += form[(i, j)];
            }
        }
    }
    acc
}

/// The design cost `J`: mean weighted squared pattern mismatch plus the
/// normalized sum of squared cross-correlations over target pairs.
pub fn objective_j(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
    alpha: f64,
) -> Result<f64, CoreError> {
    check_objective_args(spec, pattern, p, r, alpha)?;
    Ok(ObjectiveEvaluator::new(spec, pattern, r, alpha)?.objective(p))
}

/// The penalized cost `J₂ = J + ρ |‖p‖₁ - N|` of generalized antenna
/// selection.
pub fn objective_j2(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    p: &Selection,
    r: &Covariance,
    alpha: f64,
) -> Result<f64, CoreError> {
    check_objective_args(spec, pattern, p, r, alpha)?;
    Ok(ObjectiveEvaluator::new(spec, pattern, r, alpha)?.objective_penalized(p))
}

/// One normalized cross-correlation sample between two target directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCorrelationEntry {
    pub theta_deg: f64,
    pub theta_bar_deg: f64,
    pub normalized_magnitude: f64,
}

/// Normalized cross-correlation magnitudes
/// `|P̄(θ̃_s, θ̃_t)| / sqrt(P(θ̃_s) P(θ̃_t))` over all snapped target pairs.
pub fn normalized_cross_correlations(
    spec: &DesignSpec,
    r: &Covariance,
    p: &Selection,
) -> Result<Vec<CrossCorrelationEntry>, CoreError> {
    let snapped = spec.snapped_targets_deg();
    let geom = spec.geometry();
    let powers: Vec<f64> = snapped
        .iter()
        .map(|&t| crate::array::beampattern_power(geom, r, p, t))
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::with_capacity(spec.target_pair_count());
    for (s, t) in spec.target_pairs() {
        let cross = crate::array::cross_correlation(geom, r, p, snapped[s], snapped[t])?;
        let denom = (powers[s] * powers[t]).sqrt().max(f64::MIN_POSITIVE);
        entries.push(CrossCorrelationEntry {
            theta_deg: snapped[s],
            theta_bar_deg: snapped[t],
            normalized_magnitude: cross.abs() / denom,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn geom(m: usize) -> ArrayGeometry {
        ArrayGeometry::with_default_grid(m, 0.5, 1.0).unwrap()
    }

    fn random_covariance(m: usize, c: f64, seed: u64) -> Covariance {
        let mut rng = StdRng::seed_from_u64(seed);
        let raw = CMatrix::from_fn(m, m, |_, _| {
            crate::Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psd = &raw * raw.adjoint();
        let scale: Vec<f64> = (0..m)
            .map(|i| (c / m as f64 / psd[(i, i)].re).sqrt())
            .collect();
        let fixed = CMatrix::from_fn(m, m, |i, j| psd[(i, j)] * scale[i] * scale[j]);
        Covariance::new(fixed, c).unwrap()
    }

    #[test]
    fn three_lobe_pattern_covers_the_stated_intervals() {
        let spec = DesignSpec::builder(geom(15))
            .targets_deg(vec![-50.0, 0.0, 50.0])
            .beamwidth_deg(20.0)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        for (k, &theta) in spec.geometry().angle_grid_deg().iter().enumerate() {
            let in_lobe = (-60.0..=-40.0).contains(&theta)
                || (-10.0..=10.0).contains(&theta)
                || (40.0..=60.0).contains(&theta);
            assert_eq!(
                pattern.value(k),
                if in_lobe { 1.0 } else { 0.0 },
                "at {theta}°"
            );
        }
        assert_eq!(pattern.ones_count(), 63);
    }

    #[test]
    fn single_wide_lobe_pattern() {
        let spec = DesignSpec::builder(geom(15))
            .targets_deg(vec![0.0])
            .beamwidth_deg(60.0)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        for (k, &theta) in spec.geometry().angle_grid_deg().iter().enumerate() {
            let expect = if (-30.0..=30.0).contains(&theta) {
                1.0
            } else {
                0.0
            };
            assert_eq!(pattern.value(k), expect, "at {theta}°");
        }
    }

    #[test]
    fn empty_target_list_gives_all_zero_pattern() {
        let spec = DesignSpec::builder(geom(8)).build().unwrap();
        let pattern = build_desired_pattern(&spec);
        assert_eq!(pattern.ones_count(), 0);
    }

    #[test]
    fn objective_vanishes_on_exact_match() {
        // M=2, identity covariance, full selection: P ≡ 1 everywhere, so a
        // flat desired pattern with α = 1 fits exactly.
        let g = ArrayGeometry::with_default_grid(2, 0.5, 1.0).unwrap();
        let spec = DesignSpec::builder(g)
            .targets_deg(vec![0.0])
            .beamwidth_deg(400.0)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        assert_eq!(pattern.ones_count(), pattern.len());
        let r = Covariance::uniform(2, 1.0);
        let p = Selection::ones(2);
        let j1 = objective_j(&spec, &pattern, &p, &r, 1.0).unwrap();
        assert_abs_diff_eq!(j1, 0.0, epsilon = 1e-24);
        let j2 = objective_j(&spec, &pattern, &p, &r, 2.0).unwrap();
        assert_abs_diff_eq!(j2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn objective_rejects_nonpositive_alpha() {
        let spec = DesignSpec::builder(geom(4))
            .targets_deg(vec![0.0])
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(4, 1.0);
        let p = Selection::ones(4);
        assert!(matches!(
            objective_j(&spec, &pattern, &p, &r, 0.0),
            Err(CoreError::NonPositiveAlpha(_))
        ));
        assert!(matches!(
            objective_j(&spec, &pattern, &p, &r, -1.0),
            Err(CoreError::NonPositiveAlpha(_))
        ));
    }

    #[test]
    fn penalized_objective_adds_budget_deviation() {
        let spec = DesignSpec::builder(geom(10))
            .targets_deg(vec![0.0])
            .antenna_budget(10)
            .penalty(0.5)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        let r = Covariance::uniform(10, 1.0);
        let p8 = Selection::from_active_indices(10, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        let base = objective_j(&spec, &pattern, &p8, &r, 1.0).unwrap();
        let penalized = objective_j2(&spec, &pattern, &p8, &r, 1.0).unwrap();
        assert_abs_diff_eq!(penalized, base + 1.0, epsilon = 1e-12);

        // Zero deviation and zero penalty both collapse to J.
        let p10 = Selection::ones(10);
        assert_abs_diff_eq!(
            objective_j2(&spec, &pattern, &p10, &r, 1.0).unwrap(),
            objective_j(&spec, &pattern, &p10, &r, 1.0).unwrap(),
            epsilon = 1e-15
        );
        let spec0 = DesignSpec::builder(geom(10))
            .targets_deg(vec![0.0])
            .antenna_budget(10)
            .penalty(0.0)
            .build()
            .unwrap();
        assert_abs_diff_eq!(
            objective_j2(&spec0, &pattern, &p8, &r, 1.0).unwrap(),
            objective_j(&spec0, &pattern, &p8, &r, 1.0).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn objective_is_invariant_under_target_relabeling() {
        let r = random_covariance(5, 1.0, 3);
        let p = Selection::from_bits(vec![1, 0, 1, 1, 1]).unwrap();
        let mut values = Vec::new();
        for targets in [
            vec![-40.0, 10.0, 55.0],
            vec![55.0, -40.0, 10.0],
            vec![10.0, 55.0, -40.0],
        ] {
            let spec = DesignSpec::builder(geom(5))
                .targets_deg(targets)
                .beamwidth_deg(10.0)
                .cross_weight(1.0)
                .build()
                .unwrap();
            let pattern = build_desired_pattern(&spec);
            values.push(objective_j(&spec, &pattern, &p, &r, 0.7).unwrap());
        }
        assert_abs_diff_eq!(values[0], values[1], epsilon = 1e-12);
        assert_abs_diff_eq!(values[0], values[2], epsilon = 1e-12);
    }

    #[test]
    fn evaluator_matches_free_function() {
        let spec = DesignSpec::builder(geom(6))
            .targets_deg(vec![-30.0, 20.0])
            .beamwidth_deg(12.0)
            .cross_weight(0.8)
            .antenna_budget(4)
            .penalty(0.2)
            .build()
            .unwrap();
        let pattern = build_desired_pattern(&spec);
        let r = random_covariance(6, 1.0, 17);
        let eval = ObjectiveEvaluator::new(&spec, &pattern, &r, 0.9).unwrap();
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..20 {
            let bits: Vec<u8> = (0..6).map(|_| rng.random_range(0..=1u8)).collect();
            let p = Selection::from_bits(bits).unwrap();
            assert_abs_diff_eq!(
                eval.objective(&p),
                objective_j(&spec, &pattern, &p, &r, 0.9).unwrap(),
                epsilon = 1e-13
            );
            assert_abs_diff_eq!(
                eval.objective_penalized(&p),
                objective_j2(&spec, &pattern, &p, &r, 0.9).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn spec_builder_validates() {
        assert!(DesignSpec::builder(geom(4))
            .beamwidth_deg(0.0)
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4))
            .targets_deg(vec![120.0])
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4))
            .antenna_budget(5)
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4))
            .antenna_budget(0)
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4))
            .cross_weight(-0.1)
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4))
            .power_budget(0.0)
            .build()
            .is_err());
        assert!(DesignSpec::builder(geom(4)).penalty(-1.0).build().is_err());
        assert!(DesignSpec::builder(geom(4))
            .weights(vec![1.0; 3])
            .build()
            .is_err());
        // Two targets snapping to the same grid point are rejected.
        assert!(DesignSpec::builder(geom(4))
            .targets_deg(vec![10.1, 10.2])
            .build()
            .is_err());
    }

    #[test]
    fn targets_snap_to_nearest_grid_angle() {
        let spec = DesignSpec::builder(geom(6))
            .targets_deg(vec![-49.7, 0.2, 50.4])
            .beamwidth_deg(20.0)
            .build()
            .unwrap();
        assert_eq!(spec.snapped_targets_deg(), vec![-50.0, 0.0, 50.0]);
    }
}

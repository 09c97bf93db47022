//! Greedy 1-Hamming local search over binary antenna placements.
//!
//! Each generation clears one active bit of the parent in every possible
//! way, optionally mutates each child by toggling one uniformly drawn bit,
//! drops candidates that were already generated, and keeps the fittest. In
//! restricted mode the walk descends until the antenna budget is met; in
//! generalized mode it stops at a 1-Hamming fixed point of the penalized
//! cost, with the parent competing against its children.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;

use crate::array::Selection;
use crate::covariance::Covariance;
use crate::error::CoreError;
use crate::objective::{DesignSpec, DesiredPattern, ObjectiveEvaluator};

/// Which stopping rule and fitness the search uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Descend to exactly `N` active bits, fitness `J`.
    Restricted,
    /// Stop at a 1-Hamming fixed point, fitness `J₂`.
    Generalized,
}

/// Search parameters.
///
/// Randomness enters only through the mutation draws: for each child, in
/// ascending parent-bit order, one uniform coin is drawn (skipped entirely
/// when `prob_mut` is zero), and one uniform bit index in `0..M` when the
/// coin fires.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Probability that a generated child is mutated; must lie in `[0, 1)`.
    pub prob_mut: f64,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0..1.0).contains(&self.prob_mut) || !self.prob_mut.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "prob_mut must lie in [0, 1), got {}",
                self.prob_mut
            )));
        }
        Ok(())
    }
}

/// Result of one greedy search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub selection: Selection,
    /// Fitness of the returned selection (J or J₂ depending on the mode).
    pub fitness: f64,
    pub generations: usize,
    /// Total fitness evaluations performed.
    pub evaluations: usize,
    /// Set when the candidate space was exhausted before the stopping rule
    /// fired; the best selection seen so far is returned.
    pub exhausted: bool,
}

/// Generates the candidate set of `parent`: one child per active bit with
/// that bit cleared, each mutated with probability `prob_mut` by toggling a
/// uniformly chosen bit.
///
/// In restricted mode a mutation is kept only if the result keeps at least
/// `n` and fewer-than-parent active bits, otherwise the unmutated child
/// stands; children below the budget are dropped entirely. In generalized
/// mode the parent itself joins the returned set so the fixed-point stop
/// can fire. Candidates already in `seen`, or duplicated within the batch,
/// are dropped.
pub fn generate_children(
    parent: &Selection,
    seen: &HashSet<Selection>,
    prob_mut: f64,
    rng: &mut impl Rng,
    mode: SearchMode,
    n: usize,
) -> Result<Vec<Selection>, CoreError> {
    if parent.weight() == 0 {
        return Err(CoreError::EmptySelection);
    }
    let m = parent.len();
    let mut children = Vec::with_capacity(parent.weight() + 1);
    if mode == SearchMode::Generalized {
        children.push(parent.clone());
    }
    for i in 0..m {
        if !parent.is_active(i) {
            continue;
        }
        let mut child = parent.with_bit_cleared(i);
        if prob_mut > 0.0 && rng.random::<f64>() < prob_mut {
            let bit = rng.random_range(0..m);
            let mutated = child.with_bit_toggled(bit);
            match mode {
                SearchMode::Restricted => {
                    let w = mutated.weight();
                    if w >= n && w < parent.weight() {
                        child = mutated;
                    }
                }
                SearchMode::Generalized => child = mutated,
            }
        }
        if mode == SearchMode::Restricted && child.weight() < n {
            continue;
        }
        if seen.contains(&child) || children.contains(&child) {
            continue;
        }
        children.push(child);
    }
    Ok(children)
}

/// Fittest candidate: lowest fitness, ties broken by the lexicographically
/// smallest bit vector.
pub fn best_child<F>(children: &[Selection], mut fitness: F) -> Result<(Selection, f64), CoreError>
where
    F: FnMut(&Selection) -> f64,
{
    let mut best: Option<(Selection, f64)> = None;
    for child in children {
        let value = fitness(child);
        let better = match &best {
            None => true,
            Some((best_sel, best_val)) => match value.total_cmp(best_val) {
                Ordering::Less => true,
                Ordering::Equal => child < best_sel,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((child.clone(), value));
        }
    }
    best.ok_or(CoreError::SearchExhausted)
}

/// Adds every candidate to the seen-set; idempotent union.
pub fn update_seen(seen: &mut HashSet<Selection>, children: &[Selection]) {
    for child in children {
        seen.insert(child.clone());
    }
}

/// The greedy walk with an arbitrary fitness function, from the all-ones
/// start.
pub fn greedy_search<F>(
    m: usize,
    n: usize,
    config: &SearchConfig,
    rng: &mut impl Rng,
    fitness: F,
) -> Result<SearchOutcome, CoreError>
where
    F: FnMut(&Selection) -> f64,
{
    greedy_search_from(Selection::ones(m), n, config, rng, fitness)
}

/// The greedy walk seeded at an arbitrary parent. A restricted walk whose
/// seed already meets the budget returns it unchanged.
pub fn greedy_search_from<F>(
    start: Selection,
    n: usize,
    config: &SearchConfig,
    rng: &mut impl Rng,
    mut fitness: F,
) -> Result<SearchOutcome, CoreError>
where
    F: FnMut(&Selection) -> f64,
{
    config.validate()?;
    let m = start.len();
    if n == 0 || n > m {
        return Err(CoreError::InvalidSpec(format!(
            "antenna budget must lie in 1..={m}, got {n}"
        )));
    }

    let mut current = start;
    let mut evaluations = 0usize;
    let mut generations = 0usize;

    if config.mode == SearchMode::Restricted && current.weight() == n {
        let value = fitness(&current);
        evaluations += 1;
        return Ok(SearchOutcome {
            selection: current,
            fitness: value,
            generations,
            evaluations,
            exhausted: false,
        });
    }

    let mut seen: HashSet<Selection> = HashSet::new();
    let mut current_fitness = f64::INFINITY;

    loop {
        if current.weight() == 0 {
            // The zero vector has no children; it is trivially a fixed point.
            break;
        }
        let children = generate_children(&current, &seen, config.prob_mut, rng, config.mode, n)?;
        if children.is_empty() {
            let value = fitness(&current);
            evaluations += 1;
            return Ok(SearchOutcome {
                selection: current,
                fitness: value,
                generations,
                evaluations,
                exhausted: true,
            });
        }
        generations += 1;
        evaluations += children.len();
        let (best, best_value) = best_child(&children, &mut fitness)?;
        update_seen(&mut seen, &children);

        match config.mode {
            SearchMode::Restricted => {
                current = best;
                current_fitness = best_value;
                if current.weight() == n {
                    break;
                }
            }
            SearchMode::Generalized => {
                let stop = best == current;
                current = best;
                current_fitness = best_value;
                if stop {
                    break;
                }
            }
        }
    }

    if current_fitness.is_infinite() {
        current_fitness = fitness(&current);
        evaluations += 1;
    }
    Ok(SearchOutcome {
        selection: current,
        fitness: current_fitness,
        generations,
        evaluations,
        exhausted: false,
    })
}

/// Optimizes the antenna placement for a fixed covariance and scaling:
/// restricted mode minimizes `J` down to exactly `N` antennas, generalized
/// mode minimizes `J₂` to a 1-Hamming fixed point.
pub fn select_antennas(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    r: &Covariance,
    alpha: f64,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<SearchOutcome, CoreError> {
    let start = Selection::ones(spec.geometry().grid_points());
    select_antennas_from(spec, pattern, r, alpha, start, config, rng)
}

/// [`select_antennas`] seeded at a given placement instead of the full
/// array.
pub fn select_antennas_from(
    spec: &DesignSpec,
    pattern: &DesiredPattern,
    r: &Covariance,
    alpha: f64,
    start: Selection,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<SearchOutcome, CoreError> {
    let evaluator = ObjectiveEvaluator::new(spec, pattern, r, alpha)?;
    let m = spec.geometry().grid_points();
    if start.len() != m {
        return Err(CoreError::DimensionMismatch(format!(
            "seed selection has length {} but the grid has {m} points",
            start.len()
        )));
    }
    let n = spec.antenna_budget();
    match config.mode {
        SearchMode::Restricted => {
            greedy_search_from(start, n, config, rng, |p| evaluator.objective(p))
        }
        SearchMode::Generalized => {
            greedy_search_from(start, n, config, rng, |p| evaluator.objective_penalized(p))
        }
    }
}

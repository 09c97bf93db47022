//! Array geometry, steering vectors and the quadratic forms of the signal
//! model: the transmit beampattern and the cross-correlation between probing
//! signals at two directions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;
use crate::{CMatrix, CVector, Complex64};

/// Relative tolerance on the imaginary residue of a beampattern quadratic
/// form. Exceeding it means the covariance argument was not Hermitian.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Uniform linear grid of candidate antenna positions.
///
/// Holds the grid size `M`, the inter-grid spacing in wavelengths and the
/// angle grid over which patterns are evaluated. Steering data for every
/// grid angle is precomputed once: the rank-one matrices `(a(θ_k) a(θ_k)^H)*`
/// are reused by every objective evaluation of the inner search.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    m: usize,
    spacing: f64,
    angle_grid_deg: Vec<f64>,
    steering: Vec<CVector>,
    steering_outer_conj: Vec<CMatrix>,
}

impl ArrayGeometry {
    /// Builds a geometry from a grid size, a spacing in wavelengths and an
    /// explicit angle grid in degrees.
    pub fn new(m: usize, spacing: f64, angle_grid_deg: Vec<f64>) -> Result<Self, CoreError> {
        if m < 2 {
            return Err(CoreError::InvalidSpec(format!(
                "grid needs at least 2 points, got {m}"
            )));
        }
        if spacing <= 0.0 || !spacing.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "spacing must be a positive number of wavelengths, got {spacing}"
            )));
        }
        if angle_grid_deg.is_empty() {
            return Err(CoreError::InvalidSpec("angle grid is empty".into()));
        }
        for pair in angle_grid_deg.windows(2) {
            if pair[1] <= pair[0] {
                return Err(CoreError::InvalidSpec(format!(
                    "angle grid must be strictly increasing; saw {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        for &theta in &angle_grid_deg {
            if theta <= -90.0 || theta >= 90.0 || !theta.is_finite() {
                return Err(CoreError::AngleOutOfRange(theta));
            }
        }

        let steering: Vec<CVector> = angle_grid_deg
            .iter()
            .map(|&theta| steering_entries(m, spacing, theta))
            .collect();
        let steering_outer_conj = steering
            .iter()
            .map(|a| DMatrix::from_fn(m, m, |r, c| (a[r] * a[c].conj()).conj()))
            .collect();

        Ok(Self {
            m,
            spacing,
            angle_grid_deg,
            steering,
            steering_outer_conj,
        })
    }

    /// Default angle grid: the open sector (-90°, 90°) sampled every
    /// `step_deg` degrees, endpoints excluded.
    pub fn with_default_grid(m: usize, spacing: f64, step_deg: f64) -> Result<Self, CoreError> {
        if step_deg <= 0.0 || !step_deg.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "grid step must be positive, got {step_deg}"
            )));
        }
        let mut grid = Vec::new();
        let mut k = 0usize;
        loop {
            let theta = -90.0 + step_deg * (k + 1) as f64;
            if theta >= 90.0 {
                break;
            }
            grid.push(theta);
            k += 1;
        }
        Self::new(m, spacing, grid)
    }

    /// Number of grid points `M`.
    pub fn grid_points(&self) -> usize {
        self.m
    }

    /// Inter-grid spacing in wavelengths (`d/λ`).
    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing
    }

    /// Angle grid in degrees.
    pub fn angle_grid_deg(&self) -> &[f64] {
        &self.angle_grid_deg
    }

    /// Number of grid angles `K`.
    pub fn angle_count(&self) -> usize {
        self.angle_grid_deg.len()
    }

    /// Cached steering vector entries for grid angle `k`.
    pub(crate) fn steering_at(&self, k: usize) -> &CVector {
        &self.steering[k]
    }

    /// Cached `(a(θ_k) a(θ_k)^H)*` for grid angle `k`.
    pub(crate) fn steering_outer_conj_at(&self, k: usize) -> &CMatrix {
        &self.steering_outer_conj[k]
    }

    /// Index of the grid angle nearest to `theta_deg`; ties resolve to the
    /// lower index.
    pub fn nearest_grid_index(&self, theta_deg: f64) -> usize {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (k, &g) in self.angle_grid_deg.iter().enumerate() {
            let dist = (g - theta_deg).abs();
            if dist < best_dist {
                best = k;
                best_dist = dist;
            }
        }
        best
    }
}

fn steering_entries(m: usize, spacing: f64, theta_deg: f64) -> CVector {
    let sin_theta = theta_deg.to_radians().sin();
    DVector::from_fn(m, |row, _| {
        let phase = 2.0 * PI * spacing * row as f64 * sin_theta;
        Complex64::new(phase.cos(), phase.sin())
    })
}

/// Unit-modulus phase profile of a plane wave across the grid.
#[derive(Debug, Clone)]
pub struct SteeringVector {
    entries: CVector,
}

impl SteeringVector {
    /// The complex entries; the first is always exactly 1.
    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Steering vector of the uniform linear grid at direction `theta_deg`,
/// with entry `m` equal to `exp(j 2π (d/λ) m sin θ)`.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<SteeringVector, CoreError> {
    if theta_deg <= -90.0 || theta_deg >= 90.0 || !theta_deg.is_finite() {
        return Err(CoreError::AngleOutOfRange(theta_deg));
    }
    Ok(SteeringVector {
        entries: steering_entries(geom.m, geom.spacing, theta_deg),
    })
}

/// Binary antenna placement vector over the grid.
///
/// Each element is exactly 0 or 1; `weight` is the number of active bits.
/// Comparison and ordering are lexicographic over the bit string, which is
/// what the deterministic tie-breaking of the search relies on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selection {
    bits: Vec<u8>,
}

impl Selection {
    /// All grid points occupied.
    pub fn ones(m: usize) -> Self {
        Self { bits: vec![1; m] }
    }

    /// No grid point occupied.
    pub fn zeros(m: usize) -> Self {
        Self { bits: vec![0; m] }
    }

    /// Builds a selection from raw bits, rejecting anything but 0 and 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, CoreError> {
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(CoreError::InvalidSpec(format!(
                "selection bits must be 0 or 1, got {bad}"
            )));
        }
        Ok(Self { bits })
    }

    /// Builds a selection of length `m` with the given active indices.
    pub fn from_active_indices(m: usize, active: &[usize]) -> Result<Self, CoreError> {
        let mut bits = vec![0u8; m];
        for &i in active {
            if i >= m {
                return Err(CoreError::DimensionMismatch(format!(
                    "active index {i} out of range for length {m}"
                )));
            }
            bits[i] = 1;
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of active bits (the l1 norm of the vector).
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    /// Indices of the active bits, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
            .collect()
    }

    /// Copy with bit `i` cleared.
    pub fn with_bit_cleared(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] = 0;
        Self { bits }
    }

    /// Copy with bit `i` toggled.
    pub fn with_bit_toggled(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] ^= 1;
        Self { bits }
    }

    /// Element-wise mask of a steering vector: `p ⊙ a`.
    pub(crate) fn mask(&self, a: &CVector) -> CVector {
        let mut v = a.clone();
        for (i, &b) in self.bits.iter().enumerate() {
            if b == 0 {
                v[i] = Complex64::new(0.0, 0.0);
            }
        }
        v
    }
}

/// Number of positions at which two selections differ.
pub fn hamming_distance(x: &Selection, y: &Selection) -> Result<usize, CoreError> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "selections have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.bits.iter().zip(&y.bits).filter(|(a, b)| a != b).count())
}

fn check_dims(
    geom: &ArrayGeometry,
    r: &crate::covariance::Covariance,
    p: &Selection,
) -> Result<(), CoreError> {
    if r.dim() != geom.m {
        return Err(CoreError::DimensionMismatch(format!(
            "covariance is {}x{} but the grid has {} points",
            r.dim(),
            r.dim(),
            geom.m
        )));
    }
    if p.len() != geom.m {
        return Err(CoreError::DimensionMismatch(format!(
            "selection has length {} but the grid has {} points",
            p.len(),
            geom.m
        )));
    }
    Ok(())
}

/// Extracts the real value of a quadratic form, enforcing the imaginary
/// residue contract.
fn real_quadratic(q: Complex64) -> Result<f64, CoreError> {
    let tol = IMAG_RESIDUE_TOL * q.norm().max(1.0);
    if q.im.abs() > tol {
        return Err(CoreError::ImaginaryResidue {
            residue: q.im.abs(),
            tol,
        });
    }
    Ok(q.re)
}

/// Transmit power radiated toward `theta_deg`:
/// `p^T (R ⊙ (a(θ) a(θ)^H)*) p`, evaluated as `(p ⊙ a)^H R (p ⊙ a)`.
pub fn beampattern_power(
    geom: &ArrayGeometry,
    r: &crate::covariance::Covariance,
    p: &Selection,
    theta_deg: f64,
) -> Result<f64, CoreError> {
    check_dims(geom, r, p)?;
    let a = steering_vector(geom, theta_deg)?;
    let v = p.mask(a.entries());
    let q = v.dotc(&(r.matrix() * &v));
    real_quadratic(q)
}

/// Cross-correlation between the probing signals at `theta_deg` and
/// `theta_bar_deg`: `p^T Re{R ⊙ (a(θ) a(θ̄)^H)*} p`.
pub fn cross_correlation(
    geom: &ArrayGeometry,
    r: &crate::covariance::Covariance,
    p: &Selection,
    theta_deg: f64,
    theta_bar_deg: f64,
) -> Result<f64, CoreError> {
    check_dims(geom, r, p)?;
    let a = steering_vector(geom, theta_deg)?;
    let b = steering_vector(geom, theta_bar_deg)?;
    let u = p.mask(a.entries());
    let w = p.mask(b.entries());
    // Re{u^H R w}; taking the real part on the scalar equals taking it
    // element-wise on the matrix because p is real.
    Ok(u.dotc(&(r.matrix() * &w)).re)
}

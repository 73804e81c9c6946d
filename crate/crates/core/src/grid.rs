//! Uniform one-dimensional grids and the physical model living on them.

use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};

/// Minimum number of grid nodes accepted by [`GridModel::new`].
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Hard walls just outside the first and last node.
    HardWall,
    /// Node `n - 1` couples to node `0`; required for the momentum projector.
    Periodic,
}

/// Uniform grid `x_j = x_min + j * dx`, `dx = (x_max - x_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridModel {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    boundary: Boundary,
}

impl GridModel {
    pub fn new(n_points: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(PdxError::Domain(format!("grid needs at least {MIN_POINTS} points, got {n_points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(PdxError::Domain(format!(
                "grid extent must satisfy x_min < x_max (got {x_min}, {x_max})"
            )));
        }
        Ok(Self {
            n_points,
            x_min,
            x_max,
            boundary,
        })
    }

    pub fn hard_wall(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(n_points, x_min, x_max, Boundary::HardWall)
    }

    pub fn periodic(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(n_points, x_min, x_max, Boundary::Periodic)
    }

    /// Grid with spacing `dx` whose node `origin_index` sits exactly at `x = 0`.
    pub fn anchored(n_points: usize, dx: f64, origin_index: usize, boundary: Boundary) -> Result<Self> {
        if origin_index >= n_points || !(dx > 0.0) {
            return Err(PdxError::Domain(format!(
                "anchored grid needs dx > 0 and origin index < n (got dx = {dx}, index {origin_index})"
            )));
        }
        let x_min = -(origin_index as f64) * dx;
        let x_max = x_min + (n_points - 1) as f64 * dx;
        Self::new(n_points, x_min, x_max, boundary)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Index of the node closest to `x` (clamped to the grid).
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// Mass, reduced Planck constant and harmonic frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    /// Harmonic frequency; zero means a free particle.
    pub omega: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(PdxError::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(PdxError::Domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(PdxError::Domain(format!("omega must be non-negative, got {omega}")));
        }
        Ok(Self { mass, hbar, omega })
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            omega: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Free,
    /// `V(x) = m omega^2 x^2 / 2`.
    Harmonic {
        omega: f64,
    },
    /// Values sampled at every grid node.
    Custom {
        samples: Vec<f64>,
    },
}

impl PotentialSpec {
    /// Potential values at the grid nodes.
    pub fn sample(&self, grid: &GridModel, params: &PhysicalParams) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Free => Ok(vec![0.0; grid.len()]),
            PotentialSpec::Harmonic { omega } => {
                if !(omega.is_finite() && *omega >= 0.0) {
                    return Err(PdxError::Domain(format!("harmonic omega must be >= 0, got {omega}")));
                }
                let k = 0.5 * params.mass * omega * omega;
                Ok(grid.nodes().into_iter().map(|x| k * x * x).collect())
            }
            PotentialSpec::Custom { samples } => {
                if samples.len() != grid.len() {
                    return Err(PdxError::Dimension {
                        expected: grid.len(),
                        found: samples.len(),
                    });
                }
                if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
                    return Err(PdxError::Domain(format!("potential sample {j} is not finite")));
                }
                Ok(samples.clone())
            }
        }
    }
}

/// A grid, the particle living on it, and its potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub grid: GridModel,
    pub params: PhysicalParams,
    pub potential: PotentialSpec,
}

impl Model {
    pub fn new(grid: GridModel, params: PhysicalParams, potential: PotentialSpec) -> Result<Self> {
        if let PotentialSpec::Harmonic { omega } = potential {
            if (omega - params.omega).abs() > 1e-15 * omega.abs().max(1.0) {
                return Err(PdxError::Domain(format!(
                    "harmonic potential frequency {omega} disagrees with params.omega {}",
                    params.omega
                )));
            }
        }
        Ok(Self { grid, params, potential })
    }

    pub fn free(grid: GridModel, mass: f64, hbar: f64) -> Result<Self> {
        Self::new(grid, PhysicalParams::new(mass, hbar, 0.0)?, PotentialSpec::Free)
    }

    pub fn harmonic(grid: GridModel, mass: f64, hbar: f64, omega: f64) -> Result<Self> {
        Self::new(grid, PhysicalParams::new(mass, hbar, omega)?, PotentialSpec::Harmonic { omega })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_uniform() {
        let g = GridModel::hard_wall(11, -1.0, 1.0).unwrap();
        assert_eq!(g.dx(), 0.2);
        assert_eq!(g.node(0), -1.0);
        assert!((g.node(10) - 1.0).abs() < 1e-15);
        assert_eq!(g.nearest_node(0.04), 5);
        assert_eq!(g.nearest_node(-7.0), 0);
    }

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(GridModel::hard_wall(7, 0.0, 1.0).is_err());
        assert!(GridModel::hard_wall(16, 1.0, 1.0).is_err());
        assert!(GridModel::hard_wall(16, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn anchored_grid_has_exact_origin_node() {
        let g = GridModel::anchored(64, 0.25, 20, Boundary::HardWall).unwrap();
        assert_eq!(g.node(20), 0.0);
        assert_eq!(g.x_min(), -5.0);
    }

    #[test]
    fn custom_potential_validation() {
        let g = GridModel::hard_wall(8, 0.0, 1.0).unwrap();
        let p = PhysicalParams::default();
        let short = PotentialSpec::Custom { samples: vec![0.0; 7] };
        assert!(matches!(short.sample(&g, &p), Err(PdxError::Dimension { .. })));
        let mut v = vec![0.0; 8];
        v[3] = f64::INFINITY;
        let bad = PotentialSpec::Custom { samples: v };
        assert!(matches!(bad.sample(&g, &p), Err(PdxError::Domain(_))));
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -0.1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0).is_ok());
    }
}

//! Finite-difference Hamiltonians on a [`GridModel`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};
use crate::grid::{Boundary, GridModel, PhysicalParams, PotentialSpec};
use crate::linalg::{max_abs, CMatrix};

/// Relative tolerance on `max |H - H^dagger|` accepted by [`HermitianMatrix::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A square complex matrix checked to be Hermitian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix {
    matrix: CMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(PdxError::Dimension {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let scale = max_abs(&matrix);
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(PdxError::Numeric(format!(
                "matrix is not Hermitian: max|H - H^dagger| = {defect:e}, max|H| = {scale:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// Principal sub-block on `indices` (rows and columns).
    pub fn sub_block(&self, indices: &[usize]) -> HermitianMatrix {
        let m = CMatrix::from_fn(indices.len(), indices.len(), |i, j| self.matrix[(indices[i], indices[j])]);
        HermitianMatrix { matrix: m }
    }
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `H = -hbar^2/(2m) D2 + V`, with `D2` the three-point second difference.
///
/// Hard-wall grids drop the couplings past the end nodes; periodic grids
/// couple node `n - 1` to node `0`.
pub fn build_hamiltonian(grid: &GridModel, params: &PhysicalParams, potential: &PotentialSpec) -> Result<HermitianMatrix> {
    let v = potential.sample(grid, params)?;
    let n = grid.len();
    let dx = grid.dx();
    let kinetic = params.hbar * params.hbar / (2.0 * params.mass * dx * dx);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = 2.0 * kinetic + v[j];
        if j + 1 < n {
            h[(j, j + 1)] = -kinetic;
            h[(j + 1, j)] = -kinetic;
        }
    }
    if grid.boundary() == Boundary::Periodic {
        h[(0, n - 1)] -= kinetic;
        h[(n - 1, 0)] -= kinetic;
    }
    HermitianMatrix::from_real(&h)
}

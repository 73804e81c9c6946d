//! Eigendecomposition of Hermitian matrices and the exact propagators built on it.
//!
//! All time evolution in the crate goes through `U(t) = V exp(-i Lambda t / hbar) V^dagger`,
//! so no time-stepping error enters any of the identities checked downstream.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};
use crate::grid::PhysicalParams;
use crate::hamiltonian::HermitianMatrix;
use crate::linalg::{frobenius, identity, max_abs_diff, CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    /// Kept when the input was real symmetric; halves the cost of building propagators.
    real_vectors: Option<DMatrix<f64>>,
}

pub fn spectral_decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Err(PdxError::Domain("cannot decompose an empty matrix".into()));
    }
    let max_iter = 1000 * n.max(10);
    let fail = || {
        PdxError::Numeric(format!(
            "symmetric eigensolver did not converge (n = {n}, ||H||_F = {:e}, max_iter = {max_iter})",
            frobenius(h.matrix())
        ))
    };
    if h.is_real() {
        let real = h.matrix().map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, max_iter).ok_or_else(fail)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(SpectralDecomposition {
            eigenvalues: values,
            eigenvectors: vectors.map(|x| Complex64::new(x, 0.0)),
            real_vectors: Some(vectors),
        })
    } else {
        let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, max_iter).ok_or_else(fail)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(SpectralDecomposition {
            eigenvalues: values,
            eigenvectors: vectors,
            real_vectors: None,
        })
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `V Lambda V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.eigenvectors[(i, j)] * self.eigenvalues[j]);
        scaled * self.eigenvectors.adjoint()
    }

    /// `||V Lambda V^dagger - H||_F / ||H||_F`.
    pub fn reconstruction_residual(&self, h: &HermitianMatrix) -> f64 {
        let diff = self.reconstruct() - h.matrix();
        frobenius(&diff) / frobenius(h.matrix()).max(f64::MIN_POSITIVE)
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        max_abs_diff(&gram, &identity(self.dim()))
    }

    pub fn to_eigenbasis(&self, psi: &CVector) -> CVector {
        self.eigenvectors.adjoint() * psi
    }

    pub fn from_eigenbasis(&self, coeffs: &CVector) -> CVector {
        &self.eigenvectors * coeffs
    }

    /// Multiplies eigen-coefficients by `exp(-i lambda_k t / hbar)` in place.
    pub fn advance_coefficients(&self, coeffs: &mut CVector, t: f64, hbar: f64) {
        for (c, &lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -lambda * t / hbar);
        }
    }

    /// `U(t) psi`.
    pub fn evolve(&self, psi: &CVector, t: f64, hbar: f64) -> CVector {
        if t == 0.0 {
            return psi.clone();
        }
        let mut c = self.to_eigenbasis(psi);
        self.advance_coefficients(&mut c, t, hbar);
        self.from_eigenbasis(&c)
    }

    /// Full matrix `exp(-i H t / hbar)`; exactly the identity at `t = 0`.
    pub fn propagator_matrix(&self, t: f64, hbar: f64) -> CMatrix {
        let n = self.dim();
        if t == 0.0 {
            return identity(n);
        }
        match &self.real_vectors {
            Some(v) => {
                let phase = |j: usize| -self.eigenvalues[j] * t / hbar;
                let vc = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * phase(j).cos());
                let vs = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * phase(j).sin());
                let re = vc * v.transpose();
                let im = vs * v.transpose();
                CMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
            }
            None => {
                let scaled = CMatrix::from_fn(n, n, |i, j| {
                    self.eigenvectors[(i, j)] * Complex64::from_polar(1.0, -self.eigenvalues[j] * t / hbar)
                });
                scaled * self.eigenvectors.adjoint()
            }
        }
    }

    /// The function `tau -> <bra| U(tau) |ket>` as a sum of modes.
    pub fn matrix_element_series(&self, bra: &CVector, ket: &CVector) -> ModalSeries {
        let left = self.to_eigenbasis(bra);
        let right = self.to_eigenbasis(ket);
        let weights = left.iter().zip(right.iter()).map(|(l, r)| l.conj() * r).collect();
        ModalSeries {
            weights,
            energies: self.eigenvalues.iter().copied().collect(),
        }
    }

    /// The function `tau -> (U(tau) ket)[node]`.
    pub fn component_series(&self, ket: &CVector, node: usize) -> ModalSeries {
        let right = self.to_eigenbasis(ket);
        let weights = (0..self.dim()).map(|k| self.eigenvectors[(node, k)] * right[k]).collect();
        ModalSeries {
            weights,
            energies: self.eigenvalues.iter().copied().collect(),
        }
    }
}

/// `f(tau) = sum_k w_k exp(-i E_k tau / hbar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSeries {
    pub weights: Vec<Complex64>,
    pub energies: Vec<f64>,
}

impl ModalSeries {
    pub fn eval(&self, tau: f64, hbar: f64) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.energies)
            .map(|(w, e)| w * Complex64::from_polar(1.0, -e * tau / hbar))
            .sum()
    }
}

/// Dense unitary `exp(-i H (t_to - t_from) / hbar)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorMatrix {
    pub matrix: CMatrix,
    pub t_from: f64,
    pub t_to: f64,
}

impl PropagatorMatrix {
    pub fn span(&self) -> f64 {
        self.t_to - self.t_from
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        max_abs_diff(&gram, &identity(self.dim()))
    }
}

pub fn propagator(decomp: &SpectralDecomposition, params: &PhysicalParams, t: f64) -> Result<PropagatorMatrix> {
    if !t.is_finite() {
        return Err(PdxError::Domain(format!("propagation time must be finite, got {t}")));
    }
    let matrix = decomp.propagator_matrix(t, params.hbar);
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PdxError::Numeric(format!("non-finite propagator entries at t = {t}")));
    }
    Ok(PropagatorMatrix {
        matrix,
        t_from: 0.0,
        t_to: t,
    })
}

/// `max |U(t1 + t2) - U(t2) U(t1)|`.
pub fn composition_residual(decomp: &SpectralDecomposition, params: &PhysicalParams, t1: f64, t2: f64) -> Result<f64> {
    let u1 = propagator(decomp, params, t1)?;
    let u2 = propagator(decomp, params, t2)?;
    let u12 = propagator(decomp, params, t1 + t2)?;
    Ok(max_abs_diff(&u12.matrix, &(&u2.matrix * &u1.matrix)))
}

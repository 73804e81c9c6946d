//! Wavepackets and plane-wave bases on a grid.
//!
//! States are stored with discrete normalization `sum_j |psi_j|^2 = 1`; the
//! continuum wavefunction at node `j` is `psi_j / sqrt(dx)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{PdxError, Result};
use crate::grid::{Boundary, GridModel};
use crate::linalg::{norm_sqr, CMatrix, CVector};

/// `exp(-(x - center)^2 / (2 width^2) + i k0 x)`, normalized on the grid.
pub fn gaussian_packet(grid: &GridModel, center: f64, width: f64, wavenumber: f64) -> Result<CVector> {
    if !(width > 0.0) {
        return Err(PdxError::Domain(format!("packet width must be positive, got {width}")));
    }
    let psi = CVector::from_iterator(
        grid.len(),
        grid.nodes().into_iter().map(|x| {
            let u = (x - center) / width;
            Complex64::from_polar((-0.5 * u * u).exp(), wavenumber * x)
        }),
    );
    normalized(psi)
}

pub fn normalized(psi: CVector) -> Result<CVector> {
    let n = norm_sqr(&psi).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(PdxError::Domain("state has zero or non-finite norm".into()));
    }
    Ok(psi / Complex64::new(n, 0.0))
}

/// Probability carried by the nodes where `select(j)` holds.
pub fn mass_where(psi: &CVector, select: impl Fn(usize) -> bool) -> f64 {
    psi.iter().enumerate().filter(|(j, _)| select(*j)).map(|(_, z)| z.norm_sqr()).sum()
}

/// Continuum samples `psi_j / sqrt(dx)`.
pub fn continuum_samples(psi: &CVector, grid: &GridModel) -> CVector {
    psi / Complex64::new(grid.dx().sqrt(), 0.0)
}

/// Discrete Fourier plane waves `e_k(x_j) = exp(i p_k x_j / hbar) / sqrt(n)` of a periodic grid.
#[derive(Debug, Clone)]
pub struct PlaneWaveBasis {
    /// Integer mode labels, `-(n-1)/2 ..= n/2`.
    pub modes: Vec<i64>,
    /// `p_k = 2 pi hbar k / (n dx)`.
    pub momenta: Vec<f64>,
    /// Columns are the plane waves, in the order of `modes`.
    pub vectors: CMatrix,
}

impl PlaneWaveBasis {
    pub fn new(grid: &GridModel, hbar: f64) -> Result<Self> {
        if grid.boundary() != Boundary::Periodic {
            return Err(PdxError::Precondition(
                "plane waves are eigenstates only on a periodic grid; build the grid with Boundary::Periodic".into(),
            ));
        }
        let n = grid.len();
        let lo = -(((n - 1) / 2) as i64);
        let hi = (n / 2) as i64;
        let modes: Vec<i64> = (lo..=hi).collect();
        let period = n as f64 * grid.dx();
        let momenta = modes.iter().map(|&k| 2.0 * PI * hbar * k as f64 / period).collect();
        let scale = 1.0 / (n as f64).sqrt();
        // Phase anchored at x = 0 so that real momentum amplitudes give packets centred there.
        let origin = -grid.x_min() / grid.dx();
        let vectors = CMatrix::from_fn(n, modes.len(), |j, c| {
            let wrapped = (modes[c] * j as i64).rem_euclid(n as i64) as f64;
            let phase = 2.0 * PI * (wrapped - modes[c] as f64 * origin) / n as f64;
            Complex64::from_polar(scale, phase)
        });
        Ok(Self { modes, momenta, vectors })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// True for the Nyquist mode of an even grid, whose momentum sign is ambiguous.
    pub fn is_nyquist(&self, column: usize) -> bool {
        let n = self.vectors.nrows() as i64;
        n % 2 == 0 && self.modes[column] == n / 2
    }

    /// Position-space state whose momentum amplitudes are `exp(-(p - p0)^2 / (2 width^2))`.
    pub fn momentum_packet(&self, center: f64, width: f64) -> Result<CVector> {
        if !(width > 0.0) {
            return Err(PdxError::Domain(format!("packet width must be positive, got {width}")));
        }
        let amps = CVector::from_iterator(
            self.len(),
            self.momenta.iter().map(|&p| {
                let u = (p - center) / width;
                Complex64::new((-0.5 * u * u).exp(), 0.0)
            }),
        );
        normalized(&self.vectors * amps)
    }

    /// Momentum amplitudes `<p_k|psi>`.
    pub fn amplitudes(&self, psi: &CVector) -> CVector {
        self.vectors.adjoint() * psi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};

    #[test]
    fn packet_is_normalized_and_centered() {
        let g = GridModel::hard_wall(256, -10.0, 10.0).unwrap();
        let psi = gaussian_packet(&g, -2.0, 0.5, 1.5).unwrap();
        assert!((norm_sqr(&psi) - 1.0).abs() < 1e-13);
        let mean: f64 = g.nodes().iter().zip(psi.iter()).map(|(x, z)| x * z.norm_sqr()).sum();
        assert!((mean + 2.0).abs() < 1e-10);
        assert!(gaussian_packet(&g, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn plane_waves_are_orthonormal() {
        for n in [16usize, 17] {
            let g = GridModel::periodic(n, 0.0, 3.0).unwrap();
            let b = PlaneWaveBasis::new(&g, 1.0).unwrap();
            assert_eq!(b.len(), n);
            let gram = b.vectors.adjoint() * &b.vectors;
            assert!(max_abs_diff(&gram, &identity(n)) < 1e-13);
        }
    }

    #[test]
    fn hard_wall_grid_has_no_plane_wave_basis() {
        let g = GridModel::hard_wall(16, 0.0, 1.0).unwrap();
        assert!(matches!(PlaneWaveBasis::new(&g, 1.0), Err(PdxError::Precondition(_))));
    }

    #[test]
    fn momentum_packet_peaks_at_center() {
        let g = GridModel::periodic(128, -20.0, 20.0).unwrap();
        let b = PlaneWaveBasis::new(&g, 1.0).unwrap();
        let psi = b.momentum_packet(-1.5, 0.4).unwrap();
        let amps = b.amplitudes(&psi);
        let mean: f64 = b.momenta.iter().zip(amps.iter()).map(|(p, a)| p * a.norm_sqr()).sum();
        assert!((mean + 1.5).abs() < 1e-6);
        let x_mean: f64 = g.nodes().iter().zip(psi.iter()).map(|(x, z)| x * z.norm_sqr()).sum();
        assert!(x_mean.abs() < 1e-10, "{x_mean}");
    }
}

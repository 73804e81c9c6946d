//! Evolution confined to `C-bar`: the Zeno projector product and the
//! Dirichlet (sub-Hamiltonian) exponential.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, PdxError, Result};
use crate::grid::{Boundary, GridModel, Model};
use crate::hamiltonian::{build_hamiltonian, HermitianMatrix};
use crate::linalg::{frobenius, matrix_power, CMatrix, CVector};
use crate::projectors::{position_projector, BasisKind, Projector, RegionSpec, Surface};
use crate::spectral::{spectral_decompose, ModalSeries, PropagatorMatrix, SpectralDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    Zeno { slices: usize },
    Dirichlet,
    Subspace,
}

/// A (generally non-unitary) evolution matrix supported on `C-bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedPropagator {
    pub matrix: CMatrix,
    pub method: Method,
    pub region: RegionSpec,
    pub t_span: f64,
}

/// Anything that can apply `G^(r)(t)` to a state.
pub trait RestrictedEvolution: Sync {
    fn dim(&self) -> usize;
    fn evolve(&self, psi: &CVector, t: f64) -> CVector;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoConfig {
    pub total_time: f64,
    pub slices: usize,
}

impl ZenoConfig {
    pub fn new(total_time: f64, slices: usize) -> Result<Self> {
        if slices == 0 {
            return Err(PdxError::Domain("Zeno product needs at least one slice".into()));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(PdxError::Domain(format!("total time must be positive, got {total_time}")));
        }
        Ok(Self { total_time, slices })
    }

    pub fn delta_t(&self) -> f64 {
        self.total_time / self.slices as f64
    }
}

/// `[U(dt) P_Cbar]^K`.
pub fn zeno_product(u_dt: &PropagatorMatrix, p_bar: &Projector, slices: usize) -> Result<RestrictedPropagator> {
    if slices == 0 {
        return Err(PdxError::Domain("Zeno product needs K >= 1".into()));
    }
    ensure_dim(u_dt.dim(), p_bar.dim())?;
    let step = &u_dt.matrix * p_bar.matrix();
    Ok(RestrictedPropagator {
        matrix: matrix_power(&step, slices),
        method: Method::Zeno { slices },
        region: *p_bar.region(),
        t_span: u_dt.span() * slices as f64,
    })
}

/// Hamiltonian restricted to the `C-bar` nodes strictly away from the surface,
/// i.e. with a Dirichlet wall on the surface node.
#[derive(Debug, Clone)]
pub struct DirichletRestriction {
    nodes: Vec<usize>,
    n_full: usize,
    spectral: SpectralDecomposition,
    hbar: f64,
    surface: Surface,
    region: RegionSpec,
}

impl DirichletRestriction {
    pub fn new(h: &HermitianMatrix, grid: &GridModel, region: &RegionSpec, hbar: f64) -> Result<Self> {
        ensure_dim(grid.len(), h.dim())?;
        if region.basis != BasisKind::Position {
            return Err(PdxError::Precondition(
                "Dirichlet restriction needs a position-basis region; momentum regions go through the duality map".into(),
            ));
        }
        if grid.boundary() == Boundary::Periodic {
            return Err(PdxError::Unsupported(
                "a Dirichlet wall at a single node does not separate a periodic grid".into(),
            ));
        }
        let surface = Surface::locate(grid, region)?;
        let nodes = surface.restricted_nodes();
        if nodes.is_empty() {
            return Err(PdxError::Domain(format!(
                "region C-bar has no interior nodes for boundary {}",
                region.boundary
            )));
        }
        let spectral = spectral_decompose(&h.sub_block(&nodes))?;
        Ok(Self {
            nodes,
            n_full: grid.len(),
            spectral,
            hbar,
            surface,
            region: *region,
        })
    }

    pub fn for_model(model: &Model, region: &RegionSpec) -> Result<Self> {
        let h = build_hamiltonian(&model.grid, &model.params, &model.potential)?;
        Self::new(&h, &model.grid, region, model.params.hbar)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn gather(&self, psi: &CVector) -> CVector {
        CVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&j| psi[j]))
    }

    pub fn scatter(&self, sub: &CVector) -> CVector {
        let mut out = CVector::zeros(self.n_full);
        for (k, &j) in self.nodes.iter().enumerate() {
            out[j] = sub[k];
        }
        out
    }

    /// `tau -> (G^(r)(tau) psi)[node]`, or `None` when `node` is outside the restricted set.
    pub fn component_series(&self, psi: &CVector, node: usize) -> Option<ModalSeries> {
        let local = self.nodes.iter().position(|&j| j == node)?;
        Some(self.spectral.component_series(&self.gather(psi), local))
    }

    pub fn propagator(&self, t: f64) -> RestrictedPropagator {
        let sub = self.spectral.propagator_matrix(t, self.hbar);
        let mut m = CMatrix::zeros(self.n_full, self.n_full);
        for (a, &i) in self.nodes.iter().enumerate() {
            for (b, &j) in self.nodes.iter().enumerate() {
                m[(i, j)] = sub[(a, b)];
            }
        }
        RestrictedPropagator {
            matrix: m,
            method: Method::Dirichlet,
            region: self.region,
            t_span: t,
        }
    }
}

impl RestrictedEvolution for DirichletRestriction {
    fn dim(&self) -> usize {
        self.n_full
    }

    fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        self.scatter(&self.spectral.evolve(&self.gather(psi), t, self.hbar))
    }
}

/// `exp(-i Pbar H Pbar t / hbar) Pbar` for an arbitrary projector `Pbar`.
#[derive(Debug, Clone)]
pub struct SubspaceRestriction {
    /// Orthonormal basis of the range of `Pbar`, one column per vector.
    basis: CMatrix,
    spectral: Option<SpectralDecomposition>,
    hbar: f64,
}

impl SubspaceRestriction {
    pub fn new(h: &HermitianMatrix, p_bar: &Projector, hbar: f64) -> Result<Self> {
        ensure_dim(h.dim(), p_bar.dim())?;
        let n = h.dim();
        let basis = match p_bar.diagonal() {
            Some(pattern) => {
                let cols: Vec<usize> = (0..n).filter(|&j| pattern[j]).collect();
                CMatrix::from_fn(n, cols.len(), |i, c| {
                    if i == cols[c] {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
            None => {
                let eig = spectral_decompose(&HermitianMatrix::new(p_bar.matrix().clone())?)?;
                let cols: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues()[k] > 0.5).collect();
                CMatrix::from_fn(n, cols.len(), |i, c| eig.eigenvectors()[(i, cols[c])])
            }
        };
        let spectral = if basis.ncols() == 0 {
            None
        } else {
            let reduced = basis.adjoint() * h.matrix() * &basis;
            let reduced = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
            Some(spectral_decompose(&HermitianMatrix::new(reduced)?)?)
        };
        Ok(Self { basis, spectral, hbar })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn propagator(&self, t: f64, region: RegionSpec) -> RestrictedPropagator {
        let n = self.basis.nrows();
        let matrix = match &self.spectral {
            Some(s) => &self.basis * s.propagator_matrix(t, self.hbar) * self.basis.adjoint(),
            None => CMatrix::zeros(n, n),
        };
        RestrictedPropagator {
            matrix,
            method: Method::Subspace,
            region,
            t_span: t,
        }
    }
}

impl RestrictedEvolution for SubspaceRestriction {
    fn dim(&self) -> usize {
        self.basis.nrows()
    }

    fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        match &self.spectral {
            Some(s) => {
                let local = self.basis.adjoint() * psi;
                &self.basis * s.evolve(&local, t, self.hbar)
            }
            None => CVector::zeros(self.basis.nrows()),
        }
    }
}

/// Dirichlet-restricted propagator `G^(r)(t)` embedded in the full grid.
pub fn dirichlet_restricted(model: &Model, region: &RegionSpec, t: f64) -> Result<RestrictedPropagator> {
    Ok(DirichletRestriction::for_model(model, region)?.propagator(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "K")]
    pub slices: usize,
    pub delta_t: f64,
    pub frobenius_error: f64,
    /// `log(e_prev / e) / log(K / K_prev)`; absent for the first row.
    pub empirical_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub total_time: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.frobenius_error).collect()
    }
}

/// Frobenius distance between the Zeno product and the Dirichlet propagator for each `K`.
pub fn zeno_convergence_study(model: &Model, region: &RegionSpec, total_time: f64, k_list: &[usize]) -> Result<ConvergenceTable> {
    if k_list.len() < 3 {
        return Err(PdxError::Domain(format!(
            "convergence study needs at least 3 slice counts, got {}",
            k_list.len()
        )));
    }
    if k_list[0] == 0 || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PdxError::Domain("slice counts must be positive and strictly ascending".into()));
    }
    ZenoConfig::new(total_time, k_list[0])?;
    let h = build_hamiltonian(&model.grid, &model.params, &model.potential)?;
    let spectral = spectral_decompose(&h)?;
    let reference = DirichletRestriction::new(&h, &model.grid, region, model.params.hbar)?.propagator(total_time);
    let p_bar = position_projector(&model.grid, region)?.complement();
    let hbar = model.params.hbar;

    let error_for = |k: usize| -> f64 {
        let dt = total_time / k as f64;
        let u = PropagatorMatrix {
            matrix: spectral.propagator_matrix(dt, hbar),
            t_from: 0.0,
            t_to: dt,
        };
        let z = zeno_product(&u, &p_bar, k).expect("validated slice count");
        frobenius(&(z.matrix - &reference.matrix))
    };

    #[cfg(feature = "parallel")]
    let errors: Vec<f64> = {
        use rayon::prelude::*;
        k_list.par_iter().map(|&k| error_for(k)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let errors: Vec<f64> = k_list.iter().map(|&k| error_for(k)).collect();

    let rows = k_list
        .iter()
        .enumerate()
        .map(|(i, &k)| ConvergenceRow {
            slices: k,
            delta_t: total_time / k as f64,
            frobenius_error: errors[i],
            empirical_order: (i > 0).then(|| (errors[i - 1] / errors[i]).ln() / (k as f64 / k_list[i - 1] as f64).ln()),
        })
        .collect();
    Ok(ConvergenceTable { total_time, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, max_abs_diff, norm_sqr};
    use crate::projectors::Membership;
    use crate::state::gaussian_packet;

    fn free(n: usize, half: f64) -> Model {
        Model::free(GridModel::hard_wall(n, -half, half).unwrap(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn single_slice_is_one_factor() {
        let m = free(32, 4.0);
        let h = build_hamiltonian(&m.grid, &m.params, &m.potential).unwrap();
        let s = spectral_decompose(&h).unwrap();
        let u = PropagatorMatrix {
            matrix: s.propagator_matrix(0.1, 1.0),
            t_from: 0.0,
            t_to: 0.1,
        };
        let p_bar = position_projector(&m.grid, &RegionSpec::position(0.0)).unwrap().complement();
        let z = zeno_product(&u, &p_bar, 1).unwrap();
        assert_eq!(z.matrix, &u.matrix * p_bar.matrix());
        assert!(zeno_product(&u, &p_bar, 0).is_err());
        let z8 = zeno_product(&u, &p_bar, 8).unwrap();
        let c = position_projector(&m.grid, &RegionSpec::position(0.0)).unwrap();
        assert!(max_abs(&(&z8.matrix * c.matrix())) <= 1e-12);
        assert!((z8.t_span - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_kernel_structure() {
        let m = free(64, 8.0);
        let region = RegionSpec::position(0.0);
        let r = DirichletRestriction::for_model(&m, &region).unwrap();
        let g0 = r.propagator(0.0);
        let p_bar = position_projector(&m.grid, &region).unwrap().complement();
        assert_eq!(g0.matrix, *p_bar.matrix());
        let g = r.propagator(0.3);
        let surface = r.surface().node;
        for j in 0..64 {
            if r.surface().in_c(j) {
                assert!(g.matrix.row(j).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
                assert!(g.matrix.column(j).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            }
        }
        assert!(g.matrix.row(surface).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dirichlet_semigroup_and_norm() {
        let m = free(96, 8.0);
        let region = RegionSpec::position(1.0);
        let r = DirichletRestriction::for_model(&m, &region).unwrap();
        let a = r.propagator(0.2).matrix;
        let b = r.propagator(0.35).matrix;
        let ab = r.propagator(0.55).matrix;
        assert!(max_abs_diff(&ab, &(&b * &a)) <= 1e-11);
        let psi = gaussian_packet(&m.grid, -2.0, 0.7, 1.0).unwrap();
        let psi = r.scatter(&r.gather(&psi));
        for t in [0.1, 1.0, 3.0] {
            assert!(norm_sqr(&r.evolve(&psi, t)).sqrt() <= psi.norm() + 1e-12);
        }
    }

    #[test]
    fn dirichlet_errors() {
        let m = free(32, 4.0);
        let all_c = RegionSpec::position(-4.0);
        assert!(matches!(dirichlet_restricted(&m, &all_c, 0.1), Err(PdxError::Domain(_))));
        assert!(matches!(
            dirichlet_restricted(&m, &RegionSpec::momentum(), 0.1),
            Err(PdxError::Precondition(_))
        ));
        let periodic = Model::free(GridModel::periodic(32, -4.0, 4.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(matches!(
            dirichlet_restricted(&periodic, &RegionSpec::position(0.0), 0.1),
            Err(PdxError::Unsupported(_))
        ));
    }

    #[test]
    fn subspace_restriction_matches_dirichlet_for_position_regions() {
        let m = free(48, 6.0);
        let region = RegionSpec::position(0.5);
        let h = build_hamiltonian(&m.grid, &m.params, &m.potential).unwrap();
        let d = DirichletRestriction::new(&h, &m.grid, &region, 1.0).unwrap();
        let p_bar = position_projector(&m.grid, &region).unwrap().complement();
        let s = SubspaceRestriction::new(&h, &p_bar, 1.0).unwrap();
        assert!(max_abs_diff(&d.propagator(0.4).matrix, &s.propagator(0.4, region).matrix) <= 1e-12);
    }

    #[test]
    fn empty_complement_gives_zero_and_full_line_gives_unitary() {
        let m = free(24, 3.0);
        let h = build_hamiltonian(&m.grid, &m.params, &m.potential).unwrap();
        let c_all = position_projector(&m.grid, &RegionSpec::position(-3.0)).unwrap();
        let s = SubspaceRestriction::new(&h, &c_all.complement(), 1.0).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(max_abs(&s.propagator(0.3, RegionSpec::position(-3.0)).matrix), 0.0);
        let full = SubspaceRestriction::new(&h, &c_all, 1.0).unwrap();
        let u = spectral_decompose(&h).unwrap().propagator_matrix(0.3, 1.0);
        assert!(max_abs_diff(&full.propagator(0.3, RegionSpec::position(-3.0)).matrix, &u) <= 1e-12);
        assert_eq!(identity(24).nrows(), 24);
    }

    #[test]
    fn full_line_cbar_gives_zero_zeno_error() {
        let m = free(48, 6.0);
        let region = RegionSpec::position(6.0).with_boundary_node(Membership::CBar);
        let t = zeno_convergence_study(&m, &region, 0.5, &[2, 4, 8]).unwrap();
        assert!(t.errors().iter().all(|&e| e <= 1e-10), "{:?}", t.errors());
    }

    #[test]
    fn convergence_study_validation() {
        let m = free(32, 4.0);
        let r = RegionSpec::position(0.0);
        assert!(zeno_convergence_study(&m, &r, 0.5, &[8, 32]).is_err());
        assert!(zeno_convergence_study(&m, &r, 0.5, &[8, 8, 32]).is_err());
        assert!(zeno_convergence_study(&m, &r, -0.5, &[8, 16, 32]).is_err());
    }
}

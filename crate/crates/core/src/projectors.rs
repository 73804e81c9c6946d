//! Region projectors in the position and momentum bases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, PdxError, Result};
use crate::grid::GridModel;
use crate::hamiltonian::HermitianMatrix;
use crate::linalg::{identity, max_abs_diff, CMatrix, CVector};
use crate::spectral::PropagatorMatrix;
use crate::state::PlaneWaveBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Position,
    Momentum,
}

/// Which side of the boundary value the region `C` occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Above,
    Below,
}

/// Region that owns the grid node sitting on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    C,
    CBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub basis: BasisKind,
    pub boundary: f64,
    pub side_of_c: Side,
    pub boundary_node: Membership,
}

impl RegionSpec {
    /// `C = {x >= a}` with the surface node in `C`.
    pub fn position(boundary: f64) -> Self {
        Self {
            basis: BasisKind::Position,
            boundary,
            side_of_c: Side::Above,
            boundary_node: Membership::C,
        }
    }

    /// `C = {p > 0}`; the zero mode belongs to the complement.
    pub fn momentum() -> Self {
        Self {
            basis: BasisKind::Momentum,
            boundary: 0.0,
            side_of_c: Side::Above,
            boundary_node: Membership::CBar,
        }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side_of_c = side;
        self
    }

    pub fn with_boundary_node(mut self, membership: Membership) -> Self {
        self.boundary_node = membership;
        self
    }
}

/// Grid location of a position-space surface after snapping to a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub node: usize,
    pub requested: f64,
    pub used: f64,
    pub side_of_c: Side,
    pub boundary_node: Membership,
    n_points: usize,
}

impl Surface {
    pub fn locate(grid: &GridModel, region: &RegionSpec) -> Result<Self> {
        if region.basis != BasisKind::Position {
            return Err(PdxError::Precondition("surface location needs a position-basis region".into()));
        }
        let a = region.boundary;
        if !(a >= grid.x_min() && a <= grid.x_max()) {
            return Err(PdxError::Domain(format!(
                "boundary {a} lies outside the grid [{}, {}]",
                grid.x_min(),
                grid.x_max()
            )));
        }
        let node = grid.nearest_node(a);
        Ok(Self {
            node,
            requested: a,
            used: grid.node(node),
            side_of_c: region.side_of_c,
            boundary_node: region.boundary_node,
            n_points: grid.len(),
        })
    }

    pub fn snap_offset(&self) -> f64 {
        (self.requested - self.used).abs()
    }

    pub fn in_c(&self, j: usize) -> bool {
        let on_c_side = match self.side_of_c {
            Side::Above => j > self.node,
            Side::Below => j < self.node,
        };
        on_c_side || (j == self.node && self.boundary_node == Membership::C)
    }

    /// Unit normal at the surface pointing out of `C-bar` (towards `C`), as `+1` or `-1` along x.
    pub fn normal(&self) -> f64 {
        match self.side_of_c {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }

    /// Grid index reached by moving `steps` nodes from the surface into `C-bar`.
    pub fn into_cbar(&self, steps: usize) -> Option<usize> {
        match self.side_of_c {
            Side::Above => self.node.checked_sub(steps),
            Side::Below => {
                let j = self.node + steps;
                (j < self.n_points).then_some(j)
            }
        }
    }

    /// Nodes strictly on the `C-bar` side, where the Dirichlet-restricted evolution lives.
    ///
    /// When `C` is empty there is no surface inside the domain and every node is kept.
    pub fn restricted_nodes(&self) -> Vec<usize> {
        let c_empty = (0..self.n_points).all(|j| !self.in_c(j));
        if c_empty {
            return (0..self.n_points).collect();
        }
        (0..self.n_points).filter(|&j| !self.in_c(j) && j != self.node).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    Region,
    Complement,
}

/// Hermitian idempotent projecting onto `C` (or onto its complement).
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    region: RegionSpec,
    rank: usize,
    selects: Selection,
    /// Diagonal 0/1 pattern for position projectors.
    diagonal: Option<Vec<bool>>,
    surface: Option<Surface>,
}

impl Projector {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn selects(&self) -> Selection {
        self.selects
    }

    pub fn surface(&self) -> Option<&Surface> {
        self.surface.as_ref()
    }

    /// The 0/1 diagonal of a position projector.
    pub fn diagonal(&self) -> Option<&[bool]> {
        self.diagonal.as_deref()
    }

    /// `1 - P`.
    pub fn complement(&self) -> Projector {
        let n = self.dim();
        let (matrix, diagonal) = match &self.diagonal {
            Some(d) => {
                let flipped: Vec<bool> = d.iter().map(|b| !b).collect();
                (diagonal_matrix(&flipped), Some(flipped))
            }
            None => (identity(n) - &self.matrix, None),
        };
        Projector {
            matrix,
            region: self.region,
            rank: n - self.rank,
            selects: match self.selects {
                Selection::Region => Selection::Complement,
                Selection::Complement => Selection::Region,
            },
            diagonal,
            surface: self.surface,
        }
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        match &self.diagonal {
            Some(d) => CVector::from_fn(psi.len(), |j, _| if d[j] { psi[j] } else { Complex64::new(0.0, 0.0) }),
            None => &self.matrix * psi,
        }
    }

    /// `max |P^2 - P|`.
    pub fn idempotence_defect(&self) -> f64 {
        max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix)
    }
}

fn diagonal_matrix(pattern: &[bool]) -> CMatrix {
    let n = pattern.len();
    let mut m = CMatrix::zeros(n, n);
    for (j, &on) in pattern.iter().enumerate() {
        if on {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Diagonal projector onto the grid nodes of `C`.
pub fn position_projector(grid: &GridModel, region: &RegionSpec) -> Result<Projector> {
    let surface = Surface::locate(grid, region)?;
    let pattern: Vec<bool> = (0..grid.len()).map(|j| surface.in_c(j)).collect();
    let rank = pattern.iter().filter(|b| **b).count();
    Ok(Projector {
        matrix: diagonal_matrix(&pattern),
        region: *region,
        rank,
        selects: Selection::Region,
        diagonal: Some(pattern),
        surface: Some(surface),
    })
}

/// Projector onto the plane waves with strictly positive momentum.
///
/// The zero mode and, on even grids, the Nyquist mode are assigned to the complement.
pub fn momentum_projector(grid: &GridModel) -> Result<Projector> {
    let basis = PlaneWaveBasis::new(grid, 1.0)?;
    momentum_projector_from_basis(&basis)
}

pub fn momentum_projector_from_basis(basis: &PlaneWaveBasis) -> Result<Projector> {
    let cols: Vec<usize> = (0..basis.len()).filter(|&c| basis.modes[c] > 0 && !basis.is_nyquist(c)).collect();
    let n = basis.vectors.nrows();
    let sub = CMatrix::from_fn(n, cols.len(), |j, c| basis.vectors[(j, cols[c])]);
    let matrix = &sub * sub.adjoint();
    Ok(Projector {
        matrix,
        region: RegionSpec::momentum(),
        rank: cols.len(),
        selects: Selection::Region,
        diagonal: None,
        surface: None,
    })
}

/// `P(t) = U(t)^dagger P U(t)`.
pub fn heisenberg_projector(p: &Projector, u: &PropagatorMatrix) -> Result<HermitianMatrix> {
    ensure_dim(p.dim(), u.dim())?;
    let m = u.matrix.adjoint() * p.matrix() * &u.matrix;
    let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianMatrix::new(sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Model};
    use crate::hamiltonian::build_hamiltonian;
    use crate::linalg::max_abs;
    use crate::spectral::{propagator, spectral_decompose};

    #[test]
    fn full_line_region_is_identity() {
        let g = GridModel::hard_wall(32, -4.0, 4.0).unwrap();
        let p = position_projector(&g, &RegionSpec::position(-4.0)).unwrap();
        assert_eq!(p.matrix(), &identity(32));
        assert_eq!(p.rank(), 32);
    }

    #[test]
    fn completeness_and_exclusivity_are_exact() {
        let g = GridModel::hard_wall(33, -4.0, 4.0).unwrap();
        for region in [
            RegionSpec::position(0.3),
            RegionSpec::position(0.3).with_side(Side::Below),
            RegionSpec::position(-1.0).with_boundary_node(Membership::CBar),
        ] {
            let p = position_projector(&g, &region).unwrap();
            let q = p.complement();
            assert_eq!(p.matrix() + q.matrix(), identity(33));
            assert_eq!(max_abs(&(p.matrix() * q.matrix())), 0.0);
            assert_eq!(p.rank() + q.rank(), 33);
        }
    }

    #[test]
    fn boundary_membership_and_snapping() {
        let g = GridModel::hard_wall(11, -1.0, 1.0).unwrap();
        let p = position_projector(&g, &RegionSpec::position(0.03)).unwrap();
        let s = p.surface().unwrap();
        assert_eq!(s.node, 5);
        assert!(s.snap_offset() <= g.dx() / 2.0);
        assert_eq!(p.rank(), 6);
        let q = position_projector(&g, &RegionSpec::position(0.03).with_boundary_node(Membership::CBar)).unwrap();
        assert_eq!(q.rank(), 5);
        assert_eq!(s.restricted_nodes(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn boundary_outside_grid_is_rejected() {
        let g = GridModel::hard_wall(11, -1.0, 1.0).unwrap();
        assert!(matches!(
            position_projector(&g, &RegionSpec::position(1.5)),
            Err(PdxError::Domain(_))
        ));
    }

    #[test]
    fn momentum_projector_rank_and_eigenvector() {
        for n in [16usize, 17, 128] {
            let g = GridModel::periodic(n, -5.0, 5.0).unwrap();
            let p = momentum_projector(&g).unwrap();
            assert_eq!(p.rank(), (n - 1) / 2);
            let basis = PlaneWaveBasis::new(&g, 1.0).unwrap();
            let col = basis.modes.iter().position(|&k| k == 1).unwrap();
            let wave = basis.vectors.column(col).into_owned();
            assert!(crate::linalg::max_abs_vec(&(p.apply(&wave) - &wave)) <= 1e-12);
            let q = p.complement();
            assert!(max_abs(&(p.matrix() * q.matrix())) <= 1e-11);
        }
        let g = GridModel::periodic(128, -5.0, 5.0).unwrap();
        assert!(momentum_projector(&g).unwrap().idempotence_defect() <= 1e-11);
    }

    #[test]
    fn momentum_projector_needs_periodic_grid() {
        let g = GridModel::new(16, 0.0, 1.0, Boundary::HardWall).unwrap();
        assert!(matches!(momentum_projector(&g), Err(PdxError::Precondition(_))));
    }

    #[test]
    fn heisenberg_projector_properties() {
        let model = Model::free(GridModel::hard_wall(48, -6.0, 6.0).unwrap(), 1.0, 1.0).unwrap();
        let h = build_hamiltonian(&model.grid, &model.params, &model.potential).unwrap();
        let d = spectral_decompose(&h).unwrap();
        let p = position_projector(&model.grid, &RegionSpec::position(0.0)).unwrap();

        let u0 = propagator(&d, &model.params, 0.0).unwrap();
        assert_eq!(heisenberg_projector(&p, &u0).unwrap().matrix(), p.matrix());

        for t in [0.13, 0.8, -2.1] {
            let u = propagator(&d, &model.params, t).unwrap();
            let pt = heisenberg_projector(&p, &u).unwrap();
            let m = pt.matrix();
            assert!(max_abs_diff(&(m * m), m) <= 1e-10);
            let trace: Complex64 = m.diagonal().iter().sum();
            assert!((trace.re - p.rank() as f64).abs() <= 1e-9);
            let spectrum = spectral_decompose(&pt).unwrap();
            assert!(spectrum.eigenvalues().iter().all(|&l| l.abs() <= 1e-9 || (l - 1.0).abs() <= 1e-9));
        }
    }

    #[test]
    fn heisenberg_projector_dimension_mismatch() {
        let g = GridModel::hard_wall(16, -1.0, 1.0).unwrap();
        let p = position_projector(&g, &RegionSpec::position(0.0)).unwrap();
        let u = PropagatorMatrix {
            matrix: identity(8),
            t_from: 0.0,
            t_to: 0.0,
        };
        assert!(matches!(heisenberg_projector(&p, &u), Err(PdxError::Dimension { .. })));
    }
}

//! Path decomposition of quantum propagators on a 1-D grid.
//!
//! A propagator `U(t'', t')` is split by the first time its paths cross a
//! surface `Sigma`: unrestricted evolution from `Sigma` composed with the flux of
//! the evolution restricted to the starting side. The crate builds every piece on
//! a finite-difference grid (dense Hamiltonians, spectral propagators, projectors,
//! Zeno and Dirichlet restricted propagators), assembles the expansion in position
//! and momentum space, and checks it against closed-form kernels.
//!
//! ```
//! use pdx_core::{GridModel, Model, RegionSpec, QuadratureSpec};
//! use pdx_core::pdx::{pdx_assemble_opposite, PacketSpec, PdxProblem};
//!
//! let model = Model::free(GridModel::hard_wall(256, -20.0, 20.0)?, 1.0, 1.0)?;
//! let out = pdx_assemble_opposite(&PdxProblem {
//!     model,
//!     region: RegionSpec::position(0.0),
//!     initial: PacketSpec::new(-2.0, 0.5),
//!     target: PacketSpec::new(2.0, 0.5),
//!     t_start: 0.0,
//!     t_end: 1.0,
//!     quad: QuadratureSpec::simpson(65)?,
//! })?;
//! assert!(out.residual < 0.5);
//! # Ok::<(), pdx_core::PdxError>(())
//! ```

pub mod crossing;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod momentum;
pub mod oracles;
pub mod pdx;
pub mod projectors;
pub mod quadrature;
pub mod restricted;
pub mod spectral;
pub mod state;

pub use error::{PdxError, Result};
pub use grid::{Boundary, GridModel, Model, PhysicalParams, PotentialSpec};
pub use hamiltonian::{build_hamiltonian, HermitianMatrix};
pub use projectors::{
    heisenberg_projector, momentum_projector, position_projector, BasisKind, Membership, Projector, RegionSpec, Side, Surface,
};
pub use quadrature::{QuadratureSpec, Rule};
pub use restricted::{dirichlet_restricted, zeno_convergence_study, zeno_product, RestrictedPropagator};
pub use spectral::{propagator, spectral_decompose, PropagatorMatrix, SpectralDecomposition};

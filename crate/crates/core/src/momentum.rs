//! First crossings of `p = 0` for the harmonic oscillator.
//!
//! In the momentum representation the oscillator Hamiltonian reads
//! `-(hbar^2 m omega^2 / 2) d^2/dp^2 + p^2 / 2m`, a position-form oscillator with
//! mass `mu = 1 / (m omega^2)` and the same frequency. Momentum evolution is done
//! on a grid over `p` with that dual model, so the surface `p = 0` is an ordinary
//! Dirichlet wall.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};
use crate::grid::{Boundary, GridModel, Model, PhysicalParams};
use crate::hamiltonian::build_hamiltonian;
use crate::linalg::{max_abs, max_abs_diff, max_abs_vec, CMatrix};
use crate::pdx::{generalized_pdx_residual, FluxEngine, GeneralizedPdx, PacketSpec, LEAK_TOL};
use crate::projectors::{momentum_projector_from_basis, RegionSpec};
use crate::quadrature::QuadratureSpec;
use crate::restricted::{DirichletRestriction, RestrictedPropagator};
use crate::spectral::spectral_decompose;
use crate::state::PlaneWaveBasis;

/// Packet tails at the edge of an automatically sized momentum grid stay below this amplitude.
pub const EDGE_TAIL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualModel {
    pub original: PhysicalParams,
    /// `mu = 1 / (m omega^2)`.
    pub mass: f64,
    pub omega: f64,
    /// Position-form model whose coordinate is the momentum `p`.
    pub model: Model,
}

/// `(mu, Omega)` for the oscillator `(m, omega)`.
pub fn dual_parameters(params: &PhysicalParams) -> Result<(f64, f64)> {
    if !(params.omega > 0.0) {
        return Err(PdxError::Unsupported(
            "momentum crossings need omega > 0; for a free particle [V, P_C] vanishes".into(),
        ));
    }
    Ok((1.0 / (params.mass * params.omega * params.omega), params.omega))
}

pub fn dual_map(params: &PhysicalParams, grid: GridModel) -> Result<DualModel> {
    let (mu, big_omega) = dual_parameters(params)?;
    let model = Model::harmonic(grid, mu, params.hbar, big_omega)?;
    Ok(DualModel {
        original: *params,
        mass: mu,
        omega: big_omega,
        model,
    })
}

/// Hard-wall momentum grid with `p = 0` on a node, wide enough for every packet.
///
/// A packet of width `w` in the dual oscillator breathes between `w` and
/// `hbar / (mu Omega w)`; the grid reaches `max |p0| + 6.5` of the larger width.
pub fn auto_momentum_grid(params: &PhysicalParams, n_points: usize, packets: &[PacketSpec]) -> Result<GridModel> {
    let (mu, big_omega) = dual_parameters(params)?;
    if packets.is_empty() {
        return Err(PdxError::Domain("momentum grid sizing needs at least one packet".into()));
    }
    let p_max = packets
        .iter()
        .map(|pk| pk.center.abs() + 6.5 * pk.width.max(params.hbar / (mu * big_omega * pk.width)))
        .fold(0.0, f64::max);
    let dp = 2.0 * p_max / (n_points - 1) as f64;
    GridModel::anchored(n_points, dp, (n_points - 1) / 2, Boundary::HardWall)
}

/// `C = {p > 0}`, with the wall node at `p = 0`.
pub fn momentum_region() -> RegionSpec {
    RegionSpec::position(0.0)
}

/// Dirichlet-restricted momentum kernel on `p < 0`.
pub fn momentum_restricted_propagator(dual: &DualModel, t: f64) -> Result<RestrictedPropagator> {
    let mut r = DirichletRestriction::for_model(&dual.model, &momentum_region())?.propagator(t);
    r.region = crate::projectors::RegionSpec::momentum();
    Ok(r)
}

/// Dense momentum-representation propagator `g(p'', t | p', 0)` of the dual model.
pub fn momentum_kernel(dual: &DualModel, t: f64) -> Result<CMatrix> {
    let h = build_hamiltonian(&dual.model.grid, &dual.model.params, &dual.model.potential)?;
    Ok(spectral_decompose(&h)?.propagator_matrix(t, dual.model.params.hbar))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumProblem {
    pub dual: DualModel,
    pub initial: PacketSpec,
    pub target: PacketSpec,
    pub t_start: f64,
    pub t_end: f64,
    pub quad: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumPdxOutcome {
    pub lhs: Complex64,
    /// `resolved_sign * flux_integral`.
    pub rhs: Complex64,
    pub residual: f64,
    /// `int phi*(0) (i m omega^2 hbar / 2) d_p chi(0) dt_s` without the orientation factor.
    pub flux_integral: Complex64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub resolved_sign: f64,
    pub initial_leak: f64,
    pub edge_amplitude: f64,
    pub dp: f64,
    pub quad_nodes: usize,
}

fn edge_amplitude(psi: &crate::linalg::CVector) -> f64 {
    let n = psi.len();
    psi[0].norm().max(psi[n - 1].norm()) / max_abs_vec(psi)
}

/// Momentum-space expansion for `p' < 0 < p''`, with the orientation chosen by
/// the smaller residual.
pub fn momentum_pdx_residual(p: &MomentumProblem) -> Result<MomentumPdxOutcome> {
    if !(p.initial.center < 0.0 && p.target.center > 0.0) {
        return Err(PdxError::Domain(format!(
            "momentum packets must sit at p' < 0 < p'', got {} and {}",
            p.initial.center, p.target.center
        )));
    }
    if !(p.t_end >= p.t_start) {
        return Err(PdxError::Domain(format!(
            "times must satisfy t'' >= t', got [{}, {}]",
            p.t_start, p.t_end
        )));
    }
    let grid = &p.dual.model.grid;
    for pk in [&p.initial, &p.target] {
        if !(pk.width > 2.0 * grid.dx()) {
            return Err(PdxError::Precondition(format!(
                "packet width {} must exceed 2 dp = {}",
                pk.width,
                2.0 * grid.dx()
            )));
        }
    }
    let region = momentum_region();
    let engine = FluxEngine::new(&p.dual.model, &region)?;
    let i = p.initial.sample(grid)?;
    let f = p.target.sample(grid)?;
    let initial_leak = engine.mass_in_c(&i);
    if initial_leak > LEAK_TOL {
        return Err(PdxError::Precondition(format!(
            "initial packet leaks mass {initial_leak:.3e} across p = 0 (limit {LEAK_TOL:.0e})"
        )));
    }
    let lhs = engine.full_element(&f, &i, p.t_end - p.t_start);
    let flux = engine.flux_integral(&f, &i, p.t_start, p.t_end, &p.quad)?;
    let residual_plus = (lhs - flux).norm() / lhs.norm();
    let residual_minus = (lhs + flux).norm() / lhs.norm();
    let resolved_sign = if residual_minus <= residual_plus { -1.0 } else { 1.0 };
    let rhs = resolved_sign * flux;
    Ok(MomentumPdxOutcome {
        lhs,
        rhs,
        residual: residual_plus.min(residual_minus),
        flux_integral: flux,
        residual_plus,
        residual_minus,
        resolved_sign,
        initial_leak,
        edge_amplitude: edge_amplitude(&i).max(edge_amplitude(&f)),
        dp: grid.dx(),
        quad_nodes: p.quad.n_nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumCrossCheck {
    pub dual: MomentumPdxOutcome,
    pub generalized: GeneralizedPdx,
    /// `|rhs_dual - rhs_generalized| / |lhs_dual|`.
    pub route_gap: f64,
    /// `|lhs_dual - lhs_original| / |lhs_dual|`.
    pub lhs_gap: f64,
    pub original_points: usize,
}

/// The same configuration through the operator identity on a periodic position
/// grid with the positive-momentum projector.
pub fn momentum_cross_check(p: &MomentumProblem, original_points: usize, original_dx: f64) -> Result<MomentumCrossCheck> {
    let dual = momentum_pdx_residual(p)?;
    let params = p.dual.original;
    let half = 0.5 * original_dx * (original_points - 1) as f64;
    let grid = GridModel::new(original_points, -half, half, Boundary::Periodic)?;
    let model = Model::harmonic(grid, params.mass, params.hbar, params.omega)?;
    let basis = PlaneWaveBasis::new(&grid, params.hbar)?;
    let p_c = momentum_projector_from_basis(&basis)?;
    let i = basis.momentum_packet(p.initial.center, p.initial.width)?;
    let f = basis.momentum_packet(p.target.center, p.target.width)?;
    let generalized = generalized_pdx_residual(&model, &p_c, p.t_start, p.t_end, &p.quad, &i, Some(&f))?;
    let lhs_o = generalized.lhs_smeared.expect("target supplied");
    let rhs_o = generalized.rhs_smeared.expect("target supplied");
    Ok(MomentumCrossCheck {
        route_gap: (dual.rhs - rhs_o).norm() / dual.lhs.norm(),
        lhs_gap: (dual.lhs - lhs_o).norm() / dual.lhs.norm(),
        dual,
        generalized,
        original_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityFidelity {
    /// `max |F^dagger U_x F - U_dual|` over the whole matrix.
    pub max_norm: f64,
    /// Same difference applied to a low-energy coherent packet, max-norm of the vector.
    pub packet_max_norm: f64,
    pub n_points: usize,
    pub dx: f64,
    pub dp: f64,
}

/// Compares the DFT-conjugated original propagator with the dual-model propagator
/// on matched periodic grids (`dx dp = 2 pi hbar / n`, equal resolution in natural units).
pub fn duality_fidelity(params: &PhysicalParams, n_points: usize, t: f64, packet_center: f64) -> Result<DualityFidelity> {
    let (mu, big_omega) = dual_parameters(params)?;
    let hbar = params.hbar;
    let dx = (2.0 * std::f64::consts::PI * hbar / (n_points as f64 * params.mass * params.omega)).sqrt();
    let origin = (n_points - 1) / 2;
    let x_grid = GridModel::anchored(n_points, dx, origin, Boundary::Periodic)?;
    let basis = PlaneWaveBasis::new(&x_grid, hbar)?;
    let dp = basis.momenta[1] - basis.momenta[0];
    let p_grid = GridModel::anchored(n_points, dp, origin, Boundary::Periodic)?;
    let original = Model::harmonic(x_grid, params.mass, hbar, params.omega)?;
    let dual = Model::harmonic(p_grid, mu, hbar, big_omega)?;

    let u_x = {
        let h = build_hamiltonian(&original.grid, &original.params, &original.potential)?;
        spectral_decompose(&h)?.propagator_matrix(t, hbar)
    };
    let u_p = basis.vectors.adjoint() * u_x * &basis.vectors;
    let u_dual = {
        let h = build_hamiltonian(&dual.grid, &dual.params, &dual.potential)?;
        spectral_decompose(&h)?.propagator_matrix(t, hbar)
    };
    let width = (hbar * params.mass * params.omega).sqrt();
    let packet = PacketSpec::new(packet_center, width).sample(&p_grid)?;
    let gap = (&u_p - &u_dual) * packet;
    Ok(DualityFidelity {
        max_norm: max_abs_diff(&u_p, &u_dual),
        packet_max_norm: max_abs(&CMatrix::from_column_slice(gap.len(), 1, gap.as_slice())),
        n_points,
        dx,
        dp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn dual_mass_algebra() {
        assert_eq!(dual_parameters(&unit()).unwrap(), (1.0, 1.0));
        let (mu, om) = dual_parameters(&PhysicalParams::new(1.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!((mu, om), (0.25, 2.0));
        assert!(matches!(
            dual_parameters(&PhysicalParams::new(1.0, 1.0, 0.0).unwrap()),
            Err(PdxError::Unsupported(_))
        ));
    }

    #[test]
    fn dual_spectrum_matches_oscillator_levels() {
        for (m, w) in [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0)] {
            let params = PhysicalParams::new(m, 1.0, w).unwrap();
            let grid = auto_momentum_grid(&params, 1024, &[PacketSpec::new(0.0, (m * w).sqrt())]).unwrap();
            let dual = dual_map(&params, grid).unwrap();
            let h = build_hamiltonian(&dual.model.grid, &dual.model.params, &dual.model.potential).unwrap();
            let s = spectral_decompose(&h).unwrap();
            for k in 0..5 {
                let exact = w * (k as f64 + 0.5);
                assert!(
                    (s.eigenvalues()[k] - exact).abs() <= 1e-3,
                    "m {m} w {w} level {k}: {}",
                    s.eigenvalues()[k]
                );
            }
        }
    }

    #[test]
    fn auto_grid_puts_zero_on_a_node() {
        let g = auto_momentum_grid(&unit(), 512, &[PacketSpec::new(-1.5, 0.4), PacketSpec::new(1.5, 0.4)]).unwrap();
        assert_eq!(g.node(255), 0.0);
        let psi = PacketSpec::new(-1.5, 0.4).sample(&g).unwrap();
        assert!(edge_amplitude(&psi) <= EDGE_TAIL);
    }

    #[test]
    fn restricted_momentum_kernel() {
        let params = unit();
        let g = auto_momentum_grid(&params, 128, &[PacketSpec::new(-1.5, 0.5)]).unwrap();
        let dual = dual_map(&params, g).unwrap();
        let wall = g.nearest_node(0.0);
        let r = momentum_restricted_propagator(&dual, 0.4).unwrap();
        assert!(r.matrix.row(wall).iter().all(|z| z.norm() == 0.0));
        let r0 = momentum_restricted_propagator(&dual, 0.0).unwrap();
        let expected = CMatrix::from_fn(128, 128, |i, j| {
            if i == j && i < wall {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert_eq!(r0.matrix, expected);
        let a = momentum_restricted_propagator(&dual, 0.3).unwrap().matrix;
        let b = momentum_restricted_propagator(&dual, 0.2).unwrap().matrix;
        let ab = momentum_restricted_propagator(&dual, 0.5).unwrap().matrix;
        assert!(max_abs_diff(&ab, &(&b * &a)) <= 1e-11);
    }

    #[test]
    fn momentum_kernel_is_unitary() {
        let params = PhysicalParams::new(2.0, 1.0, 0.5).unwrap();
        let g = auto_momentum_grid(&params, 128, &[PacketSpec::new(-1.0, 0.5)]).unwrap();
        let u = momentum_kernel(&dual_map(&params, g).unwrap(), 0.9).unwrap();
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(128)) <= 1e-11);
    }

    fn problem(m: f64, w: f64, n: usize, nq: usize, t_end: f64, width: f64) -> MomentumProblem {
        let params = PhysicalParams::new(m, 1.0, w).unwrap();
        let initial = PacketSpec::new(-1.5, width);
        let target = PacketSpec::new(1.5, width);
        let grid = auto_momentum_grid(&params, n, &[initial, target]).unwrap();
        MomentumProblem {
            dual: dual_map(&params, grid).unwrap(),
            initial,
            target,
            t_start: 0.0,
            t_end,
            quad: QuadratureSpec::simpson(nq).unwrap(),
        }
    }

    #[test]
    fn momentum_expansion_benchmark() {
        let out = momentum_pdx_residual(&problem(1.0, 1.0, 512, 129, 1.0, 0.4)).unwrap();
        assert!(out.residual <= 5e-2, "{out:?}");
        assert_eq!(out.resolved_sign, -1.0);
    }

    #[test]
    fn no_time_to_cross_in_momentum() {
        let out = momentum_pdx_residual(&problem(1.0, 1.0, 512, 33, 1e-3, 0.25)).unwrap();
        assert!(out.lhs.norm() <= 1e-8 && out.rhs.norm() <= 1e-8, "{out:?}");
    }

    #[test]
    fn duality_fidelity_is_measured() {
        let d = duality_fidelity(&unit(), 128, 0.7, 0.5).unwrap();
        assert!(d.max_norm.is_finite() && d.packet_max_norm <= d.max_norm + 1e-15);
        assert!((d.dx - d.dp).abs() <= 1e-12);
    }

    #[test]
    fn duality_gap_on_low_energy_packets_shrinks_with_resolution() {
        let coarse = duality_fidelity(&unit(), 64, 0.7, 0.5).unwrap();
        let fine = duality_fidelity(&unit(), 256, 0.7, 0.5).unwrap();
        assert!(fine.packet_max_norm < 0.25 * coarse.packet_max_norm, "{coarse:?} {fine:?}");
        assert!(fine.packet_max_norm <= 2e-3);
    }

    #[test]
    fn dual_route_agrees_with_operator_route() {
        let c = momentum_cross_check(&problem(1.0, 1.0, 512, 129, 1.0, 0.4), 256, 0.15).unwrap();
        assert!(c.route_gap <= 0.1 && c.dual.residual <= 5e-2, "{c:?}");
        assert!(c.generalized.smeared_residual.unwrap() <= 5e-2);
    }
}

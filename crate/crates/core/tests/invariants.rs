use pdx_core::crossing::{CrossingAnalyzer, CrossingWindow};
use pdx_core::linalg::max_abs_vec;
use pdx_core::oracles::{euclidean_pdx_check, image_restricted_kernel, OracleParams, Sector};
use pdx_core::pdx::{crossing_matrix_element, resolution_of_identity, SlicingSpec};
use pdx_core::state::gaussian_packet;
use pdx_core::{
    build_hamiltonian, position_projector, propagator, spectral_decompose, Boundary, GridModel, Model, QuadratureSpec, RegionSpec,
};
use proptest::prelude::*;

fn boundary_strategy() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::HardWall), Just(Boundary::Periodic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn crossing_classes_telescope(
        n in 8usize..40,
        boundary in boundary_strategy(),
        dt in 0.01f64..0.5,
        slices in 1usize..12,
        wall in -2.0f64..2.0,
    ) {
        let grid = GridModel::new(n, -5.0, 5.0, boundary).unwrap();
        let model = Model::free(grid, 1.0, 1.0).unwrap();
        let h = build_hamiltonian(&model.grid, &model.params, &model.potential).unwrap();
        let decomp = spectral_decompose(&h).unwrap();
        let u_dt = propagator(&decomp, &model.params, dt).unwrap();
        let p_c = position_projector(&grid, &RegionSpec::position(wall)).unwrap();
        let slicing = SlicingSpec::new(0.0, dt * slices as f64, slices).unwrap();
        let terms = resolution_of_identity(&p_c, &u_dt, &slicing).unwrap();
        prop_assert_eq!(terms.term_count(), slices + 2);
        prop_assert!(terms.identity_residual() <= 1e-10, "{}", terms.identity_residual());
    }

    #[test]
    fn class_amplitudes_add_to_the_full_amplitude(
        n in 16usize..48,
        dt in 0.05f64..0.4,
        slices in 2usize..10,
    ) {
        let grid = GridModel::hard_wall(n, -6.0, 6.0).unwrap();
        let model = Model::free(grid, 1.0, 1.0).unwrap();
        let h = build_hamiltonian(&model.grid, &model.params, &model.potential).unwrap();
        let u_dt = propagator(&spectral_decompose(&h).unwrap(), &model.params, dt).unwrap();
        let p_c = position_projector(&grid, &RegionSpec::position(0.0)).unwrap();
        let terms = resolution_of_identity(&p_c, &u_dt, &SlicingSpec::new(0.0, dt * slices as f64, slices).unwrap()).unwrap();
        let i = gaussian_packet(&grid, -2.0, 0.7, 1.0).unwrap();
        let f = gaussian_packet(&grid, 2.0, 0.7, 0.0).unwrap();
        let a = crossing_matrix_element(&terms, &f, &i).unwrap();
        prop_assert!(a.residual <= 1e-10);
        let split = slices / 2 + 1;
        let parts = a.partial_sum(1..split) + a.partial_sum(split..slices + 1);
        prop_assert!((parts - a.crossing_sum()).norm() <= 1e-12);
    }

    #[test]
    fn image_kernel_vanishes_on_the_wall(
        x_from in -5.0f64..-0.1,
        wall in -0.05f64..0.05,
        t in 0.05f64..3.0,
        euclidean in any::<bool>(),
    ) {
        let p = OracleParams::new(1.0, 1.0, 0.0).unwrap();
        let sector = if euclidean { Sector::Euclidean } else { Sector::RealTime };
        let k = image_restricted_kernel(&p, wall, x_from, t, wall, sector).unwrap();
        prop_assert!(k.norm() <= 1e-12, "{k}");
    }

    #[test]
    fn euclidean_first_passage_reproduces_the_heat_kernel(
        d in 0.1f64..2.0,
        x_from in -3.0f64..-0.3,
        x_to in 0.3f64..3.0,
        tau in 0.2f64..3.0,
    ) {
        let p = OracleParams::from_diffusion(d).unwrap();
        let c = euclidean_pdx_check(&p, x_from, 0.0, x_to, tau).unwrap();
        prop_assert!(c.residual <= 1e-6, "{c:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn crossing_windows_are_additive_and_never_cross_is_bounded(
        center in -4.0f64..-2.5,
        wavenumber in 0.0f64..2.5,
        split in 0.2f64..0.8,
        t_final in 0.5f64..1.5,
    ) {
        let grid = GridModel::hard_wall(128, -10.0, 10.0).unwrap();
        let model = Model::free(grid, 1.0, 1.0).unwrap();
        let psi0 = gaussian_packet(&grid, center, 0.5, wavenumber).unwrap();
        let analyzer = CrossingAnalyzer::new(&model, &RegionSpec::position(0.0), &psi0, 0.0).unwrap();
        let quad = QuadratureSpec::trapezoid(65).unwrap();
        let t_mid = split * t_final;
        let whole = analyzer.amplitude(&CrossingWindow::full(0.0, t_final).unwrap(), t_final, &quad).unwrap();
        let left = analyzer.amplitude(&CrossingWindow::new(0.0, t_mid, 0.0, t_final).unwrap(), t_final, &quad).unwrap();
        let right = analyzer.amplitude(&CrossingWindow::new(left.t2_used, t_final, 0.0, t_final).unwrap(), t_final, &quad).unwrap();
        let gap = max_abs_vec(&(&left.values + &right.values - &whole.values));
        prop_assert!(gap <= 1e-10 * max_abs_vec(&whole.values).max(1.0), "{gap}");
        let p_never = analyzer.never_cross(t_final).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p_never), "{p_never}");
    }
}

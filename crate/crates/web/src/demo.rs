use pdx_core::crossing::CrossingAnalyzer;
use pdx_core::oracles::{brownian_first_passage_density, euclidean_pdx_check, first_passage_mode, wall_flux_density, OracleParams};
use pdx_core::state::gaussian_packet;
use pdx_core::{zeno_convergence_study, GridModel, Model, PdxError, QuadratureSpec, RegionSpec, Result};

const X_HALF: f64 = 20.0;

fn check_samples(samples: usize) -> Result<()> {
    if !(2..=400).contains(&samples) {
        return Err(PdxError::Domain(format!("samples must lie in 2..=400, got {samples}")));
    }
    Ok(())
}

fn free_model(n_points: usize) -> Result<Model> {
    if n_points > 768 {
        return Err(PdxError::Domain(format!("at most 768 grid points in the browser, got {n_points}")));
    }
    Model::free(GridModel::hard_wall(n_points, -X_HALF, X_HALF)?, 1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub horizons: Vec<f64>,
    pub p_cross: Vec<f64>,
    pub p_never: Vec<f64>,
    pub deviation: Vec<f64>,
}

pub fn crossing_distribution(center: f64, width: f64, wavenumber: f64, n_points: usize, t_max: f64, samples: usize) -> Result<Distribution> {
    check_samples(samples)?;
    if !(t_max > 0.0) {
        return Err(PdxError::Domain(format!("t_max must be positive, got {t_max}")));
    }
    let model = free_model(n_points)?;
    let psi0 = gaussian_packet(&model.grid, center, width, wavenumber)?;
    let analyzer = CrossingAnalyzer::new(&model, &RegionSpec::position(0.0), &psi0, 0.0)?;
    let horizons: Vec<f64> = (1..=samples).map(|k| t_max * k as f64 / samples as f64).collect();
    let rows = analyzer.distribution(&horizons, &QuadratureSpec::simpson(65)?)?;
    Ok(Distribution {
        horizons,
        p_cross: rows.iter().map(|r| r.p_cross).collect(),
        p_never: rows.iter().map(|r| r.p_never).collect(),
        deviation: rows.iter().map(|r| r.deviation).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub slices: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

pub fn zeno_convergence(n_points: usize, total_time: f64, k_min: usize, k_max: usize) -> Result<Convergence> {
    if k_min == 0 || k_max > 4096 {
        return Err(PdxError::Domain(format!("slice counts must lie in 1..=4096, got {k_min}..{k_max}")));
    }
    let k_list: Vec<usize> = std::iter::successors(Some(k_min), |k| Some(k * 2)).take_while(|&k| k <= k_max).collect();
    let table = zeno_convergence_study(&free_model(n_points)?, &RegionSpec::position(0.0), total_time, &k_list)?;
    Ok(Convergence {
        slices: table.rows.iter().map(|r| r.slices as f64).collect(),
        errors: table.errors(),
        orders: table.rows.iter().map(|r| r.empirical_order.unwrap_or(f64::NAN)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstPassage {
    pub taus: Vec<f64>,
    pub density: Vec<f64>,
    pub wall_flux: Vec<f64>,
    pub mode: f64,
    pub expansion_residual: f64,
}

pub fn first_passage(x_from: f64, wall: f64, x_to: f64, diffusion: f64, tau_max: f64, samples: usize) -> Result<FirstPassage> {
    check_samples(samples)?;
    let p = OracleParams::from_diffusion(diffusion)?;
    let taus: Vec<f64> = (1..=samples).map(|k| tau_max * k as f64 / samples as f64).collect();
    let density = taus
        .iter()
        .map(|&t| brownian_first_passage_density(x_from, wall, t, diffusion))
        .collect::<Result<Vec<_>>>()?;
    let wall_flux = taus.iter().map(|&t| wall_flux_density(&p, x_from, wall, t)).collect::<Result<Vec<_>>>()?;
    let check = euclidean_pdx_check(&p, x_from, wall, x_to, tau_max)?;
    Ok(FirstPassage {
        taus,
        density,
        wall_flux,
        mode: first_passage_mode(x_from, wall, diffusion),
        expansion_residual: check.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_columns_line_up() {
        let d = crossing_distribution(-4.0, 1.0, 2.0, 192, 2.0, 4).unwrap();
        assert_eq!(d.horizons, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(d.p_cross.len(), 4);
        assert!(d.p_never.iter().all(|&p| p <= 1.0 + 1e-12));
        for k in 0..4 {
            assert!((d.p_cross[k] + d.p_never[k] - 1.0 - d.deviation[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn zeno_errors_fall() {
        let c = zeno_convergence(96, 0.5, 8, 64).unwrap();
        assert_eq!(c.slices, vec![8.0, 16.0, 32.0, 64.0]);
        assert!(c.errors.windows(2).all(|w| w[1] < w[0]));
        assert!(c.orders[0].is_nan() && c.orders[1] > 0.0);
    }

    #[test]
    fn first_passage_density_matches_wall_flux() {
        let f = first_passage(-1.0, 0.0, 1.0, 0.5, 3.0, 50).unwrap();
        for (a, b) in f.density.iter().zip(&f.wall_flux) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }
        assert!(f.expansion_residual <= 1e-6);
        assert!((f.mode - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn inputs_are_bounded() {
        assert!(crossing_distribution(-4.0, 1.0, 2.0, 4096, 1.0, 4).is_err());
        assert!(first_passage(-1.0, 0.0, 1.0, 0.5, 1.0, 1).is_err());
        assert!(zeno_convergence(64, 0.5, 0, 8).is_err());
    }
}

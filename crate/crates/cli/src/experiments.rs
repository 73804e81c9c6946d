//! Dispatch from a validated config to the numerics, and from their results to
//! gated report entries.

use pdx_core::crossing::CrossingAnalyzer;
use pdx_core::linalg::CVector;
use pdx_core::momentum::{auto_momentum_grid, dual_map, momentum_pdx_residual, MomentumProblem};
use pdx_core::oracles::{
    brownian_first_passage_density, euclidean_pdx_check, first_passage_normalization, image_restricted_kernel, wall_flux_density,
    OracleParams, Sector,
};
use pdx_core::pdx::{
    crossing_matrix_element, generalized_pdx_residual, pdx_assemble_opposite, pdx_assemble_same_side, resolution_of_identity, PdxOutcome,
    PdxProblem, SlicingSpec,
};
use pdx_core::state::PlaneWaveBasis;
use pdx_core::{
    build_hamiltonian, momentum_projector, position_projector, propagator, spectral_decompose, zeno_convergence_study, Projector,
};
use rayon::prelude::*;

use crate::config::{ExperimentKind, RunConfig};
use crate::error::{at, CliError};
use crate::report::{ExperimentResult, Gate, Table};

/// Edge amplitude, relative to the peak, above which a momentum run warns.
pub const WALL_AMPLITUDE_WARN: f64 = 1e-6;
/// Relative bound on `f = D d_n g_E^(r)` at the wall.
pub const FLUX_IDENTITY_TOL: f64 = 1e-8;
/// Target-packet mass outside `C` above which a position run warns.
pub const TARGET_LEAK_WARN: f64 = 1e-6;

/// `(x_from, wall, x_to, tau, D)` cases for the Euclidean first-passage check.
pub const EUCLIDEAN_CASES: [(f64, f64, f64, f64, f64); 10] = [
    (-1.0, 0.0, 1.0, 1.0, 0.5),
    (-0.5, 0.0, 0.5, 0.2, 0.5),
    (-2.0, 0.0, 1.0, 3.0, 0.5),
    (-1.0, 0.5, 2.0, 1.0, 1.0),
    (-0.3, 0.0, 0.3, 0.05, 0.25),
    (-3.0, -1.0, 0.5, 2.0, 2.0),
    (1.0, 0.0, -1.0, 1.0, 0.5),
    (-1.5, 0.0, 0.1, 0.7, 0.1),
    (-0.1, 0.0, 2.5, 1.5, 0.75),
    (-4.0, 0.0, 4.0, 10.0, 1.5),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Sweep,
    Crossing,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Crossing => "crossing",
            Command::Oracle => "oracle",
        }
    }

    /// Experiment assumed when the config does not name one.
    pub fn default_experiment(self) -> Option<ExperimentKind> {
        match self {
            Command::Verify => None,
            Command::Sweep => Some(ExperimentKind::ZenoConvergence),
            Command::Crossing => Some(ExperimentKind::CrossingDistribution),
            Command::Oracle => Some(ExperimentKind::OracleSuite),
        }
    }

    pub fn accepts(self, kind: ExperimentKind) -> bool {
        use ExperimentKind::*;
        match self {
            Command::Verify => true,
            Command::Sweep => matches!(kind, PdxPosition | PdxSameSide | PdxGeneralized | PdxMomentum | ZenoConvergence),
            Command::Crossing => kind == CrossingDistribution,
            Command::Oracle => kind == OracleSuite,
        }
    }

    fn accepted(self) -> String {
        ExperimentKind::ALL
            .iter()
            .filter(|k| self.accepts(**k))
            .map(|k| k.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Runs the experiments `command` implies for `cfg`, in a fixed order.
pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Vec<ExperimentResult>, CliError> {
    if !command.accepts(cfg.experiment) {
        return Err(CliError::WrongCommand {
            command: command.name(),
            experiment: cfg.experiment,
            expected: command.accepted(),
        });
    }
    match (command, cfg.experiment) {
        (Command::Sweep, ExperimentKind::ZenoConvergence) | (Command::Verify, _) | (Command::Crossing, _) | (Command::Oracle, _) => {
            Ok(vec![run_experiment(cfg)?])
        }
        (Command::Sweep, _) => run_sweep(cfg),
    }
}

/// One experiment at the resolution the config gives.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    match cfg.experiment {
        ExperimentKind::ResolutionIdentity => resolution_identity(cfg),
        ExperimentKind::PdxPosition | ExperimentKind::PdxSameSide => position_expansion(cfg),
        ExperimentKind::PdxGeneralized => generalized(cfg),
        ExperimentKind::PdxMomentum => momentum(cfg),
        ExperimentKind::ZenoConvergence => zeno(cfg),
        ExperimentKind::CrossingDistribution => crossing(cfg),
        ExperimentKind::OracleSuite => oracle_suite(cfg),
    }
}

fn projector_and_packets(cfg: &RunConfig, kind: ExperimentKind) -> Result<(Projector, CVector, CVector), CliError> {
    let grid = cfg.grid().map_err(at(kind, "building the grid"))?;
    let s = &cfg.numeric.smearing;
    if cfg.is_momentum() {
        let basis = PlaneWaveBasis::new(&grid, cfg.model.params.hbar).map_err(at(kind, "building plane waves"))?;
        let p_c = momentum_projector(&grid).map_err(at(kind, "building the momentum projector"))?;
        let i = basis
            .momentum_packet(s.initial.center, s.initial.width)
            .map_err(at(kind, "sampling the initial packet"))?;
        let f = basis
            .momentum_packet(s.target.center, s.target.width)
            .map_err(at(kind, "sampling the target packet"))?;
        Ok((p_c, i, f))
    } else {
        let p_c = position_projector(&grid, &cfg.region_spec()).map_err(at(kind, "building the position projector"))?;
        let i = s.initial.sample(&grid).map_err(at(kind, "sampling the initial packet"))?;
        let f = s.target.sample(&grid).map_err(at(kind, "sampling the target packet"))?;
        Ok((p_c, i, f))
    }
}

fn resolution_identity(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let model = cfg.model().map_err(at(kind, "building the model"))?;
    let sl = &cfg.numeric.slicing;
    let slicing = SlicingSpec::new(sl.t_start, sl.t_end, sl.n_slices).map_err(at(kind, "slicing the interval"))?;
    let h = build_hamiltonian(&model.grid, &model.params, &model.potential).map_err(at(kind, "building the Hamiltonian"))?;
    let decomp = spectral_decompose(&h).map_err(at(kind, "diagonalizing the Hamiltonian"))?;
    let u_dt = propagator(&decomp, &model.params, slicing.delta_t()).map_err(at(kind, "building the step propagator"))?;
    let (p_c, i, f) = projector_and_packets(cfg, kind)?;
    let terms = resolution_of_identity(&p_c, &u_dt, &slicing).map_err(at(kind, "summing the crossing classes"))?;
    let amps = crossing_matrix_element(&terms, &f, &i).map_err(at(kind, "smearing the crossing classes"))?;

    let mut r = ExperimentResult::new(kind, kind.name());
    let residual = terms.identity_residual();
    r.scalar("identity_residual", residual);
    r.scalar("completeness_residual", amps.residual);
    r.scalar("term_count", terms.term_count() as f64);
    r.scalar("delta_t", slicing.delta_t());
    let mut table = Table::new("classes", &["class", "t", "re", "im"]);
    let times = slicing.nodes();
    table.push_values(&[0.0, sl.t_start, amps.first.re, amps.first.im]);
    for (k, a) in amps.crossing.iter().enumerate() {
        table.push_values(&[(k + 1) as f64, times[k + 1], a.re, a.im]);
    }
    table.push_values(&[(sl.n_slices + 1) as f64, sl.t_end, amps.never.re, amps.never.im]);
    r.tables.push(table);
    r.gates.push(Gate::at_most(
        "identity_residual",
        "pdx-engine: crossing classes sum to the identity",
        residual,
        cfg.numeric.tolerances.identity,
    ));
    r.gates.push(Gate::at_most(
        "completeness_residual",
        "pdx-engine: class amplitudes sum to the full matrix element",
        amps.residual,
        cfg.numeric.tolerances.completeness,
    ));
    r.warnings.extend(amps.warnings);
    Ok(r)
}

fn record_outcome(r: &mut ExperimentResult, out: &PdxOutcome) {
    r.scalar("lhs_re", out.lhs.re);
    r.scalar("lhs_im", out.lhs.im);
    r.scalar("rhs_re", out.rhs.re);
    r.scalar("rhs_im", out.rhs.im);
    r.scalar("residual", out.residual);
    r.scalar("sign", out.sign);
    r.scalar("initial_leak", out.initial_leak);
    r.scalar("target_leak", out.target_leak);
    r.scalar("snap_offset", out.snap_offset);
    r.scalar("dx", out.dx);
    r.scalar("quad_nodes", out.quad_nodes as f64);
}

fn position_expansion(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let sl = &cfg.numeric.slicing;
    let problem = PdxProblem {
        model: cfg.model().map_err(at(kind, "building the model"))?,
        region: cfg.region_spec(),
        initial: cfg.numeric.smearing.initial,
        target: cfg.numeric.smearing.target,
        t_start: sl.t_start,
        t_end: sl.t_end,
        quad: cfg.numeric.quadrature,
    };
    let out = if kind == ExperimentKind::PdxSameSide {
        pdx_assemble_same_side(&problem)
    } else {
        pdx_assemble_opposite(&problem)
    }
    .map_err(at(kind, "assembling the expansion"))?;
    let mut r = ExperimentResult::new(kind, kind.name());
    record_outcome(&mut r, &out);
    r.gates.push(Gate::at_most(
        "residual",
        "pdx-engine: smeared flux expansion matches the direct amplitude",
        out.residual,
        cfg.numeric.tolerances.residual,
    ));
    if out.target_leak > TARGET_LEAK_WARN {
        r.warnings.push(format!(
            "target packet carries mass {:.3e} on the wrong side of the surface",
            out.target_leak
        ));
    }
    Ok(r)
}

fn generalized(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let model = cfg.model().map_err(at(kind, "building the model"))?;
    let (p_c, i, f) = projector_and_packets(cfg, kind)?;
    let sl = &cfg.numeric.slicing;
    let g = generalized_pdx_residual(&model, &p_c, sl.t_start, sl.t_end, &cfg.numeric.quadrature, &i, Some(&f))
        .map_err(at(kind, "assembling the operator identity"))?;
    let smeared = g.smeared_residual.unwrap_or(f64::INFINITY);
    let mut r = ExperimentResult::new(kind, kind.name());
    r.scalar("residual", smeared);
    r.scalar("operator_residual", g.residual);
    r.scalar("abs_residual", g.abs_residual);
    r.scalar("dx", model.grid.dx());
    r.scalar("quad_nodes", g.quad_nodes as f64);
    if let (Some(l), Some(rh)) = (g.lhs_smeared, g.rhs_smeared) {
        r.scalar("lhs_re", l.re);
        r.scalar("lhs_im", l.im);
        r.scalar("rhs_re", rh.re);
        r.scalar("rhs_im", rh.im);
    }
    r.gates.push(Gate::at_most(
        "residual",
        "pdx-engine: commutator form of the expansion matches the direct amplitude",
        smeared,
        cfg.numeric.tolerances.residual,
    ));
    Ok(r)
}

fn momentum(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let params = cfg.params().map_err(at(kind, "reading the parameters"))?;
    let s = &cfg.numeric.smearing;
    let grid =
        auto_momentum_grid(&params, cfg.model.grid.n_points, &[s.initial, s.target]).map_err(at(kind, "sizing the momentum grid"))?;
    let sl = &cfg.numeric.slicing;
    let problem = MomentumProblem {
        dual: dual_map(&params, grid).map_err(at(kind, "mapping to the dual model"))?,
        initial: s.initial,
        target: s.target,
        t_start: sl.t_start,
        t_end: sl.t_end,
        quad: cfg.numeric.quadrature,
    };
    let out = momentum_pdx_residual(&problem).map_err(at(kind, "assembling the momentum expansion"))?;
    let mut r = ExperimentResult::new(kind, kind.name());
    r.scalar("lhs_re", out.lhs.re);
    r.scalar("lhs_im", out.lhs.im);
    r.scalar("rhs_re", out.rhs.re);
    r.scalar("rhs_im", out.rhs.im);
    r.scalar("residual", out.residual);
    r.scalar("residual_plus", out.residual_plus);
    r.scalar("residual_minus", out.residual_minus);
    r.scalar("resolved_sign", out.resolved_sign);
    r.scalar("initial_leak", out.initial_leak);
    r.scalar("edge_amplitude", out.edge_amplitude);
    r.scalar("dx", out.dp);
    r.scalar("quad_nodes", out.quad_nodes as f64);
    r.gates.push(Gate::at_most(
        "residual",
        "momentum-pdx: dual-model flux expansion matches the direct amplitude",
        out.residual,
        cfg.numeric.tolerances.residual,
    ));
    if out.edge_amplitude > WALL_AMPLITUDE_WARN {
        r.warnings.push(format!(
            "evolved packet reaches the momentum-grid edge with relative amplitude {:.3e} (above {WALL_AMPLITUDE_WARN:e}); enlarge model.grid.n_points or narrow the packets",
            out.edge_amplitude
        ));
    }
    Ok(r)
}

fn zeno(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let model = cfg.model().map_err(at(kind, "building the model"))?;
    let sl = &cfg.numeric.slicing;
    let k_list = &cfg.numeric.zeno.k_list;
    let study =
        zeno_convergence_study(&model, &cfg.region_spec(), sl.t_end - sl.t_start, k_list).map_err(at(kind, "running the Zeno products"))?;
    let mut r = ExperimentResult::new(kind, kind.name());
    let mut table = Table::new("convergence", &["K", "delta_t", "error", "order"]);
    for row in &study.rows {
        table.push(vec![
            Some(row.slices as f64),
            Some(row.delta_t),
            Some(row.frobenius_error),
            row.empirical_order,
        ]);
    }
    r.tables.push(table);
    let errors = study.errors();
    let rises = errors.windows(2).filter(|w| !(w[1] < w[0])).count();
    r.gates.push(Gate::at_most(
        "non_decreasing_steps",
        "restricted-propagation: Zeno error decreases strictly with K",
        rises as f64,
        0.0,
    ));
    let mut worst: Option<f64> = None;
    for (a, &ka) in k_list.iter().enumerate() {
        if let Some(b) = k_list.iter().position(|&kb| kb == 4 * ka) {
            let ratio = errors[b] / errors[a];
            worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
        }
    }
    match worst {
        Some(w) => {
            r.scalar("worst_4k_ratio", w);
            r.gates.push(Gate::at_most(
                "worst_4k_ratio",
                "restricted-propagation: error(4K) / error(K) stays below the configured ratio",
                w,
                cfg.numeric.tolerances.zeno_ratio,
            ));
        }
        None => r
            .warnings
            .push("k_list has no pair (K, 4K); the ratio gate was not evaluated".into()),
    }
    if let Some(order) = study.rows.last().and_then(|row| row.empirical_order) {
        r.scalar("final_order", order);
    }
    Ok(r)
}

fn crossing(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let model = cfg.model().map_err(at(kind, "building the model"))?;
    let psi0 = cfg
        .numeric
        .smearing
        .initial
        .sample(&model.grid)
        .map_err(at(kind, "sampling the initial packet"))?;
    let analyzer = CrossingAnalyzer::new(&model, &cfg.region_spec(), &psi0, cfg.numeric.slicing.t_start)
        .map_err(at(kind, "checking the initial support"))?;
    let horizons = &cfg.numeric.crossing.as_ref().expect("validated config has horizons").horizons;
    let rows = analyzer
        .distribution(horizons, &cfg.numeric.quadrature)
        .map_err(at(kind, "computing crossing amplitudes"))?;
    let mut r = ExperimentResult::new(kind, kind.name());
    let mut table = Table::new("distribution", &["t1", "t2", "p_cross", "p_never", "deviation"]);
    for row in &rows {
        table.push_values(&[row.t1, row.t2, row.p_cross, row.p_never, row.deviation]);
    }
    r.tables.push(table);
    let max_never = rows.iter().map(|row| row.p_never).fold(0.0, f64::max);
    if let Some(last) = rows.last() {
        r.scalar("p_cross", last.p_cross);
        r.scalar("p_never", last.p_never);
        r.scalar("deviation", last.deviation);
    }
    r.scalar("dx", model.grid.dx());
    r.gates.push(Gate::at_most(
        "max_p_never",
        "restricted-propagation: restricted evolution never gains norm",
        max_never,
        1.0 + 1e-12,
    ));
    Ok(r)
}

fn oracle_suite(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let kind = cfg.experiment;
    let tol = cfg.numeric.tolerances.oracle;
    let p = OracleParams::new(cfg.model.params.mass, cfg.model.params.hbar, 0.0).map_err(at(kind, "reading the parameters"))?;
    let mut r = ExperimentResult::new(kind, kind.name());

    let mut table = Table::new(
        "euclidean",
        &["x_from", "wall", "x_to", "tau", "diffusion", "lhs", "rhs", "residual"],
    );
    let mut worst: f64 = 0.0;
    for (x_from, wall, x_to, tau, d) in EUCLIDEAN_CASES {
        let op = OracleParams::from_diffusion(d).map_err(at(kind, "setting the diffusion constant"))?;
        let c = euclidean_pdx_check(&op, x_from, wall, x_to, tau).map_err(at(kind, "integrating first passages"))?;
        worst = worst.max(c.residual);
        table.push_values(&[x_from, wall, x_to, tau, d, c.lhs, c.rhs, c.residual]);
    }
    r.tables.push(table);
    r.scalar("euclidean_max_residual", worst);
    r.gates.push(Gate::at_most(
        "euclidean_max_residual",
        "analytic-oracles: first-passage decomposition of the heat kernel",
        worst,
        tol,
    ));

    let mut wall_value: f64 = 0.0;
    for sector in [Sector::RealTime, Sector::Euclidean] {
        for (x_from, t) in [(-1.0, 0.3), (-0.2, 2.0), (-3.0, 0.01)] {
            let k = image_restricted_kernel(&p, 0.0, x_from, t, 0.0, sector).map_err(at(kind, "evaluating image kernels"))?;
            wall_value = wall_value.max(k.norm());
        }
    }
    r.scalar("image_wall_value", wall_value);
    r.gates.push(Gate::at_most(
        "image_wall_value",
        "analytic-oracles: image kernel vanishes on the wall",
        wall_value,
        0.0,
    ));

    let d = p.diffusion();
    let mut norm_err: f64 = 0.0;
    for (x, a) in [(-1.0, 0.0), (-0.1, 0.0), (2.0, -1.0)] {
        let n = first_passage_normalization(x, a, d).map_err(at(kind, "normalizing first passages"))?;
        norm_err = norm_err.max((n - 1.0).abs());
    }
    r.scalar("first_passage_normalization_error", norm_err);
    r.gates.push(Gate::at_most(
        "first_passage_normalization_error",
        "analytic-oracles: first-passage density integrates to one",
        norm_err,
        tol,
    ));

    let mut flux_err: f64 = 0.0;
    for k in 0..=100 {
        let tau = 0.05 + k as f64 * (5.0 - 0.05) / 100.0;
        let f = brownian_first_passage_density(-1.0, 0.0, tau, d).map_err(at(kind, "evaluating first passages"))?;
        let g = wall_flux_density(&p, -1.0, 0.0, tau).map_err(at(kind, "evaluating wall flux"))?;
        flux_err = flux_err.max((f - g).abs() / f);
    }
    r.scalar("flux_identity_error", flux_err);
    r.gates.push(Gate::at_most(
        "flux_identity_error",
        "analytic-oracles: first-passage density equals D times the wall gradient",
        flux_err,
        FLUX_IDENTITY_TOL,
    ));
    Ok(r)
}

/// Resolution levels of a sweep: the configured list or the base level and its doubling.
pub fn sweep_levels(cfg: &RunConfig) -> Vec<(usize, usize)> {
    match &cfg.numeric.sweep {
        Some(s) => s.n_points.iter().copied().zip(s.quad_nodes.iter().copied()).collect(),
        None => {
            let n = cfg.model.grid.n_points;
            let q = cfg.numeric.quadrature.n_nodes;
            vec![(n, q), (2 * n, 2 * q - 1)]
        }
    }
}

fn run_sweep(cfg: &RunConfig) -> Result<Vec<ExperimentResult>, CliError> {
    let kind = cfg.experiment;
    let levels = sweep_levels(cfg);
    let results: Vec<Result<ExperimentResult, CliError>> = levels
        .par_iter()
        .map(|&(n, q)| {
            let mut level = cfg.clone();
            level.model.grid.n_points = n;
            level.numeric.quadrature.n_nodes = q;
            let mut r = run_experiment(&level)?;
            r.label = format!("{}-n{n}-q{q}", kind.name());
            Ok(r)
        })
        .collect();
    let mut out = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut summary = ExperimentResult::new(kind, format!("{}-sweep", kind.name()));
    let mut table = Table::new("refinement", &["n_points", "quad_nodes", "dx", "residual"]);
    let residuals: Vec<f64> = out.iter().map(|r| r.scalars["residual"]).collect();
    for ((n, q), r) in levels.iter().zip(&out) {
        table.push_values(&[*n as f64, *q as f64, r.scalars["dx"], r.scalars["residual"]]);
    }
    summary.tables.push(table);
    summary.gates.push(Gate::at_most(
        "baseline_residual",
        "pdx-engine: baseline residual within the configured bound",
        residuals[0],
        cfg.numeric.tolerances.residual,
    ));
    let worst_ratio = residuals.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    summary.scalar("worst_refinement_ratio", worst_ratio);
    summary.gates.push(Gate::at_most(
        "worst_refinement_ratio",
        "pdx-engine: each refinement shrinks the residual by the configured ratio",
        worst_ratio,
        cfg.numeric.tolerances.refinement_ratio,
    ));
    for r in &out {
        summary.warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", r.label)));
    }
    out.push(summary);
    Ok(out)
}

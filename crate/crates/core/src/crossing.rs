//! First-crossing amplitudes, candidate probabilities and the sum-rule deviation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, PdxError, Result};
use crate::grid::{GridModel, Model};
use crate::linalg::{basis_vector, norm_sqr, CVector};
use crate::pdx::{sample_nodes, FluxEngine, RESOLVED_SIGN};
use crate::projectors::RegionSpec;
use crate::quadrature::QuadratureSpec;
use crate::restricted::RestrictedEvolution;

/// Support mass in `C`, relative to the state's norm, above which a state is rejected.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Crossing-time window `[t1, t2]` inside `[t', t'']`.
///
/// The endpoints may coincide with `t'` and `t''` so that the full interval is a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingWindow {
    pub t1: f64,
    pub t2: f64,
}

impl CrossingWindow {
    pub fn new(t1: f64, t2: f64, t_start: f64, t_final: f64) -> Result<Self> {
        if !(t_start <= t1 && t1 < t2 && t2 <= t_final) {
            return Err(PdxError::Domain(format!(
                "window [{t1}, {t2}] must satisfy {t_start} <= t1 < t2 <= {t_final}"
            )));
        }
        Ok(Self { t1, t2 })
    }

    pub fn full(t_start: f64, t_final: f64) -> Result<Self> {
        Self::new(t_start, t_final, t_start, t_final)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingAmplitude {
    /// `A(x'')` in continuum units at every grid node.
    pub values: CVector,
    pub window: CrossingWindow,
    pub t_final: f64,
    pub t1_used: f64,
    pub t2_used: f64,
    pub t1_offset: f64,
    pub t2_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub p_cross: f64,
    pub p_never: f64,
    /// `p_cross + p_never - 1`; reported, never asserted.
    pub deviation: f64,
    pub t_start: f64,
    pub t_final: f64,
    pub n_points: usize,
    pub dx: f64,
    pub quad_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub t1: f64,
    pub t2: f64,
    pub p_cross: f64,
    pub p_never: f64,
    pub deviation: f64,
}

/// A state in `C-bar` together with the machinery to follow its first crossings.
pub struct CrossingAnalyzer {
    engine: FluxEngine,
    psi0: CVector,
    t_start: f64,
}

impl CrossingAnalyzer {
    pub fn new(model: &Model, region: &RegionSpec, psi0: &CVector, t_start: f64) -> Result<Self> {
        ensure_dim(model.grid.len(), psi0.len())?;
        let engine = FluxEngine::new(model, region)?;
        let total = norm_sqr(psi0);
        if !(total > 0.0 && total.is_finite()) {
            return Err(PdxError::Domain("initial state has zero or non-finite norm".into()));
        }
        let leak = engine.mass_in_c(psi0) / total;
        if leak > SUPPORT_TOL {
            return Err(PdxError::Precondition(format!(
                "initial state carries relative mass {leak:.3e} in C (limit {SUPPORT_TOL:.0e})"
            )));
        }
        Ok(Self {
            engine,
            psi0: psi0.clone(),
            t_start,
        })
    }

    pub fn grid(&self) -> &GridModel {
        &self.engine.grid
    }

    pub fn amplitude(&self, window: &CrossingWindow, t_final: f64, quad: &QuadratureSpec) -> Result<CrossingAmplitude> {
        let window = CrossingWindow::new(window.t1, window.t2, self.t_start, t_final)?;
        let ww = quad.window(self.t_start, t_final, window.t1, window.t2)?;
        let n = self.engine.grid.len();
        let dx = self.engine.grid.dx();
        let hbar = self.engine.params.hbar;
        let mut values = CVector::zeros(n);
        if !self.engine.c_is_empty() {
            let flux = self.engine.flux_series(&self.psi0)?;
            let col = basis_vector(n, self.engine.surface.node);
            let nodes = quad.nodes(self.t_start, t_final);
            let active: Vec<f64> = nodes[ww.start..=ww.end].to_vec();
            let samples = sample_nodes(&active, |t| {
                let g = self.engine.full.evolve(&col, t_final - t, hbar);
                g * (RESOLVED_SIGN * flux(t - self.t_start) / dx)
            });
            for (s, w) in samples.iter().zip(&ww.weights[ww.start..=ww.end]) {
                values += s * Complex64::new(*w, 0.0);
            }
        }
        Ok(CrossingAmplitude {
            values,
            window,
            t_final,
            t1_used: ww.t1_used,
            t2_used: ww.t2_used,
            t1_offset: ww.t1_offset,
            t2_offset: ww.t2_offset,
        })
    }

    pub fn never_cross(&self, t_final: f64) -> Result<f64> {
        if !(t_final >= self.t_start) {
            return Err(PdxError::Domain(format!("t'' = {t_final} precedes t' = {}", self.t_start)));
        }
        Ok(norm_sqr(&self.engine.restriction.evolve(&self.psi0, t_final - self.t_start)))
    }

    pub fn sum_rule(&self, t_final: f64, quad: &QuadratureSpec) -> Result<SumRuleReport> {
        let window = CrossingWindow::full(self.t_start, t_final)?;
        let p_cross = candidate_probability(&self.amplitude(&window, t_final, quad)?, &self.engine.grid);
        let p_never = self.never_cross(t_final)?;
        Ok(SumRuleReport {
            p_cross,
            p_never,
            deviation: p_cross + p_never - 1.0,
            t_start: self.t_start,
            t_final,
            n_points: self.engine.grid.len(),
            dx: self.engine.grid.dx(),
            quad_nodes: quad.n_nodes,
        })
    }

    /// One row per horizon `t_k`: crossing window `[t', t_k]` observed at `t'' = t_k`.
    pub fn distribution(&self, horizons: &[f64], quad: &QuadratureSpec) -> Result<Vec<DistributionRow>> {
        horizons
            .iter()
            .map(|&t| {
                let r = self.sum_rule(t, quad)?;
                Ok(DistributionRow {
                    t1: self.t_start,
                    t2: t,
                    p_cross: r.p_cross,
                    p_never: r.p_never,
                    deviation: r.deviation,
                })
            })
            .collect()
    }
}

/// `A(x'') = int_{t1}^{t2} dt g(x'', t''|a, t) (i hbar / 2m) d_n [G^(r)(t - t') psi0](a)`.
pub fn first_crossing_amplitude(
    model: &Model,
    region: &RegionSpec,
    psi0: &CVector,
    t_start: f64,
    window: &CrossingWindow,
    t_final: f64,
    quad: &QuadratureSpec,
) -> Result<CrossingAmplitude> {
    CrossingAnalyzer::new(model, region, psi0, t_start)?.amplitude(window, t_final, quad)
}

/// `sum_x |A(x)|^2 dx`; may exceed one.
pub fn candidate_probability(a: &CrossingAmplitude, grid: &GridModel) -> f64 {
    a.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()
}

/// `|| G^(r)(t'' - t') psi0 ||^2`.
pub fn never_cross_probability(model: &Model, region: &RegionSpec, psi0: &CVector, t_start: f64, t_final: f64) -> Result<f64> {
    CrossingAnalyzer::new(model, region, psi0, t_start)?.never_cross(t_final)
}

pub fn sum_rule_diagnostic(
    model: &Model,
    region: &RegionSpec,
    psi0: &CVector,
    t_start: f64,
    t_final: f64,
    quad: &QuadratureSpec,
) -> Result<SumRuleReport> {
    CrossingAnalyzer::new(model, region, psi0, t_start)?.sum_rule(t_final, quad)
}

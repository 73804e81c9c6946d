//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function of the same name in
//! [`demo`], so the numerics can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: pdx_core::PdxError) -> JsError {
    JsError::new(&e.to_string())
}

/// Columns of a crossing distribution, one entry per horizon.
#[wasm_bindgen]
pub struct Distribution {
    inner: demo::Distribution,
}

#[wasm_bindgen]
impl Distribution {
    pub fn horizons(&self) -> Vec<f64> {
        self.inner.horizons.clone()
    }

    pub fn p_cross(&self) -> Vec<f64> {
        self.inner.p_cross.clone()
    }

    pub fn p_never(&self) -> Vec<f64> {
        self.inner.p_never.clone()
    }

    pub fn deviation(&self) -> Vec<f64> {
        self.inner.deviation.clone()
    }
}

/// First-crossing and never-crossing probabilities of a free Gaussian packet
/// starting left of `x = 0`, at `samples` horizons up to `t_max`.
#[wasm_bindgen(js_name = crossingDistribution)]
pub fn crossing_distribution(center: f64, width: f64, wavenumber: f64, n_points: usize, t_max: f64, samples: usize) -> Result<Distribution, JsError> {
    demo::crossing_distribution(center, width, wavenumber, n_points, t_max, samples)
        .map(|inner| Distribution { inner })
        .map_err(js)
}

#[wasm_bindgen]
pub struct Convergence {
    inner: demo::Convergence,
}

#[wasm_bindgen]
impl Convergence {
    pub fn slices(&self) -> Vec<f64> {
        self.inner.slices.clone()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.inner.errors.clone()
    }

    /// Empirical orders; `NaN` for the first row.
    pub fn orders(&self) -> Vec<f64> {
        self.inner.orders.clone()
    }
}

/// Frobenius distance between Zeno products and the Dirichlet propagator for
/// `K = k_min, 2 k_min, ...` up to `k_max`.
#[wasm_bindgen(js_name = zenoConvergence)]
pub fn zeno_convergence(n_points: usize, total_time: f64, k_min: usize, k_max: usize) -> Result<Convergence, JsError> {
    demo::zeno_convergence(n_points, total_time, k_min, k_max)
        .map(|inner| Convergence { inner })
        .map_err(js)
}

#[wasm_bindgen]
pub struct FirstPassage {
    inner: demo::FirstPassage,
}

#[wasm_bindgen]
impl FirstPassage {
    pub fn taus(&self) -> Vec<f64> {
        self.inner.taus.clone()
    }

    pub fn density(&self) -> Vec<f64> {
        self.inner.density.clone()
    }

    /// `D` times the wall gradient of the image kernel; matches `density`.
    pub fn wall_flux(&self) -> Vec<f64> {
        self.inner.wall_flux.clone()
    }

    pub fn mode(&self) -> f64 {
        self.inner.mode
    }

    /// Relative residual of the Euclidean expansion at `x_to`, `tau_max`.
    pub fn expansion_residual(&self) -> f64 {
        self.inner.expansion_residual
    }
}

#[wasm_bindgen(js_name = firstPassage)]
pub fn first_passage(x_from: f64, wall: f64, x_to: f64, diffusion: f64, tau_max: f64, samples: usize) -> Result<FirstPassage, JsError> {
    demo::first_passage(x_from, wall, x_to, diffusion, tau_max, samples)
        .map(|inner| FirstPassage { inner })
        .map_err(js)
}

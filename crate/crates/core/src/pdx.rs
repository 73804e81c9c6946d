//! The exact sliced resolution of identity, its crossing-class decomposition,
//! the surface-flux integrand, and the assembled expansion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, PdxError, Result};
use crate::grid::{GridModel, Model, PhysicalParams};
use crate::hamiltonian::{build_hamiltonian, HermitianMatrix};
use crate::linalg::{basis_vector, identity, inner, max_abs, max_abs_diff, max_abs_vec, CMatrix, CVector, I};
use crate::projectors::{BasisKind, Membership, Projector, RegionSpec, Surface};
use crate::quadrature::QuadratureSpec;
use crate::restricted::{DirichletRestriction, Method, RestrictedEvolution, SubspaceRestriction};
use crate::spectral::{spectral_decompose, PropagatorMatrix, SpectralDecomposition};
use crate::state::{gaussian_packet, mass_where};

/// Orientation factor applied to the literal surface flux (normal pointing out of
/// the restricted region) so that the assembled expansion matches the propagator.
pub const RESOLVED_SIGN: f64 = -1.0;
/// Largest packet mass allowed on the wrong side of the surface at the initial time.
pub const LEAK_TOL: f64 = 1e-6;
/// Support mass above which crossing-class sums emit a warning.
pub const SUPPORT_WARN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicingSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub n_slices: usize,
}

impl SlicingSpec {
    pub fn new(t_start: f64, t_end: f64, n_slices: usize) -> Result<Self> {
        if n_slices == 0 {
            return Err(PdxError::Domain("slicing needs n >= 1".into()));
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(PdxError::Domain(format!("slicing needs t_end > t_start, got [{t_start}, {t_end}]")));
        }
        Ok(Self { t_start, t_end, n_slices })
    }

    pub fn delta_t(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_slices as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_slices)
            .map(|k| self.t_start + k as f64 * (self.t_end - self.t_start) / self.n_slices as f64)
            .collect()
    }
}

/// Schrodinger-picture matrices of each crossing class.
///
/// `crossing_terms[k-1] = U_k^dagger P_C (U_dt P_Cbar)^k` is the class that first
/// appears in `C` at slice `k`; `never_term = U_n^dagger P_Cbar (U_dt P_Cbar)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingClassTerms {
    pub first_term: CMatrix,
    pub crossing_terms: Vec<CMatrix>,
    pub never_term: CMatrix,
    /// `U(t'' - t')`.
    pub evolution: CMatrix,
    pub projector: CMatrix,
    pub slicing: SlicingSpec,
}

impl CrossingClassTerms {
    pub fn term_count(&self) -> usize {
        self.crossing_terms.len() + 2
    }

    pub fn sum(&self) -> CMatrix {
        let mut s = &self.first_term + &self.never_term;
        for t in &self.crossing_terms {
            s += t;
        }
        s
    }

    /// `max |sum of terms - I|`.
    pub fn identity_residual(&self) -> f64 {
        max_abs_diff(&self.sum(), &identity(self.first_term.nrows()))
    }
}

pub fn resolution_of_identity(p_c: &Projector, u_dt: &PropagatorMatrix, slicing: &SlicingSpec) -> Result<CrossingClassTerms> {
    ensure_dim(p_c.dim(), u_dt.dim())?;
    let dt = slicing.delta_t();
    if (u_dt.span() - dt).abs() > 1e-12 * dt.abs().max(1.0) {
        return Err(PdxError::Precondition(format!(
            "step propagator spans {} but the slicing step is {dt}",
            u_dt.span()
        )));
    }
    let p = p_c.matrix();
    let p_bar = p_c.complement();
    let step = &u_dt.matrix * p_bar.matrix();
    let mut chain = identity(p_c.dim());
    let mut u_k = identity(p_c.dim());
    let mut crossing_terms = Vec::with_capacity(slicing.n_slices);
    for _ in 0..slicing.n_slices {
        chain = &step * &chain;
        u_k = &u_dt.matrix * &u_k;
        crossing_terms.push(u_k.adjoint() * p * &chain);
    }
    let never_term = u_k.adjoint() * p_bar.matrix() * &chain;
    Ok(CrossingClassTerms {
        first_term: p.clone(),
        crossing_terms,
        never_term,
        evolution: u_k,
        projector: p.clone(),
        slicing: *slicing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingAmplitudes {
    pub first: Complex64,
    /// One amplitude per slice `k = 1..=n`.
    pub crossing: Vec<Complex64>,
    pub never: Complex64,
    /// `<f|U(t'' - t')|i>` computed directly.
    pub full: Complex64,
    /// `|sum of all class amplitudes - full|`.
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl CrossingAmplitudes {
    pub fn crossing_sum(&self) -> Complex64 {
        self.crossing.iter().sum()
    }

    /// Sum over slices `k` in `range` (1-based, inclusive start, exclusive end).
    pub fn partial_sum(&self, range: std::ops::Range<usize>) -> Complex64 {
        self.crossing[range.start - 1..range.end - 1].iter().sum()
    }
}

/// Per-class amplitudes `<f| U(t'' - t') term_k |i>`.
pub fn crossing_matrix_element(terms: &CrossingClassTerms, target: &CVector, initial: &CVector) -> Result<CrossingAmplitudes> {
    let n = terms.first_term.nrows();
    ensure_dim(n, target.len())?;
    ensure_dim(n, initial.len())?;
    let mut warnings = Vec::new();
    let in_c = &terms.projector * initial;
    let leak_i = in_c.norm_squared();
    if leak_i > SUPPORT_WARN_TOL {
        warnings.push(format!("initial state carries mass {leak_i:.3e} in C"));
    }
    let leak_f = (target - &terms.projector * target).norm_squared();
    if leak_f > SUPPORT_WARN_TOL {
        warnings.push(format!("final state carries mass {leak_f:.3e} outside C"));
    }
    let bra = terms.evolution.adjoint() * target;
    let amp = |m: &CMatrix| inner(&bra, &(m * initial));
    let first = amp(&terms.first_term);
    let crossing: Vec<Complex64> = terms.crossing_terms.iter().map(amp).collect();
    let never = amp(&terms.never_term);
    let full = inner(&bra, initial);
    let total = first + never + crossing.iter().sum::<Complex64>();
    Ok(CrossingAmplitudes {
        first,
        crossing,
        never,
        full,
        residual: (total - full).norm(),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    /// `phi*(a)`: the backward kernel at the surface.
    pub phi: Complex64,
    /// `n . d chi / dx` at the surface.
    pub normal_derivative: Complex64,
    pub flux_value: Complex64,
}

/// `n . grad chi` at the surface from `chi(a)`, `chi(a - n dx)`, `chi(a - 2 n dx)`.
pub fn one_sided_normal_derivative(chi_a: Complex64, chi_1: Complex64, chi_2: Complex64, dx: f64) -> Complex64 {
    (3.0 * chi_a - 4.0 * chi_1 + chi_2) / (2.0 * dx)
}

/// Stencil nodes one and two steps into `C-bar` from the surface.
pub fn stencil_nodes(surface: &Surface) -> Result<(usize, usize)> {
    match (surface.into_cbar(1), surface.into_cbar(2)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(PdxError::Resolution(format!(
            "fewer than 3 nodes on the C-bar side of the surface at node {}",
            surface.node
        ))),
    }
}

/// `(i hbar / 2m) n . grad chi (a) phi*(a)` with `chi` given as continuum samples.
pub fn surface_flux(phi: Complex64, chi: &CVector, region: &RegionSpec, params: &PhysicalParams, grid: &GridModel) -> Result<BoundaryFlux> {
    ensure_dim(grid.len(), chi.len())?;
    if region.basis != BasisKind::Position {
        return Err(PdxError::Precondition("surface flux needs a position-basis region".into()));
    }
    let surface = Surface::locate(grid, region)?;
    let (n1, n2) = stencil_nodes(&surface)?;
    let chi_a = chi[surface.node];
    if chi_a.norm() > 1e-12 * max_abs_vec(chi) {
        return Err(PdxError::Precondition(format!(
            "chi must vanish on the surface, found |chi(a)| = {:.3e}",
            chi_a.norm()
        )));
    }
    let normal_derivative = one_sided_normal_derivative(chi_a, chi[n1], chi[n2], grid.dx());
    Ok(BoundaryFlux {
        phi,
        normal_derivative,
        flux_value: I * params.hbar / (2.0 * params.mass) * normal_derivative * phi,
    })
}

/// Gaussian packet `exp(-(x - c)^2 / 2w^2 + i k x)` by its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub wavenumber: f64,
}

impl PacketSpec {
    pub fn new(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            wavenumber: 0.0,
        }
    }

    pub fn with_wavenumber(mut self, k: f64) -> Self {
        self.wavenumber = k;
        self
    }

    pub fn sample(&self, grid: &GridModel) -> Result<CVector> {
        gaussian_packet(grid, self.center, self.width, self.wavenumber)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdxProblem {
    pub model: Model,
    pub region: RegionSpec,
    pub initial: PacketSpec,
    pub target: PacketSpec,
    pub t_start: f64,
    pub t_end: f64,
    pub quad: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdxOutcome {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs| / |lhs|`.
    pub residual: f64,
    /// Signed flux integral as it enters `rhs`.
    pub flux_term: Complex64,
    /// `<f|G^(r)(t'' - t')|i>`; zero for the opposite-side expansion.
    pub restricted_term: Complex64,
    pub sign: f64,
    /// Initial-packet mass on the wrong side of the surface; gated at `LEAK_TOL`.
    pub initial_leak: f64,
    /// Target-packet mass outside its side; reported only.
    pub target_leak: f64,
    pub snap_offset: f64,
    pub dx: f64,
    pub quad_nodes: usize,
}

/// Evaluate `f` at every node, in parallel when enabled, keeping node order.
pub(crate) fn sample_nodes<T, F>(nodes: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        nodes.par_iter().map(|&t| f(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        nodes.iter().map(|&t| f(t)).collect()
    }
}

/// Shared setup for the flux-route assemblies.
pub struct FluxEngine {
    pub grid: GridModel,
    pub params: PhysicalParams,
    pub region: RegionSpec,
    pub full: SpectralDecomposition,
    pub restriction: DirichletRestriction,
    pub surface: Surface,
    c_empty: bool,
}

impl FluxEngine {
    pub fn new(model: &Model, region: &RegionSpec) -> Result<Self> {
        let h = build_hamiltonian(&model.grid, &model.params, &model.potential)?;
        let full = spectral_decompose(&h)?;
        let restriction = DirichletRestriction::new(&h, &model.grid, region, model.params.hbar)?;
        let surface = *restriction.surface();
        let c_empty = (0..model.grid.len()).all(|j| !surface.in_c(j));
        if !c_empty {
            stencil_nodes(&surface)?;
        }
        Ok(Self {
            grid: model.grid,
            params: model.params,
            region: *region,
            full,
            restriction,
            surface,
            c_empty,
        })
    }

    pub fn c_is_empty(&self) -> bool {
        self.c_empty
    }

    pub fn mass_in_c(&self, psi: &CVector) -> f64 {
        mass_where(psi, |j| self.surface.in_c(j))
    }

    pub fn mass_in_cbar(&self, psi: &CVector) -> f64 {
        mass_where(psi, |j| !self.surface.in_c(j))
    }

    /// `i hbar / 2m` times the one-sided normal derivative of `G^(r)(tau) psi`
    /// at the surface, in continuum units.
    pub fn flux_series(&self, psi: &CVector) -> Result<impl Fn(f64) -> Complex64 + Sync + '_> {
        let (n1, n2) = stencil_nodes(&self.surface)?;
        let missing = || PdxError::Resolution("stencil node outside the restricted set".into());
        let c1 = self.restriction.component_series(psi, n1).ok_or_else(missing)?;
        let c2 = self.restriction.component_series(psi, n2).ok_or_else(missing)?;
        let dx = self.grid.dx();
        let hbar = self.params.hbar;
        let pref = I * hbar / (2.0 * self.params.mass) / dx.sqrt();
        let zero = Complex64::new(0.0, 0.0);
        Ok(move |tau: f64| pref * one_sided_normal_derivative(zero, c1.eval(tau, hbar), c2.eval(tau, hbar), dx))
    }

    /// Literal-normal flux integral `int phi*(a, t_s) (i hbar/2m) d_n chi(a, t_s) dt_s`
    /// for `<target|`, over `[t_start, t_end]` weighted by `weights`.
    pub fn flux_integral(&self, target: &CVector, initial: &CVector, t_start: f64, t_end: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        if self.c_empty {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let weights = quad.weights(t_start, t_end);
        self.weighted_flux_integral(target, initial, t_start, t_end, quad, &weights)
    }

    pub fn weighted_flux_integral(
        &self,
        target: &CVector,
        initial: &CVector,
        t_start: f64,
        t_end: f64,
        quad: &QuadratureSpec,
        weights: &[f64],
    ) -> Result<Complex64> {
        if self.c_empty {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let hbar = self.params.hbar;
        let phi = self
            .full
            .matrix_element_series(target, &basis_vector(self.grid.len(), self.surface.node));
        let chi = self.flux_series(initial)?;
        let root_dx = self.grid.dx().sqrt();
        let nodes = quad.nodes(t_start, t_end);
        let samples = sample_nodes(&nodes, |t| phi.eval(t_end - t, hbar) / root_dx * chi(t - t_start));
        Ok(samples
            .iter()
            .zip(weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (s, w)| acc + s * *w))
    }

    pub fn restricted_element(&self, target: &CVector, initial: &CVector, t: f64) -> Complex64 {
        let g = self.restriction.evolve(initial, t);
        inner(target, &g)
    }

    pub fn full_element(&self, target: &CVector, initial: &CVector, t: f64) -> Complex64 {
        self.full.matrix_element_series(target, initial).eval(t, self.params.hbar)
    }
}

fn check_problem(p: &PdxProblem) -> Result<()> {
    if !(p.t_end >= p.t_start) {
        return Err(PdxError::Domain(format!(
            "times must satisfy t'' >= t', got [{}, {}]",
            p.t_start, p.t_end
        )));
    }
    let dx = p.model.grid.dx();
    for (name, pk) in [("initial", &p.initial), ("target", &p.target)] {
        if !(pk.width > 2.0 * dx) {
            return Err(PdxError::Precondition(format!(
                "{name} packet width {} must exceed 2 dx = {}",
                pk.width,
                2.0 * dx
            )));
        }
    }
    Ok(())
}

fn leak_error(mass: f64) -> PdxError {
    PdxError::Precondition(format!(
        "initial packet leaks mass {mass:.3e} across the surface (limit {LEAK_TOL:.0e})"
    ))
}

fn finish(
    lhs: Complex64,
    flux: Complex64,
    restricted: Complex64,
    leaks: (f64, f64),
    engine: &FluxEngine,
    quad: &QuadratureSpec,
) -> PdxOutcome {
    let flux_term = RESOLVED_SIGN * flux;
    let rhs = flux_term + restricted;
    PdxOutcome {
        lhs,
        rhs,
        residual: (lhs - rhs).norm() / lhs.norm(),
        flux_term,
        restricted_term: restricted,
        sign: RESOLVED_SIGN,
        initial_leak: leaks.0,
        target_leak: leaks.1,
        snap_offset: engine.surface.snap_offset(),
        dx: engine.grid.dx(),
        quad_nodes: quad.n_nodes,
    }
}

/// Expansion for a source in `C-bar` and a destination in `C`.
pub fn pdx_assemble_opposite(p: &PdxProblem) -> Result<PdxOutcome> {
    check_problem(p)?;
    let engine = FluxEngine::new(&p.model, &p.region)?;
    let i = p.initial.sample(&p.model.grid)?;
    let f = p.target.sample(&p.model.grid)?;
    let leaks = (engine.mass_in_c(&i), engine.mass_in_cbar(&f));
    if leaks.0 > LEAK_TOL {
        return Err(leak_error(leaks.0));
    }
    let lhs = engine.full_element(&f, &i, p.t_end - p.t_start);
    let flux = engine.flux_integral(&f, &i, p.t_start, p.t_end, &p.quad)?;
    Ok(finish(lhs, flux, Complex64::new(0.0, 0.0), leaks, &engine, &p.quad))
}

/// Expansion with both packets in `C-bar`: the flux integral plus the restricted term.
pub fn pdx_assemble_same_side(p: &PdxProblem) -> Result<PdxOutcome> {
    check_problem(p)?;
    let engine = FluxEngine::new(&p.model, &p.region)?;
    let i = p.initial.sample(&p.model.grid)?;
    let f = p.target.sample(&p.model.grid)?;
    let leaks = (engine.mass_in_c(&i), engine.mass_in_c(&f));
    if leaks.0 > LEAK_TOL {
        return Err(leak_error(leaks.0));
    }
    let t = p.t_end - p.t_start;
    let lhs = engine.full_element(&f, &i, t);
    let restricted = engine.restricted_element(&f, &i, t);
    let flux = engine.flux_integral(&f, &i, p.t_start, p.t_end, &p.quad)?;
    Ok(finish(lhs, flux, restricted, leaks, &engine, &p.quad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedPdx {
    /// `max_x |((lhs - rhs) i)(x)| / max_x |(lhs i)(x)|`.
    pub residual: f64,
    pub abs_residual: f64,
    /// `|<f|(lhs - rhs)|i>| / |<f|lhs|i>|` when a target packet is supplied.
    pub smeared_residual: Option<f64>,
    pub lhs_smeared: Option<Complex64>,
    pub rhs_smeared: Option<Complex64>,
    pub method: Method,
    pub quad_nodes: usize,
}

/// `(i / hbar) [H, P]` as an explicit matrix product.
pub fn commutator(h: &HermitianMatrix, p: &Projector, hbar: f64) -> Result<CMatrix> {
    ensure_dim(h.dim(), p.dim())?;
    let hp = h.matrix() * p.matrix();
    let ph = p.matrix() * h.matrix();
    Ok((hp - ph) * (I / hbar))
}

/// Residual of the operator identity
/// `U = U P_C + int U(t''-t) (i/hbar)[H, P_C] G^(r)(t - t') dt + G^(r)(t'' - t')`
/// applied to `initial` (and projected on `target` when given).
pub fn generalized_pdx_residual(
    model: &Model,
    p_c: &Projector,
    t_start: f64,
    t_end: f64,
    quad: &QuadratureSpec,
    initial: &CVector,
    target: Option<&CVector>,
) -> Result<GeneralizedPdx> {
    ensure_dim(model.grid.len(), p_c.dim())?;
    ensure_dim(model.grid.len(), initial.len())?;
    if !(t_end >= t_start) {
        return Err(PdxError::Domain(format!("times must satisfy t'' >= t', got [{t_start}, {t_end}]")));
    }
    let hbar = model.params.hbar;
    let h = build_hamiltonian(&model.grid, &model.params, &model.potential)?;
    let full = spectral_decompose(&h)?;
    let p_bar = p_c.complement();
    let restriction = SubspaceRestriction::new(&h, &p_bar, hbar)?;
    let method = match (p_c.diagonal(), p_c.region().boundary_node) {
        (Some(_), Membership::C) => Method::Dirichlet,
        _ => Method::Subspace,
    };
    let comm = commutator(&h, p_c, hbar)?;
    let t_total = t_end - t_start;

    let lhs = full.evolve(initial, t_total, hbar);
    let nodes = quad.nodes(t_start, t_end);
    let weights = quad.weights(t_start, t_end);
    let samples = sample_nodes(&nodes, |t| {
        let g = restriction.evolve(initial, t - t_start);
        full.evolve(&(&comm * g), t_end - t, hbar)
    });
    let mut integral = CVector::zeros(initial.len());
    for (s, w) in samples.iter().zip(&weights) {
        integral += s * Complex64::new(*w, 0.0);
    }
    let rhs = full.evolve(&p_c.apply(initial), t_total, hbar) + integral + restriction.evolve(initial, t_total);
    let diff = &lhs - &rhs;
    let abs_residual = max_abs_vec(&diff);
    let (smeared_residual, lhs_smeared, rhs_smeared) = match target {
        Some(f) => {
            ensure_dim(initial.len(), f.len())?;
            let l = inner(f, &lhs);
            let r = inner(f, &rhs);
            (Some((l - r).norm() / l.norm()), Some(l), Some(r))
        }
        None => (None, None, None),
    };
    Ok(GeneralizedPdx {
        residual: abs_residual / max_abs_vec(&lhs),
        abs_residual,
        smeared_residual,
        lhs_smeared,
        rhs_smeared,
        method,
        quad_nodes: quad.n_nodes,
    })
}

/// `max |P_C(t + dt) - P_C(t) - dt (i/hbar)[H, P_C(t)]|`.
pub fn heisenberg_step_defect(model: &Model, p_c: &Projector, t: f64, dt: f64) -> Result<f64> {
    ensure_dim(model.grid.len(), p_c.dim())?;
    let hbar = model.params.hbar;
    let h = build_hamiltonian(&model.grid, &model.params, &model.potential)?;
    let s = spectral_decompose(&h)?;
    let at = |tau: f64| {
        let u = s.propagator_matrix(tau, hbar);
        u.adjoint() * p_c.matrix() * u
    };
    let p0 = at(t);
    let p1 = at(t + dt);
    let comm = (h.matrix() * &p0 - &p0 * h.matrix()) * (I / hbar);
    Ok(max_abs(&(p1 - &p0 - comm * Complex64::new(dt, 0.0))))
}

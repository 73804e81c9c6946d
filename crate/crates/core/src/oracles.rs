//! Closed-form kernels used as ground truth. Nothing here touches the grid code.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};
use crate::quadrature::adaptive_simpson;

/// Relative tolerance of the adaptive quadrature used by the oracles.
pub const ORACLE_REL_TOL: f64 = 1e-8;
/// Interval budget of the adaptive quadrature used by the oracles.
pub const ORACLE_MAX_INTERVALS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    RealTime,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
}

impl OracleParams {
    pub fn new(mass: f64, hbar: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && hbar > 0.0 && omega >= 0.0) || !(mass.is_finite() && hbar.is_finite() && omega.is_finite()) {
            return Err(PdxError::Domain(format!(
                "oracle parameters need m > 0, hbar > 0, omega >= 0 (got m = {mass}, hbar = {hbar}, omega = {omega})"
            )));
        }
        Ok(Self { mass, hbar, omega })
    }

    /// Parameters with `hbar = 1` and the mass fixed by `D = hbar / 2m`.
    pub fn from_diffusion(d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(PdxError::Domain(format!("diffusion constant must be positive, got {d}")));
        }
        Self::new(0.5 / d, 1.0, 0.0)
    }

    pub fn diffusion(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub x_to: f64,
    pub x_from: f64,
    pub t: f64,
    pub value: Complex64,
}

fn positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(PdxError::Domain(format!("kernel time must be positive, got {t}")))
    }
}

pub fn free_kernel(p: &OracleParams, x_to: f64, x_from: f64, t: f64, sector: Sector) -> Result<Complex64> {
    positive_time(t)?;
    let d2 = (x_to - x_from).powi(2);
    Ok(match sector {
        Sector::Euclidean => {
            let amp = (p.mass / (2.0 * PI * p.hbar * t)).sqrt();
            Complex64::new(amp * (-p.mass * d2 / (2.0 * p.hbar * t)).exp(), 0.0)
        }
        Sector::RealTime => {
            // (m / 2 pi i hbar t)^(1/2) with the principal root.
            let amp = (p.mass / (2.0 * PI * p.hbar * t)).sqrt();
            Complex64::from_polar(amp, p.mass * d2 / (2.0 * p.hbar * t) - PI / 4.0)
        }
    })
}

/// Dirichlet kernel on the half-line bounded by `wall`, by the method of images.
pub fn image_restricted_kernel(p: &OracleParams, x_to: f64, x_from: f64, t: f64, wall: f64, sector: Sector) -> Result<Complex64> {
    positive_time(t)?;
    if (x_to - wall) * (x_from - wall) < 0.0 || x_from == wall {
        return Err(PdxError::Domain(format!(
            "image kernel needs x_to = {x_to} and x_from = {x_from} strictly on one side of the wall {wall}"
        )));
    }
    if x_to == wall {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(free_kernel(p, x_to, x_from, t, sector)? - free_kernel(p, x_to, 2.0 * wall - x_from, t, sector)?)
}

/// `d/dx_to` of the Euclidean image kernel.
pub fn image_kernel_gradient(p: &OracleParams, x_to: f64, x_from: f64, tau: f64, wall: f64) -> Result<f64> {
    positive_time(tau)?;
    let d = p.diffusion();
    let heat_dx = |u: f64| -u / (2.0 * d * tau) * (-u * u / (4.0 * d * tau)).exp() / (4.0 * PI * d * tau).sqrt();
    Ok(heat_dx(x_to - x_from) - heat_dx(x_to - (2.0 * wall - x_from)))
}

/// Harmonic oscillator kernel with the Maslov phase tracked across caustics.
pub fn mehler_kernel(p: &OracleParams, x_to: f64, x_from: f64, t: f64) -> Result<Complex64> {
    positive_time(t)?;
    if !(p.omega > 0.0) {
        return Err(PdxError::Domain("Mehler kernel needs omega > 0".into()));
    }
    let phase_angle = p.omega * t;
    let s = phase_angle.sin();
    let k = (phase_angle / PI).floor();
    if s.abs() < 1e-10 * phase_angle.max(1.0) {
        let nearest = (phase_angle / PI).round();
        return Err(PdxError::Domain(format!(
            "t = {t} is at the caustic t = {} (omega t = {nearest} pi)",
            nearest * PI / p.omega
        )));
    }
    let amp = (p.mass * p.omega / (2.0 * PI * p.hbar * s.abs())).sqrt();
    let action = p.mass * p.omega / (2.0 * p.hbar * s) * ((x_to * x_to + x_from * x_from) * phase_angle.cos() - 2.0 * x_to * x_from);
    Ok(Complex64::from_polar(amp, action - PI / 4.0 - PI * k / 2.0))
}

fn check_passage_args(x_from: f64, a: f64, tau: f64, d: f64) -> Result<()> {
    positive_time(tau)?;
    if !(d > 0.0) {
        return Err(PdxError::Domain(format!("diffusion constant must be positive, got {d}")));
    }
    if x_from == a {
        return Err(PdxError::Domain("first passage from the wall itself is immediate".into()));
    }
    Ok(())
}

/// Density of the first hitting time of `a` for Brownian motion started at `x_from`.
pub fn brownian_first_passage_density(x_from: f64, a: f64, tau: f64, d: f64) -> Result<f64> {
    check_passage_args(x_from, a, tau, d)?;
    let dist = (a - x_from).abs();
    Ok(dist / (4.0 * PI * d * tau.powi(3)).sqrt() * (-dist * dist / (4.0 * d * tau)).exp())
}

/// Location of the maximum of the first-passage density.
pub fn first_passage_mode(x_from: f64, a: f64, d: f64) -> f64 {
    (a - x_from).powi(2) / (6.0 * d)
}

/// `D` times the derivative of the Euclidean image kernel at the wall along the
/// normal pointing back into the side of `x_from`.
pub fn wall_flux_density(p: &OracleParams, x_from: f64, a: f64, tau: f64) -> Result<f64> {
    let inward = (x_from - a).signum();
    Ok(p.diffusion() * inward * image_kernel_gradient(p, a, x_from, tau, a)?)
}

/// `int_0^inf f(tau) dtau` via `tau = c (s / (1 - s))^2`, `c = d^2 / 4D`.
pub fn first_passage_normalization(x_from: f64, a: f64, d: f64) -> Result<f64> {
    check_passage_args(x_from, a, 1.0, d)?;
    let c = (a - x_from).powi(2) / (4.0 * d);
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 2.0 / PI.sqrt();
        }
        let tau = c * (s / (1.0 - s)).powi(2);
        let jac = 2.0 * c * s / (1.0 - s).powi(3);
        brownian_first_passage_density(x_from, a, tau, d).map(|f| f * jac).unwrap_or(0.0)
    };
    Ok(adaptive_simpson(integrand, 0.0, 1.0, ORACLE_REL_TOL, 0.0, ORACLE_MAX_INTERVALS)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPdxCheck {
    pub x_from: f64,
    pub wall: f64,
    pub x_to: f64,
    pub tau: f64,
    pub diffusion: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative to `lhs`, or absolute when `lhs` underflows.
    pub residual: f64,
    pub intervals: usize,
}

/// First-passage decomposition of the free heat kernel across `wall`.
pub fn euclidean_pdx_check(p: &OracleParams, x_from: f64, wall: f64, x_to: f64, tau: f64) -> Result<EuclideanPdxCheck> {
    positive_time(tau)?;
    if !((x_from < wall && wall < x_to) || (x_to < wall && wall < x_from)) {
        return Err(PdxError::Domain(format!(
            "wall {wall} must lie strictly between x_from = {x_from} and x_to = {x_to}"
        )));
    }
    let d = p.diffusion();
    let lhs = free_kernel(p, x_to, x_from, tau, Sector::Euclidean)?.re;
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 || s >= tau {
            return 0.0;
        }
        let f = brownian_first_passage_density(x_from, wall, s, d).unwrap_or(0.0);
        f * free_kernel(p, x_to, wall, tau - s, Sector::Euclidean).map(|z| z.re).unwrap_or(0.0)
    };
    let q = adaptive_simpson(integrand, 0.0, tau, ORACLE_REL_TOL, 1e-300, ORACLE_MAX_INTERVALS)?;
    let residual = if lhs > 1e-300 {
        (lhs - q.value).abs() / lhs
    } else {
        (lhs - q.value).abs()
    };
    Ok(EuclideanPdxCheck {
        x_from,
        wall,
        x_to,
        tau,
        diffusion: d,
        lhs,
        rhs: q.value,
        residual,
        intervals: q.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> OracleParams {
        OracleParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn euclidean_free_kernel_basics() {
        let p = unit();
        let z = free_kernel(&p, 0.3, 0.3, 0.7, Sector::Euclidean).unwrap();
        assert_eq!(z.re, (1.0 / (2.0 * PI * 0.7)).sqrt());
        let dx = 1e-3;
        let total: f64 = (-20_000..=20_000)
            .map(|j| free_kernel(&p, j as f64 * dx, 0.1, 0.5, Sector::Euclidean).unwrap().re * dx)
            .sum();
        assert!((total - 1.0).abs() <= 1e-8, "{total}");
        assert!(free_kernel(&p, 0.0, 0.0, 0.0, Sector::RealTime).is_err());
        assert!(free_kernel(&p, 0.0, 0.0, -1.0, Sector::Euclidean).is_err());
    }

    #[test]
    fn real_time_free_kernel_modulus_and_phase() {
        let p = unit();
        let z = free_kernel(&p, 0.0, 0.0, 2.0, Sector::RealTime).unwrap();
        let expected = (Complex64::new(1.0, 0.0) / Complex64::new(0.0, 2.0 * PI * 2.0)).sqrt();
        assert!((z - expected).norm() <= 1e-15);
    }

    #[test]
    fn image_kernel_properties() {
        let p = unit();
        for sector in [Sector::RealTime, Sector::Euclidean] {
            assert_eq!(
                image_restricted_kernel(&p, 0.5, -1.0, 0.3, 0.5, sector).unwrap(),
                Complex64::new(0.0, 0.0)
            );
            let ab = image_restricted_kernel(&p, -0.2, -1.3, 0.4, 0.5, sector).unwrap();
            let ba = image_restricted_kernel(&p, -1.3, -0.2, 0.4, 0.5, sector).unwrap();
            assert!((ab - ba).norm() <= 1e-15 * ab.norm().max(1.0));
        }
        assert!(image_restricted_kernel(&p, 1.0, -1.0, 0.3, 0.0, Sector::Euclidean).is_err());
    }

    #[test]
    fn mehler_small_time_and_periodicity() {
        let p = OracleParams::new(1.0, 1.0, 1e-3).unwrap();
        let m = mehler_kernel(&p, 0.5, -0.3, 1.0).unwrap();
        let f = free_kernel(&p, 0.5, -0.3, 1.0, Sector::RealTime).unwrap();
        assert!((m - f).norm() / f.norm() <= 1e-6);

        let p = unit();
        let period = 2.0 * PI;
        for t in [0.4, 1.9, 3.5, 5.0] {
            let a = mehler_kernel(&p, 0.7, -0.2, t).unwrap().norm();
            let b = mehler_kernel(&p, 0.7, -0.2, t + period).unwrap().norm();
            assert!((a - b).abs() <= 1e-12 * a);
        }
        match mehler_kernel(&p, 0.1, 0.2, PI) {
            Err(PdxError::Domain(msg)) => assert!(msg.contains("caustic")),
            other => panic!("expected a caustic error, got {other:?}"),
        }
        assert!(mehler_kernel(&OracleParams::new(1.0, 1.0, 0.0).unwrap(), 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn mehler_carries_a_coherent_state_past_caustics() {
        let p = unit();
        let x0 = 1.0;
        let coherent = |x: f64, t: f64| {
            let (xc, pc) = (x0 * t.cos(), -x0 * t.sin());
            PI.powf(-0.25) * Complex64::new(-(x - xc).powi(2) / 2.0, pc * x - t / 2.0 - pc * xc / 2.0).exp()
        };
        let dy = 2e-3;
        for t in [0.7, 2.4, 4.0, 5.9] {
            for x in [-0.8, 0.3, 1.1] {
                let evolved: Complex64 = (-6000..=6000)
                    .map(|j| {
                        let y = j as f64 * dy;
                        mehler_kernel(&p, x, y, t).unwrap() * coherent(y, 0.0) * dy
                    })
                    .sum();
                let exact = coherent(x, t);
                assert!(
                    (evolved - exact).norm() <= 1e-8 * exact.norm().max(1e-3),
                    "t = {t}, x = {x}: {evolved} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn first_passage_density_identities() {
        let d = 0.5;
        assert!((first_passage_normalization(-1.0, 0.0, d).unwrap() - 1.0).abs() <= 1e-6);
        assert!((first_passage_normalization(2.5, 0.7, 1.3).unwrap() - 1.0).abs() <= 1e-6);
        let p = OracleParams::from_diffusion(d).unwrap();
        for k in 0..=50 {
            let tau = 0.05 + k as f64 * (5.0 - 0.05) / 50.0;
            let f = brownian_first_passage_density(-1.0, 0.0, tau, d).unwrap();
            let g = wall_flux_density(&p, -1.0, 0.0, tau).unwrap();
            assert!((f - g).abs() <= 1e-8 * f, "tau = {tau}: {f} vs {g}");
        }
        assert!(brownian_first_passage_density(-1.0, 0.0, 0.0, d).is_err());
    }

    #[test]
    fn first_passage_mode_matches_numerical_maximum() {
        let (x0, a, d) = (-1.2, 0.3, 0.7);
        let f = |t: f64| brownian_first_passage_density(x0, a, t, d).unwrap();
        let (mut lo, mut hi) = (1e-3, 10.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let tau_star = first_passage_mode(x0, a, d);
        assert!((0.5 * (lo + hi) - tau_star).abs() <= 1e-6 * tau_star);
    }

    #[test]
    fn euclidean_pdx_reference_configuration() {
        let p = OracleParams::from_diffusion(0.5).unwrap();
        let c = euclidean_pdx_check(&p, -1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(c.residual <= 1e-6, "{c:?}");
        let tiny = euclidean_pdx_check(&p, -1.0, 0.0, 1.0, 1e-3).unwrap();
        assert!(tiny.lhs <= 1e-12 && tiny.rhs <= 1e-12);
        assert!(euclidean_pdx_check(&p, 1.0, 0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn euclidean_pdx_reflection_symmetry() {
        let p = OracleParams::from_diffusion(0.5).unwrap();
        for b in [0.5, 1.0, 1.7] {
            let fwd = euclidean_pdx_check(&p, -b, 0.0, b, 0.8).unwrap();
            let rev = euclidean_pdx_check(&p, b, 0.0, -b, 0.8).unwrap();
            assert!((fwd.rhs - rev.rhs).abs() <= 1e-9 * fwd.rhs);
        }
    }
}

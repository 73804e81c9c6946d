//! Fixed composite rules for the `t_sigma` integrals and a doubling Simpson
//! rule for the closed-form oracles.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{PdxError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub n_nodes: usize,
}

impl QuadratureSpec {
    pub fn new(rule: Rule, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(PdxError::Domain(format!("quadrature needs at least 3 nodes, got {n_nodes}")));
        }
        if rule == Rule::Simpson && n_nodes % 2 == 0 {
            return Err(PdxError::Domain(format!("Simpson rule needs an odd node count, got {n_nodes}")));
        }
        Ok(Self { rule, n_nodes })
    }

    pub fn simpson(n_nodes: usize) -> Result<Self> {
        Self::new(Rule::Simpson, n_nodes)
    }

    pub fn trapezoid(n_nodes: usize) -> Result<Self> {
        Self::new(Rule::Trapezoid, n_nodes)
    }

    /// Same rule with every interval halved.
    pub fn refined(&self) -> Self {
        Self {
            rule: self.rule,
            n_nodes: 2 * self.n_nodes - 1,
        }
    }

    pub fn nodes(&self, a: f64, b: f64) -> Vec<f64> {
        let h = (b - a) / (self.n_nodes - 1) as f64;
        (0..self.n_nodes)
            .map(|i| if i + 1 == self.n_nodes { b } else { a + i as f64 * h })
            .collect()
    }

    pub fn weights(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.n_nodes;
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|i| match self.rule {
                Rule::Trapezoid => {
                    if i == 0 || i + 1 == n {
                        0.5 * h
                    } else {
                        h
                    }
                }
                Rule::Simpson => {
                    if i == 0 || i + 1 == n {
                        h / 3.0
                    } else if i % 2 == 1 {
                        4.0 * h / 3.0
                    } else {
                        2.0 * h / 3.0
                    }
                }
            })
            .collect()
    }

    /// Applies the rule to precomputed samples at [`nodes`](Self::nodes), summing in node order.
    pub fn apply<T>(&self, a: f64, b: f64, samples: &[T]) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        assert_eq!(samples.len(), self.n_nodes);
        self.weights(a, b)
            .iter()
            .zip(samples)
            .fold(T::default(), |acc, (&w, &s)| acc + s * w)
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(f64) -> T,
    {
        let samples: Vec<T> = self.nodes(a, b).into_iter().map(f).collect();
        self.apply(a, b, &samples)
    }

    /// Weights restricted to the sub-window `[t1, t2]` of `[a, b]`.
    ///
    /// Window ends snap to the nearest panel boundary (every node for the trapezoid
    /// rule, even-indexed nodes for Simpson) and interior ends carry half the
    /// global weight, so adjacent windows add up to the enclosing one exactly.
    pub fn window(&self, a: f64, b: f64, t1: f64, t2: f64) -> Result<WindowWeights> {
        if !(a <= t1 && t1 < t2 && t2 <= b) {
            return Err(PdxError::Domain(format!(
                "window [{t1}, {t2}] must lie inside [{a}, {b}] with t1 < t2"
            )));
        }
        let nodes = self.nodes(a, b);
        let stride = match self.rule {
            Rule::Trapezoid => 1,
            Rule::Simpson => 2,
        };
        let snap = |t: f64| -> usize {
            let h = (b - a) / (self.n_nodes - 1) as f64;
            let panel = h * stride as f64;
            let k = ((t - a) / panel).round() as usize;
            (k * stride).min(self.n_nodes - 1)
        };
        let (start, end) = (snap(t1), snap(t2));
        if start >= end {
            return Err(PdxError::Resolution(format!(
                "window [{t1}, {t2}] collapses to a single quadrature node; refine the rule"
            )));
        }
        let global = self.weights(a, b);
        let mut weights = vec![0.0; self.n_nodes];
        weights[start..=end].copy_from_slice(&global[start..=end]);
        if start > 0 {
            weights[start] *= 0.5;
        }
        if end + 1 < self.n_nodes {
            weights[end] *= 0.5;
        }
        Ok(WindowWeights {
            weights,
            start,
            end,
            t1_used: nodes[start],
            t2_used: nodes[end],
            t1_offset: (nodes[start] - t1).abs(),
            t2_offset: (nodes[end] - t2).abs(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowWeights {
    /// One weight per global node; zero outside the window.
    pub weights: Vec<f64>,
    pub start: usize,
    pub end: usize,
    pub t1_used: f64,
    pub t2_used: f64,
    pub t1_offset: f64,
    pub t2_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult {
    pub value: f64,
    pub intervals: usize,
}

/// Composite Simpson with interval doubling until successive estimates agree.
///
/// Converged when `|S_2n - S_n| <= rel_tol |S_2n| + abs_tol`, after at least 16 intervals.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_intervals: usize) -> Result<AdaptiveResult>
where
    F: Fn(f64) -> f64,
{
    if !(b > a) {
        return Err(PdxError::Domain(format!("adaptive quadrature needs a < b (got {a}, {b})")));
    }
    let mut intervals = 1usize;
    let mut h = b - a;
    let mut trapezoid = 0.5 * h * (f(a) + f(b));
    let mut previous: Option<f64> = None;
    while intervals < max_intervals {
        let mids: f64 = (0..intervals).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        let refined = 0.5 * trapezoid + 0.5 * h * mids;
        let simpson = (4.0 * refined - trapezoid) / 3.0;
        intervals *= 2;
        h *= 0.5;
        trapezoid = refined;
        if let Some(prev) = previous {
            if intervals >= 16 && (simpson - prev).abs() <= rel_tol * simpson.abs() + abs_tol {
                return Ok(AdaptiveResult { value: simpson, intervals });
            }
        }
        if !simpson.is_finite() {
            return Err(PdxError::Numeric(format!(
                "non-finite quadrature estimate after {intervals} intervals"
            )));
        }
        previous = Some(simpson);
    }
    Err(PdxError::Numeric(format!(
        "adaptive Simpson did not reach relative tolerance {rel_tol:e} within {intervals} intervals ({} nodes)",
        intervals + 1
    )))
}

//! Grid Stieltjes-Perron inversion.
//!
//! Cells are half-open `[x, x + h)`. An atom sitting exactly on a cell edge
//! is split evenly between the two neighbouring cells, which is the
//! normalization the inversion formula itself produces.

use std::f64::consts::PI;

use serde::Serialize;

use crate::linalg::max_abs;
use crate::solutions::StieltjesTransform;
use crate::{CMatrix, Error, Result, Tolerances, C64};

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Uniform grid `a, a + h, ...` covering `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronGrid {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

impl PerronGrid {
    pub fn new(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(a < b) || !(h > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("bad grid {a}:{b}:{h}")));
        }
        Ok(Self { a, b, h })
    }

    /// Parses `a:b:h`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("grid '{spec}': {e}")))?;
        match parts.as_slice() {
            [a, b, h] => Self::new(*a, *b, *h),
            _ => Err(Error::InvalidInput(format!("grid '{spec}' must be a:b:h"))),
        }
    }

    /// Cell edges `(x, x + h)`, the last one clipped to `b`.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let count = ((self.b - self.a) / self.h - 1e-9).ceil().max(1.0) as usize;
        (0..count)
            .map(|k| {
                let lo = self.a + k as f64 * self.h;
                (lo, (lo + self.h).min(self.b))
            })
            .collect()
    }
}

/// Sampled increments `M([x, x + h))`.
#[derive(Debug, Clone, Serialize)]
pub struct PerronResult {
    pub cells: Vec<(f64, f64)>,
    #[serde(skip)]
    pub increments: Vec<CMatrix>,
    /// Smoothing level of the returned increments.
    pub eps: f64,
    /// Largest per-cell change between consecutive smoothing levels.
    pub differences: Vec<f64>,
    /// `S_0` estimated from `-iy T(iy)` at large `y`.
    pub mass_estimate: f64,
}

impl PerronResult {
    pub fn total(&self) -> CMatrix {
        let n = self.increments.first().map(|m| m.nrows()).unwrap_or(0);
        self.increments.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m)
    }
}

pub const DEFAULT_EPS_SEQUENCE: [f64; 9] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6];

/// Approximates `M([x, x+h)) ≈ (1/π) ∫_x^{x+h} Im T(u + iε) du` and refines
/// `ε` along `eps_sequence` until two consecutive levels agree within
/// `perron_tol` (relative to the estimated total mass).
pub fn perron_inversion(
    t: &StieltjesTransform,
    grid: &PerronGrid,
    eps_sequence: &[f64],
    tol: &Tolerances,
) -> Result<PerronResult> {
    if eps_sequence.len() < 2 {
        return Err(Error::InvalidInput("need at least two smoothing levels".into()));
    }
    if eps_sequence.iter().any(|&e| !(e > 0.0)) || eps_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("eps sequence must be positive and decreasing".into()));
    }
    let cells = grid.cells();
    let far = 1e6 * (1.0 + grid.a.abs().max(grid.b.abs()));
    let mass_estimate = max_abs(&t.evaluate(C64::new(0.0, far))?) * far;
    let threshold = tol.perron_tol * if mass_estimate > 0.0 { mass_estimate } else { 1.0 };

    let mut previous = sample_level(t, &cells, eps_sequence[0], threshold)?;
    let mut differences = Vec::new();
    for &eps in &eps_sequence[1..] {
        let current = sample_level(t, &cells, eps, threshold)?;
        let diff = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max);
        differences.push(diff);
        if diff <= threshold {
            return Ok(PerronResult {
                cells,
                increments: current,
                eps,
                differences,
                mass_estimate,
            });
        }
        previous = current;
    }
    Err(Error::NotConverged(format!(
        "per-cell changes across smoothing levels {:?} stayed above {threshold:e}; atoms close to cell edges converge slowly",
        differences
    )))
}

fn sample_level(t: &StieltjesTransform, cells: &[(f64, f64)], eps: f64, threshold: f64) -> Result<Vec<CMatrix>> {
    let density = |u: f64| -> Result<CMatrix> {
        let v = t.evaluate(C64::new(u, eps))?;
        // (T - T*)/(2i) / π
        Ok((&v - v.adjoint()) * C64::new(0.0, -0.5 / PI))
    };
    cells
        .iter()
        .map(|&(lo, hi)| {
            let panels = ((hi - lo) / (20.0 * eps)).ceil().max(1.0) as usize;
            let width = (hi - lo) / panels as f64;
            let local_tol = 1e-3 * threshold / panels as f64;
            let mut acc = CMatrix::zeros(t.dim(), t.dim());
            for p in 0..panels {
                let a = lo + p as f64 * width;
                acc += adaptive(&density, a, a + width, local_tol, 30)?;
            }
            Ok(acc)
        })
        .collect()
}

fn gauss(f: &dyn Fn(f64) -> Result<CMatrix>, a: f64, b: f64) -> Result<CMatrix> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc: Option<CMatrix> = None;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let v = f(mid + half * x)? * C64::new(w * half, 0.0);
        acc = Some(match acc {
            Some(s) => s + v,
            None => v,
        });
    }
    Ok(acc.expect("five nodes"))
}

fn adaptive(f: &dyn Fn(f64) -> Result<CMatrix>, a: f64, b: f64, tol: f64, depth: u32) -> Result<CMatrix> {
    let whole = gauss(f, a, b)?;
    let mid = 0.5 * (a + b);
    let left = gauss(f, a, mid)?;
    let right = gauss(f, mid, b)?;
    let halves = left + right;
    if depth == 0 || max_abs(&(&halves - &whole)) <= tol {
        return Ok(halves);
    }
    Ok(adaptive(f, a, mid, 0.5 * tol, depth - 1)? + adaptive(f, mid, b, 0.5 * tol, depth - 1)?)
}

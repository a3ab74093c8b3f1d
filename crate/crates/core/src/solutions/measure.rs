use serde::Serialize;

use crate::extensions::SelfAdjointExtension;
use crate::gram_space::GramSpace;
use crate::linalg::{hermitian_eigen, max_abs, symmetrize};
use crate::moment_model::MomentSequence;
use crate::{CMatrix, Result, Tolerances, C64};

/// Point mass `W δ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub weight: CMatrix,
}

/// `Σ_j W_j δ_{t_j}` with Hermitian PSD `N×N` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMatrixMeasure {
    n: usize,
    atoms: Vec<Atom>,
}

impl AtomicMatrixMeasure {
    /// Sorts atoms by location and merges exactly coinciding ones.
    pub fn new(n: usize, atoms: Vec<Atom>) -> Self {
        Self::merged(n, atoms, 0.0)
    }

    /// Sorts atoms and merges neighbours closer than `gap`; the merged
    /// location is the trace-weighted mean.
    pub fn merged(n: usize, mut atoms: Vec<Atom>, gap: f64) -> Self {
        atoms.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut out: Vec<(Vec<Atom>, f64)> = Vec::new();
        for atom in atoms {
            match out.last_mut() {
                Some((group, last)) if atom.t - *last <= gap => {
                    *last = atom.t;
                    group.push(atom);
                }
                _ => {
                    let t = atom.t;
                    out.push((vec![atom], t));
                }
            }
        }
        let atoms = out
            .into_iter()
            .map(|(group, _)| {
                let weight = group
                    .iter()
                    .fold(CMatrix::zeros(n, n), |acc, a| acc + &a.weight);
                let traces: Vec<f64> = group.iter().map(|a| a.weight.trace().re.max(0.0)).collect();
                let total: f64 = traces.iter().sum();
                let t = if total > 0.0 {
                    group.iter().zip(&traces).map(|(a, w)| a.t * w).sum::<f64>() / total
                } else {
                    group.iter().map(|a| a.t).sum::<f64>() / group.len() as f64
                };
                Atom {
                    t,
                    weight: symmetrize(&weight),
                }
            })
            .collect();
        Self { n, atoms }
    }

    /// Scalar measure `Σ μ_k δ_{x_k}`.
    pub fn scalar(points: &[(f64, f64)]) -> Self {
        Self::new(
            1,
            points
                .iter()
                .map(|&(t, mu)| Atom {
                    t,
                    weight: CMatrix::from_element(1, 1, C64::new(mu, 0.0)),
                })
                .collect(),
        )
    }

    pub fn zero(n: usize) -> Self {
        Self { n, atoms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.t).collect()
    }

    /// `∫ x^k dM` for `k = 0..count-1`.
    pub fn moments(&self, count: usize) -> Vec<CMatrix> {
        (0..count)
            .map(|k| {
                self.atoms.iter().fold(CMatrix::zeros(self.n, self.n), |acc, a| {
                    acc + a.weight.scale(a.t.powi(k as i32))
                })
            })
            .collect()
    }

    pub fn moment_sequence(&self, count: usize, tol: &Tolerances) -> Result<MomentSequence> {
        MomentSequence::new(self.n, self.moments(count), tol)
    }

    /// `Σ_j |t_j|^k ‖W_j‖`, an upper bound for every entry of the `k`-th
    /// moment.
    pub fn absolute_moment(&self, k: usize) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.t.abs().powi(k as i32) * max_abs(&a.weight))
            .sum()
    }

    /// `Σ_j W_j / (t_j - λ)`.
    pub fn transform(&self, lambda: C64) -> CMatrix {
        self.atoms.iter().fold(CMatrix::zeros(self.n, self.n), |acc, a| {
            acc + a.weight.map(|w| w / (C64::new(a.t, 0.0) - lambda))
        })
    }

    /// Symmetric distance: the larger of the Hausdorff distance between
    /// the location sets and the largest weight gap between each atom and
    /// the nearest atom of the other measure.
    pub fn distance(&self, other: &Self) -> f64 {
        fn one_way(a: &AtomicMatrixMeasure, b: &AtomicMatrixMeasure) -> (f64, f64) {
            let mut loc: f64 = 0.0;
            let mut weight: f64 = 0.0;
            for x in &a.atoms {
                match b
                    .atoms
                    .iter()
                    .min_by(|p, q| (p.t - x.t).abs().total_cmp(&(q.t - x.t).abs()))
                {
                    Some(y) => {
                        loc = loc.max((y.t - x.t).abs());
                        weight = weight.max(max_abs(&(&y.weight - &x.weight)));
                    }
                    None => {
                        loc = f64::INFINITY;
                        weight = weight.max(max_abs(&x.weight));
                    }
                }
            }
            (loc, weight)
        }
        let (l1, w1) = one_way(self, other);
        let (l2, w2) = one_way(other, self);
        l1.max(l2).max(w1).max(w2)
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson {
                    t: a.t,
                    w: crate::io::matrix_to_pairs(&a.weight),
                })
                .collect(),
        }
    }
}

/// `{ "atoms": [ {"t": .., "W": [[[re, im], ..], ..]} ] }`.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct AtomJson {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: Vec<Vec<[f64; 2]>>,
}

/// Spectral measure of a self-adjoint extension seen through
/// `x_0..x_{N-1}`: `W_j[k, l] = (P_j x_k, x_l)`.
///
/// Eigenvalues closer than `cluster_tol·spectral_radius` are merged with
/// summed projectors. An atom is dropped only when its contribution to every
/// moment up to `S_{2d}`, `‖W‖·max(1,|t|)^{2d}`, stays below
/// `weight_tol·max|S_0|`: a far eigenvalue with a tiny weight still carries
/// the high moments.
pub fn spectral_measure(ext: &SelfAdjointExtension, space: &GramSpace, n: usize, tol: &Tolerances) -> AtomicMatrixMeasure {
    let eig = hermitian_eigen(&ext.matrix);
    let d = (space.len() / n.max(1)).saturating_sub(1);
    let blocks: Vec<CMatrix> = (0..=d).map(|k| space.columns(k * n, n)).collect();
    let block_norms: Vec<f64> = blocks
        .iter()
        .map(|b| b.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
        .collect();
    let radius = eig.values.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let s0 = max_abs(&(blocks[0].adjoint() * &blocks[0]));
    let atoms = eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            // v* x_{kN+a} = t^k v* x_a; the k with the smallest
            // ‖x_{kN}‖/|t|^k keeps far atoms' small weights accurate
            let k = (0..=d)
                .min_by(|&a, &b| {
                    let score = |k: usize| block_norms[k] / t.abs().powi(k as i32);
                    score(a).total_cmp(&score(b))
                })
                .filter(|&k| t != 0.0 || k == 0)
                .unwrap_or(0);
            let v = eig.vectors.column(j);
            let c = (blocks[k].adjoint() * v).map(|z| z.conj() / t.powi(k as i32));
            let weight = CMatrix::from_fn(n, n, |a, b| c[a] * c[b].conj());
            Atom { t, weight }
        })
        .collect();
    let merged = AtomicMatrixMeasure::merged(n, atoms, tol.cluster_tol * radius.max(f64::MIN_POSITIVE));
    let top = 2 * (space.len() / n.max(1)).saturating_sub(1) as i32;
    AtomicMatrixMeasure {
        n,
        atoms: merged
            .atoms
            .into_iter()
            .filter(|a| max_abs(&a.weight) * a.t.abs().max(1.0).powi(top) >= tol.weight_tol * s0)
            .collect(),
    }
}

/// Deviation of a measure's moments from given moments, per order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// `max_{k,l} |Σ_j t_j^n W_j[k,l] - S_n[k,l]|` for each `n`.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    /// `max_n max |S_n|`.
    pub scale: f64,
    pub tol: f64,
    /// `max_deviation ≤ tol·max(1, scale)`.
    pub passed: bool,
}

pub fn verify_moments(measure: &AtomicMatrixMeasure, seq: &MomentSequence, tol: f64) -> VerificationReport {
    let got = measure.moments(seq.len());
    let deviation: Vec<f64> = got
        .iter()
        .zip(seq.entries())
        .map(|(a, b)| max_abs(&(a - b)))
        .collect();
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    let scale = seq.entries().iter().map(max_abs).fold(0.0, f64::max);
    VerificationReport {
        passed: max_deviation <= tol * scale.max(1.0),
        deviation,
        max_deviation,
        scale,
        tol,
    }
}

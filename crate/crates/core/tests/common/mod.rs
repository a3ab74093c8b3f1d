#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use truncated_hamburger::prelude::*;
use truncated_hamburger::solutions::Atom;

pub struct Instance {
    pub truth: AtomicMatrixMeasure,
    pub seq: MomentSequence,
    /// Rank of the extra atom; equals the expected `q`.
    pub extra_rank: usize,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    loop {
        let qr = complex_matrix(rng, n, n).qr();
        if qr.r().diagonal().iter().all(|z| z.norm() > 1e-3) {
            return qr.q();
        }
    }
}

/// Strict contraction with norm at most `bound`.
pub fn contraction(rng: &mut impl Rng, n: usize, bound: f64) -> CMatrix {
    let m = complex_matrix(rng, n, n);
    if n == 0 {
        return m;
    }
    let norm = m.clone().svd(false, false).singular_values.max();
    if norm == 0.0 {
        return m;
    }
    m * C64::new(bound * rng.random_range(0.2..1.0) / norm, 0.0)
}

fn locations(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..count).map(|_| rng.random_range(-2.0..2.0)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > 0.4) {
            return t;
        }
    }
}

/// PSD weight of rank `rank` with nonzero eigenvalues in `[0.3, 1.3]`.
fn weight(rng: &mut impl Rng, n: usize, rank: usize) -> CMatrix {
    let u = unitary(rng, n);
    let mut w = CMatrix::zeros(n, n);
    for k in 0..rank {
        let v = u.column(k);
        w += v * v.adjoint() * C64::new(rng.random_range(0.3..1.3), 0.0);
    }
    (&w + w.adjoint()) * C64::new(0.5, 0.0)
}

/// `d` full-rank atoms plus one atom of rank `extra_rank`, so that
/// `Γ_{d-1} > 0` and the deficiency index is `extra_rank`.
pub fn instance(seed: u64, n: usize, d: usize, extra_rank: usize) -> Instance {
    let mut rng = rng(seed);
    let t = locations(&mut rng, d + 1);
    let extra = rng.random_range(0..=d);
    let atoms: Vec<Atom> = t
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != extra || extra_rank > 0)
        .map(|(j, &t)| Atom {
            t,
            weight: weight(&mut rng, n, if j == extra { extra_rank } else { n }),
        })
        .collect();
    let truth = AtomicMatrixMeasure::new(n, atoms);
    let seq = truth
        .moment_sequence(2 * d + 1, &Tolerances::default())
        .expect("moments of a PSD measure are Hermitian");
    Instance { truth, seq, extra_rank }
}

/// The `index`-th instance of the fuzz family: `N ∈ {1,2,3}`, `d ∈ 1..=4`,
/// extra rank uniform in `0..=N`.
pub fn fuzz_instance(index: u64) -> Instance {
    let mut pick = rng(0x5eed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = pick.random_range(1..=3);
    let d = pick.random_range(1..=4);
    let k = pick.random_range(0..=n);
    instance(index, n, d, k)
}

/// A random isometric parameter the problem accepts.
pub fn admissible_isometry(rng: &mut impl Rng, problem: &TruncatedProblem) -> ExtensionParameter {
    let q = problem.deficiency().dim();
    for _ in 0..64 {
        let v = ExtensionParameter::isometric(unitary(rng, q));
        if problem.admissibility(&v).map(|r| r.admissible && !r.borderline).unwrap_or(false) {
            return v;
        }
    }
    problem.default_isometry()
}

/// `|a - b| ≤ rel · scale_n` entrywise, where `scale_n = Σ_j |t_j|^n ‖W_j‖`
/// of the generating measure (floored at `max|S_0|·1e-3`).
pub fn moments_close(got: &[CMatrix], truth: &AtomicMatrixMeasure, seq: &MomentSequence, rel: f64) -> (bool, f64) {
    let s0 = seq.get(0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (n, (a, b)) in got.iter().zip(seq.entries()).enumerate() {
        let scale = truth.absolute_moment(n).max(1e-3 * s0);
        let dev = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        worst = worst.max(dev);
    }
    (worst <= rel, worst)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of `(T - T*)/(2i)`.
pub fn im_min_eigenvalue(t: &CMatrix) -> f64 {
    let im = (t - t.adjoint()) * C64::new(0.0, -0.5);
    let im = (&im + im.adjoint()) * C64::new(0.5, 0.0);
    im.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn upper_point(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..2.0))
}

//! Decision procedure for the scalar problem with an even number of moments
//! `s_0, ..., s_{2d+1}`.

mod roots;
mod vandermonde;

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

pub use roots::monic_roots;
pub use vandermonde::solve_moment_vandermonde;

use crate::moment_model::MomentSequence;
use crate::problem::TruncatedProblem;
use crate::solutions::{verify_moments, AtomicMatrixMeasure, MeasureJson};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    UniqueZero,
    SolvableNondegenerate,
    UniqueDegenerate,
    Infeasible,
}

impl Verdict {
    pub fn is_solvable(self) -> bool {
        self != Verdict::Infeasible
    }
}

/// Why the verdict was reached.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    AllZero,
    ZeroMass { first_nonzero: usize },
    GammaNotPsd { min_eigenvalue: f64 },
    Nondegenerate { augmented_moment: f64 },
    Degenerate,
    RootsNotReal { max_imag: f64 },
    RootsNotDistinct { min_gap: f64 },
    NegativeWeight { index: usize, value: f64 },
    MomentMismatch { n: usize, expected: f64, got: f64 },
    Numerical { message: String },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::AllZero => write!(f, "all moments vanish"),
            Certificate::ZeroMass { first_nonzero } => {
                write!(f, "s_0 = 0 but s_{first_nonzero} ≠ 0")
            }
            Certificate::GammaNotPsd { min_eigenvalue } => {
                write!(f, "Hankel matrix not PSD (min eigenvalue {min_eigenvalue:e})")
            }
            Certificate::Nondegenerate { augmented_moment } => {
                write!(f, "positive definite Hankel matrix, extended by s = {augmented_moment}")
            }
            Certificate::Degenerate => write!(f, "degenerate, all remaining moments match"),
            Certificate::RootsNotReal { max_imag } => write!(f, "kernel polynomial has non-real root (|Im| = {max_imag:e})"),
            Certificate::RootsNotDistinct { min_gap } => write!(f, "kernel polynomial has a repeated root (gap {min_gap:e})"),
            Certificate::NegativeWeight { index, value } => write!(f, "weight {index} is negative ({value})"),
            Certificate::MomentMismatch { n, expected, got } => {
                write!(f, "moment n={n} mismatch: {got} ≠ {expected}")
            }
            Certificate::Numerical { message } => write!(f, "{message}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarEvenResult {
    pub verdict: Verdict,
    #[serde(serialize_with = "measure_json")]
    pub measure: Option<AtomicMatrixMeasure>,
    pub certificate: Certificate,
    pub message: String,
    pub r: Option<usize>,
    /// Kernel vector of `Γ_{r+1}`, normalized so its last entry is 1.
    pub c: Vec<f64>,
    pub roots: Vec<f64>,
    pub mu: Vec<f64>,
    pub warnings: Vec<String>,
}

fn measure_json<S: serde::Serializer>(m: &Option<AtomicMatrixMeasure>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(AtomicMatrixMeasure::to_json).serialize(s)
}

impl ScalarEvenResult {
    fn new(verdict: Verdict, certificate: Certificate) -> Self {
        Self {
            verdict,
            measure: None,
            message: certificate.to_string(),
            certificate,
            r: None,
            c: Vec::new(),
            roots: Vec::new(),
            mu: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn measure_json(&self) -> Option<MeasureJson> {
        self.measure.as_ref().map(AtomicMatrixMeasure::to_json)
    }
}

fn hankel(s: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |i, j| s[i + j])
}

fn scale(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(m.clone())
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigen(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn is_positive(m: &DMatrix<f64>, tol: &Tolerances) -> bool {
    min_eigenvalue(m) > tol.pos_tol * scale(m)
}

/// Largest `n ≤ d` with `Γ_n > 0`, or `None` when `s_0` is not positive.
/// Positivity is inherited by leading blocks, so the scan stops at the
/// first failure.
pub fn compute_rank_r(s: &[f64], d: usize, tol: &Tolerances) -> Option<usize> {
    assert!(s.len() > 2 * d, "need s_0..s_2d");
    let mut r = None;
    for n in 0..=d {
        if !is_positive(&hankel(s, n), tol) {
            break;
        }
        r = Some(n);
    }
    r
}

/// Kernel vector of `Γ_{r+1}` with `c_{r+1} = 1`. The kernel must be one
/// dimensional and `Γ_r` invertible.
pub fn null_vector_c(s: &[f64], r: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    if s.len() < 2 * r + 3 {
        return Err(Error::InsufficientMoments {
            needed: 2 * r + 3,
            got: s.len(),
        });
    }
    let g = hankel(s, r + 1);
    let threshold = tol.pos_tol * scale(&g);
    let e = eigen(&g);
    let kernel: Vec<usize> = (0..=r + 1).filter(|&i| e.eigenvalues[i].abs() <= threshold).collect();
    if kernel.len() != 1 {
        return Err(Error::NullSpaceNotOneDim { dim: kernel.len() });
    }
    let v = e.eigenvectors.column(kernel[0]);
    let last = v[r + 1];
    if last.abs() <= 1e-8 * v.norm() {
        return Err(Error::NormalizationFail { last });
    }
    // Γ_r c' = -γ with c_{r+1} = 1 is better conditioned than rescaling v
    let head = hankel(s, r);
    let gamma = DVector::from_fn(r + 1, |i, _| -s[i + r + 1]);
    let solved = head
        .cholesky()
        .map(|ch| ch.solve(&gamma))
        .ok_or(Error::NormalizationFail { last })?;
    let mut c: Vec<f64> = solved.iter().copied().collect();
    c.push(1.0);
    Ok(c)
}

/// Decides solvability of the scalar problem for `s_0..s_{2d+1}` and
/// returns a witness measure when one exists.
pub fn solve_scalar_even(s: &[f64], tol: &Tolerances) -> Result<ScalarEvenResult> {
    if s.len() < 2 || s.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "expected an even number (at least 2) of moments, got {}",
            s.len()
        )));
    }
    if let Some(k) = s.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("moment {k} is not finite")));
    }
    let d = s.len() / 2 - 1;

    if s.iter().all(|&x| x == 0.0) {
        let mut out = ScalarEvenResult::new(Verdict::UniqueZero, Certificate::AllZero);
        out.measure = Some(AtomicMatrixMeasure::zero(1));
        return Ok(out);
    }

    let gd = hankel(s, d);
    let lo = min_eigenvalue(&gd);
    if lo < -tol.psd_tol * scale(&gd) {
        return Ok(ScalarEvenResult::new(
            Verdict::Infeasible,
            Certificate::GammaNotPsd { min_eigenvalue: lo },
        ));
    }

    let s_scale = s.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if s[0] <= tol.pos_tol * s_scale {
        let first_nonzero = s.iter().position(|&x| x != 0.0).unwrap_or(0);
        return Ok(ScalarEvenResult::new(
            Verdict::Infeasible,
            Certificate::ZeroMass { first_nonzero },
        ));
    }

    let r = compute_rank_r(s, d, tol).expect("s_0 > 0");
    if r == d {
        nondegenerate(s, d, tol)
    } else {
        degenerate(s, d, r, tol)
    }
}

/// Appends `s_{2d+2}` so that `Γ_{d+1}` has determinant at least `margin`.
fn augmented_moment(s: &[f64], d: usize, margin: f64) -> f64 {
    let k = d + 1;
    let mut full = hankel(&[s, &[0.0]].concat(), k);
    full[(k, k)] = 0.0;
    // cofactors along the last row
    let mut others = 0.0;
    let mut corner = 0.0;
    for j in 0..=k {
        let minor = full.clone().remove_row(k).remove_column(j);
        let det = minor.determinant();
        let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
        if j == k {
            corner = sign * det;
        } else {
            others += full[(k, j)] * sign * det;
        }
    }
    (margin + others.abs()) / corner
}

fn nondegenerate(s: &[f64], d: usize, tol: &Tolerances) -> Result<ScalarEvenResult> {
    let mut margin = 1.0;
    let mut last_err = None;
    for _ in 0..8 {
        let extra = augmented_moment(s, d, margin);
        let mut ext = s.to_vec();
        ext.push(extra);
        let seq = MomentSequence::scalar(&ext)?;
        let attempt = TruncatedProblem::new(&seq, tol).and_then(|p| p.atomic_solution(&p.default_isometry()));
        match attempt {
            Ok(measure) => {
                let given = MomentSequence::scalar(s)?;
                let check = verify_moments(&measure, &given, tol.moment_tol);
                let mut out = ScalarEvenResult::new(
                    Verdict::SolvableNondegenerate,
                    Certificate::Nondegenerate { augmented_moment: extra },
                );
                out.r = Some(d);
                if !check.passed {
                    out.warnings.push(format!(
                        "witness reproduces the moments only to {:e}",
                        check.max_deviation / check.scale
                    ));
                }
                out.measure = Some(measure);
                return Ok(out);
            }
            Err(e) => last_err = Some(e),
        }
        // cancellation in the cofactor sum can eat a unit margin
        margin *= 10.0;
    }
    let e = last_err.expect("at least one attempt");
    let mut out = ScalarEvenResult::new(
        Verdict::SolvableNondegenerate,
        Certificate::Nondegenerate { augmented_moment: f64::NAN },
    );
    out.r = Some(d);
    out.warnings.push(format!("no witness constructed: {e}"));
    Ok(out)
}

fn infeasible(r: usize, c: Vec<f64>, certificate: Certificate) -> ScalarEvenResult {
    let mut out = ScalarEvenResult::new(Verdict::Infeasible, certificate);
    out.r = Some(r);
    out.c = c;
    out
}

fn degenerate(s: &[f64], d: usize, r: usize, tol: &Tolerances) -> Result<ScalarEvenResult> {
    let c = match null_vector_c(s, r, tol) {
        Ok(c) => c,
        Err(e) => {
            return Ok(infeasible(r, Vec::new(), Certificate::Numerical { message: e.to_string() }));
        }
    };
    let Some(complex_roots) = monic_roots(&c[..=r]) else {
        let message = "companion eigenvalue iteration did not converge".to_string();
        return Ok(infeasible(r, c, Certificate::Numerical { message }));
    };
    let root_scale = 1.0 + complex_roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag = complex_roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tol.root_tol * root_scale {
        let mut out = infeasible(r, c, Certificate::RootsNotReal { max_imag });
        if max_imag <= 100.0 * tol.root_tol * root_scale {
            out.warnings.push("borderline: imaginary parts close to the root tolerance".into());
        }
        return Ok(out);
    }
    let roots: Vec<f64> = complex_roots.iter().map(|z| z.re).collect();
    let spread = roots.last().unwrap() - roots.first().unwrap();
    let min_gap = roots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap <= tol.sep_tol * spread {
        let mut out = infeasible(r, c, Certificate::RootsNotDistinct { min_gap });
        out.roots = roots;
        return Ok(out);
    }

    let mu = solve_moment_vandermonde(&roots, &s[..=r]);
    let weight_floor = -tol.moment_tol * s[0];
    if let Some((index, &value)) = mu.iter().enumerate().find(|(_, &m)| m < weight_floor) {
        let mut out = infeasible(r, c, Certificate::NegativeWeight { index, value });
        out.roots = roots;
        out.mu = mu;
        return Ok(out);
    }

    for n in r + 1..=2 * d + 1 {
        let got: f64 = roots.iter().zip(&mu).map(|(x, m)| m * x.powi(n as i32)).sum();
        let abs: f64 = roots.iter().zip(&mu).map(|(x, m)| m.abs() * x.abs().powi(n as i32)).sum();
        if (got - s[n]).abs() > tol.moment_tol * abs.max(s[n].abs()).max(1.0) {
            let mut out = infeasible(r, c, Certificate::MomentMismatch { n, expected: s[n], got });
            out.roots = roots;
            out.mu = mu;
            return Ok(out);
        }
    }

    let atoms: Vec<(f64, f64)> = roots.iter().zip(&mu).map(|(&x, &m)| (x, m.max(0.0))).collect();
    let mut out = ScalarEvenResult::new(Verdict::UniqueDegenerate, Certificate::Degenerate);
    out.r = Some(r);
    out.c = c;
    out.roots = roots;
    out.mu = mu;
    out.measure = Some(AtomicMatrixMeasure::scalar(&atoms));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn all_zero() {
        let r = solve_scalar_even(&[0., 0., 0., 0.], &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::UniqueZero);
        assert!(r.measure.unwrap().is_empty());
    }

    #[test]
    fn zero_mass_nonzero_tail() {
        let r = solve_scalar_even(&[0., 0., 0., 1.], &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
        assert_eq!(r.certificate, Certificate::ZeroMass { first_nonzero: 3 });
    }

    #[test]
    fn nondegenerate_case() {
        let s = [1., 0., 1., 0.];
        let r = solve_scalar_even(&s, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::SolvableNondegenerate);
        assert_eq!(r.certificate, Certificate::Nondegenerate { augmented_moment: 2.0 });
        let m = r.measure.unwrap();
        let check = verify_moments(&m, &MomentSequence::scalar(&s).unwrap(), 1e-8);
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn degenerate_unique() {
        let r = solve_scalar_even(&[1., 1., 1., 1.], &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::UniqueDegenerate);
        assert_eq!(r.r, Some(0));
        assert!((r.roots[0] - 1.0).abs() < 1e-12);
        assert!((r.mu[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_mismatch() {
        let r = solve_scalar_even(&[1., 1., 1., 2.], &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
        assert_eq!(r.message, "moment n=3 mismatch: 1 ≠ 2");
    }

    #[test]
    fn forced_rank_without_kernel_is_rejected() {
        assert!(matches!(
            null_vector_c(&[1., 0., 1., 0.], 0, &tol()),
            Err(Error::NullSpaceNotOneDim { dim: 0 })
        ));
    }

    #[test]
    fn rank_of_two_atoms() {
        // δ_{-1}/2 + δ_1/2 truncated at d = 2
        let s = [1., 0., 1., 0., 1., 0.];
        assert_eq!(compute_rank_r(&s, 2, &tol()), Some(1));
        let c = null_vector_c(&s, 1, &tol()).unwrap();
        assert!((c[0] + 1.0).abs() < 1e-12 && c[1].abs() < 1e-12 && c[2] == 1.0);
        let r = solve_scalar_even(&s, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::UniqueDegenerate);
    }

    #[test]
    fn indefinite_hankel() {
        let r = solve_scalar_even(&[1., 0., -1., 0.], &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
        assert!(matches!(r.certificate, Certificate::GammaNotPsd { .. }));
    }

    #[test]
    fn ranks_and_kernel() {
        assert_eq!(compute_rank_r(&[1., 0., 1., 0.], 1, &tol()), Some(1));
        assert_eq!(compute_rank_r(&[1., 1., 1., 1.], 1, &tol()), Some(0));
        let c = null_vector_c(&[2., 2., 2., 2.], 0, &tol()).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0] + 1.0).abs() < 1e-12 && c[1] == 1.0);
    }

    #[test]
    fn odd_count_is_an_error() {
        assert!(solve_scalar_even(&[1., 0., 1.], &tol()).is_err());
    }
}

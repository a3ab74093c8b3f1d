//! Moment data, block Hankel matrices and the positivity gates.

use serde::Serialize;

use crate::linalg::{hermitian_deviation, hermitian_eigen, max_abs, symmetrize};
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// Hermitian `N×N` moments `S_0..S_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    n: usize,
    entries: Vec<CMatrix>,
}

impl MomentSequence {
    /// Validates shapes and Hermiticity, then symmetrizes every moment.
    pub fn new(n: usize, entries: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension N must be positive".into()));
        }
        if entries.is_empty() {
            return Err(Error::InsufficientMoments { needed: 1, got: 0 });
        }
        let mut out = Vec::with_capacity(entries.len());
        for (index, s) in entries.into_iter().enumerate() {
            if s.nrows() != n || s.ncols() != n {
                return Err(Error::ShapeMismatch {
                    index,
                    rows: s.nrows(),
                    cols: s.ncols(),
                    n,
                });
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("moment S_{index} has non-finite entries")));
            }
            let deviation = hermitian_deviation(&s);
            if deviation > tol.herm_tol * max_abs(&s).max(f64::MIN_POSITIVE) {
                return Err(Error::NotHermitian { index, deviation });
            }
            out.push(symmetrize(&s));
        }
        Ok(Self { n, entries: out })
    }

    /// Scalar (`N = 1`) moments.
    pub fn scalar(s: &[f64]) -> Result<Self> {
        let entries = s
            .iter()
            .map(|&x| CMatrix::from_element(1, 1, C64::new(x, 0.0)))
            .collect();
        Self::new(1, entries, &Tolerances::default())
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of moments `m + 1`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.entries[k]
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    /// `d` for an odd count `2d + 1` of moments with `d ≥ 1`.
    pub fn truncation_degree(&self) -> Result<usize> {
        let len = self.entries.len();
        if len < 3 {
            return Err(Error::InsufficientMoments { needed: 3, got: len });
        }
        if len % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "the truncated problem needs an odd number 2d+1 of moments, got {len}"
            )));
        }
        Ok((len - 1) / 2)
    }

    /// Moments `S_0..S_{count-1}` as a new sequence.
    pub fn prefix(&self, count: usize) -> Self {
        Self {
            n: self.n,
            entries: self.entries[..count.min(self.entries.len())].to_vec(),
        }
    }
}

/// Block Hankel matrix `Γ_n` with block `(r, t)` equal to `S_{r+t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHankel {
    pub order: usize,
    pub block: usize,
    pub data: CMatrix,
}

impl BlockHankel {
    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    /// Smallest eigenvalue and the scale it is compared against.
    pub fn min_eigenvalue(&self) -> (f64, f64) {
        let e = hermitian_eigen(&self.data);
        (e.values.first().copied().unwrap_or(0.0), max_abs(&self.data))
    }

    pub fn is_psd(&self, psd_tol: f64) -> bool {
        let (lo, scale) = self.min_eigenvalue();
        lo >= -psd_tol * scale
    }

    pub fn is_positive(&self, pos_tol: f64) -> bool {
        let (lo, scale) = self.min_eigenvalue();
        lo > pos_tol * scale
    }
}

pub fn build_block_hankel(seq: &MomentSequence, n: usize) -> Result<BlockHankel> {
    let needed = 2 * n + 1;
    if seq.len() < needed {
        return Err(Error::InsufficientMoments {
            needed,
            got: seq.len(),
        });
    }
    let b = seq.dim();
    let size = (n + 1) * b;
    let data = CMatrix::from_fn(size, size, |row, col| {
        let (r, j) = (row / b, row % b);
        let (t, k) = (col / b, col % b);
        seq.get(r + t)[(j, k)]
    });
    Ok(BlockHankel {
        order: n,
        block: b,
        data,
    })
}

/// Outcome of the two gates `Γ_{d-1} > 0` and `Γ_d ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub d: usize,
    pub gamma_prev_positive: bool,
    pub gamma_d_psd: bool,
    pub min_eigenvalue_prev: f64,
    pub min_eigenvalue_d: f64,
    pub scale_prev: f64,
    pub scale_d: f64,
}

impl ConditionReport {
    /// Both gates hold.
    pub fn holds(&self) -> bool {
        self.gamma_prev_positive && self.gamma_d_psd
    }
}

pub fn check_truncated_conditions(seq: &MomentSequence, tol: &Tolerances) -> Result<ConditionReport> {
    let d = seq.truncation_degree()?;
    let prev = build_block_hankel(seq, d - 1)?;
    let full = build_block_hankel(seq, d)?;
    let (min_prev, scale_prev) = prev.min_eigenvalue();
    let (min_d, scale_d) = full.min_eigenvalue();
    Ok(ConditionReport {
        n: seq.dim(),
        d,
        gamma_prev_positive: min_prev > tol.pos_tol * scale_prev,
        gamma_d_psd: min_d >= -tol.psd_tol * scale_d,
        min_eigenvalue_prev: min_prev,
        min_eigenvalue_d: min_d,
        scale_prev,
        scale_d,
    })
}

/// `Γ_n ≥ 0` for every `n ≤ n_max`.
pub fn check_solvability_prefix(seq: &MomentSequence, n_max: usize, tol: &Tolerances) -> Result<Vec<bool>> {
    (0..=n_max)
        .map(|n| build_block_hankel(seq, n).map(|g| g.is_psd(tol.psd_tol)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, rows, &v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn hankel_scalar_examples() {
        let g = build_block_hankel(&MomentSequence::scalar(&[1., 0., 1.]).unwrap(), 1).unwrap();
        assert_eq!(g.data, real(2, &[1., 0., 0., 1.]));
        let g = build_block_hankel(&MomentSequence::scalar(&[1., 1., 1.]).unwrap(), 1).unwrap();
        assert_eq!(g.data, real(2, &[1., 1., 1., 1.]));
    }

    #[test]
    fn hankel_block_identity() {
        let tol = Tolerances::default();
        let i2 = CMatrix::identity(2, 2);
        let seq = MomentSequence::new(2, vec![i2.clone(), CMatrix::zeros(2, 2), i2], &tol).unwrap();
        let g = build_block_hankel(&seq, 1).unwrap();
        assert_eq!(g.data, CMatrix::identity(4, 4));
    }

    #[test]
    fn hankel_needs_enough_moments() {
        let seq = MomentSequence::scalar(&[1., 0.]).unwrap();
        assert_eq!(
            build_block_hankel(&seq, 1),
            Err(Error::InsufficientMoments { needed: 3, got: 2 })
        );
    }

    #[test]
    fn truncated_condition_examples() {
        let tol = Tolerances::default();
        let r = check_truncated_conditions(&MomentSequence::scalar(&[1., 0., 1.]).unwrap(), &tol).unwrap();
        assert!(r.gamma_prev_positive && r.gamma_d_psd);

        let r = check_truncated_conditions(&MomentSequence::scalar(&[1., 1., 1.]).unwrap(), &tol).unwrap();
        assert!(r.gamma_prev_positive && r.gamma_d_psd);
        // eigenvalues of [[1,1],[1,1]] are {0, 2}
        assert!(r.min_eigenvalue_d.abs() < 1e-14);

        let r = check_truncated_conditions(&MomentSequence::scalar(&[0., 0., 1.]).unwrap(), &tol).unwrap();
        assert!(!r.gamma_prev_positive);
    }

    #[test]
    fn prefix_examples() {
        let tol = Tolerances::default();
        let seq = MomentSequence::scalar(&[1., 0., 1., 0., 1.]).unwrap();
        assert_eq!(check_solvability_prefix(&seq, 2, &tol).unwrap(), vec![true, true, true]);

        let seq = MomentSequence::scalar(&[0.; 5]).unwrap();
        assert_eq!(check_solvability_prefix(&seq, 2, &tol).unwrap(), vec![true, true, true]);

        let seq = MomentSequence::scalar(&[1., 0., -1., 0., 1.]).unwrap();
        assert_eq!(check_solvability_prefix(&seq, 1, &tol).unwrap(), vec![true, false]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let tol = Tolerances::default();
        let s = CMatrix::from_row_slice(2, 2, &[C64::new(1., 0.), C64::new(0.5, 0.), C64::new(0., 0.), C64::new(1., 0.)]);
        assert!(matches!(
            MomentSequence::new(2, vec![s], &tol),
            Err(Error::NotHermitian { index: 0, .. })
        ));
    }

    #[test]
    fn symmetrizes_within_tolerance() {
        let tol = Tolerances::default();
        let s = CMatrix::from_row_slice(2, 2, &[C64::new(1., 0.), C64::new(0.5, 1e-13), C64::new(0.5, 0.), C64::new(1., 0.)]);
        let seq = MomentSequence::new(2, vec![s], &tol).unwrap();
        assert_eq!(hermitian_deviation(seq.get(0)), 0.0);
    }

    #[test]
    fn even_count_is_not_truncated_odd_problem() {
        let seq = MomentSequence::scalar(&[1., 0., 1., 0.]).unwrap();
        assert!(matches!(seq.truncation_degree(), Err(Error::InvalidInput(_))));
    }
}

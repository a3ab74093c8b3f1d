//! Finite-dimensional Hilbert space realizing a PSD block Hankel matrix as
//! the Gram matrix of vectors `x_0, x_1, ...`.

use serde::Serialize;

use crate::linalg::{hermitian_eigen, max_abs};
use crate::moment_model::BlockHankel;
use crate::{CMatrix, CVector, Error, Result, Tolerances, C64};

/// Coordinates of `x_0..x_{K-1}` in an orthonormal basis of `H = C^m`, with
/// `(x_a, x_b) = Γ_{a,b}`.
#[derive(Debug, Clone)]
pub struct GramSpace {
    dim: usize,
    coords: Vec<CVector>,
    rank_tol: f64,
    spectrum: Vec<f64>,
}

impl GramSpace {
    /// Builds a space directly from coordinate vectors. Every vector must
    /// have length `dim`.
    pub fn from_coords(dim: usize, coords: Vec<CVector>, rank_tol: f64) -> Self {
        debug_assert!(coords.iter().all(|c| c.len() == dim));
        Self {
            dim,
            coords,
            rank_tol,
            spectrum: Vec::new(),
        }
    }

    /// Ambient dimension `m` (numerical rank of the factored matrix).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn vector(&self, a: usize) -> &CVector {
        &self.coords[a]
    }

    pub fn coords(&self) -> &[CVector] {
        &self.coords
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Eigenvalues of the factored matrix, ascending, including the
    /// discarded ones.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// `m × count` matrix whose columns are `x_start..x_{start+count-1}`.
    pub fn columns(&self, start: usize, count: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, count);
        for j in 0..count {
            out.set_column(j, &self.coords[start + j]);
        }
        out
    }

    /// Gram matrix `((x_a, x_b))_{a,b}`.
    pub fn gram(&self) -> CMatrix {
        let x = self.columns(0, self.coords.len());
        (x.adjoint() * x).transpose()
    }

    /// `max |(x_a, x_b) - Γ_{a,b}|`.
    pub fn reconstruction_error(&self, g: &CMatrix) -> f64 {
        max_abs(&(self.gram() - g))
    }

    /// Applies a unitary change of orthonormal basis to every vector.
    pub fn transformed(&self, unitary: &CMatrix) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.iter().map(|c| unitary * c).collect(),
            rank_tol: self.rank_tol,
            spectrum: self.spectrum.clone(),
        }
    }

    pub fn to_dump(&self) -> GramDump {
        GramDump {
            dim: self.dim,
            rank_tol: self.rank_tol,
            spectrum: self.spectrum.clone(),
            coords: self
                .coords
                .iter()
                .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// Serializable view of a [`GramSpace`].
#[derive(Debug, Clone, Serialize)]
pub struct GramDump {
    pub dim: usize,
    pub rank_tol: f64,
    pub spectrum: Vec<f64>,
    pub coords: Vec<Vec<[f64; 2]>>,
}

/// Factors `G = X X*` through its eigendecomposition, keeping eigenpairs
/// above `rank_tol·λ_max`; `x_a` is row `a` of `U_kept Λ_kept^{1/2}`.
pub fn factor_psd(g: &BlockHankel, tol: &Tolerances) -> Result<GramSpace> {
    let eig = hermitian_eigen(&g.data);
    let lmax = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let lmin = eig.values.first().copied().unwrap_or(0.0);
    if lmin < -tol.psd_tol * lmax.max(max_abs(&g.data)) {
        return Err(Error::NotPsd { min_eigenvalue: lmin });
    }
    // descending order for the kept part so the dominant direction is first
    let kept: Vec<usize> = (0..eig.values.len())
        .rev()
        .filter(|&k| lmax > 0.0 && eig.values[k] > tol.rank_tol * lmax)
        .collect();
    let dim = kept.len();
    let coords = (0..g.size())
        .map(|a| {
            CVector::from_iterator(
                dim,
                kept.iter()
                    .map(|&k| eig.vectors[(a, k)] * C64::new(eig.values[k].sqrt(), 0.0)),
            )
        })
        .collect();
    Ok(GramSpace {
        dim,
        coords,
        rank_tol: tol.rank_tol,
        spectrum: eig.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_model::{build_block_hankel, MomentSequence};

    fn hankel(s: &[f64]) -> BlockHankel {
        let seq = MomentSequence::scalar(s).unwrap();
        build_block_hankel(&seq, (s.len() - 1) / 2).unwrap()
    }

    #[test]
    fn identity_factorization() {
        let g = hankel(&[1., 0., 1.]);
        let sp = factor_psd(&g, &Tolerances::default()).unwrap();
        assert_eq!(sp.dim(), 2);
        assert!(sp.reconstruction_error(&g.data) < 1e-15);
        assert!(crate::linalg::inner(sp.vector(0), sp.vector(1)).norm() < 1e-15);
    }

    #[test]
    fn rank_one_factorization() {
        let g = hankel(&[1., 1., 1.]);
        let sp = factor_psd(&g, &Tolerances::default()).unwrap();
        assert_eq!(sp.dim(), 1);
        assert!((sp.vector(0)[0] - C64::new(1., 0.)).norm() < 1e-14);
        assert!((sp.vector(1)[0] - C64::new(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_gives_empty_space() {
        let g = hankel(&[0., 0., 0.]);
        let sp = factor_psd(&g, &Tolerances::default()).unwrap();
        assert_eq!(sp.dim(), 0);
        assert_eq!(sp.len(), 2);
        assert_eq!(sp.reconstruction_error(&g.data), 0.0);
    }

    #[test]
    fn indefinite_is_rejected() {
        let g = hankel(&[1., 0., -1.]);
        assert!(matches!(factor_psd(&g, &Tolerances::default()), Err(Error::NotPsd { .. })));
    }
}

//! Dense complex helpers shared by the operator modules.
//!
//! Inner products are linear in the first argument: `(u, v) = v* u`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CMatrix, CVector, C64};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
///
/// Each eigenvector is rotated so that its first largest-modulus component is
/// real and positive, which pins the phase and makes output reproducible.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    HermitianEigen { values, vectors }
}

fn fix_phase(v: &mut CVector) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() >= peak * (1.0 - 1e-12)).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// `(M + M*)/2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |M - M*|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(u, v) = v* u`.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    v.dotc(u)
}

/// Singular values in descending order. Empty for empty matrices.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm; zero for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a matrix with at least as many rows as
/// columns; `+∞` when there are no columns (an injective empty map).
pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the column span by pivoted modified Gram-Schmidt.
///
/// At every step the remaining column with the largest residual norm is
/// taken; columns whose residual falls below `rel_tol` times the largest
/// input norm are treated as dependent.
pub fn orthonormal_range(cols: &CMatrix, rel_tol: f64) -> CMatrix {
    let scale = (0..cols.ncols())
        .map(|j| cols.column(j).norm())
        .fold(0.0, f64::max);
    let candidates: Vec<CVector> = (0..cols.ncols())
        .map(|j| cols.column(j).into_owned())
        .collect();
    pivoted_gram_schmidt(&CMatrix::zeros(cols.nrows(), 0), candidates, rel_tol * scale, usize::MAX)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` inside `C^dim`.
pub fn orthogonal_complement(q: &CMatrix, dim: usize) -> CMatrix {
    let wanted = dim.saturating_sub(q.ncols());
    let candidates: Vec<CVector> = (0..dim)
        .map(|k| {
            let mut e = CVector::zeros(dim);
            e[k] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    pivoted_gram_schmidt(q, candidates, 1e-8, wanted)
}

fn pivoted_gram_schmidt(
    fixed: &CMatrix,
    mut candidates: Vec<CVector>,
    abs_tol: f64,
    max_vectors: usize,
) -> CMatrix {
    let dim = fixed.nrows();
    let mut basis: Vec<CVector> = (0..fixed.ncols())
        .map(|j| fixed.column(j).into_owned())
        .collect();
    let n_fixed = basis.len();
    for c in candidates.iter_mut() {
        for b in &basis {
            project_out(c, b);
        }
    }
    while basis.len() - n_fixed < max_vectors && !candidates.is_empty() {
        let (best, norm) = candidates
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= abs_tol || norm <= 0.0 {
            break;
        }
        let mut v = candidates.remove(best);
        // second pass against the accumulated basis keeps orthogonality at
        // machine precision
        for b in &basis {
            project_out(&mut v, b);
        }
        let norm = v.norm();
        if norm <= abs_tol || norm <= 0.0 {
            continue;
        }
        v.unscale_mut(norm);
        for c in candidates.iter_mut() {
            project_out(c, &v);
        }
        basis.push(v);
    }
    let new = &basis[n_fixed..];
    let mut out = CMatrix::zeros(dim, new.len());
    for (j, v) in new.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

fn project_out(v: &mut CVector, unit: &CVector) {
    let coef = unit.dotc(v);
    v.axpy(-coef, unit, C64::new(1.0, 0.0));
}

/// Solves the square system `a x = b` with column-pivoted QR and returns
/// the solution together with the relative residual `‖a x - b‖/‖b‖`.
pub fn solve_square(a: &CMatrix, b: &CMatrix) -> Option<(CMatrix, f64)> {
    if a.nrows() != a.ncols() {
        return None;
    }
    if a.nrows() == 0 {
        return Some((CMatrix::zeros(0, b.ncols()), 0.0));
    }
    let x = a.clone().col_piv_qr().solve(b)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let bn = b.norm();
    let res = (a * &x - b).norm();
    let rel = if bn > 0.0 { res / bn } else { res };
    Some((x, rel))
}

/// Lifts a real matrix to a complex one.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Columns `x_a` as a matrix, one vector per column.
pub fn columns_to_matrix(dim: usize, cols: &[CVector]) -> CMatrix {
    let mut out = CMatrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_of_swap_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let e = hermitian_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        // phase pinned: first largest entry real positive
        assert!(e.vectors[(0, 1)].im.abs() < 1e-14 && e.vectors[(0, 1)].re > 0.0);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let q = CMatrix::from_column_slice(3, 1, &[c(1., 0.), c(0., 1.), c(0., 0.)]).scale(1.0 / 2f64.sqrt());
        let comp = orthogonal_complement(&q, 3);
        assert_eq!(comp.ncols(), 2);
        let gram = comp.adjoint() * &comp;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
        assert!((q.adjoint() * &comp).norm() < 1e-14);
    }

    #[test]
    fn range_detects_dependence() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1., 0.), c(2., 0.), c(0., 0.), c(0., 1.), c(0., 2.), c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
        );
        assert_eq!(orthonormal_range(&m, 1e-12).ncols(), 2);
    }

    #[test]
    fn empty_shapes() {
        assert!(singular_values(&CMatrix::zeros(0, 0)).is_empty());
        assert_eq!(operator_norm(&CMatrix::zeros(3, 0)), 0.0);
        assert_eq!(min_singular_value(&CMatrix::zeros(3, 0)), f64::INFINITY);
        assert_eq!(hermitian_eigen(&CMatrix::zeros(0, 0)).values.len(), 0);
    }
}

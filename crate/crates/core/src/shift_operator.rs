//! The symmetric block-shift operator `A x_k = x_{k+N}` on
//! `D(A) = span{x_0..x_{dN-1}}`, its deficiency subspaces at `±i`, the
//! forbidden operator and the admissibility test for extension parameters.
//!
//! Vectors of `N_i` and `N_{-i}` are handled through coordinates in the
//! orthonormal bases stored in [`DeficiencyPair`]; an extension parameter is
//! a `q×q` matrix sending `N_i`-coordinates to `N_{-i}`-coordinates.

use serde::Serialize;

use crate::extensions::ExtensionParameter;
use crate::gram_space::GramSpace;
use crate::linalg::{
    max_abs, min_singular_value, operator_norm, orthogonal_complement, orthonormal_range,
    singular_values, solve_square,
};
use crate::{CMatrix, CVector, Error, Result, Tolerances, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct ShiftOperator {
    space: GramSpace,
    n: usize,
    d: usize,
    dom_basis: CMatrix,
    action: CMatrix,
    perp_basis: CMatrix,
}

impl ShiftOperator {
    pub fn space(&self) -> &GramSpace {
        &self.space
    }

    /// Block size `N`.
    pub fn block(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Ambient dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.space.dim()
    }

    /// `dim D(A) = dN`.
    pub fn domain_dim(&self) -> usize {
        self.dom_basis.ncols()
    }

    /// Orthonormal basis of `D(A)`, one vector per column.
    pub fn dom_basis(&self) -> &CMatrix {
        &self.dom_basis
    }

    /// `m × dN` matrix of `A` applied to the columns of `dom_basis`.
    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    /// Orthonormal basis of `H ⊖ D(A)`.
    pub fn perp_basis(&self) -> &CMatrix {
        &self.perp_basis
    }

    /// `A f` for `f` given in `dom_basis` coordinates.
    pub fn apply(&self, f: &CVector) -> CVector {
        &self.action * f
    }

    /// `max |(A u, v) - (u, A v)|` over pairs of domain basis vectors.
    pub fn symmetry_residual(&self) -> f64 {
        let compressed = self.dom_basis.adjoint() * &self.action;
        max_abs(&(&compressed - compressed.adjoint()))
    }

    /// `max_k ‖A x_k - x_{k+N}‖`.
    pub fn shift_residual(&self) -> f64 {
        let dn = self.domain_dim();
        (0..dn)
            .map(|k| {
                let coords = self.dom_basis.adjoint() * self.space.vector(k);
                (self.apply(&coords) - self.space.vector(k + self.n)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Same operator after a unitary change of basis of `H`.
    pub fn transformed(&self, unitary: &CMatrix) -> Self {
        Self {
            space: self.space.transformed(unitary),
            n: self.n,
            d: self.d,
            dom_basis: unitary * &self.dom_basis,
            action: unitary * &self.action,
            perp_basis: unitary * &self.perp_basis,
        }
    }
}

pub fn build_shift(space: &GramSpace, n: usize, d: usize, tol: &Tolerances) -> Result<ShiftOperator> {
    let count = (d + 1) * n;
    if space.len() != count {
        return Err(Error::InvalidInput(format!(
            "space holds {} vectors, expected (d+1)N = {count}",
            space.len()
        )));
    }
    let m = space.dim();
    let dn = d * n;
    let domain = space.columns(0, dn);
    let shifted = space.columns(n, dn);
    let scale = singular_values(&space.columns(0, count)).first().copied().unwrap_or(0.0);
    let sigma_min = min_singular_value(&domain);
    if m < dn || !(sigma_min > tol.pos_tol.sqrt() * scale) {
        return Err(Error::DependentDomain {
            sigma_min: if m < dn { 0.0 } else { sigma_min },
        });
    }
    let dom_basis = orthonormal_range(&domain, 1e-14);
    if dom_basis.ncols() != dn {
        return Err(Error::DependentDomain { sigma_min });
    }
    // D = Q C with C = Q* D invertible, so A Q = Y C^{-1}
    let c = dom_basis.adjoint() * &domain;
    let (c_inv, _) = solve_square(&c, &CMatrix::identity(dn, dn)).ok_or(Error::DependentDomain { sigma_min })?;
    let action = shifted * c_inv;
    let perp_basis = orthogonal_complement(&dom_basis, m);
    Ok(ShiftOperator {
        space: space.clone(),
        n,
        d,
        dom_basis,
        action,
        perp_basis,
    })
}

/// Orthonormal bases of `N_i = H ⊖ (A - i)D(A)` and `N_{-i} = H ⊖ (A + i)D(A)`.
#[derive(Debug, Clone)]
pub struct DeficiencyPair {
    pub basis_ni: CMatrix,
    pub basis_nmi: CMatrix,
}

impl DeficiencyPair {
    /// Common dimension `q`.
    pub fn dim(&self) -> usize {
        self.basis_ni.ncols()
    }

    /// `dim N_i == dim N_{-i}`.
    pub fn balanced(&self) -> bool {
        self.basis_ni.ncols() == self.basis_nmi.ncols()
    }

    /// Largest inner product between a deficiency basis vector and the
    /// corresponding range `(A ∓ i)D(A)`.
    pub fn orthogonality_residual(&self, a: &ShiftOperator) -> f64 {
        let minus = a.action() - a.dom_basis() * I;
        let plus = a.action() + a.dom_basis() * I;
        max_abs(&(self.basis_ni.adjoint() * minus)).max(max_abs(&(self.basis_nmi.adjoint() * plus)))
    }

    pub fn transformed(&self, unitary: &CMatrix) -> Self {
        Self {
            basis_ni: unitary * &self.basis_ni,
            basis_nmi: unitary * &self.basis_nmi,
        }
    }
}

/// Bases are canonical: the projections of `x_0..x_{N-1}` onto each
/// deficiency subspace span it, and they are orthonormalized by pivoted
/// Gram-Schmidt (largest residual first, lowest index on ties). A unitary
/// change of basis of `H` therefore transports the bases exactly, and
/// parameter matrices keep their meaning.
pub fn deficiency_subspaces(a: &ShiftOperator) -> DeficiencyPair {
    let m = a.ambient_dim();
    let range_minus = orthonormal_range(&(a.action() - a.dom_basis() * I), 1e-12);
    let range_plus = orthonormal_range(&(a.action() + a.dom_basis() * I), 1e-12);
    let seeds = a.space().columns(0, a.block().min(a.space().len()));
    DeficiencyPair {
        basis_ni: canonical_basis(&orthogonal_complement(&range_minus, m), &seeds),
        basis_nmi: canonical_basis(&orthogonal_complement(&range_plus, m), &seeds),
    }
}

fn canonical_basis(subspace: &CMatrix, seeds: &CMatrix) -> CMatrix {
    let q = subspace.ncols();
    if q == 0 {
        return subspace.clone();
    }
    let projected = subspace * (subspace.adjoint() * seeds);
    let mut basis = orthonormal_range(&projected, 1e-8);
    basis = basis.columns(0, basis.ncols().min(q)).into_owned();
    if basis.ncols() < q {
        // seeds fell short numerically; complete inside the subspace
        let inside = subspace.adjoint() * &basis;
        let extra = orthogonal_complement(&inside, q);
        let fill = subspace * extra.columns(0, q - basis.ncols());
        let mut out = CMatrix::zeros(subspace.nrows(), q);
        out.columns_mut(0, basis.ncols()).copy_from(&basis);
        out.columns_mut(basis.ncols(), q - basis.ncols()).copy_from(&fill);
        basis = out;
    }
    basis
}

/// The forbidden operator `X_i : D(X_i) ⊆ N_i → N_{-i}`,
/// `X_i P_{N_i} h = P_{N_{-i}} h` for `h ⊥ D(A)`.
#[derive(Debug, Clone)]
pub struct ForbiddenOperator {
    /// Orthonormal basis of `D(X_i)` (columns, in `H`).
    pub dom_basis: CMatrix,
    /// `D(X_i)`-coordinates to `N_{-i}`-coordinates.
    pub matrix: CMatrix,
    /// `N_i`-coordinates of the `D(X_i)` basis, `q × dim D(X_i)`.
    pub embedding: CMatrix,
}

impl ForbiddenOperator {
    /// `X_i` as a `q×q` matrix in `N_i`/`N_{-i}` coordinates when
    /// `D(X_i) = N_i`.
    pub fn full_matrix(&self) -> Option<CMatrix> {
        if self.embedding.nrows() != self.embedding.ncols() {
            return None;
        }
        // embedding is unitary here
        Some(&self.matrix * self.embedding.adjoint())
    }

    pub fn domain_dim(&self) -> usize {
        self.dom_basis.ncols()
    }

    /// `max_h ‖X_i P_{N_i} h - P_{N_{-i}} h‖` over the basis of `H ⊖ D(A)`.
    pub fn consistency_residual(&self, a: &ShiftOperator, pair: &DeficiencyPair) -> f64 {
        let perp = a.perp_basis();
        let mut worst: f64 = 0.0;
        for r in 0..perp.ncols() {
            let h = perp.column(r);
            let p_ni = &pair.basis_ni * (pair.basis_ni.adjoint() * h);
            let p_nmi = &pair.basis_nmi * (pair.basis_nmi.adjoint() * h);
            let coords = self.dom_basis.adjoint() * &p_ni;
            let image = &pair.basis_nmi * (&self.matrix * coords);
            worst = worst.max((image - p_nmi).norm());
        }
        worst
    }
}

pub fn forbidden_operator(a: &ShiftOperator, pair: &DeficiencyPair, tol: &Tolerances) -> Result<ForbiddenOperator> {
    let q = pair.dim();
    let perp = a.perp_basis();
    // N_i / N_{-i} coordinates of P h_r
    let proj_ni = pair.basis_ni.adjoint() * perp;
    let proj_nmi = pair.basis_nmi.adjoint() * perp;
    let in_h = &pair.basis_ni * &proj_ni;
    let dom_basis = orthonormal_range(&in_h, 1e-12);
    let r = dom_basis.ncols();
    if r < perp.ncols() {
        return Err(Error::IllConditionedProjection {
            sigma_min: min_singular_value(&proj_ni),
        });
    }
    let embedding = pair.basis_ni.adjoint() * &dom_basis;
    // D(X_i)-coordinates of P h_r, then X maps them onto proj_nmi
    let coords = dom_basis.adjoint() * in_h;
    let sigma_min = min_singular_value(&coords);
    if r > 0 && !(sigma_min > tol.adm_tol) {
        return Err(Error::IllConditionedProjection { sigma_min });
    }
    let matrix = if r == 0 {
        CMatrix::zeros(q, 0)
    } else {
        let (inv, _) = solve_square(&coords, &CMatrix::identity(r, r))
            .ok_or(Error::IllConditionedProjection { sigma_min })?;
        proj_nmi * inv
    };
    Ok(ForbiddenOperator {
        dom_basis,
        matrix,
        embedding,
    })
}

/// Smallest singular value of `ψ ↦ P_{D(A)⊥}(Vψ - ψ)` on `N_i`. Zero means
/// some nonzero `ψ` has `(V - I)ψ ∈ D(A)`.
pub fn domain_margin(v: &CMatrix, a: &ShiftOperator, pair: &DeficiencyPair) -> f64 {
    let difference = &pair.basis_nmi * v - &pair.basis_ni;
    min_singular_value(&(a.perp_basis().adjoint() * difference))
}

/// Outcome of the admissibility test for a constant parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Smallest singular value of `P_{D(A)⊥}(V - I)` on `N_i`; `None` when
    /// `q = 0`.
    pub margin: Option<f64>,
    /// Smallest singular value of `V - X_i`; `None` when `q = 0` or
    /// `D(X_i) ≠ N_i`.
    pub forbidden_margin: Option<f64>,
    /// `Vψ = X_iψ` has a nonzero solution.
    pub meets_forbidden: bool,
    /// Admissible, but with a margin within a factor 100 of `adm_tol`.
    pub borderline: bool,
    pub norm: f64,
}

pub fn is_admissible(
    param: &ExtensionParameter,
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    forbidden: &ForbiddenOperator,
    tol: &Tolerances,
) -> Result<AdmissibilityReport> {
    let q = pair.dim();
    let v = param.matrix();
    if v.nrows() != q || v.ncols() != q {
        return Err(Error::ParameterShape {
            rows: v.nrows(),
            cols: v.ncols(),
            q,
        });
    }
    let norm = operator_norm(v);
    if norm > 1.0 + tol.norm_tol {
        return Err(Error::NormViolation { norm });
    }
    if q == 0 {
        return Ok(AdmissibilityReport {
            admissible: true,
            margin: None,
            forbidden_margin: None,
            meets_forbidden: false,
            borderline: false,
            norm,
        });
    }
    let margin = domain_margin(v, a, pair);
    let forbidden_margin = forbidden.full_matrix().map(|x| min_singular_value(&(v - x)));
    let admissible = margin > tol.adm_tol;
    Ok(AdmissibilityReport {
        admissible,
        margin: Some(margin),
        forbidden_margin,
        meets_forbidden: forbidden_margin.is_some_and(|s| s <= tol.adm_tol),
        borderline: admissible && margin <= 100.0 * tol.adm_tol,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram_space::factor_psd;
    use crate::moment_model::{build_block_hankel, MomentSequence};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn setup(s: &[f64]) -> (ShiftOperator, DeficiencyPair, ForbiddenOperator) {
        let tol = Tolerances::default();
        let seq = MomentSequence::scalar(s).unwrap();
        let d = (s.len() - 1) / 2;
        let sp = factor_psd(&build_block_hankel(&seq, d).unwrap(), &tol).unwrap();
        let a = build_shift(&sp, 1, d, &tol).unwrap();
        let pair = deficiency_subspaces(&a);
        let x = forbidden_operator(&a, &pair, &tol).unwrap();
        (a, pair, x)
    }

    /// The vector `v` spans the same line as the single column of `basis`.
    fn spans(basis: &CMatrix, v: &[C64]) -> bool {
        let v = CVector::from_column_slice(v);
        let b = basis.column(0).into_owned();
        (b.dotc(&v).norm() - v.norm() * b.norm()).abs() < 1e-12
    }

    #[test]
    fn worked_scalar_instance() {
        let (a, pair, x) = setup(&[1., 0., 1.]);
        assert_eq!(a.ambient_dim(), 2);
        assert_eq!(a.domain_dim(), 1);
        assert!(a.shift_residual() < 1e-14);
        assert_eq!(pair.dim(), 1);
        let h = FRAC_1_SQRT_2;
        // Gram basis is the identity up to a unitary; compare in x-coordinates
        let x0 = a.space().vector(0).clone();
        let x1 = a.space().vector(1).clone();
        let n_plus: Vec<C64> = (0..2).map(|k| (x0[k] - I * x1[k]) * h).collect();
        let n_minus: Vec<C64> = (0..2).map(|k| (x0[k] + I * x1[k]) * h).collect();
        assert!(spans(&pair.basis_ni, &n_plus));
        assert!(spans(&pair.basis_nmi, &n_minus));
        // X_i = -1 in the bases n_+, n_-: compute its action on n_+
        let np = CVector::from_column_slice(&n_plus);
        let nm = CVector::from_column_slice(&n_minus);
        let xm = x.full_matrix().unwrap();
        let image = &pair.basis_nmi * (&xm * (pair.basis_ni.adjoint() * &np));
        assert!((image + nm).norm() < 1e-12);
        assert!(x.consistency_residual(&a, &pair) < 1e-12);
    }

    #[test]
    fn rank_one_instance_has_no_deficiency() {
        let (a, pair, x) = setup(&[1., 1., 1.]);
        assert_eq!(a.ambient_dim(), 1);
        assert_eq!(pair.dim(), 0);
        assert_eq!(x.domain_dim(), 0);
        assert!(a.shift_residual() < 1e-14);
        let rep = is_admissible(&ExtensionParameter::identity(0), &a, &pair, &x, &Tolerances::default()).unwrap();
        assert!(rep.admissible);
    }

    #[test]
    fn admissibility_of_unimodular_parameters() {
        let tol = Tolerances::default();
        let (a, pair, x) = setup(&[1., 0., 1.]);
        // parameters are expressed relative to the computed bases; build
        // e^{iθ} in the (n_+, n_-) frame first
        let frame = |theta: f64| {
            let h = FRAC_1_SQRT_2;
            let x0 = a.space().vector(0).clone();
            let x1 = a.space().vector(1).clone();
            let np = (&x0 - &x1 * I) * C64::new(h, 0.);
            let nm = (&x0 + &x1 * I) * C64::new(h, 0.);
            let alpha = pair.basis_ni.adjoint() * np;
            let beta = pair.basis_nmi.adjoint() * nm;
            let v = beta[0] * C64::from_polar(1.0, theta) / alpha[0];
            ExtensionParameter::isometric(CMatrix::from_element(1, 1, v))
        };
        let ok = is_admissible(&frame(0.0), &a, &pair, &x, &tol).unwrap();
        assert!(ok.admissible);
        assert!((ok.margin.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(!ok.meets_forbidden);

        let bad = is_admissible(&frame(PI), &a, &pair, &x, &tol).unwrap();
        assert!(!bad.admissible);
        assert!(bad.meets_forbidden);
    }

    #[test]
    fn block_identity_forbidden_is_minus_identity() {
        let tol = Tolerances::default();
        let i2 = CMatrix::identity(2, 2);
        let seq = MomentSequence::new(2, vec![i2.clone(), CMatrix::zeros(2, 2), i2], &tol).unwrap();
        let sp = factor_psd(&build_block_hankel(&seq, 1).unwrap(), &tol).unwrap();
        let a = build_shift(&sp, 2, 1, &tol).unwrap();
        let pair = deficiency_subspaces(&a);
        let x = forbidden_operator(&a, &pair, &tol).unwrap();
        assert_eq!(pair.dim(), 2);
        assert_eq!(x.domain_dim(), 2);
        // X maps the N_i vector built from (x_j, x_{j+2}) to minus its N_{-i} twin
        for j in 0..2 {
            let xj = a.space().vector(j);
            let xs = a.space().vector(j + 2);
            let np = (xj - xs * I).scale(FRAC_1_SQRT_2);
            let nm = (xj + xs * I).scale(FRAC_1_SQRT_2);
            let image = &pair.basis_nmi * (x.full_matrix().unwrap() * (pair.basis_ni.adjoint() * np));
            assert!((image + nm).norm() < 1e-12);
        }
    }

    #[test]
    fn dependent_domain_is_rejected() {
        let tol = Tolerances::default();
        let seq = MomentSequence::scalar(&[0., 0., 1.]).unwrap();
        let sp = factor_psd(&build_block_hankel(&seq, 1).unwrap(), &tol).unwrap();
        assert!(matches!(build_shift(&sp, 1, 1, &tol), Err(Error::DependentDomain { .. })));
    }

    #[test]
    fn norm_violation() {
        let tol = Tolerances::default();
        let (a, pair, x) = setup(&[1., 0., 1.]);
        let p = ExtensionParameter::contraction(CMatrix::from_element(1, 1, C64::new(1.5, 0.)));
        assert!(matches!(is_admissible(&p, &a, &pair, &x, &tol), Err(Error::NormViolation { .. })));
    }
}

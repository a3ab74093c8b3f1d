//! Extensions of the shift operator parameterized by maps `N_i → N_{-i}`.
//!
//! For a parameter `V` the extension is
//!
//! ```text
//! D(A_V) = D(A) ∔ (V - I) N_i,    A_V (f + Vψ - ψ) = A f + i Vψ + i ψ.
//! ```
//!
//! A full admissible isometry gives a self-adjoint `A_V`; a contraction
//! gives a quasiself-adjoint one, and `λ ↦ (A_{F(λ)} - λ)^{-1}` is a
//! generalized resolvent of `A`. In the lower half-plane the mirrored
//! construction with `W = F(λ̄)*: N_{-i} → N_i`,
//! `A_W (f + Wφ - φ) = A f - i Wφ - i φ`, is used.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::linalg::{hermitian_deviation, max_abs, operator_norm, singular_values, solve_square, symmetrize};
use crate::shift_operator::{domain_margin, DeficiencyPair, ShiftOperator};
use crate::{CMatrix, Error, Result, Tolerances, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterKind {
    /// All singular values equal to one (unitary `N_i → N_{-i}`).
    Isometric,
    /// Operator norm at most one.
    Contraction,
}

/// A constant parameter: `q×q` matrix from `N_i`-coordinates to
/// `N_{-i}`-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionParameter {
    kind: ParameterKind,
    matrix: CMatrix,
}

impl ExtensionParameter {
    pub fn isometric(matrix: CMatrix) -> Self {
        Self {
            kind: ParameterKind::Isometric,
            matrix,
        }
    }

    pub fn contraction(matrix: CMatrix) -> Self {
        Self {
            kind: ParameterKind::Contraction,
            matrix,
        }
    }

    /// `e^{iθ}` for one-dimensional deficiency subspaces.
    pub fn unimodular(theta: f64) -> Self {
        Self::isometric(CMatrix::from_element(1, 1, C64::from_polar(1.0, theta)))
    }

    pub fn identity(q: usize) -> Self {
        Self::isometric(CMatrix::identity(q, q))
    }

    pub fn zero(q: usize) -> Self {
        Self::contraction(CMatrix::zeros(q, q))
    }

    pub fn kind(&self) -> ParameterKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Checks shape against `q` and the norm constraints of the kind.
    pub fn validate(&self, q: usize, tol: &Tolerances) -> Result<()> {
        if self.matrix.nrows() != q || self.matrix.ncols() != q {
            return Err(Error::ParameterShape {
                rows: self.matrix.nrows(),
                cols: self.matrix.ncols(),
                q,
            });
        }
        let sv = singular_values(&self.matrix);
        let norm = sv.first().copied().unwrap_or(0.0);
        if norm > 1.0 + tol.norm_tol {
            return Err(Error::NormViolation { norm });
        }
        if self.kind == ParameterKind::Isometric {
            let deviation = sv.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
            if deviation > tol.norm_tol {
                return Err(Error::NotIsometric { deviation });
            }
        }
        Ok(())
    }

    /// Expresses this parameter relative to other deficiency bases of the
    /// same subspaces, e.g. after a unitary change of basis of `H` where
    /// `from` holds the images of the old basis vectors.
    pub fn rebased(&self, from: &DeficiencyPair, to: &DeficiencyPair) -> Self {
        let into_ni = from.basis_ni.adjoint() * &to.basis_ni;
        let out_nmi = to.basis_nmi.adjoint() * &from.basis_nmi;
        Self {
            kind: self.kind,
            matrix: out_nmi * &self.matrix * into_ni,
        }
    }
}

type Sampler = dyn Fn(C64) -> ExtensionParameter + Send + Sync;

/// A parameter function `F(λ)` on the upper half-plane: either constant or
/// supplied as a sampler. Analyticity of a sampler is the caller's
/// responsibility; only per-sample norm and admissibility are checked.
#[derive(Clone)]
pub enum ParameterSource {
    Constant(ExtensionParameter),
    Sampled(Arc<Sampler>),
}

impl ParameterSource {
    pub fn sampled<F>(f: F) -> Self
    where
        F: Fn(C64) -> ExtensionParameter + Send + Sync + 'static,
    {
        Self::Sampled(Arc::new(f))
    }

    /// `F(λ)` for `Im λ > 0`.
    pub fn at(&self, lambda: C64) -> ExtensionParameter {
        match self {
            Self::Constant(p) => p.clone(),
            Self::Sampled(f) => f(lambda),
        }
    }

    pub fn constant(&self) -> Option<&ExtensionParameter> {
        match self {
            Self::Constant(p) => Some(p),
            Self::Sampled(_) => None,
        }
    }
}

impl From<ExtensionParameter> for ParameterSource {
    fn from(p: ExtensionParameter) -> Self {
        Self::Constant(p)
    }
}

impl fmt::Debug for ParameterSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(p) => f.debug_tuple("Constant").field(p).finish(),
            Self::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

/// A self-adjoint extension `A_V` on all of `H`.
#[derive(Debug, Clone)]
pub struct SelfAdjointExtension {
    pub matrix: CMatrix,
    pub parameter: ExtensionParameter,
    /// `max |G - G*|` before symmetrization.
    pub hermitian_deviation: f64,
}

impl SelfAdjointExtension {
    /// `max ‖A_V f - A f‖` over the orthonormal basis of `D(A)`.
    pub fn restriction_residual(&self, a: &ShiftOperator) -> f64 {
        max_abs(&(&self.matrix * a.dom_basis() - a.action()))
    }
}

fn check_dimensions(a: &ShiftOperator, pair: &DeficiencyPair) -> Result<()> {
    let got = a.domain_dim() + pair.dim();
    if got != a.ambient_dim() || !pair.balanced() {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim(),
            got,
        });
    }
    Ok(())
}

fn check_admissible(v: &CMatrix, a: &ShiftOperator, pair: &DeficiencyPair, tol: &Tolerances) -> Result<()> {
    if pair.dim() == 0 {
        return Ok(());
    }
    let margin = domain_margin(v, a, pair);
    if margin > tol.adm_tol {
        Ok(())
    } else {
        Err(Error::NotAdmissible { margin })
    }
}

/// Matrix of `A_V` on `H` for an admissible parameter `V: N_i → N_{-i}`.
///
/// Self-adjoint when `V` is a full isometry, quasiself-adjoint for a
/// contraction.
pub fn extension_matrix(a: &ShiftOperator, pair: &DeficiencyPair, v: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    check_dimensions(a, pair)?;
    check_admissible(v, a, pair, tol)?;
    let qv = &pair.basis_nmi * v;
    let step = &qv - &pair.basis_ni;
    let image = (&qv + &pair.basis_ni) * I;
    let basis = concat_columns(a.dom_basis(), &step);
    let values = concat_columns(a.action(), &image);
    let m = a.ambient_dim();
    // G B = values  ⇔  B* G* = values*
    let (g_adj, _) = solve_square(&basis.adjoint(), &values.adjoint()).ok_or(Error::NotAdmissible {
        margin: domain_margin(v, a, pair),
    })?;
    debug_assert_eq!(g_adj.nrows(), m);
    Ok(g_adj.adjoint())
}

/// Self-adjoint extension `A_V` for a full admissible isometry `V`.
pub fn selfadjoint_extension(
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    v: &ExtensionParameter,
    tol: &Tolerances,
) -> Result<SelfAdjointExtension> {
    let q = pair.dim();
    let param = v.clone();
    if param.matrix().nrows() != q || param.matrix().ncols() != q {
        return Err(Error::ParameterShape {
            rows: param.matrix().nrows(),
            cols: param.matrix().ncols(),
            q,
        });
    }
    let as_isometry = ExtensionParameter::isometric(param.matrix().clone());
    as_isometry.validate(q, tol)?;
    let g = extension_matrix(a, pair, param.matrix(), tol)?;
    let deviation = hermitian_deviation(&g);
    Ok(SelfAdjointExtension {
        matrix: symmetrize(&g),
        parameter: param,
        hermitian_deviation: deviation,
    })
}

/// `h = R_λ g` for the generalized resolvent
/// `R_λ = (A_{F(λ)} - λ)^{-1}` (`Im λ > 0`) or `(A_{F*(λ̄)} - λ)^{-1}`
/// (`Im λ < 0`). Columns of `g` are independent right-hand sides.
///
/// Solves `(A - λ) f + (i(Vψ + ψ) - λ(Vψ - ψ)) = g` for `f ∈ D(A)`,
/// `ψ ∈ N_i` and returns `h = f + Vψ - ψ`.
pub fn apply_generalized_resolvent(
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    source: &ParameterSource,
    lambda: C64,
    g: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if lambda.im == 0.0 {
        return Err(Error::RealSpectralParameter {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let upper = lambda.im > 0.0;
    let value = source.at(if upper { lambda } else { lambda.conj() });
    resolvent_branch(a, pair, value.matrix(), lambda, g, upper, tol)
}

/// Resolvent of the quasiself-adjoint extension for a constant parameter
/// `V`, using the upper-half-plane formula `(A_V - λ)^{-1}` at any `λ` off
/// its spectrum. This is the rational continuation of the `C_+` branch of
/// the generalized resolvent.
pub fn apply_continued_resolvent(
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    v: &ExtensionParameter,
    lambda: C64,
    g: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    resolvent_branch(a, pair, v.matrix(), lambda, g, true, tol)
}

fn resolvent_branch(
    a: &ShiftOperator,
    pair: &DeficiencyPair,
    v: &CMatrix,
    lambda: C64,
    g: &CMatrix,
    upper: bool,
    tol: &Tolerances,
) -> Result<CMatrix> {
    check_dimensions(a, pair)?;
    let q = pair.dim();
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
    check_admissible(v, a, pair, tol)?;
    let (step, image) = if upper {
        let qv = &pair.basis_nmi * v;
        (&qv - &pair.basis_ni, (&qv + &pair.basis_ni) * I)
    } else {
        let qw = &pair.basis_ni * v.adjoint();
        (&qw - &pair.basis_nmi, (&qw + &pair.basis_nmi) * (-I))
    };
    let shifted_domain = a.action() - a.dom_basis() * lambda;
    let system = concat_columns(&shifted_domain, &(&image - &step * lambda));
    let singular = Error::SingularSystem {
        re: lambda.re,
        im: lambda.im,
    };
    let (sol, residual) = solve_square(&system, g).ok_or(singular.clone())?;
    if !(residual <= tol.solve_tol) {
        return Err(singular);
    }
    let dn = a.domain_dim();
    let f = sol.rows(0, dn);
    let psi = sol.rows(dn, q);
    Ok(a.dom_basis() * f + step * psi)
}

fn concat_columns(left: &CMatrix, right: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols()).copy_from(right);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram_space::factor_psd;
    use crate::moment_model::{build_block_hankel, MomentSequence};
    use crate::shift_operator::{build_shift, deficiency_subspaces};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn setup(s: &[f64]) -> (ShiftOperator, DeficiencyPair) {
        let tol = Tolerances::default();
        let seq = MomentSequence::scalar(s).unwrap();
        let d = (s.len() - 1) / 2;
        let sp = factor_psd(&build_block_hankel(&seq, d).unwrap(), &tol).unwrap();
        let a = build_shift(&sp, 1, d, &tol).unwrap();
        let pair = deficiency_subspaces(&a);
        (a, pair)
    }

    /// `V` sending `n_+ = (x_0 - i x_1)/√2` to `e^{iθ} n_-`, `n_- = (x_0 + i x_1)/√2`.
    fn frame_parameter(a: &ShiftOperator, pair: &DeficiencyPair, value: C64) -> CMatrix {
        let x0 = a.space().vector(0);
        let x1 = a.space().vector(1);
        let np = (x0 - x1 * I).scale(FRAC_1_SQRT_2);
        let nm = (x0 + x1 * I).scale(FRAC_1_SQRT_2);
        let alpha = pair.basis_ni.adjoint() * np;
        let beta = pair.basis_nmi.adjoint() * nm;
        CMatrix::from_element(1, 1, beta[0] * value / alpha[0])
    }

    /// Matrix of an operator on H expressed in the (x_0, x_1) basis.
    fn in_x_basis(a: &ShiftOperator, g: &CMatrix) -> CMatrix {
        let x = a.space().columns(0, 2);
        let (inv, _) = solve_square(&x, &CMatrix::identity(2, 2)).unwrap();
        inv * g * x
    }

    #[test]
    fn swap_extension_for_unit_parameter() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let v = ExtensionParameter::isometric(frame_parameter(&a, &pair, C64::new(1., 0.)));
        let ext = selfadjoint_extension(&a, &pair, &v, &tol).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[C64::new(0., 0.), C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.)]);
        assert!((in_x_basis(&a, &ext.matrix) - expected).norm() < 1e-12);
        assert!(ext.restriction_residual(&a) < 1e-12);
        assert!(ext.hermitian_deviation < 1e-12);
    }

    #[test]
    fn dense_domain_extension_is_a_itself() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 1., 1.]);
        let ext = selfadjoint_extension(&a, &pair, &ExtensionParameter::identity(0), &tol).unwrap();
        assert_eq!(ext.matrix.nrows(), 1);
        assert!((ext.matrix[(0, 0)] - C64::new(1., 0.)).norm() < 1e-12);
    }

    #[test]
    fn forbidden_parameter_is_rejected() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let v = ExtensionParameter::isometric(frame_parameter(&a, &pair, C64::new(-1., 0.)));
        assert!(matches!(
            selfadjoint_extension(&a, &pair, &v, &tol),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn contraction_is_not_an_isometry() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let v = ExtensionParameter::zero(1);
        assert!(matches!(
            selfadjoint_extension(&a, &pair, &v, &tol),
            Err(Error::NotIsometric { .. })
        ));
    }

    #[test]
    fn resolvent_matches_dense_inverse() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let v = ExtensionParameter::isometric(frame_parameter(&a, &pair, C64::new(1., 0.)));
        let g = CMatrix::from_column_slice(2, 1, a.space().vector(0).as_slice());
        let h = apply_generalized_resolvent(&a, &pair, &v.clone().into(), I, &g, &tol).unwrap();
        // (A_V - i)^{-1} x_0 = (i/2) x_0 + (1/2) x_1 with A_V = [[0,1],[1,0]]
        let expected = a.space().vector(0) * C64::new(0., 0.5) + a.space().vector(1) * C64::new(0.5, 0.);
        assert!((h.column(0) - expected).norm() < 1e-12);
    }

    #[test]
    fn zero_contraction_residual() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let lambda = C64::new(0., 2.);
        let g = CMatrix::from_column_slice(2, 1, a.space().vector(0).as_slice());
        let source: ParameterSource = ExtensionParameter::zero(1).into();
        let h = apply_generalized_resolvent(&a, &pair, &source, lambda, &g, &tol).unwrap();
        let af = extension_matrix(&a, &pair, &CMatrix::zeros(1, 1), &tol).unwrap();
        let residual = (&af * &h - &h * lambda - &g).norm();
        assert!(residual <= 1e-10 * g.norm());
        // A_0 = [[0,1],[1,-2i]] in the (x_0, x_1) basis
        let expected = CMatrix::from_row_slice(2, 2, &[C64::new(0., 0.), C64::new(1., 0.), C64::new(1., 0.), C64::new(0., -2.)]);
        assert!((in_x_basis(&a, &af) - expected).norm() < 1e-12);
    }

    #[test]
    fn lower_half_plane_mirrors_upper() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let source: ParameterSource =
            ExtensionParameter::contraction(CMatrix::from_element(1, 1, C64::new(0.3, -0.4))).into();
        let lambda = C64::new(0.7, 1.3);
        let id = CMatrix::identity(2, 2);
        let up = apply_generalized_resolvent(&a, &pair, &source, lambda, &id, &tol).unwrap();
        let down = apply_generalized_resolvent(&a, &pair, &source, lambda.conj(), &id, &tol).unwrap();
        assert!((down - up.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn real_lambda_is_rejected() {
        let tol = Tolerances::default();
        let (a, pair) = setup(&[1., 0., 1.]);
        let source: ParameterSource = ExtensionParameter::zero(1).into();
        let g = CMatrix::identity(2, 1);
        assert!(matches!(
            apply_generalized_resolvent(&a, &pair, &source, C64::new(1., 0.), &g, &tol),
            Err(Error::RealSpectralParameter { .. })
        ));
    }
}

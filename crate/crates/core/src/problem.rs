//! The full pipeline for one truncated problem: gates, Gram space, shift
//! operator, deficiency subspaces and forbidden operator.

use std::f64::consts::PI;

use crate::extensions::{selfadjoint_extension, ExtensionParameter, ParameterSource, SelfAdjointExtension};
use crate::gram_space::{factor_psd, GramSpace};
use crate::moment_model::{build_block_hankel, check_truncated_conditions, ConditionReport, MomentSequence};
use crate::shift_operator::{
    build_shift, deficiency_subspaces, forbidden_operator, is_admissible, AdmissibilityReport, DeficiencyPair,
    ForbiddenOperator, ShiftOperator,
};
use crate::solutions::{spectral_measure, verify_moments, AtomicMatrixMeasure, StieltjesTransform, VerificationReport};
use crate::{CMatrix, Error, Result, Tolerances, C64};

#[derive(Debug, Clone)]
pub struct TruncatedProblem {
    seq: MomentSequence,
    tol: Tolerances,
    report: ConditionReport,
    shift: ShiftOperator,
    pair: DeficiencyPair,
    forbidden: ForbiddenOperator,
}

impl TruncatedProblem {
    /// Runs the gates `Γ_{d-1} > 0`, `Γ_d ≥ 0` and builds every operator
    /// object. Fails with [`Error::NotPsd`] or [`Error::DependentDomain`]
    /// when a gate does not hold.
    pub fn new(seq: &MomentSequence, tol: &Tolerances) -> Result<Self> {
        let report = check_truncated_conditions(seq, tol)?;
        if !report.gamma_d_psd {
            return Err(Error::NotPsd {
                min_eigenvalue: report.min_eigenvalue_d,
            });
        }
        if !report.gamma_prev_positive {
            return Err(Error::DependentDomain {
                sigma_min: report.min_eigenvalue_prev.max(0.0).sqrt(),
            });
        }
        let hankel = build_block_hankel(seq, report.d)?;
        let space = factor_psd(&hankel, tol)?;
        Self::from_space(seq, tol, report, &space)
    }

    fn from_space(seq: &MomentSequence, tol: &Tolerances, report: ConditionReport, space: &GramSpace) -> Result<Self> {
        let shift = build_shift(space, seq.dim(), report.d, tol)?;
        let pair = deficiency_subspaces(&shift);
        let forbidden = forbidden_operator(&shift, &pair, tol)?;
        Ok(Self {
            seq: seq.clone(),
            tol: *tol,
            report,
            shift,
            pair,
            forbidden,
        })
    }

    /// The same problem realized in a Gram space rotated by `unitary`.
    pub fn with_basis_change(&self, unitary: &CMatrix) -> Result<Self> {
        let space = self.shift.space().transformed(unitary);
        Self::from_space(&self.seq, &self.tol, self.report.clone(), &space)
    }

    pub fn sequence(&self) -> &MomentSequence {
        &self.seq
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn report(&self) -> &ConditionReport {
        &self.report
    }

    pub fn space(&self) -> &GramSpace {
        self.shift.space()
    }

    pub fn shift(&self) -> &ShiftOperator {
        &self.shift
    }

    pub fn deficiency(&self) -> &DeficiencyPair {
        &self.pair
    }

    pub fn forbidden(&self) -> &ForbiddenOperator {
        &self.forbidden
    }

    pub fn block(&self) -> usize {
        self.seq.dim()
    }

    pub fn degree(&self) -> usize {
        self.report.d
    }

    /// `e^{iθ} I_q`.
    pub fn theta_parameter(&self, theta: f64) -> ExtensionParameter {
        let q = self.pair.dim();
        ExtensionParameter::isometric(CMatrix::identity(q, q) * C64::from_polar(1.0, theta))
    }

    /// The `e^{iθ} I_q`, `θ ∈ {0, π/4, ..., 7π/4}`, with the largest
    /// admissibility margin (first on ties). `X_i` has at most `q`
    /// eigenvalues, so for `q < 8` one of them is admissible.
    pub fn default_isometry(&self) -> ExtensionParameter {
        let mut best = (self.theta_parameter(0.0), f64::NEG_INFINITY);
        for k in 0..8 {
            let p = self.theta_parameter(PI * k as f64 / 4.0);
            let margin = self
                .admissibility(&p)
                .ok()
                .and_then(|r| r.margin)
                .unwrap_or(f64::INFINITY);
            if margin > best.1 {
                best = (p, margin);
            }
        }
        best.0
    }

    pub fn admissibility(&self, param: &ExtensionParameter) -> Result<AdmissibilityReport> {
        is_admissible(param, &self.shift, &self.pair, &self.forbidden, &self.tol)
    }

    pub fn extension(&self, param: &ExtensionParameter) -> Result<SelfAdjointExtension> {
        selfadjoint_extension(&self.shift, &self.pair, param, &self.tol)
    }

    /// Atomic solution from the self-adjoint extension `A_V`.
    pub fn atomic_solution(&self, param: &ExtensionParameter) -> Result<AtomicMatrixMeasure> {
        let ext = self.extension(param)?;
        Ok(spectral_measure(&ext, self.shift.space(), self.block(), &self.tol))
    }

    /// Stieltjes transform of the solution attached to `F`.
    pub fn transform(&self, source: impl Into<ParameterSource>) -> StieltjesTransform {
        StieltjesTransform::from_resolvent(&self.shift, &self.pair, source.into(), &self.tol)
    }

    pub fn verify(&self, measure: &AtomicMatrixMeasure, tol: f64) -> VerificationReport {
        verify_moments(measure, &self.seq, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_isometry_avoids_forbidden() {
        let seq = MomentSequence::scalar(&[1., 0., 1.]).unwrap();
        let p = TruncatedProblem::new(&seq, &Tolerances::default()).unwrap();
        let v = p.default_isometry();
        assert!(p.admissibility(&v).unwrap().admissible);
        assert!(p.admissibility(&p.theta_parameter(PI)).unwrap().meets_forbidden);
    }

    #[test]
    fn gates_are_enforced() {
        let tol = Tolerances::default();
        let seq = MomentSequence::scalar(&[1., 0., -1.]).unwrap();
        assert!(matches!(TruncatedProblem::new(&seq, &tol), Err(Error::NotPsd { .. })));
        let seq = MomentSequence::scalar(&[0., 0., 1.]).unwrap();
        assert!(matches!(TruncatedProblem::new(&seq, &tol), Err(Error::DependentDomain { .. })));
    }
}

//! Truncated matrix Hamburger moment problems.
//!
//! Given Hermitian `N×N` moments `S_0..S_{2d}`, this crate decides solvability,
//! realizes the block Hankel matrix `Γ_d` as a Gram matrix of vectors
//! `x_0..x_{dN+N-1}`, builds the symmetric block-shift operator `A x_k = x_{k+N}`
//! on `span{x_0..x_{dN-1}}`, and produces solution measures from its
//! self-adjoint extensions (atomic measures) and from Shtraus-type generalized
//! resolvents with contraction parameters (Stieltjes transforms).
//!
//! The scalar problem with an even number of moments `s_0..s_{2d+1}` has its
//! own decision procedure in [`scalar_even`].
//!
//! ```
//! use truncated_hamburger::prelude::*;
//!
//! let seq = MomentSequence::scalar(&[1.0, 0.0, 1.0]).unwrap();
//! let problem = TruncatedProblem::new(&seq, &Tolerances::default()).unwrap();
//! assert_eq!(problem.deficiency().dim(), 1);
//!
//! let v = ExtensionParameter::unimodular(0.0);
//! let measure = problem.atomic_solution(&v).unwrap();
//! assert_eq!(measure.len(), 2);
//! ```

pub mod cli;
pub mod error;
pub mod extensions;
pub mod gram_space;
pub mod io;
pub mod linalg;
pub mod moment_model;
pub mod problem;
pub mod scalar_even;
pub mod shift_operator;
pub mod solutions;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub mod prelude {
    pub use crate::extensions::{
        apply_generalized_resolvent, selfadjoint_extension, ExtensionParameter, ParameterKind,
        ParameterSource, SelfAdjointExtension,
    };
    pub use crate::gram_space::{factor_psd, GramSpace};
    pub use crate::moment_model::{
        build_block_hankel, check_solvability_prefix, check_truncated_conditions, BlockHankel,
        ConditionReport, MomentSequence,
    };
    pub use crate::problem::TruncatedProblem;
    pub use crate::scalar_even::{solve_scalar_even, ScalarEvenResult, Verdict};
    pub use crate::shift_operator::{
        build_shift, deficiency_subspaces, forbidden_operator, is_admissible, AdmissibilityReport,
        DeficiencyPair, ForbiddenOperator, ShiftOperator,
    };
    pub use crate::solutions::{
        moments_from_transform, perron_inversion, spectral_measure, stieltjes_transform,
        verify_moments, AtomicMatrixMeasure, PerronGrid, StieltjesTransform, VerificationReport,
    };
    pub use crate::{CMatrix, CVector, Error, Result, Tolerances, C64};
}

//! Solution measures and their Stieltjes transforms.

mod measure;
mod perron;
mod transform;

pub use measure::{spectral_measure, verify_moments, Atom, AtomJson, AtomicMatrixMeasure, MeasureJson, VerificationReport};
pub use perron::{perron_inversion, PerronGrid, PerronResult, DEFAULT_EPS_SEQUENCE};
pub use transform::{moments_from_transform, stieltjes_transform, Circle, ContourMoments, StieltjesTransform};

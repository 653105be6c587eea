//! Type space, size-biased law, growth rates and drift.
//!
//! All functions are pure; vectors are indexed by the canonical
//! lexicographic order of [`VertexType`] (see [`PaletteConfig::index_of`]).

mod formulas;
mod types;

pub use formulas::{
    cascade_growth, delta_branch, delta_matrix, drift, euler_step, expected_cascade_size, q_vector,
    remainder_growth, DeltaMatrix, EulerOutcome, CLAMP_REPORT,
};
pub(crate) use formulas::{clamp_nonnegative, drift_with, BranchLaw};
pub use types::{type_space, PaletteConfig, TuningParams, TypeDistribution, VertexType};

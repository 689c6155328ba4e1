//! Weight sequences, associated weight functions, Young conjugates and
//! associated weight matrices, evaluated exactly in log domain, together with
//! finite-horizon checkers for their growth conditions.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assoc;
pub mod conditions;
pub mod counterexample;
pub mod error;
pub mod matrix;
pub mod report;
pub mod sequence;
pub mod special;

pub use analysis::{
    emit_report, parse_bundle, parse_spec, run_analysis, AnalysisSpec, Bundle, OutputFormat,
};
pub use assoc::{young_conjugate_oracle, AssociatedFunction, WeightFunction};
pub use conditions::{
    admissibility_bundle, beta_gamma, condv_propagation, equlemma_check, growth_flags, matrix_mg,
    mg_battery, moderate_growth_index, quotient_root_comparison,
};
pub use counterexample::{
    build_counterexample, validate_schedule, witness_divergence, PiecewiseLinearLogSpec,
    ScheduleVariant,
};
pub use error::{Error, Result};
pub use matrix::{
    build_associated_matrix, matrix_relation, mg_union, quotient_identity_suite, shifted_matrix,
    WeightMatrix,
};
pub use report::{ConditionId, ConditionReport, Verdict};
pub use sequence::{compare, make_family, Family, QuotientView, WeightSequence};

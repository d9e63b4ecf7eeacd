//! Attribute-conditioned bias auditing for binary classifiers.
//!
//! Score tables are indexed against an [`AttributeSchema`] of mutually
//! exclusive label groups. For an attribute (one label of one group) the
//! crate compares detection rates with and without the attribute inside
//! every subgroup that fixes all remaining groups, averages the resulting
//! TPR difference curves, and summarises them as `brisk` (threshold
//! integral), `brisk★` (extremum over thresholds) and EOD (pooled
//! difference ignoring subgroups). Significance comes from a paired t-test
//! over the per-subgroup deltas with a Bonferroni-adjusted threshold.

pub mod audit;
pub mod error;
pub mod metrics;
pub mod report;
pub mod schema;
pub mod scores;
pub mod simulator;
pub mod special;
pub mod stats;
pub mod sum;

pub use error::{Error, Result};
pub use metrics::{
    attribute_bias, averaged_delta_curve, brisk, brisk_star, classwise_rate_delta, delta_curve, eod,
    integrate_delta, AttributeBias, BriskStarMode, DeltaCurve, EodMode, Extremum,
};
pub use schema::{load_schema, AttributeRef, AttributeSchema, Combination, SubgroupKey};
pub use scores::{load_scores, mean_score, tpr_step, Baseline, ClassLabel, Contrast, ScoreTable, Side, TprStep};
pub use simulator::{analytic_brisk, simulate, subsample, SimSpec};
pub use stats::{bonferroni, correlation, correlation_matrix, paired_ttest, student_t_sf, two_sample_ttest};
pub use audit::{
    compare_detectors, compare_test_strategies, correlate_with_proportions, run_audit, subsample_sweep, AuditConfig,
    BiasReportSet, CompareMode,
};

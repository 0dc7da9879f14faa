//! Exact oracles and Monte-Carlo tests for positive (PA) and negative (NA)
//! association.
//!
//! For random measures the NA notion tested here is the one on disjoint
//! regions: `Cov(f(M_A), g(M_B)) <= 0` for monotone `f`, `g` and disjoint
//! `A`, `B`, evaluated through box counts. It is weaker than negative
//! association of the field `(M(B))_B` indexed by all sets.

mod exact;
mod family;
mod harness;
mod identity;
mod mctest;
mod pmf;

pub use exact::{
    bk_check, bk_pair, disjoint_occurrence, exact_association_check, reweighted_dominance, reweighted_dominance_check,
    AssociationWitness, BkVerdict, BkWitness, ExactVerdict, Hypothesis, BK_MAX_DIM, EXACT_TOLERANCE,
};
pub use family::{FamilyRecipe, TestFunction, TestFunctionFamily, TestPair};
pub use harness::{
    truncation_stability_test, weak_convergence_harness, ConvergenceReport, Moments, PrefixResult, StabilityReport, StageResult,
};
pub use identity::{covariance_identity_check, IdentityCheck};
pub use mctest::{
    draw_counts, evaluate_family, mc_association_test, pairwise_count_covariances, CountSampler, FieldCounts, MeasureCounts,
    PairCovariance, PairResult, PairVerdict, Split, TestReport, TestSettings, Verdict, CAVEAT, DEFAULT_LEVEL, MIN_REPLICATES,
};
pub use pmf::{JointPmf, STATE_CAP};

//! Question-quality features, rankings and agreement with expert judgments.

pub mod agreement;
pub mod entropy;
pub mod features;
pub mod ranking;

pub use agreement::{
    agreement_by_expert, agreement_fraction, kendall_tau, max_agreement, max_of, Choice, ExpertJudgments,
    QuestionPair, JUDGMENT_COLUMNS,
};
pub use entropy::{
    choice_entropy, conditional_correctness_entropy, correctness_entropy, mean_confidence, Condition,
    MIN_CELL_ANSWERS,
};
pub use features::{confidence_ranking, feature_column, quality_features, QualityFeatures};
pub use ranking::{
    aggregate_ranks_mean, rank_by_feature, weighted_feature_rank, Direction, QualityRanking, RANKING_COLUMNS,
};

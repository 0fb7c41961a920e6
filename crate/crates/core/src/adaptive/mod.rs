//! Sequential question selection for new students.

pub mod episode;
pub mod model;
pub mod policy;
pub mod state;

pub use episode::{
    predict_targets, run_episode, sample_masks, sample_masks_fraction, target_accuracy, EpisodeResult, Masks,
    StepRecord,
};
pub use model::{AdaptiveModel, Frozen, IrtAbilityTracker};
pub use policy::{PolicyKind, SelectionPolicy};
pub use state::{init_episode, AnswerSource, RecordEnvironment, Revealed, SelectionState, DEFAULT_BUDGET};

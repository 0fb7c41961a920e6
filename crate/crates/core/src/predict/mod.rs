//! Response prediction: baselines, IRT, matrix factorisation, feature
//! engineering and evaluation metrics.

mod checkpoint;
mod irt;
pub mod linalg;
mod majority;
mod metrics;
mod mf;
mod model;
mod svd;
mod target_encoding;

pub use checkpoint::{Checkpoint, MAGIC as CHECKPOINT_MAGIC, SCHEMA_VERSION as CHECKPOINT_VERSION};
pub use irt::{Fitted, IrtConfig, IrtKind, IrtModel, IrtObjective};
pub use majority::MajorityModel;
pub use metrics::{accuracy, ConfusionMatrix};
pub use mf::{MfConfig, MfModel};
pub use model::{ensemble_mean, Mode, Prediction, PredictionSet, ResponseModel, THRESHOLD};
pub use svd::{centred_correctness, svd_features, svd_features_dense, SvdFeatures};
pub use target_encoding::{target_encode, GroupStat, MetaTables, RecordContext};

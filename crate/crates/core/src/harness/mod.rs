//! Training loop, schedule, augmentation, inference and the loss comparison.

mod compare;
mod config;
mod data;
mod eval;
mod store;
mod train;

pub use compare::{
    compare_losses, comparison_csv, comparison_svg, default_loss_configs, directional_verdict, ComparisonRun,
    CurveStats, SeedData, Verdict, COMPARISON_CSV_HEADER,
};
pub use config::{lr_at, TrainConfig};
pub use data::{
    augment_segment, prepare_clips, sample_segment, stack_batch, stack_features, standardize, PreparedClip,
    Standardizer, FRAMES_PER_LABEL,
};
pub use eval::{evaluate_clips, predict_clip, window_starts, EvalSummary, FrameErrors, INFER_WINDOW};
pub use store::{Checkpoint, CHECKPOINT_FILE, CONFIG_FILE};
pub use train::{loss_csv, metric_csv, train, EpochRecord, TrainData, TrainOutcome, LOSS_CSV_HEADER, METRIC_CSV_HEADER};

//! Proximal policy optimisation: rollout storage, advantage estimation,
//! the clipped-surrogate update, checkpoints and the training loop.

mod adam;
mod buffer;
mod checkpoint;
mod config;
mod eval;
mod loss;
mod rollout;
mod train;
mod update;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use buffer::{compute_gae, RolloutBuffer, Segment};
pub use checkpoint::{
    export_gains, ActorRecord, Checkpoint, Progress, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
};
pub use config::{schedule, PpoConfig};
pub use eval::{evaluate_policy, EvalEpisode, GainProfile, TRANSIENT_WINDOW};
pub use loss::{
    approx_kl, clip_grad_norm, clipped_surrogate, clipped_surrogate_grad, normalize_advantages,
};
pub use rollout::{collect_rollout, EpisodeRecord, Rollout, RolloutWorker};
pub use train::{
    train, train_with, EpisodeRow, IterationStats, TrainOutcome, TrainSetup, DIVERGED_CHECKPOINT,
    EPISODES_FILE, FINAL_CHECKPOINT, STATS_FILE,
};
pub use update::{minibatch_gradient, ppo_update, MinibatchGrad, UpdateStats};

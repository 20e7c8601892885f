//! Training of the unfolded estimator's 2L scalars.

mod adam;
mod backward;
mod train;

pub use adam::{adam_step, AdamState};
pub use backward::{backward, batch_loss, loss, sample_loss_grad, BatchGradient, TrainSample};
pub use train::{train, write_train_log, TrainOutcome, TrainRecord};

//! Split training and inference over the simulated link, and symbol
//! error measurements.

mod ser;
mod session;
mod train;

pub use ser::{
    analytic_ser, ser_sweep, sign_error_rate, waterfall_snrs, SerPoint, SignErrorEstimate,
};
pub use session::{BackwardOutcome, ForwardOutcome, GradientCode, SplitSession};
pub use train::{
    accuracy_sweep, link_accuracy, train_split, LinkAccuracy, SplitEpochMetrics, SplitExperiment,
    SplitRun, SweepPoint, SweepProtocol,
};

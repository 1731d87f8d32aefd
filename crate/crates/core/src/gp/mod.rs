//! Gaussian-process dynamics model.

pub mod calibrated;
pub mod info_gain;
pub mod kernel;
pub mod posterior;

pub use calibrated::{
    fit_posterior, membership_check, BetaSchedule, CalibratedModel, DynamicsScratch, GpConfig, GpDynamics,
};
pub use info_gain::{greedy_max_info_gain, greedy_select, information_gain, GreedySelection};
pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub use posterior::{GpPosterior, PredictScratch};

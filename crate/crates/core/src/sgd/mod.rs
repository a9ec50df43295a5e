mod kernel;
mod optimize;
mod schedule;

pub use kernel::{
    attractive_gradient, clip, fit_kernel_params, phi, repulsive_gradient, ForceMode, Kernel, KernelConfig,
    KernelParams,
};
pub use optimize::{default_epochs, optimize, EpochObserver, OptimizeOutcome, OptimizerConfig, RoleCounts};
pub use schedule::{build_sampling_schedule, SamplingSchedule};

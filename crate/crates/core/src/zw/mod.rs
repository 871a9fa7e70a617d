//! The zw-measures: densities, transition laws, samplers.

mod density;
mod row_push;
mod params;
mod ray;
mod sampler;
mod transition;

pub use density::{down_gamma_ratio, log_unnormalized_density, row_log_weight, up_gamma_ratio, RowRuns};
pub use row_push::{p_m_ratio, p_m_tail_bound, p_m_tail_sum, PmBound};
pub use params::{ZwParams, INTEGER_TOLERANCE};
pub use ray::{certified_ray, RaySpec, RaySum, MAX_RAY_LEN};
pub use sampler::{sample_level, sample_path, ZwChain};
pub use transition::{
    coherency_residual, event_probability, log_level_constant, log_level_constant_closed, log_transition_probability,
    log_transition_total,
    transition_distribution, LevelTransition, RowBound, SamplerConfig, SamplerMode, TransitionSums,
};

//! Closed-form model: task output, screening, firm returns, and the Gini
//! aggregation of the equalizing and concentrating channels.

pub mod firm;
pub mod gini;
pub mod moments;
pub mod normal;
pub mod params;
pub mod task;

pub use firm::{
    effective_eta, profit_elasticity, rate_comparison, self_reinforcing, ChannelRates,
    TwoSectorFirm,
};
pub use gini::{
    delta_gini, gini_shift, gini_to_sigma, knife_edge, lognormal_gini, GiniShift, Regime,
    RegimeOutcome,
};
pub use moments::moment_model;
pub use params::{FixedEnv, MomentVector, StructuralParams, TaskTech, N_MOMENTS, N_PARAMS};
pub use task::{
    ces_price_response, cv_reduction, cv_task, homogenization_holds, reliability, wage_compression,
    Homogenization,
};

//! Method-of-simulated-moments estimation: objective, global and local
//! search, J-test, sensitivity matrix and leave-one-out refits.

pub mod de;
pub mod estimate;
pub mod nelder_mead;
pub mod objective;
pub mod sensitivity;

pub use estimate::{
    calibrate, calibrate_masked, j_pvalue, leave_one_out, CalibConfig, CalibResult, Derived,
    Identification, LeaveOneOut,
};
pub use objective::{masked_objective, msm_objective, MomentMask, ALL_MOMENTS};
pub use sensitivity::{sensitivity, Sensitivity};

use crate::error::{Error, Result};
use crate::model::gini::{gini_shift, gini_to_sigma};
use crate::model::normal;
use crate::model::params::{FixedEnv, StructuralParams, N_MOMENTS};
use crate::model::task::cv_reduction;

/// Model-implied moments, in the order of [`crate::MomentVector::NAMES`].
///
/// * m1: CV reduction on an additive task, `1 - 1/(1+r)`.
/// * m2: compression of the p90/p10 productivity gap when a common floor
///   `r * mu_h` is added to lognormal human capital with mean one.
/// * m3: pre-AI within-firm share of log-wage variance.
/// * m4: revenue share of the top `top_q` of firms; revenue is lognormal with
///   log-scale `eta1 / (1 - gamma_L) * sigma_K`.
/// * m5: decline of the education premium, `|S| (1 - 1/sigma) ln(1+r)`.
/// * m6: change in the wage Gini.
pub fn moment_model(p: &StructuralParams, env: &FixedEnv) -> Result<[f64; N_MOMENTS]> {
    if !(p.sigma > 0.0) {
        return Err(Error::domain(
            "moment_model",
            format!("sigma must be > 0, got {}", p.sigma),
        ));
    }
    let shift = gini_shift(p, env, None)?;

    let m1 = cv_reduction(p.r);
    let m2 = gap_compression(p.r, env.cv_h);
    let m3 = shift.within_share_pre();

    let revenue_scale = p.eta1 / (1.0 - env.gamma_l) * gini_to_sigma(p.gini_k)?;
    let m4 = top_share(env.top_q, revenue_scale);

    let m5 = env.s_share * (1.0 - 1.0 / p.sigma) * p.r.ln_1p();
    Ok([m1, m2, m3, m4, m5, shift.delta])
}

/// `1 - (R_post - 1)/(R_pre - 1)` with `R = h90/h10`.
pub fn gap_compression(r: f64, cv_h: f64) -> f64 {
    let s = (1.0 + cv_h * cv_h).ln().sqrt();
    let mu = -0.5 * s * s;
    let z = normal::quantile(0.9);
    let h90 = (mu + z * s).exp();
    let h10 = (mu - z * s).exp();
    let pre = h90 / h10;
    let post = (h90 + r) / (h10 + r);
    1.0 - (post - 1.0) / (pre - 1.0)
}

/// Mass of a lognormal with log-scale `s` held by its top `q` fraction.
pub fn top_share(q: f64, s: f64) -> f64 {
    normal::sf(normal::quantile(1.0 - q) - s)
}

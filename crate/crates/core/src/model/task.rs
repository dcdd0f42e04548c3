//! Worker-side closed forms: within-task dispersion, screening reliability
//! and the CES price response.

use crate::error::{Error, Result};
use crate::model::params::TaskTech;

/// Coefficient of variation of task output at AI capability `a`.
///
/// Output is `h * phi * (1 + beta * a) + alpha * a`; with `beta = 0` this is
/// `phi * sigma_h / (phi * mu_h + alpha * a)`.
pub fn cv_task(tech: &TaskTech, a: f64) -> Result<f64> {
    tech.validate()?;
    if !(a >= 0.0) {
        return Err(Error::domain(
            "cv_task",
            format!("capability must be >= 0, got {a}"),
        ));
    }
    let scale = tech.phi * (1.0 + tech.beta * a);
    let mean = scale * tech.mu_h + tech.alpha * a;
    if mean <= 0.0 {
        return Err(Error::domain("cv_task", "non-positive mean task output"));
    }
    Ok(scale * tech.sigma_h / mean)
}

/// `1 - 1/(1 + r)`: relative CV reduction on an additive task at `A = 1`.
pub fn cv_reduction(r: f64) -> f64 {
    1.0 - 1.0 / (1.0 + r)
}

/// Pooled post/pre CV ratio when the AI floor applies to a share `s_share`
/// of tasks.
pub fn wage_compression(r: f64, s_share: f64) -> f64 {
    1.0 / (1.0 + s_share * r)
}

/// Outcome of the homogenization condition under partial complementarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogenization {
    pub holds: bool,
    /// Left side over right side of the condition; infinite when `beta = 0`.
    pub margin: f64,
    /// AI is absent (`alpha = beta = 0`); the CV is then constant in `a`.
    pub degenerate: bool,
}

/// Checks whether the additive AI component dominates the multiplicative
/// one, i.e. `alpha/(beta phi mu_h) > CV_h (1+beta a) / (1 + CV_h^2 (1+beta a)^2)`.
pub fn homogenization_holds(tech: &TaskTech, cv_h: f64, a: f64) -> Result<Homogenization> {
    tech.validate()?;
    if !(cv_h > 0.0) {
        return Err(Error::domain("homogenization_holds", "cv_h must be > 0"));
    }
    if tech.beta == 0.0 {
        return Ok(Homogenization {
            holds: true,
            margin: f64::INFINITY,
            degenerate: tech.alpha == 0.0,
        });
    }
    let lhs = tech.alpha / (tech.beta * tech.phi * tech.mu_h);
    let g = cv_h * (1.0 + tech.beta * a);
    let rhs = g / (1.0 + g * g);
    Ok(Homogenization {
        holds: lhs > rhs,
        margin: lhs / rhs,
        degenerate: false,
    })
}

/// Signal reliability `rho = V_D / (V_D + sigma_eps^2)`, where the
/// diagnostic variance `V_D` scales ability-driven output variance by its
/// weight against the squared mean.
pub fn reliability(tech: &TaskTech, a: f64, sigma_eps: f64) -> Result<f64> {
    tech.validate()?;
    if !(sigma_eps > 0.0) {
        return Err(Error::domain("reliability", "sigma_eps must be > 0"));
    }
    let scale = tech.phi * (1.0 + tech.beta * a);
    let ability_var = (scale * tech.sigma_h).powi(2);
    let mean = scale * tech.mu_h + tech.alpha * a;
    let v_d = ability_var / (ability_var + mean * mean) * ability_var;
    Ok(v_d / (v_d + sigma_eps * sigma_eps))
}

/// Relative task price after a change in task output, `y_ratio^(-1/sigma)`.
pub fn ces_price_response(sigma: f64, y_ratio: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(y_ratio > 0.0) {
        return Err(Error::domain(
            "ces_price_response",
            format!("need sigma > 0 and y_ratio > 0, got ({sigma}, {y_ratio})"),
        ));
    }
    Ok(y_ratio.powf(-1.0 / sigma))
}

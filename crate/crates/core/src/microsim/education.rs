use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanCapitalForm {
    /// `h = theta * g(e)`
    Multiplicative,
    /// `h = theta + g(e)`
    Additive,
}

/// `g(e) = (1+e)^a_g` and `c(e, theta) = c0 e^2 / theta^kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EducationForms {
    pub a_g: f64,
    pub c0: f64,
    /// Ability exponent in the cost; `1` gives `c0 e^2 / theta`.
    pub kappa: f64,
    pub form: HumanCapitalForm,
    /// Upper end of the search bracket.
    pub e_max: f64,
}

impl Default for EducationForms {
    fn default() -> Self {
        Self {
            a_g: 0.5,
            c0: 1.0,
            kappa: 1.0,
            form: HumanCapitalForm::Multiplicative,
            e_max: 1e6,
        }
    }
}

impl EducationForms {
    pub fn g(&self, e: f64) -> f64 {
        (1.0 + e).powf(self.a_g)
    }

    pub fn human_capital(&self, theta: f64, e: f64) -> f64 {
        match self.form {
            HumanCapitalForm::Multiplicative => theta * self.g(e),
            HumanCapitalForm::Additive => theta + self.g(e),
        }
    }

    pub fn cost(&self, e: f64, theta: f64) -> f64 {
        self.c0 * e * e / theta.powf(self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EducationChoice {
    pub e: f64,
    /// Set when the first-order condition has no interior root.
    pub corner: bool,
}

/// Optimal education given ability and the task price index: the root of
/// `dh/de * Phi = dc/de` on `[0, e_max]`.
pub fn education_choice(
    theta: f64,
    phi_index: f64,
    forms: &EducationForms,
) -> Result<EducationChoice> {
    if !(theta > 0.0) {
        return Err(Error::domain(
            "education_choice",
            format!("theta must be > 0, got {theta}"),
        ));
    }
    if !(phi_index > 0.0) {
        return Err(Error::domain(
            "education_choice",
            format!("phi_index must be > 0, got {phi_index}"),
        ));
    }
    if !(forms.a_g > 0.0 && forms.a_g < 1.0 && forms.c0 > 0.0 && forms.e_max > 0.0) {
        return Err(Error::domain(
            "education_choice",
            "need 0 < a_g < 1, c0 > 0, e_max > 0",
        ));
    }
    let ability_weight = match forms.form {
        HumanCapitalForm::Multiplicative => theta,
        HumanCapitalForm::Additive => 1.0,
    };
    let cost_weight = 2.0 * forms.c0 / theta.powf(forms.kappa);
    let foc = |e: f64| {
        ability_weight * forms.a_g * (1.0 + e).powf(forms.a_g - 1.0) * phi_index - cost_weight * e
    };

    let (mut lo, mut hi) = (0.0, forms.e_max);
    if !(foc(lo) > 0.0) || foc(hi) > 0.0 {
        return Ok(EducationChoice {
            e: 0.0,
            corner: true,
        });
    }
    // foc is strictly decreasing, so plain bisection converges to the unique root
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if foc(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(EducationChoice {
        e: 0.5 * (lo + hi),
        corner: false,
    })
}

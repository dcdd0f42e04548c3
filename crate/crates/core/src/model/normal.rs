//! Standard normal helpers shared by the closed forms.
//!
//! `erf`/`erfc` come from `libm` (correctly rounded to about one ulp). The
//! inverses start from `statrs`' rational approximations and take Newton
//! steps against `libm`, which brings them to machine precision.

use statrs::function::erf::{erf_inv, erfc_inv};
use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)`, computed without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile for `p` in (0, 1).
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        // refine on whichever tail keeps precision
        let err = if x < 0.0 {
            cdf(x) - p
        } else {
            (1.0 - p) - sf(x)
        };
        let dens = pdf(x);
        if dens == 0.0 {
            break;
        }
        x -= err / dens;
    }
    x
}

/// `erf(x / 2)`: the Gini of a lognormal with log-scale `x`.
pub(crate) fn erf_half(x: f64) -> f64 {
    libm::erf(x / 2.0)
}

/// Inverse of [`erf_half`].
pub(crate) fn two_erf_inv(g: f64) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    let mut y = erf_inv(g);
    for _ in 0..2 {
        let err = libm::erf(y) - g;
        let deriv = 2.0 / PI.sqrt() * (-y * y).exp();
        if deriv == 0.0 {
            break;
        }
        y -= err / deriv;
    }
    2.0 * y
}

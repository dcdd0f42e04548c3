use crate::model::moments::moment_model;
use crate::model::params::{FixedEnv, MomentVector, StructuralParams, N_MOMENTS, N_PARAMS};

/// Base of the out-of-box penalty.
pub const PENALTY: f64 = 1e12;

/// Which moments enter the objective.
pub type MomentMask = [bool; N_MOMENTS];

pub const ALL_MOMENTS: MomentMask = [true; N_MOMENTS];

/// Weighted squared distance between data and model moments,
/// `sum ((m_data - m(theta)) / se)^2`, with all moments included.
pub fn msm_objective(theta: &StructuralParams, targets: &MomentVector, env: &FixedEnv) -> f64 {
    masked_objective(
        &theta.to_array(),
        targets,
        env,
        &ALL_MOMENTS,
        &StructuralParams::BOUNDS,
    )
}

/// Objective on a raw parameter slice with an inclusion mask.
///
/// Points outside the box score `PENALTY` plus their squared distance to it,
/// so searches never abort.
pub fn masked_objective(
    x: &[f64],
    targets: &MomentVector,
    env: &FixedEnv,
    mask: &MomentMask,
    bounds: &[(f64, f64)],
) -> f64 {
    let dist2 = box_distance2(x, bounds);
    if dist2 > 0.0 {
        return PENALTY + dist2;
    }
    let p = StructuralParams::from_slice(x);
    match moment_model(&p, env) {
        Ok(m) => {
            let mut total = 0.0;
            for i in 0..N_MOMENTS {
                if mask[i] {
                    let z = (targets.values[i] - m[i]) / targets.ses[i];
                    total += z * z;
                }
            }
            if total.is_finite() {
                total
            } else {
                PENALTY
            }
        }
        Err(_) => PENALTY,
    }
}

fn box_distance2(x: &[f64], bounds: &[(f64, f64)]) -> f64 {
    let mut d = 0.0;
    for (v, &(lo, hi)) in x.iter().zip(bounds.iter()).take(N_PARAMS) {
        if !v.is_finite() {
            return f64::MAX / 4.0;
        }
        let e = if *v < lo {
            lo - v
        } else if *v > hi {
            v - hi
        } else {
            0.0
        };
        d += e * e;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_exact_fit() {
        let env = FixedEnv::default();
        let p = StructuralParams::reference();
        let m = moment_model(&p, &env).unwrap();
        let t = MomentVector::new(m, MomentVector::published_targets().ses).unwrap();
        assert_eq!(msm_objective(&p, &t, &env), 0.0);
    }

    #[test]
    fn one_se_contributes_one() {
        let env = FixedEnv::default();
        let p = StructuralParams::reference();
        let mut m = moment_model(&p, &env).unwrap();
        let ses = MomentVector::published_targets().ses;
        m[3] += ses[3];
        let t = MomentVector::new(m, ses).unwrap();
        assert!((msm_objective(&p, &t, &env) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_outside_box() {
        let env = FixedEnv::default();
        let t = MomentVector::published_targets();
        let mut x = StructuralParams::reference().to_array();
        x[0] = 2.0;
        let v = masked_objective(&x, &t, &env, &ALL_MOMENTS, &StructuralParams::BOUNDS);
        assert!((v - PENALTY - 0.25).abs() < 1e-3);
    }

    #[test]
    fn mask_drops_contribution() {
        let env = FixedEnv::default();
        let p = StructuralParams::reference();
        let mut m = moment_model(&p, &env).unwrap();
        m[5] += 1.0;
        let t = MomentVector::new(m, MomentVector::published_targets().ses).unwrap();
        let mut mask = ALL_MOMENTS;
        mask[5] = false;
        assert_eq!(
            masked_objective(&p.to_array(), &t, &env, &mask, &StructuralParams::BOUNDS),
            0.0
        );
    }
}

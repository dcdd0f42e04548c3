//! Evaluates the closed forms at the reference parameter point: task-output
//! dispersion, screening reliability, asset elasticities and the Gini shift.

use twochannel::model::{
    ces_price_response, cv_task, gini_shift, homogenization_holds, knife_edge, profit_elasticity,
    rate_comparison, reliability, self_reinforcing, wage_compression,
};
use twochannel::{FixedEnv, StructuralParams, TaskTech};

fn main() -> twochannel::Result<()> {
    let p = StructuralParams::reference();
    let env = FixedEnv::default();
    let tech = TaskTech::additive(p.r, env.cv_h);

    println!("task output CV");
    for a in [0.0, 0.5, 1.0, 2.0] {
        println!(
            "  a = {a:<4} CV = {:.5}  rho = {:.5}",
            cv_task(&tech, a)?,
            reliability(&tech, a, env.sigma_eps)?
        );
    }
    println!(
        "  pooled compression 1/(1+|S| r) = {:.4}",
        wage_compression(p.r, env.s_share)
    );

    println!("\nhomogenization under partial complementarity");
    for beta in [0.0, 0.5, 1.09, 1.2] {
        let h = homogenization_holds(&tech.with_beta(beta), env.cv_h, 1.0)?;
        println!(
            "  beta = {beta:<5} holds = {:<5} margin = {:.3}",
            h.holds, h.margin
        );
    }

    println!("\nCES price of a task whose output rises by r");
    println!("  p1/p0 = {:.4}", ces_price_response(p.sigma, 1.0 + p.r)?);

    println!("\nasset returns");
    for (label, eta) in [("pre", p.eta0), ("post", p.eta1)] {
        println!(
            "  {label:<4} eta = {eta:.3}  profit elasticity = {:.4}  self-reinforcing = {}",
            profit_elasticity(eta, env.gamma_l)?,
            self_reinforcing(eta, env.gamma_l)?
        );
    }
    let rates = rate_comparison(&p, &env);
    println!(
        "  channel speeds at A=1: equalizing {:.5}, concentrating {:.5} (ratio {:.2})",
        rates.equalizing, rates.concentrating, rates.ratio
    );

    let s = gini_shift(&p, &env, None)?;
    let k = knife_edge(&p, &env)?;
    println!(
        "\nlog-wage variance  pre {:.4}  post {:.4}",
        s.var_pre, s.var_post
    );
    println!(
        "Gini               pre {:.4}  post {:.4}  change {:+.4}",
        s.gini_pre, s.gini_post, s.delta
    );
    println!(
        "rent rise {:.5} vs within fall {:.5}: {}",
        k.lhs, k.rhs, k.regime
    );
    Ok(())
}

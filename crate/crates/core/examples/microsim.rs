//! Simulates a worker and firm population, checks the closed forms against
//! it, and runs the screening, firm-dynamics and wage-decomposition
//! extensions.

use twochannel::microsim::{
    firm_dynamics, oracle_checks, screening_equilibrium, simulate_population, wage_decomposition,
    FirmDynamicsConfig, Matching,
};
use twochannel::model::wage_compression;
use twochannel::{FixedEnv, StructuralParams, TaskTech};

fn main() -> twochannel::Result<()> {
    let p = StructuralParams::reference();
    let env = FixedEnv::default();
    let seed = 7;

    println!("oracle checks at n = 100000");
    for rec in oracle_checks(seed, 100_000, p.r, env.cv_h, env.sigma_eps)? {
        println!(
            "  {:<15} {:<40} rel err {:.2e} (tol {:.0e}) {}",
            rec.check,
            rec.parameters,
            rec.rel_error,
            rec.tolerance,
            if rec.pass { "ok" } else { "FAIL" }
        );
    }

    let pop = simulate_population(50_000, 200, env.cv_h, p.gini_k, seed)?;
    let tech = TaskTech::additive(p.r, env.cv_h);
    println!("\ncredential screening");
    for a in [0.0, 0.5, 1.0, 2.0] {
        let s = screening_equilibrium(&pop, &tech, a, env.sigma_eps, 0.45)?;
        println!(
            "  a = {a:<4} rho {:.3}  threshold {:.3}  credentialed {:.3}",
            s.rho, s.theta_hat, s.credential_share
        );
    }

    println!("\nfirm capital dynamics, Var(log K) after 50 periods");
    for eta in [
        p.eta0,
        p.eta1,
        0.95 * (1.0 - env.gamma_l),
        1.05 * (1.0 - env.gamma_l),
    ] {
        let t = firm_dynamics(&pop, &FirmDynamicsConfig::default(), eta, env.gamma_l)?;
        println!(
            "  eta {eta:.3}  exponent {:.3}  final {:.3}",
            t.exponent,
            t.var_log_k.last().copied().unwrap_or(f64::NAN)
        );
    }

    let d = wage_decomposition(
        &pop,
        env.xi,
        1.0,
        wage_compression(p.r, env.s_share),
        p.eta0,
        p.eta1,
        env.gamma_l,
        Matching::default(),
    )?;
    println!("\nwage variance      between   within      cov    total");
    for (label, v) in [("pre", d.pre), ("post", d.post)] {
        println!(
            "  {label:<14} {:>9.4} {:>8.4} {:>8.4} {:>8.4}",
            v.between, v.within, v.cov, v.total
        );
    }
    Ok(())
}

//! Sweeps rent-sharing pass-through, tabulates industry archetypes, and
//! traces the regime boundary in the (eta1, Gini(K)) plane.

use twochannel::calib::{calibrate, CalibConfig};
use twochannel::scenarios::{
    contour_grid, default_industries, industry_table, run_sweep, SweepParam, SweepSpec,
    DEFAULT_XI_GRID,
};
use twochannel::{FixedEnv, MomentVector};

fn main() -> twochannel::Result<()> {
    let env = FixedEnv::default();
    let base = calibrate(
        &MomentVector::published_targets(),
        &env,
        &CalibConfig::default(),
    )?
    .theta_hat;

    let sweep = run_sweep(&SweepSpec {
        param: SweepParam::Xi,
        grid: DEFAULT_XI_GRID.to_vec(),
        base,
        env,
    })?;
    println!("xi sweep");
    for row in &sweep.rows {
        println!("  {:.2}  {:+.4}  {}", row.value, row.delta_gini, row.regime);
    }
    println!("  sign change at xi = {:?}", sweep.crossings);

    println!("\nindustries");
    for row in industry_table(&base, &env, &default_industries())? {
        println!(
            "  {:<24} giniK {:.2} xi {:.2}  {:+.4}  {}",
            row.label, row.gini_k, row.xi, row.delta_gini, row.regime
        );
    }

    let grid = contour_grid((0.05, 0.85), (0.2, 0.95), (60, 60), &base, &env)?;
    println!("\nbalance line (giniK, eta1), every tenth point");
    for (g, e) in grid.boundary.iter().step_by(10) {
        println!("  {g:.3}  {e:.4}");
    }
    Ok(())
}

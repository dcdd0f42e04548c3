//! Merges the synthetic OEWS-style fixtures with an exposure index and runs
//! the five wage-dispersion regressions. Pass three paths to use other files.

use std::path::PathBuf;

use twochannel::regress::{load_and_merge, run_table4, DropReason};

fn main() -> twochannel::Result<()> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let paths = if args.len() == 3 {
        args
    } else {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
        ["oews_2019.csv", "oews_2023.csv", "aioe.csv"]
            .map(|f| dir.join(f))
            .to_vec()
    };
    let panel = load_and_merge(&paths[0], &paths[1], &paths[2])?;
    println!("matched {} occupations", panel.report.matched);
    for reason in [
        DropReason::Aggregate,
        DropReason::TopCoded,
        DropReason::Suppressed,
        DropReason::Ordering,
    ] {
        println!("  dropped {reason:?}: {}", panel.report.total(reason));
    }

    let table = run_table4(&panel)?;
    println!("\nmean change in log(p90/p10): {:+.4}", table.mean_change);
    for col in &table.columns {
        let c = col.output.coef("aioe").expect("exposure column");
        println!(
            "  {:<4} {:?} fe={:<5} aioe {:+.4}{:<3} ({:.4})  R2 {:.3}  n {}",
            col.label,
            col.design,
            col.fe,
            c.estimate,
            c.stars,
            c.se,
            col.output.r_squared,
            col.output.n
        );
    }
    Ok(())
}

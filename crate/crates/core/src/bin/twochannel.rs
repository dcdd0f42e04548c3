use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twochannel::app::{run, Command, Overrides};
use twochannel::Error;

#[derive(Parser)]
#[command(
    name = "twochannel",
    version,
    about = "Calibrate and explore the two-channel model of AI and inequality"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply to every key left out.
    #[arg(long, global = true, env = "TWOCHANNEL_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "TWOCHANNEL_OUT")]
    out: Option<PathBuf>,
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true, env = "TWOCHANNEL_SEED")]
    seed: Option<u64>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "TWOCHANNEL_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the structural parameters to the target moments.
    Calibrate,
    /// Parametric bootstrap of the calibration.
    Bootstrap,
    /// Local sensitivity of the parameters to each moment.
    Sensitivity,
    /// Parameter sweeps, industry table and regime contour.
    Scenarios,
    /// Monte Carlo checks of the closed forms and micro-founded extensions.
    Simulate,
    /// Occupation-level wage dispersion regressions.
    Regress,
    /// Run every stage in dependency order.
    ReproduceAll {
        /// Run only this stage of the pipeline.
        #[arg(long)]
        stage: Option<String>,
    },
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 2 for configuration errors, 1 for anything else.
fn dispatch(args: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, stage) = match cli.command {
        Cmd::Calibrate => (Command::Calibrate, None),
        Cmd::Bootstrap => (Command::Bootstrap, None),
        Cmd::Sensitivity => (Command::Sensitivity, None),
        Cmd::Scenarios => (Command::Scenarios, None),
        Cmd::Simulate => (Command::Simulate, None),
        Cmd::Regress => (Command::Regress, None),
        Cmd::ReproduceAll { stage } => (Command::ReproduceAll, stage),
    };
    let ov = Overrides {
        config: cli.common.config,
        out: cli.common.out,
        seed: cli.common.seed,
        threads: cli.common.threads,
        stage,
    };
    match run(command, &ov) {
        Ok(m) => {
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: wrote {} artifacts in {:.1}s",
                m.command,
                m.artifacts.len(),
                m.wall_time_seconds
            );
            0
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("configuration error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::{Path, PathBuf};

    use super::dispatch;

    fn quick_config() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/quick.json")
    }

    fn run(args: &[&str], out: &Path) -> u8 {
        let mut argv: Vec<std::ffi::OsString> = vec!["twochannel".into()];
        argv.extend(args.iter().map(|a| a.into()));
        argv.extend(["--out".into(), out.as_os_str().to_owned()]);
        dispatch(argv)
    }

    fn manifest(out: &Path) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
    }

    #[test]
    fn misspelled_key_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.json");
        fs::write(&cfg, r#"{"env": {"xI": 0.2}}"#).unwrap();
        assert_eq!(
            run(
                &["calibrate", "--config", cfg.to_str().unwrap()],
                &dir.path().join("out")
            ),
            2
        );
    }

    #[test]
    fn invalid_value_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.json");
        fs::write(&cfg, r#"{"bootstrap": {"ci_level": 1.5}}"#).unwrap();
        assert_eq!(
            run(
                &["bootstrap", "--config", cfg.to_str().unwrap()],
                &dir.path().join("out")
            ),
            2
        );
    }

    #[test]
    fn unparseable_arguments_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run(&["calibrate", "--seed", "minus-one"], dir.path()), 2);
        assert_eq!(run(&["fit"], dir.path()), 2);
    }

    #[test]
    fn missing_config_file_exits_1() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("absent.json");
        assert_eq!(
            run(
                &["calibrate", "--config", cfg.to_str().unwrap()],
                dir.path()
            ),
            1
        );
    }

    #[test]
    fn regress_without_data_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run(&["regress"], dir.path()), 2);
    }

    #[test]
    fn unknown_stage_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(
            run(&["reproduce-all", "--stage", "everything"], dir.path()),
            2
        );
    }

    #[test]
    fn calibrate_is_reproducible_byte_for_byte() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for dir in [&a, &b] {
            assert_eq!(run(&["calibrate", "--seed", "99"], dir.path()), 0);
        }
        for f in ["calibration.json", "table1.csv", "leave_one_out.json"] {
            let x = fs::read(a.path().join(f)).unwrap();
            let y = fs::read(b.path().join(f)).unwrap();
            assert!(x == y, "{f} differs");
        }
        let (ma, mb) = (manifest(a.path()), manifest(b.path()));
        assert_eq!(ma["seed"], 99);
        assert_eq!(ma["config_sha256"], mb["config_sha256"]);
        assert_eq!(ma["artifacts"], mb["artifacts"]);
    }

    #[test]
    fn seed_changes_the_config_hash() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = quick_config();
        let cfg = cfg.to_str().unwrap();
        assert_eq!(
            run(
                &[
                    "reproduce-all",
                    "--stage",
                    "regress",
                    "--config",
                    cfg,
                    "--seed",
                    "1"
                ],
                a.path()
            ),
            0
        );
        assert_eq!(
            run(
                &[
                    "reproduce-all",
                    "--stage",
                    "regress",
                    "--config",
                    cfg,
                    "--seed",
                    "2"
                ],
                b.path()
            ),
            0
        );
        assert_ne!(
            manifest(a.path())["config_sha256"],
            manifest(b.path())["config_sha256"]
        );
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = quick_config();
        let cfg = cfg.to_str().unwrap();
        for dir in [&a, &b] {
            assert_eq!(
                run(
                    &["reproduce-all", "--stage", "bootstrap", "--config", cfg],
                    dir.path()
                ),
                0
            );
        }
        for f in [
            "bootstrap_standard_replications.csv",
            "bootstrap_augmented_summary.json",
        ] {
            assert!(
                fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(),
                "{f} differs"
            );
        }
    }

    #[test]
    fn pipeline_writes_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_config();
        assert_eq!(
            run(
                &["reproduce-all", "--config", cfg.to_str().unwrap()],
                dir.path()
            ),
            0
        );
        let m = manifest(dir.path());
        let artifacts: Vec<&str> = m["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        for f in [
            "calibration.json",
            "table1.csv",
            "table2.csv",
            "sensitivity.json",
            "bootstrap_standard_summary.json",
            "sweep_xi.csv",
            "industry.csv",
            "contour_boundary.csv",
            "oracle.csv",
            "table4.csv",
            "regress.json",
            "report.json",
            "manifest.json",
        ] {
            assert!(artifacts.contains(&f), "missing {f}");
            assert!(dir.path().join(f).exists(), "{f} not on disk");
        }
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        for key in [
            "calibrate",
            "sensitivity",
            "bootstrap",
            "scenarios",
            "simulate",
            "regress",
        ] {
            assert!(report["results"].get(key).is_some(), "report lacks {key}");
        }
        let table4 = fs::read_to_string(dir.path().join("table4.csv")).unwrap();
        assert!(table4.starts_with("row,(1),(2),(3),(4),(5)\n"));
    }

    #[test]
    fn pipeline_without_data_skips_regress_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run(&["reproduce-all", "--stage", "regress"], dir.path()), 0);
        let warnings = manifest(dir.path())["warnings"].to_string();
        assert!(warnings.contains("regress skipped"), "{warnings}");
        assert!(!dir.path().join("table4.csv").exists());
    }
}

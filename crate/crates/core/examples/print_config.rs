//! Prints the fully resolved default run configuration as JSON, a starting
//! point for a custom `--config` file.

fn main() -> twochannel::Result<()> {
    let cfg = twochannel::app::RunConfig::default();
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    Ok(())
}

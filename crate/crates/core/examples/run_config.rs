//! Drive a full run from a TOML configuration, as `royale-rank run
//! --config` does, and list the files it writes.
//!
//! `cargo run --example run_config`

use royale_rank::cli::{cmd_run, RunConfig};
use royale_rank::Result;

pub fn run_example() -> Result<()> {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/tiny.csv");
    let out = std::env::temp_dir().join(format!("royale-rank-example-{}", std::process::id()));
    let text = format!(
        r#"
inputs = [{fixture:?}]
setup = "every"
gain = "exponential"
seed = 3
output_dir = {out:?}
audit = true

[rating]
elo_k = 24.0
pairing = "adjacent"

[prediction]
trueskill_key = "conservative"
"#
    );
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| royale_rank::Error::Config(e.to_string()))?;
    cmd_run(&cfg, &mut std::io::stdout())?;

    let mut files: Vec<String> = std::fs::read_dir(&out)
        .map_err(|e| royale_rank::Error::io(&out, e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("wrote {}", files.join(", "));
    std::fs::remove_dir_all(&out).map_err(|e| royale_rank::Error::io(&out, e))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

//! Load solo matches from CSV and inspect what ingestion kept and dropped.
//!
//! `cargo run --example ingest_csv`

use royale_rank::ingest::{load_from_readers, IngestOptions};
use royale_rank::Result;

const FIXTURE: &str = include_str!("../tests/fixtures/golden.csv");

pub fn run_example() -> Result<()> {
    let ingested = load_from_readers([("golden.csv".into(), FIXTURE.as_bytes())], &IngestOptions::default())?;
    let s = &ingested.stats;
    println!(
        "{} rows -> {} matches, {} players ({} non-solo rows dropped)",
        s.rows_parsed, s.matches, s.unique_players, s.non_solo_dropped
    );
    for m in &ingested.matches {
        let field: Vec<String> = m
            .participants
            .iter()
            .map(|p| format!("{}#{}", p.player_id, p.rank))
            .collect();
        println!("{} {} n={} {}", m.timestamp, m.match_id, m.n(), field.join(" "));
    }

    // Same file read with a strict mode whitelist.
    let mut strict = IngestOptions::default();
    strict.solo.modes = Some(vec!["solo".into(), "solo-fpp".into()]);
    let none = load_from_readers([("golden.csv".into(), FIXTURE.as_bytes())], &strict)?;
    println!("with modes [solo, solo-fpp]: {} matches", none.stats.matches);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

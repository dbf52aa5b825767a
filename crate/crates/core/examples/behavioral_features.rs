//! Accumulate per-player profiles match by match and read the nine
//! behavioral features.
//!
//! `cargo run --example behavioral_features`

use royale_rank::ingest::{load_from_readers, IngestOptions};
use royale_rank::profile::{FeatureId, ProfileStore, ZeroDivision};
use royale_rank::Result;

const FIXTURE: &str = include_str!("../tests/fixtures/golden.csv");

pub fn run_example() -> Result<()> {
    let matches = load_from_readers([("golden.csv".into(), FIXTURE.as_bytes())], &IngestOptions::default())?.matches;
    let mut profiles = ProfileStore::new();
    for m in &matches {
        profiles.apply_match(&m.participants)?;
    }

    print!("{:<4}", "id");
    for f in FeatureId::ALL {
        print!(" {:>14}", f.as_str());
    }
    println!();
    let mut ids: Vec<&String> = profiles.iter().map(|(id, _)| id).collect();
    ids.sort();
    for id in ids {
        print!("{id:<4}");
        for v in profiles.get(id).features(ZeroDivision::Zero) {
            print!(" {v:>14.4}");
        }
        println!();
    }

    // A never-seen player sits at the fresh defaults.
    let fresh = profiles.get("nobody");
    println!("fresh rank ratio = {}", fresh.feature_value(FeatureId::B9RankRatio));

    // K/D of an undefeated player under the two zero-division conventions.
    let a = profiles.get("A");
    let mut first = ProfileStore::new();
    first.apply_match(&matches[0].participants)?;
    let winner = first.get("A");
    println!(
        "A after one win: K/D = {} (zero) or {} (numerator); after three games {}",
        winner.feature_value_with(FeatureId::B2Kd, ZeroDivision::Zero),
        winner.feature_value_with(FeatureId::B2Kd, ZeroDivision::Numerator),
        a.feature_value(FeatureId::B2Kd)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

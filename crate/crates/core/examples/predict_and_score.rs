//! Predict the last fixture match with every model and score each
//! prediction with NDCG.
//!
//! `cargo run --example predict_and_score`

use royale_rank::evaluation::{ndcg, GainKind};
use royale_rank::ingest::{load_from_readers, IngestOptions};
use royale_rank::prediction::{predict, predict_shuffled, ModelId, PredictionConfig};
use royale_rank::profile::ProfileStore;
use royale_rank::rating::{RatingConfig, RatingStore};
use royale_rank::Result;

const FIXTURE: &str = include_str!("../tests/fixtures/golden.csv");

pub fn run_example() -> Result<()> {
    let matches = load_from_readers([("golden.csv".into(), FIXTURE.as_bytes())], &IngestOptions::default())?.matches;
    let (history, target) = matches.split_at(matches.len() - 1);
    let target = &target[0];

    let mut profiles = ProfileStore::new();
    let mut ratings = RatingStore::new();
    for m in history {
        profiles.apply_match(&m.participants)?;
        ratings.apply_match(&m.player_ids(), &m.ranks(), &RatingConfig::default())?;
    }

    let players = target.player_ids();
    let observed = target.observed();
    println!("observed: {observed:?}");
    let seed = 0;
    for model in ModelId::ALL {
        let p = predict(
            &target.match_id,
            &players,
            &profiles,
            &ratings,
            model,
            seed,
            &PredictionConfig::default(),
        );
        println!(
            "{:<14} {:<20} linear {:.4}  exponential {:.4}",
            model.as_str(),
            p.ordering.join(" > "),
            ndcg(&p.ordering, &observed, GainKind::Linear)?,
            ndcg(&p.ordering, &observed, GainKind::Exponential)?
        );
    }
    let random = predict_shuffled(&target.match_id, &players, seed);
    println!(
        "{:<14} {:<20} linear {:.4}",
        "shuffle",
        random.join(" > "),
        ndcg(&random, &observed, GainKind::Linear)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

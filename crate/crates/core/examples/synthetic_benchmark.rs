//! Generate a synthetic league with known skills, run all three setups and
//! check how well TrueSkill recovers the hidden skill.
//!
//! `cargo run --release --example synthetic_benchmark`

use royale_rank::evaluation::{build_cohort, format_table, run_experiments, CohortKind, CohortSpec, ExperimentConfig};
use royale_rank::ingest::{assemble_matches, sort_chronological};
use royale_rank::prediction::ModelId;
use royale_rank::rating::RatingStore;
use royale_rank::synth::{generate, spearman, SyntheticSpec};
use royale_rank::Result;

pub fn run_example() -> Result<()> {
    let spec = SyntheticSpec {
        n_players: 150,
        n_matches: 1500,
        players_per_match: 12,
        seed: 42,
        ..Default::default()
    };
    let data = generate(&spec)?;
    let skills = data.skills();
    let (matches, _) = assemble_matches(data.rows);
    let matches = sort_chronological(matches);

    let cohorts: Vec<_> = CohortKind::ALL
        .iter()
        .map(|&k| build_cohort(k, &matches, &CohortSpec::default()))
        .collect();
    let cfg = ExperimentConfig::default();
    let reports = run_experiments(&matches, &cohorts, &cfg, None)?;
    let summaries: Vec<_> = reports.iter().map(|r| r.summary.clone()).collect();
    print!("{}", format_table(&summaries, &ModelId::ALL));

    let mut ratings = RatingStore::new();
    for m in &matches {
        ratings.apply_match(&m.player_ids(), &m.ranks(), &cfg.rating)?;
    }
    let ids: Vec<&String> = skills.keys().collect();
    let mu: Vec<f64> = ids.iter().map(|p| ratings.trueskill(p).mu).collect();
    let truth: Vec<f64> = ids.iter().map(|p| skills[*p]).collect();
    println!("spearman(trueskill mu, latent skill) = {:.3}", spearman(&mu, &truth));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

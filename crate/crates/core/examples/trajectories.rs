//! Record how the behavioral features of the most active players develop
//! over their first games, as CSV for plotting.
//!
//! `cargo run --example trajectories > trajectories.csv`

use royale_rank::evaluation::{
    build_cohort, run_experiment, write_trajectories_csv, CohortKind, CohortSpec, ExperimentConfig,
};
use royale_rank::ingest::{assemble_matches, sort_chronological};
use royale_rank::synth::{generate, SyntheticSpec};
use royale_rank::Result;

pub fn run_example() -> Result<()> {
    let data = generate(&SyntheticSpec {
        n_players: 40,
        n_matches: 600,
        players_per_match: 8,
        seed: 7,
        ..Default::default()
    })?;
    let matches = sort_chronological(assemble_matches(data.rows).0);

    let spec = CohortSpec {
        display_players: 3,
        ..Default::default()
    };
    let cohort = build_cohort(CohortKind::Frequent, &matches, &spec);
    eprintln!(
        "tracking {:?} over their first {} games",
        cohort.display, cohort.trajectory_len
    );
    let report = run_experiment(&matches, &cohort, &ExperimentConfig::default())?;
    write_trajectories_csv(&report.trajectories, std::io::stdout().lock())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

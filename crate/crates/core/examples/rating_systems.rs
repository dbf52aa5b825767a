//! Update Elo, Glicko and TrueSkill on one eight-player match.
//!
//! `cargo run --example rating_systems`

use royale_rank::rating::{
    elo_update_br, glicko_update_br, trueskill_update_ffa, EloState, GlickoState, Pairing, RatingConfig, TrueSkillState,
};
use royale_rank::Result;

pub fn run_example() -> Result<()> {
    let cfg = RatingConfig::default();
    // Placement of each player; players 3 and 4 share fourth place.
    let ranks = [2, 1, 6, 4, 4, 8, 3, 7];

    let elo = elo_update_br(&[EloState::default(); 8], &ranks, &cfg)?;
    let glicko = glicko_update_br(&[GlickoState::default(); 8], &ranks, &cfg)?;
    let ts = trueskill_update_ffa(&[TrueSkillState::default(); 8], &ranks, &cfg)?;
    println!("trueskill converged after {} sweeps: {}", ts.iterations, ts.converged);

    println!(
        "{:>4} {:>9} {:>9} {:>7} {:>8} {:>7}",
        "rank", "elo", "glicko", "rd", "mu", "sigma"
    );
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by_key(|&i| ranks[i]);
    for i in order {
        let (g, t) = (glicko[i], ts.states[i]);
        println!(
            "{:>4} {:>9.2} {:>9.2} {:>7.2} {:>8.3} {:>7.3}",
            ranks[i], elo[i].r, g.r, g.rd, t.mu, t.sigma
        );
    }

    // Adjacent pairing only compares neighbours in the finishing order.
    let adjacent = RatingConfig {
        pairing: Pairing::Adjacent,
        ..cfg
    };
    let elo_adj = elo_update_br(&[EloState::default(); 8], &ranks, &adjacent)?;
    println!("winner under adjacent pairing: {:.2}", elo_adj[1].r);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}

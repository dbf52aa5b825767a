use super::{check_aligned, opponents, pair_score, EloState, Pairing, RatingConfig};
use crate::error::Result;

/// Logistic expectation that `a` beats `b`.
pub fn elo_expected(r_a: f64, r_b: f64, scale: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / scale))
}

/// Battle-royale Elo: each player is scored against its opponents (see
/// [`Pairing`]) with `S = 1, 0.5, 0` for finishing ahead, level, behind.
/// All expectations use pre-match ratings.
pub fn elo_update_br(states: &[EloState], ranks: &[u32], cfg: &RatingConfig) -> Result<Vec<EloState>> {
    check_aligned(states.len(), ranks)?;
    let n = states.len();
    let k = match cfg.pairing {
        Pairing::AllPairs => cfg.elo_k / (n - 1) as f64,
        Pairing::Adjacent => cfg.elo_k,
    };
    let opp = opponents(ranks, cfg.pairing);
    Ok((0..n)
        .map(|i| {
            let surplus: f64 = opp[i]
                .iter()
                .map(|&j| pair_score(ranks[i], ranks[j]) - elo_expected(states[i].r, states[j].r, cfg.elo_scale))
                .sum();
            EloState {
                r: states[i].r + k * surplus,
            }
        })
        .collect())
}

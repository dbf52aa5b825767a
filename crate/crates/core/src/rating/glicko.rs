use std::f64::consts::PI;

use super::{check_aligned, opponents, pair_score, GlickoState, RatingConfig, GLICKO_MAX_RD, GLICKO_MIN_RD};
use crate::error::Result;

/// Opponent-uncertainty discount `1 / sqrt(1 + 3 q² rd² / π²)`.
pub fn glicko_g(rd: f64, q: f64) -> f64 {
    1.0 / (1.0 + 3.0 * q * q * rd * rd / (PI * PI)).sqrt()
}

/// Battle-royale Glicko-1: the match is one rating period in which each
/// player plays a pairwise game against each opponent. There is no idle-time
/// RD inflation. The resulting RD is clamped to `[30, 350]`.
pub fn glicko_update_br(states: &[GlickoState], ranks: &[u32], cfg: &RatingConfig) -> Result<Vec<GlickoState>> {
    check_aligned(states.len(), ranks)?;
    let q = cfg.glicko_q;
    let opp = opponents(ranks, cfg.pairing);
    let g: Vec<f64> = states.iter().map(|s| glicko_g(s.rd, q)).collect();

    Ok((0..states.len())
        .map(|i| {
            let me = states[i];
            let mut info = 0.0;
            let mut surplus = 0.0;
            for &j in &opp[i] {
                let e = 1.0 / (1.0 + (-g[j] * q * (me.r - states[j].r)).exp());
                info += g[j] * g[j] * e * (1.0 - e);
                surplus += g[j] * (pair_score(ranks[i], ranks[j]) - e);
            }
            // 1/d² = q² Σ g² E (1 - E)
            let inv_d2 = q * q * info;
            let precision = 1.0 / (me.rd * me.rd) + inv_d2;
            GlickoState {
                r: me.r + q / precision * surplus,
                rd: (1.0 / precision).sqrt().clamp(GLICKO_MIN_RD, GLICKO_MAX_RD),
            }
        })
        .collect())
}

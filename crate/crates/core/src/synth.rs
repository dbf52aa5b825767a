//! Synthetic battle-royale telemetry with known latent skills.
//!
//! Each player has a latent skill drawn from `N(0, latent_skill_stddev)` and
//! a movement archetype. Each match samples `players_per_match` distinct
//! players uniformly; a player's performance is `skill + N(0, noise)` and
//! placements follow performance. Per-match stats are monotone in the
//! finishing percentile, so every behavioral feature carries ordinal signal.

use std::collections::HashMap;
use std::io::Write;

use chrono::{DateTime, Duration, Utc};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{RawRow, DEFAULT_HEADER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_players: usize,
    pub n_matches: usize,
    pub players_per_match: usize,
    pub latent_skill_stddev: f64,
    pub performance_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_players: 1000,
            n_matches: 5000,
            players_per_match: 20,
            latent_skill_stddev: 1.0,
            performance_noise: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.players_per_match < 2 {
            return Err(Error::Config(format!(
                "players_per_match must be at least 2, got {}",
                self.players_per_match
            )));
        }
        if self.players_per_match > self.n_players {
            return Err(Error::Config(format!(
                "players_per_match ({}) exceeds n_players ({})",
                self.players_per_match, self.n_players
            )));
        }
        if !(self.performance_noise.is_finite() && self.performance_noise > 0.0) {
            return Err(Error::Config(format!(
                "performance_noise must be positive, got {}",
                self.performance_noise
            )));
        }
        if !(self.latent_skill_stddev.is_finite() && self.latent_skill_stddev >= 0.0) {
            return Err(Error::Config(format!(
                "latent_skill_stddev must be non-negative, got {}",
                self.latent_skill_stddev
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Archetype {
    Camper,
    Roamer,
    Driver,
}

impl Archetype {
    /// Walking and riding speeds in m/s.
    fn speeds(self) -> (f64, f64) {
        match self {
            Archetype::Camper => (0.6, 0.2),
            Archetype::Roamer => (1.6, 0.8),
            Archetype::Driver => (0.9, 5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPlayer {
    pub player_id: String,
    pub skill: f64,
    pub archetype: Archetype,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub players: Vec<SyntheticPlayer>,
    pub rows: Vec<RawRow>,
}

impl SyntheticDataset {
    pub fn skills(&self) -> HashMap<String, f64> {
        self.players.iter().map(|p| (p.player_id.clone(), p.skill)).collect()
    }
}

pub fn player_name(i: usize) -> String {
    format!("player{i:05}")
}

fn base_time() -> DateTime<Utc> {
    DateTime::from_timestamp(1_509_494_400, 0).expect("valid epoch") // 2017-11-01T00:00:00Z
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let skill_dist = Normal::new(0.0, spec.latent_skill_stddev).map_err(|e| Error::Config(e.to_string()))?;
    let noise = Normal::new(0.0, spec.performance_noise).map_err(|e| Error::Config(e.to_string()))?;

    let players: Vec<SyntheticPlayer> = (0..spec.n_players)
        .map(|i| SyntheticPlayer {
            player_id: player_name(i),
            skill: skill_dist.sample(&mut rng),
            archetype: match rng.random_range(0..3) {
                0 => Archetype::Camper,
                1 => Archetype::Roamer,
                _ => Archetype::Driver,
            },
        })
        .collect();

    let n = spec.players_per_match;
    let mut rows = Vec::with_capacity(spec.n_matches * n);
    for m in 0..spec.n_matches {
        let date = base_time() + Duration::minutes(m as i64);
        let match_id = format!("syn-{m:06}");
        let field = sample(&mut rng, spec.n_players, n).into_vec();
        let mut perf: Vec<(usize, f64)> = field
            .iter()
            .map(|&p| (p, players[p].skill + noise.sample(&mut rng)))
            .collect();
        perf.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (pos, &(p, _)) in perf.iter().enumerate() {
            let rank = pos + 1;
            let pct = (n - rank) as f64 / (n - 1) as f64;
            let survive = 90.0 + 1710.0 * pct;
            let kills = (5.0 * pct * pct).round() as u32;
            let (walk_v, ride_v) = players[p].archetype.speeds();
            rows.push(RawRow {
                date,
                game_size: n as u32,
                match_id: match_id.clone(),
                match_mode: "tpp".into(),
                party_size: 1,
                player_dist_ride: (ride_v * survive).round(),
                player_dist_walk: (walk_v * survive).round(),
                player_dmg: u64::from(kills) * 100 + (60.0 * pct).round() as u64,
                player_kills: kills,
                player_name: players[p].player_id.clone(),
                player_survive_time: survive.round(),
                team_placement: rank as i64,
            });
        }
    }
    Ok(SyntheticDataset { players, rows })
}

/// Writes rows in the default ingest schema, `team_id` numbered per match.
pub fn write_csv<W: Write>(rows: &[RawRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DEFAULT_HEADER)?;
    let mut team_id = 0u64;
    let mut last_match: Option<&str> = None;
    for r in rows {
        if last_match != Some(r.match_id.as_str()) {
            team_id = 0;
            last_match = Some(r.match_id.as_str());
        }
        team_id += 1;
        w.write_record([
            r.date.format("%Y-%m-%dT%H:%M:%S+0000").to_string(),
            r.game_size.to_string(),
            r.match_id.clone(),
            r.match_mode.clone(),
            r.party_size.to_string(),
            r.player_dist_ride.to_string(),
            r.player_dist_walk.to_string(),
            r.player_dmg.to_string(),
            r.player_kills.to_string(),
            r.player_name.clone(),
            r.player_survive_time.to_string(),
            team_id.to_string(),
            r.team_placement.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<synthetic csv>", e))?;
    Ok(())
}

/// Average ranks (1-based), ties share the mean of their positions.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation. `NaN` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman: length mismatch");
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

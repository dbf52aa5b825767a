//! Cumulative per-player accumulators and the nine behavioral features
//! derived from them.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ParticipantStats;

/// Rank ratio reported for a player with no history.
pub const FRESH_RANK_RATIO: f64 = 100.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub games_played: u64,
    pub total_kills: u64,
    /// Matches finished with rank > 1.
    pub total_deaths: u64,
    pub total_damage: u64,
    pub total_survive_s: f64,
    pub total_walk_m: f64,
    pub total_ride_m: f64,
    /// Sum of per-match `100 * rank / n`.
    pub sum_rank_pct: f64,
    pub wins: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureId {
    B1Games,
    B2Kd,
    B3Accuracy,
    B4Survive,
    B5WalkRatio,
    B6RideRatio,
    B7WalkVel,
    B8RideVel,
    B9RankRatio,
}

impl FeatureId {
    pub const ALL: [FeatureId; 9] = [
        FeatureId::B1Games,
        FeatureId::B2Kd,
        FeatureId::B3Accuracy,
        FeatureId::B4Survive,
        FeatureId::B5WalkRatio,
        FeatureId::B6RideRatio,
        FeatureId::B7WalkVel,
        FeatureId::B8RideVel,
        FeatureId::B9RankRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureId::B1Games => "B1_GAMES",
            FeatureId::B2Kd => "B2_KD",
            FeatureId::B3Accuracy => "B3_ACCURACY",
            FeatureId::B4Survive => "B4_SURVIVE",
            FeatureId::B5WalkRatio => "B5_WALK_RATIO",
            FeatureId::B6RideRatio => "B6_RIDE_RATIO",
            FeatureId::B7WalkVel => "B7_WALK_VEL",
            FeatureId::B8RideVel => "B8_RIDE_VEL",
            FeatureId::B9RankRatio => "B9_RANK_RATIO",
        }
    }

    /// `true` when a larger value predicts a better finish. Only rank ratio
    /// runs the other way.
    pub fn higher_is_better(self) -> bool {
        self != FeatureId::B9RankRatio
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureId::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown feature `{s}`")))
    }
}

/// What a ratio returns when its denominator is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroDivision {
    /// `x / 0 = 0`.
    #[default]
    Zero,
    /// `x / 0 = x`, i.e. the denominator is floored at one.
    Numerator,
}

impl FromStr for ZeroDivision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ZeroDivision::Zero),
            "numerator" => Ok(ZeroDivision::Numerator),
            _ => Err(Error::Config(format!("unknown zero-division convention `{s}`"))),
        }
    }
}

impl ZeroDivision {
    fn div(self, x: f64, y: f64) -> f64 {
        if y == 0.0 {
            match self {
                ZeroDivision::Zero => 0.0,
                ZeroDivision::Numerator => x,
            }
        } else {
            x / y
        }
    }
}

pub fn init_profile() -> PlayerProfile {
    PlayerProfile::default()
}

impl PlayerProfile {
    /// Folds one finished match into the accumulators. `n` is the number of
    /// participants in that match.
    pub fn update_after_match(&self, stats: &ParticipantStats, n: usize) -> Result<PlayerProfile> {
        if n < 2 {
            return Err(Error::contract(format!("match size {n} < 2")));
        }
        if stats.rank < 1 || stats.rank as usize > n {
            return Err(Error::contract(format!(
                "rank {} of player `{}` outside [1, {n}]",
                stats.rank, stats.player_id
            )));
        }
        let mut p = *self;
        p.games_played += 1;
        p.total_kills += u64::from(stats.kills);
        p.total_damage += stats.damage;
        p.total_survive_s += stats.survive_s;
        p.total_walk_m += stats.walk_m;
        p.total_ride_m += stats.ride_m;
        p.sum_rank_pct += 100.0 * f64::from(stats.rank) / n as f64;
        if stats.rank == 1 {
            p.wins += 1;
        } else {
            p.total_deaths += 1;
        }
        Ok(p)
    }

    pub fn feature_value(&self, f: FeatureId) -> f64 {
        self.feature_value_with(f, ZeroDivision::Zero)
    }

    pub fn feature_value_with(&self, f: FeatureId, zd: ZeroDivision) -> f64 {
        let games = self.games_played as f64;
        let kills = self.total_kills as f64;
        match f {
            FeatureId::B1Games => games,
            FeatureId::B2Kd => zd.div(kills, self.total_deaths as f64),
            FeatureId::B3Accuracy => zd.div(kills, self.total_damage as f64),
            FeatureId::B4Survive => zd.div(self.total_survive_s, games),
            FeatureId::B5WalkRatio => zd.div(self.total_walk_m, games),
            FeatureId::B6RideRatio => zd.div(self.total_ride_m, games),
            FeatureId::B7WalkVel => zd.div(self.total_walk_m, self.total_survive_s),
            FeatureId::B8RideVel => zd.div(self.total_ride_m, self.total_survive_s),
            FeatureId::B9RankRatio => {
                if self.games_played == 0 {
                    FRESH_RANK_RATIO
                } else {
                    self.sum_rank_pct / games
                }
            }
        }
    }

    pub fn features(&self, zd: ZeroDivision) -> [f64; 9] {
        FeatureId::ALL.map(|f| self.feature_value_with(f, zd))
    }

    pub fn win_rate(&self) -> f64 {
        if self.games_played == 0 {
            0.0
        } else {
            self.wins as f64 / self.games_played as f64
        }
    }
}

/// Player id → profile. Missing players read as fresh profiles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileStore {
    profiles: HashMap<String, PlayerProfile>,
}

#[derive(Serialize, Deserialize)]
struct ProfileLine {
    player_id: String,
    #[serde(flatten)]
    profile: PlayerProfile,
}

impl ProfileStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, player_id: &str) -> PlayerProfile {
        self.profiles.get(player_id).copied().unwrap_or_default()
    }

    pub fn contains(&self, player_id: &str) -> bool {
        self.profiles.contains_key(player_id)
    }

    pub fn insert(&mut self, player_id: impl Into<String>, profile: PlayerProfile) {
        self.profiles.insert(player_id.into(), profile);
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &PlayerProfile)> {
        self.profiles.iter()
    }

    /// Applies the outcome of one match to every participant.
    pub fn apply_match(&mut self, participants: &[ParticipantStats]) -> Result<()> {
        let n = participants.len();
        for stats in participants {
            let next = self.get(&stats.player_id).update_after_match(stats, n)?;
            self.profiles.insert(stats.player_id.clone(), next);
        }
        Ok(())
    }

    /// One JSON object per line, sorted by player id.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut ids: Vec<_> = self.profiles.keys().collect();
        ids.sort();
        for id in ids {
            let line = ProfileLine {
                player_id: id.clone(),
                profile: self.profiles[id],
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(|e| Error::io("<profile jsonl>", e))?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut store = ProfileStore::new();
        for line in input.lines() {
            let line = line.map_err(|e| Error::io("<profile jsonl>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ProfileLine = serde_json::from_str(&line)?;
            store.insert(parsed.player_id, parsed.profile);
        }
        Ok(store)
    }
}

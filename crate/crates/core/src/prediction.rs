//! Finishing-order predictions from one behavioral feature or one rating
//! system.
//!
//! Every model sorts the match's participants by a single per-player key.
//! Ties are broken by a uniform shuffle drawn from a generator seeded with
//! `(seed, match_id, model)`, so runs are reproducible and the twelve models
//! never share a tie-break stream.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::profile::{FeatureId, ProfileStore, ZeroDivision};
use crate::rating::{RatingStore, RatingSystem};

/// One of the twelve compared models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelId {
    Rating(RatingSystem),
    Feature(FeatureId),
}

impl ModelId {
    pub const ALL: [ModelId; 12] = [
        ModelId::Rating(RatingSystem::Elo),
        ModelId::Rating(RatingSystem::Glicko),
        ModelId::Rating(RatingSystem::TrueSkill),
        ModelId::Feature(FeatureId::B1Games),
        ModelId::Feature(FeatureId::B2Kd),
        ModelId::Feature(FeatureId::B3Accuracy),
        ModelId::Feature(FeatureId::B4Survive),
        ModelId::Feature(FeatureId::B5WalkRatio),
        ModelId::Feature(FeatureId::B6RideRatio),
        ModelId::Feature(FeatureId::B7WalkVel),
        ModelId::Feature(FeatureId::B8RideVel),
        ModelId::Feature(FeatureId::B9RankRatio),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Rating(RatingSystem::Elo) => "ELO",
            ModelId::Rating(RatingSystem::Glicko) => "GLICKO",
            ModelId::Rating(RatingSystem::TrueSkill) => "TRUESKILL",
            ModelId::Feature(f) => f.as_str(),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

impl From<ModelId> for String {
    fn from(m: ModelId) -> String {
        m.as_str().to_string()
    }
}

impl TryFrom<String> for ModelId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which TrueSkill quantity orders players.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueSkillKey {
    #[default]
    Mean,
    /// `mu - 3 sigma`
    Conservative,
}

impl FromStr for TrueSkillKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(TrueSkillKey::Mean),
            "conservative" => Ok(TrueSkillKey::Conservative),
            _ => Err(Error::Config(format!("unknown trueskill key `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictionConfig {
    pub zero_division: ZeroDivision,
    pub trueskill_key: TrueSkillKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedOrder {
    pub match_id: String,
    pub model: ModelId,
    /// Position `k` holds the player predicted to finish `k + 1`.
    pub ordering: Vec<String>,
    pub seed: u64,
}

/// Generator for one model's tie-breaks in one match.
pub fn tie_break_rng(seed: u64, match_id: &str, model: ModelId) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(match_id.as_bytes());
    h.update([0xff]);
    h.update(model.as_str().as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Sorts `participants` by `keys` (descending unless `ascending`), with
/// equal keys in uniformly random order.
fn order_by_keys(participants: &[String], keys: &[f64], ascending: bool, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut idx: Vec<usize> = (0..participants.len()).collect();
    idx.shuffle(rng);
    // Stable sort after a shuffle: tied groups stay in shuffled order.
    if ascending {
        idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    } else {
        idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    }
    idx.into_iter().map(|i| participants[i].clone()).collect()
}

/// Orders players by one behavioral feature: descending, except rank ratio
/// which is ascending. Players without a profile are fresh.
pub fn predict_by_feature(
    match_id: &str,
    participants: &[String],
    profiles: &ProfileStore,
    feature: FeatureId,
    seed: u64,
    zero_division: ZeroDivision,
) -> PredictedOrder {
    let keys: Vec<f64> = participants
        .iter()
        .map(|p| profiles.get(p).feature_value_with(feature, zero_division))
        .collect();
    let model = ModelId::Feature(feature);
    let mut rng = tie_break_rng(seed, match_id, model);
    PredictedOrder {
        match_id: match_id.to_string(),
        model,
        ordering: order_by_keys(participants, &keys, !feature.higher_is_better(), &mut rng),
        seed,
    }
}

/// Orders players by rating, highest first. Unrated players get the
/// system's default state.
pub fn predict_by_rating(
    match_id: &str,
    participants: &[String],
    ratings: &RatingStore,
    system: RatingSystem,
    seed: u64,
    trueskill_key: TrueSkillKey,
) -> PredictedOrder {
    let keys: Vec<f64> = participants
        .iter()
        .map(|p| match system {
            RatingSystem::Elo => ratings.elo(p).r,
            RatingSystem::Glicko => ratings.glicko(p).r,
            RatingSystem::TrueSkill => {
                let s = ratings.trueskill(p);
                match trueskill_key {
                    TrueSkillKey::Mean => s.mu,
                    TrueSkillKey::Conservative => s.conservative(),
                }
            }
        })
        .collect();
    let model = ModelId::Rating(system);
    let mut rng = tie_break_rng(seed, match_id, model);
    PredictedOrder {
        match_id: match_id.to_string(),
        model,
        ordering: order_by_keys(participants, &keys, false, &mut rng),
        seed,
    }
}

pub fn predict(
    match_id: &str,
    participants: &[String],
    profiles: &ProfileStore,
    ratings: &RatingStore,
    model: ModelId,
    seed: u64,
    cfg: &PredictionConfig,
) -> PredictedOrder {
    match model {
        ModelId::Rating(system) => predict_by_rating(match_id, participants, ratings, system, seed, cfg.trueskill_key),
        ModelId::Feature(f) => predict_by_feature(match_id, participants, profiles, f, seed, cfg.zero_division),
    }
}

/// Uniform random order, the no-information baseline. Equivalent to any
/// model applied to a field of fresh players.
pub fn predict_shuffled(match_id: &str, participants: &[String], seed: u64) -> Vec<String> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(match_id.as_bytes());
    h.update(b"\xffSHUFFLE");
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let mut out = participants.to_vec();
    out.shuffle(&mut rng);
    out
}

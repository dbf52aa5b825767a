//! Baseline rating systems adapted to N-player free-for-all matches.
//!
//! All three updates are pure: they take the pre-match states of every
//! participant together with the observed ranks and return post-match states
//! in the same order. No participant's update sees another participant's
//! post-match state.

pub mod elo;
pub mod gaussian;
pub mod glicko;
pub mod trueskill;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use elo::{elo_expected, elo_update_br};
pub use glicko::{glicko_g, glicko_update_br};
pub use trueskill::{trueskill_update_ffa, TrueSkillUpdate};

pub const DEFAULT_RATING: f64 = 1500.0;
pub const GLICKO_MAX_RD: f64 = 350.0;
pub const GLICKO_MIN_RD: f64 = 30.0;
pub const TRUESKILL_MU: f64 = 25.0;
pub const TRUESKILL_SIGMA: f64 = TRUESKILL_MU / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloState {
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlickoState {
    pub r: f64,
    pub rd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillState {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for EloState {
    fn default() -> Self {
        EloState { r: DEFAULT_RATING }
    }
}

impl Default for GlickoState {
    fn default() -> Self {
        GlickoState {
            r: DEFAULT_RATING,
            rd: GLICKO_MAX_RD,
        }
    }
}

impl Default for TrueSkillState {
    fn default() -> Self {
        TrueSkillState {
            mu: TRUESKILL_MU,
            sigma: TRUESKILL_SIGMA,
        }
    }
}

impl TrueSkillState {
    /// `mu - 3 sigma`.
    pub fn conservative(&self) -> f64 {
        self.mu - 3.0 * self.sigma
    }
}

/// Which opponents each player is scored against in the pairwise
/// Elo and Glicko decompositions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Every other participant; Elo's K is divided by `n - 1`.
    #[default]
    AllPairs,
    /// Only the neighbours in finishing order; Elo's K applies per pair.
    Adjacent,
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_pairs" | "all-pairs" => Ok(Pairing::AllPairs),
            "adjacent" => Ok(Pairing::Adjacent),
            _ => Err(Error::Config(format!("unknown pairing `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatingConfig {
    pub elo_k: f64,
    pub elo_scale: f64,
    pub glicko_q: f64,
    /// TrueSkill performance noise (standard deviation).
    pub ts_beta: f64,
    /// TrueSkill dynamics noise added to sigma before each match.
    pub ts_tau: f64,
    pub ts_draw_prob: f64,
    pub convergence_tol: f64,
    pub max_iterations: usize,
    pub pairing: Pairing,
}

impl Default for RatingConfig {
    fn default() -> Self {
        RatingConfig {
            elo_k: 32.0,
            elo_scale: 400.0,
            glicko_q: std::f64::consts::LN_10 / 400.0,
            ts_beta: TRUESKILL_MU / 6.0,
            ts_tau: TRUESKILL_MU / 300.0,
            ts_draw_prob: 0.10,
            convergence_tol: 1e-4,
            max_iterations: 100,
            pairing: Pairing::AllPairs,
        }
    }
}

impl RatingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("elo_k", self.elo_k),
            ("elo_scale", self.elo_scale),
            ("glicko_q", self.glicko_q),
            ("ts_beta", self.ts_beta),
            ("ts_tau", self.ts_tau),
            ("convergence_tol", self.convergence_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.ts_draw_prob) {
            return Err(Error::Config(format!(
                "ts_draw_prob must lie in [0, 1), got {}",
                self.ts_draw_prob
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingSystem {
    Elo,
    Glicko,
    TrueSkill,
}

impl RatingSystem {
    pub const ALL: [RatingSystem; 3] = [RatingSystem::Elo, RatingSystem::Glicko, RatingSystem::TrueSkill];

    pub fn as_str(self) -> &'static str {
        match self {
            RatingSystem::Elo => "elo",
            RatingSystem::Glicko => "glicko",
            RatingSystem::TrueSkill => "trueskill",
        }
    }
}

impl fmt::Display for RatingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State of a player nobody has rated yet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum RatingState {
    Elo(EloState),
    Glicko(GlickoState),
    #[serde(rename = "trueskill")]
    TrueSkill(TrueSkillState),
}

pub fn default_state(system: RatingSystem) -> RatingState {
    match system {
        RatingSystem::Elo => RatingState::Elo(EloState::default()),
        RatingSystem::Glicko => RatingState::Glicko(GlickoState::default()),
        RatingSystem::TrueSkill => RatingState::TrueSkill(TrueSkillState::default()),
    }
}

pub(crate) fn check_aligned(states: usize, ranks: &[u32]) -> Result<()> {
    if states != ranks.len() {
        return Err(Error::contract(format!("{states} states but {} ranks", ranks.len())));
    }
    if states < 2 {
        return Err(Error::contract(format!("match needs at least 2 players, got {states}")));
    }
    Ok(())
}

/// Pairwise score of `a` against `b` given finishing ranks.
pub(crate) fn pair_score(rank_a: u32, rank_b: u32) -> f64 {
    match rank_a.cmp(&rank_b) {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 0.0,
    }
}

/// Opponent lists per player for the given pairing.
pub(crate) fn opponents(ranks: &[u32], pairing: Pairing) -> Vec<Vec<usize>> {
    let n = ranks.len();
    match pairing {
        Pairing::AllPairs => (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect(),
        Pairing::Adjacent => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| ranks[i]);
            let mut out = vec![Vec::new(); n];
            for w in order.windows(2) {
                out[w[0]].push(w[1]);
                out[w[1]].push(w[0]);
            }
            out
        }
    }
}

/// Per-player states for all three systems. Missing players read as
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct RatingStore {
    pub elo: HashMap<String, EloState>,
    pub glicko: HashMap<String, GlickoState>,
    pub trueskill: HashMap<String, TrueSkillState>,
}

#[derive(Serialize)]
struct SnapshotLine<'a> {
    player_id: &'a str,
    #[serde(flatten)]
    state: RatingState,
}

impl RatingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn elo(&self, id: &str) -> EloState {
        self.elo.get(id).copied().unwrap_or_default()
    }

    pub fn glicko(&self, id: &str) -> GlickoState {
        self.glicko.get(id).copied().unwrap_or_default()
    }

    pub fn trueskill(&self, id: &str) -> TrueSkillState {
        self.trueskill.get(id).copied().unwrap_or_default()
    }

    /// Runs all three updates from the pre-match snapshot and stores the
    /// results. Returns the TrueSkill convergence report.
    pub fn apply_match(&mut self, players: &[String], ranks: &[u32], cfg: &RatingConfig) -> Result<TrueSkillUpdate> {
        let elo_in: Vec<_> = players.iter().map(|p| self.elo(p)).collect();
        let glicko_in: Vec<_> = players.iter().map(|p| self.glicko(p)).collect();
        let ts_in: Vec<_> = players.iter().map(|p| self.trueskill(p)).collect();

        let elo_out = elo_update_br(&elo_in, ranks, cfg)?;
        let glicko_out = glicko_update_br(&glicko_in, ranks, cfg)?;
        let ts = trueskill_update_ffa(&ts_in, ranks, cfg)?;

        for (i, p) in players.iter().enumerate() {
            self.elo.insert(p.clone(), elo_out[i]);
            self.glicko.insert(p.clone(), glicko_out[i]);
            self.trueskill.insert(p.clone(), ts.states[i]);
        }
        Ok(ts)
    }

    /// JSON-lines snapshot: one line per (player, system), sorted by player.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut ids: Vec<&String> = self
            .elo
            .keys()
            .chain(self.glicko.keys())
            .chain(self.trueskill.keys())
            .collect();
        ids.sort();
        ids.dedup();
        for id in ids {
            let states = [
                self.elo.get(id).map(|s| RatingState::Elo(*s)),
                self.glicko.get(id).map(|s| RatingState::Glicko(*s)),
                self.trueskill.get(id).map(|s| RatingState::TrueSkill(*s)),
            ];
            for state in states.into_iter().flatten() {
                serde_json::to_writer(&mut out, &SnapshotLine { player_id: id, state })?;
                out.write_all(b"\n").map_err(|e| Error::io("<rating jsonl>", e))?;
            }
        }
        Ok(())
    }
}

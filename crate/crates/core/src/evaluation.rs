//! Scoring, cohort construction, and the predict-then-update experiment
//! loop.
//!
//! An experiment streams matches in chronological order. For each match the
//! twelve models predict from a frozen pre-match snapshot, the predictions
//! are scored with NDCG against the observed placements, and only then are
//! profiles and ratings updated with the match outcome.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MatchRecord;
use crate::prediction::{predict, ModelId, PredictedOrder, PredictionConfig};
use crate::profile::{FeatureId, ProfileStore};
use crate::rating::{RatingConfig, RatingStore};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    /// `rel = n - rank`
    #[default]
    Linear,
    /// `rel = 2^(n - rank) / 2^(n - 1)`
    Exponential,
}

impl FromStr for GainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GainKind::Linear),
            "exponential" => Ok(GainKind::Exponential),
            _ => Err(Error::Config(format!("unknown gain `{s}`"))),
        }
    }
}

impl GainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GainKind::Linear => "linear",
            GainKind::Exponential => "exponential",
        }
    }

    /// Relevance of finishing at `rank` in a field of `n`. Never negative.
    pub fn relevance(self, rank: u32, n: usize) -> f64 {
        match self {
            GainKind::Linear => (n as f64 - f64::from(rank)).max(0.0),
            GainKind::Exponential => 2f64.powi(1 - rank as i32),
        }
    }
}

fn dcg(relevances: impl Iterator<Item = f64>) -> f64 {
    relevances
        .enumerate()
        .map(|(k, rel)| rel / ((k + 2) as f64).log2())
        .sum()
}

/// NDCG of a predicted ordering against observed `(player, rank)` pairs.
///
/// Returns 1 when every relevance is equal (the ideal DCG is zero, so every
/// ordering is ideal).
pub fn ndcg(ordering: &[String], observed: &[(String, u32)], gain: GainKind) -> Result<f64> {
    ndcg_in_field(ordering, observed, gain, observed.len())
}

/// As [`ndcg`], with relevance computed for a field of `field_size` players.
/// Used when scoring a sub-list of a larger match.
pub fn ndcg_in_field(
    ordering: &[String],
    observed: &[(String, u32)],
    gain: GainKind,
    field_size: usize,
) -> Result<f64> {
    if ordering.len() != observed.len() {
        return Err(Error::contract(format!(
            "predicted {} players, observed {}",
            ordering.len(),
            observed.len()
        )));
    }
    let ranks: HashMap<&str, u32> = observed.iter().map(|(p, r)| (p.as_str(), *r)).collect();
    if ranks.len() != observed.len() {
        return Err(Error::contract("observed list repeats a player"));
    }
    let mut seen = HashSet::with_capacity(ordering.len());
    let mut predicted_rel = Vec::with_capacity(ordering.len());
    for p in ordering {
        let rank = ranks
            .get(p.as_str())
            .ok_or_else(|| Error::contract(format!("predicted player `{p}` was not observed")))?;
        if !seen.insert(p.as_str()) {
            return Err(Error::contract(format!("player `{p}` predicted twice")));
        }
        predicted_rel.push(gain.relevance(*rank, field_size));
    }
    let mut ideal = predicted_rel.clone();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(ideal.into_iter());
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg(predicted_rel.into_iter()) / idcg)
}

impl PredictedOrder {
    pub fn ndcg(&self, observed: &[(String, u32)], gain: GainKind) -> Result<f64> {
        ndcg(&self.ordering, observed, gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohortKind {
    All,
    TopTier,
    Frequent,
}

impl CohortKind {
    pub const ALL: [CohortKind; 3] = [CohortKind::All, CohortKind::TopTier, CohortKind::Frequent];

    pub fn as_str(self) -> &'static str {
        match self {
            CohortKind::All => "all",
            CohortKind::TopTier => "top_tier",
            CohortKind::Frequent => "frequent",
        }
    }
}

impl fmt::Display for CohortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CohortKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CohortKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown setup `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub top_k: usize,
    /// Top-tier players need strictly more games than this.
    pub min_games_top: u64,
    pub window_top: u64,
    /// Frequent players need strictly more games than this.
    pub min_games_freq: u64,
    pub window_freq: u64,
    /// How many players per cohort get feature trajectories.
    pub display_players: usize,
    /// Trajectory length for the `all` setup, which has no window.
    pub trajectory_len_all: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            top_k: 500,
            min_games_top: 10,
            window_top: 10,
            min_games_freq: 100,
            window_freq: 100,
            display_players: 5,
            trajectory_len_all: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlayerCounts {
    pub games: u64,
    pub wins: u64,
}

/// First pass over the data: appearances and wins per player.
pub fn count_players(matches: &[MatchRecord]) -> HashMap<String, PlayerCounts> {
    let mut counts: HashMap<String, PlayerCounts> = HashMap::new();
    for m in matches {
        for p in &m.participants {
            let c = counts.entry(p.player_id.clone()).or_default();
            c.games += 1;
            if p.rank == 1 {
                c.wins += 1;
            }
        }
    }
    counts
}

/// Players with more than `min_games` games, best win rate first; ties go
/// to more games played, then to the lexicographically smaller id.
pub fn rank_by_win_rate(counts: &HashMap<String, PlayerCounts>, min_games: u64) -> Vec<String> {
    let mut eligible: Vec<(&String, &PlayerCounts)> = counts.iter().filter(|(_, c)| c.games > min_games).collect();
    eligible.sort_by(|(ia, a), (ib, b)| {
        // a.wins / a.games vs b.wins / b.games without rounding
        let lhs = u128::from(a.wins) * u128::from(b.games);
        let rhs = u128::from(b.wins) * u128::from(a.games);
        rhs.cmp(&lhs).then(b.games.cmp(&a.games)).then(ia.cmp(ib))
    });
    eligible.into_iter().map(|(id, _)| id.clone()).collect()
}

fn rank_by_games(counts: &HashMap<String, PlayerCounts>, min_games: u64) -> Vec<String> {
    let mut eligible: Vec<(&String, &PlayerCounts)> = counts.iter().filter(|(_, c)| c.games > min_games).collect();
    eligible.sort_by(|(ia, a), (ib, b)| b.games.cmp(&a.games).then(b.wins.cmp(&a.wins)).then(ia.cmp(ib)));
    eligible.into_iter().map(|(id, _)| id.clone()).collect()
}

/// A resolved evaluation population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohort {
    pub kind: CohortKind,
    /// Empty for `All`, which admits every match.
    pub members: HashSet<String>,
    /// Appearances per member that count towards the average.
    pub window: Option<u64>,
    /// Players whose feature development is recorded, in display order.
    pub display: Vec<String>,
    pub trajectory_len: u64,
}

impl Cohort {
    /// Does a match contribute, given each participant's prior game count?
    fn admits<'a>(&self, mut participants: impl Iterator<Item = (&'a str, u64)>) -> bool {
        match (self.kind, self.window) {
            (CohortKind::All, _) => true,
            (_, window) => participants.any(|(p, prior)| self.in_window(p, prior, window)),
        }
    }

    fn in_window(&self, player: &str, prior_games: u64, window: Option<u64>) -> bool {
        self.members.contains(player) && window.is_none_or(|w| prior_games < w)
    }
}

pub fn build_top_tier_cohort(matches: &[MatchRecord], spec: &CohortSpec) -> Cohort {
    let ranked = rank_by_win_rate(&count_players(matches), spec.min_games_top);
    if ranked.len() < spec.top_k {
        warn!(
            "only {} players have more than {} games; top-tier cohort is smaller than {}",
            ranked.len(),
            spec.min_games_top,
            spec.top_k
        );
    }
    let members: Vec<String> = ranked.into_iter().take(spec.top_k).collect();
    Cohort {
        kind: CohortKind::TopTier,
        display: members.iter().take(spec.display_players).cloned().collect(),
        members: members.into_iter().collect(),
        window: Some(spec.window_top),
        trajectory_len: spec.window_top,
    }
}

pub fn build_frequent_cohort(matches: &[MatchRecord], spec: &CohortSpec) -> Cohort {
    let ranked = rank_by_games(&count_players(matches), spec.min_games_freq);
    Cohort {
        kind: CohortKind::Frequent,
        display: ranked.iter().take(spec.display_players).cloned().collect(),
        members: ranked.into_iter().collect(),
        window: Some(spec.window_freq),
        trajectory_len: spec.window_freq,
    }
}

pub fn build_all_cohort(matches: &[MatchRecord], spec: &CohortSpec) -> Cohort {
    let ranked = rank_by_games(&count_players(matches), 0);
    Cohort {
        kind: CohortKind::All,
        display: ranked.into_iter().take(spec.display_players).collect(),
        members: HashSet::new(),
        window: None,
        trajectory_len: spec.trajectory_len_all,
    }
}

pub fn build_cohort(kind: CohortKind, matches: &[MatchRecord], spec: &CohortSpec) -> Cohort {
    match kind {
        CohortKind::All => build_all_cohort(matches, spec),
        CohortKind::TopTier => build_top_tier_cohort(matches, spec),
        CohortKind::Frequent => build_frequent_cohort(matches, spec),
    }
}

/// How a cohort match is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohortScoring {
    /// Score the full match ordering; cohort players only select matches.
    #[default]
    MatchSelection,
    /// Score only the in-window cohort members' sub-ordering. Matches with
    /// fewer than two such members are skipped.
    MembersOnly,
}

impl FromStr for CohortScoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match_selection" | "match" => Ok(CohortScoring::MatchSelection),
            "members_only" | "members" => Ok(CohortScoring::MembersOnly),
            _ => Err(Error::Config(format!("unknown cohort scoring `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub rating: RatingConfig,
    pub prediction: PredictionConfig,
    pub gain: GainKind,
    pub seed: u64,
    pub models: Vec<ModelId>,
    pub scoring: CohortScoring,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rating: RatingConfig::default(),
            prediction: PredictionConfig::default(),
            gain: GainKind::Linear,
            seed: 0,
            models: ModelId::ALL.to_vec(),
            scoring: CohortScoring::MatchSelection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub setup: CohortKind,
    pub match_index: usize,
    pub match_id: String,
    pub model: ModelId,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub player_id: String,
    /// 1-based count of games played, features taken after that game.
    pub game_index: u64,
    pub features: [f64; 9],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupSummary {
    pub setup: CohortKind,
    pub match_count: usize,
    pub models: Vec<ModelId>,
    /// Mean NDCG in percent, `None` when no match contributed.
    pub mean_ndcg: Vec<Option<f64>>,
}

impl SetupSummary {
    /// Means are recomputed from the per-match score log.
    pub fn from_scores(setup: CohortKind, models: &[ModelId], scores: &[MatchScore]) -> Self {
        let mut sums: HashMap<ModelId, (f64, usize)> = HashMap::new();
        let mut matches = HashSet::new();
        for s in scores.iter().filter(|s| s.setup == setup) {
            let e = sums.entry(s.model).or_default();
            e.0 += s.ndcg;
            e.1 += 1;
            matches.insert(s.match_index);
        }
        SetupSummary {
            setup,
            match_count: matches.len(),
            models: models.to_vec(),
            mean_ndcg: models
                .iter()
                .map(|m| sums.get(m).map(|(sum, n)| 100.0 * sum / *n as f64))
                .collect(),
        }
    }

    pub fn mean(&self, model: ModelId) -> Option<f64> {
        self.models
            .iter()
            .position(|m| *m == model)
            .and_then(|i| self.mean_ndcg[i])
    }

    pub fn is_empty(&self) -> bool {
        self.match_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub gain: GainKind,
    pub seed: u64,
    pub summary: SetupSummary,
    pub scores: Vec<MatchScore>,
    pub trajectories: Vec<TrajectoryPoint>,
    pub causality_violations: usize,
    pub trueskill_unconverged: usize,
}

impl ExperimentReport {
    pub fn setup(&self) -> CohortKind {
        self.summary.setup
    }
}

/// Tracks which match last wrote each player's state and fingerprints the
/// snapshot each prediction reads.
#[derive(Debug, Default)]
pub struct CausalityMonitor {
    last_write: HashMap<String, usize>,
    violations: usize,
}

impl CausalityMonitor {
    /// Records that `player`'s state is about to be read for match `t`.
    pub fn check_read(&mut self, player: &str, t: usize) {
        if self.last_write.get(player).is_some_and(|&w| w >= t) {
            self.violations += 1;
        }
    }

    pub fn record_write(&mut self, player: &str, t: usize) {
        self.last_write.insert(player.to_string(), t);
    }

    pub fn flag(&mut self) {
        self.violations += 1;
    }

    pub fn violations(&self) -> usize {
        self.violations
    }
}

fn snapshot_hash(players: &[String], profiles: &ProfileStore, ratings: &RatingStore) -> u64 {
    let mut h = DefaultHasher::new();
    for p in players {
        let pr = profiles.get(p);
        (
            pr.games_played,
            pr.total_kills,
            pr.total_deaths,
            pr.total_damage,
            pr.wins,
        )
            .hash(&mut h);
        for x in [pr.total_survive_s, pr.total_walk_m, pr.total_ride_m, pr.sum_rank_pct] {
            x.to_bits().hash(&mut h);
        }
        let (e, g, t) = (ratings.elo(p), ratings.glicko(p), ratings.trueskill(p));
        for x in [e.r, g.r, g.rd, t.mu, t.sigma] {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Optional sink for every prediction made during a run.
pub type PredictionSink<'a> = &'a mut dyn FnMut(usize, &PredictedOrder) -> Result<()>;

/// Streams `matches` once and evaluates every cohort in a single pass.
/// State evolution does not depend on the cohort, so this equals running
/// each cohort separately from fresh state.
pub fn run_experiments(
    matches: &[MatchRecord],
    cohorts: &[Cohort],
    cfg: &ExperimentConfig,
    mut sink: Option<PredictionSink<'_>>,
) -> Result<Vec<ExperimentReport>> {
    cfg.rating.validate()?;
    let mut profiles = ProfileStore::new();
    let mut ratings = RatingStore::new();
    let mut monitor = CausalityMonitor::default();
    let mut unconverged = 0usize;
    let mut scores: Vec<Vec<MatchScore>> = vec![Vec::new(); cohorts.len()];
    let mut trajectories: Vec<Vec<TrajectoryPoint>> = vec![Vec::new(); cohorts.len()];
    let display: Vec<HashMap<&str, usize>> = cohorts
        .iter()
        .map(|c| c.display.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect())
        .collect();

    for (t, m) in matches.iter().enumerate() {
        let players = m.player_ids();
        let prior: Vec<u64> = players.iter().map(|p| profiles.get(p).games_played).collect();
        let admitted: Vec<bool> = cohorts
            .iter()
            .map(|c| c.admits(players.iter().map(String::as_str).zip(prior.iter().copied())))
            .collect();

        if admitted.iter().any(|&a| a) {
            for p in &players {
                monitor.check_read(p, t);
            }
            let before = snapshot_hash(&players, &profiles, &ratings);
            let predictions: Vec<PredictedOrder> = cfg
                .models
                .iter()
                .map(|&model| {
                    predict(
                        &m.match_id,
                        &players,
                        &profiles,
                        &ratings,
                        model,
                        cfg.seed,
                        &cfg.prediction,
                    )
                })
                .collect();
            if snapshot_hash(&players, &profiles, &ratings) != before {
                monitor.flag();
            }
            let observed = m.observed();

            for (ci, cohort) in cohorts.iter().enumerate() {
                if !admitted[ci] {
                    continue;
                }
                let members_only = cfg.scoring == CohortScoring::MembersOnly && cohort.kind != CohortKind::All;
                let subset: Option<HashSet<&str>> = members_only.then(|| {
                    players
                        .iter()
                        .zip(&prior)
                        .filter(|(p, &g)| cohort.in_window(p, g, cohort.window))
                        .map(|(p, _)| p.as_str())
                        .collect()
                });
                if subset.as_ref().is_some_and(|s| s.len() < 2) {
                    continue;
                }
                for pred in &predictions {
                    let score = match &subset {
                        None => ndcg(&pred.ordering, &observed, cfg.gain)?,
                        Some(keep) => {
                            let ord: Vec<String> = pred
                                .ordering
                                .iter()
                                .filter(|p| keep.contains(p.as_str()))
                                .cloned()
                                .collect();
                            let obs: Vec<(String, u32)> = observed
                                .iter()
                                .filter(|(p, _)| keep.contains(p.as_str()))
                                .cloned()
                                .collect();
                            ndcg_in_field(&ord, &obs, cfg.gain, m.n())?
                        }
                    };
                    scores[ci].push(MatchScore {
                        setup: cohort.kind,
                        match_index: t,
                        match_id: m.match_id.clone(),
                        model: pred.model,
                        ndcg: score,
                    });
                }
            }
            if let Some(sink) = sink.as_mut() {
                for pred in &predictions {
                    sink(t, pred)?;
                }
            }
        }

        // Outcome becomes visible only after every model has predicted.
        profiles.apply_match(&m.participants)?;
        let update = ratings.apply_match(&players, &m.ranks(), &cfg.rating)?;
        if !update.converged {
            unconverged += 1;
        }
        for p in &players {
            monitor.record_write(p, t);
        }

        for (ci, cohort) in cohorts.iter().enumerate() {
            for p in &players {
                if !display[ci].contains_key(p.as_str()) {
                    continue;
                }
                let profile = profiles.get(p);
                if profile.games_played <= cohort.trajectory_len {
                    trajectories[ci].push(TrajectoryPoint {
                        player_id: p.clone(),
                        game_index: profile.games_played,
                        features: profile.features(cfg.prediction.zero_division),
                    });
                }
            }
        }
    }

    if unconverged > 0 {
        warn!("trueskill did not converge in {unconverged} matches");
    }
    let mut reports = Vec::with_capacity(cohorts.len());
    for (ci, cohort) in cohorts.iter().enumerate() {
        let mut traj = std::mem::take(&mut trajectories[ci]);
        traj.sort_by_key(|p| (display[ci][p.player_id.as_str()], p.game_index));
        let scores = std::mem::take(&mut scores[ci]);
        let summary = SetupSummary::from_scores(cohort.kind, &cfg.models, &scores);
        if summary.is_empty() {
            warn!("setup `{}`: no contributing matches", cohort.kind);
        } else {
            info!("setup `{}`: {} contributing matches", cohort.kind, summary.match_count);
        }
        reports.push(ExperimentReport {
            gain: cfg.gain,
            seed: cfg.seed,
            summary,
            scores,
            trajectories: traj,
            causality_violations: monitor.violations(),
            trueskill_unconverged: unconverged,
        });
    }
    Ok(reports)
}

/// Runs one cohort from fresh state.
pub fn run_experiment(matches: &[MatchRecord], cohort: &Cohort, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut reports = run_experiments(matches, std::slice::from_ref(cohort), cfg, None)?;
    Ok(reports.remove(0))
}

/// Paths written by [`export_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFiles {
    pub summary_csv: PathBuf,
    pub summary_json: PathBuf,
    pub scores_jsonl: PathBuf,
    pub trajectories: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Rows are setups, columns are models, cells are mean NDCG percentages
/// with one decimal.
pub fn write_summary_csv<W: Write>(summaries: &[SetupSummary], models: &[ModelId], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["setup".to_string()];
    header.extend(models.iter().map(|m| m.to_string()));
    w.write_record(&header)?;
    for s in summaries {
        let mut row = vec![s.setup.to_string()];
        row.extend(
            models
                .iter()
                .map(|m| s.mean(*m).map(|v| format!("{v:.1}")).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    gain: Option<&'a str>,
    seed: Option<u64>,
    setups: Vec<SummaryJsonSetup<'a>>,
}

#[derive(Serialize)]
struct SummaryJsonSetup<'a> {
    setup: CohortKind,
    match_count: usize,
    causality_violations: Option<usize>,
    mean_ndcg: Vec<(&'a str, Option<f64>)>,
}

pub fn write_summary_json<W: Write>(
    summaries: &[SetupSummary],
    gain: Option<GainKind>,
    seed: Option<u64>,
    violations: &[Option<usize>],
    out: W,
) -> Result<()> {
    let doc = SummaryJson {
        gain: gain.map(GainKind::as_str),
        seed,
        setups: summaries
            .iter()
            .zip(violations)
            .map(|(s, v)| SummaryJsonSetup {
                setup: s.setup,
                match_count: s.match_count,
                causality_violations: *v,
                mean_ndcg: s
                    .models
                    .iter()
                    .map(|m| m.as_str())
                    .zip(s.mean_ndcg.iter().copied())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

pub fn write_scores_jsonl<'a, W: Write>(scores: impl IntoIterator<Item = &'a MatchScore>, mut out: W) -> Result<()> {
    for s in scores {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n").map_err(|e| Error::io("<scores jsonl>", e))?;
    }
    out.flush().map_err(|e| Error::io("<scores jsonl>", e))?;
    Ok(())
}

pub fn read_scores_jsonl<R: BufRead>(input: R) -> Result<Vec<MatchScore>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<scores jsonl>", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Columns: `player_id, game_index, B1_GAMES .. B9_RANK_RATIO`.
pub fn write_trajectories_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["player_id".to_string(), "game_index".to_string()];
    header.extend(FeatureId::ALL.iter().map(|f| f.to_string()));
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![p.player_id.clone(), p.game_index.to_string()];
        row.extend(p.features.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
    Ok(())
}

/// Writes `summary.csv`, `summary.json`, `scores.jsonl` and one
/// `trajectories_<setup>.csv` per report into `dir`.
pub fn export_report(reports: &[ExperimentReport], dir: &Path) -> Result<ExportedFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let models: Vec<ModelId> = reports
        .first()
        .map(|r| r.summary.models.clone())
        .unwrap_or_else(|| ModelId::ALL.to_vec());
    let summaries: Vec<SetupSummary> = reports.iter().map(|r| r.summary.clone()).collect();
    let gain = reports.first().map_or(GainKind::default(), |r| r.gain);
    let seed = reports.first().map(|r| r.seed);

    let files = ExportedFiles {
        summary_csv: dir.join("summary.csv"),
        summary_json: dir.join("summary.json"),
        scores_jsonl: dir.join("scores.jsonl"),
        trajectories: reports
            .iter()
            .map(|r| dir.join(format!("trajectories_{}.csv", r.setup())))
            .collect(),
    };
    write_summary_csv(&summaries, &models, create(&files.summary_csv)?)?;
    let violations: Vec<Option<usize>> = reports.iter().map(|r| Some(r.causality_violations)).collect();
    let mut js = create(&files.summary_json)?;
    write_summary_json(&summaries, Some(gain), seed, &violations, &mut js)?;
    js.flush().map_err(|e| Error::io(&files.summary_json, e))?;
    write_scores_jsonl(reports.iter().flat_map(|r| &r.scores), create(&files.scores_jsonl)?)?;
    for (r, path) in reports.iter().zip(&files.trajectories) {
        write_trajectories_csv(&r.trajectories, create(path)?)?;
    }
    Ok(files)
}

/// Renders summaries as an aligned text table.
pub fn format_table(summaries: &[SetupSummary], models: &[ModelId]) -> String {
    let mut out = format!("{:<10} {:>7}", "setup", "matches");
    for m in models {
        out.push_str(&format!(" {:>13}", m.as_str()));
    }
    out.push('\n');
    for s in summaries {
        out.push_str(&format!("{:<10} {:>7}", s.setup.as_str(), s.match_count));
        for m in models {
            match s.mean(*m) {
                Some(v) => out.push_str(&format!(" {v:>13.1}")),
                None => out.push_str(&format!(" {:>13}", "-")),
            }
        }
        out.push('\n');
    }
    out
}

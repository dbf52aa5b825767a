//! Telemetry ingestion: delimiter-separated rows in, chronologically ordered
//! solo matches out.
//!
//! The pipeline is `parse_rows` → `filter_solo` → `assemble_matches` →
//! `sort_chronological`. Each stage is usable on its own; [`load_matches`]
//! runs the whole chain over a set of files and collects counters.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowError};

/// One line of the aggregate telemetry file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub date: DateTime<Utc>,
    pub game_size: u32,
    pub match_id: String,
    pub match_mode: String,
    pub party_size: u32,
    pub player_dist_ride: f64,
    pub player_dist_walk: f64,
    pub player_dmg: u64,
    pub player_kills: u32,
    pub player_name: String,
    pub player_survive_time: f64,
    /// Range against `game_size` is checked during assembly, not parsing.
    pub team_placement: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantStats {
    pub player_id: String,
    /// Finishing position, 1 = winner.
    pub rank: u32,
    pub kills: u32,
    pub damage: u64,
    pub walk_m: f64,
    pub ride_m: f64,
    pub survive_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub timestamp: DateTime<Utc>,
    pub game_size: u32,
    /// Sorted by rank; equal ranks keep input order.
    pub participants: Vec<ParticipantStats>,
}

impl MatchRecord {
    pub fn n(&self) -> usize {
        self.participants.len()
    }

    pub fn player_ids(&self) -> Vec<String> {
        self.participants.iter().map(|p| p.player_id.clone()).collect()
    }

    pub fn ranks(&self) -> Vec<u32> {
        self.participants.iter().map(|p| p.rank).collect()
    }

    /// Observed `(player_id, rank)` pairs, the ground truth for scoring.
    pub fn observed(&self) -> Vec<(String, u32)> {
        self.participants
            .iter()
            .map(|p| (p.player_id.clone(), p.rank))
            .collect()
    }
}

/// Maps logical field names to header names in the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub date: String,
    pub game_size: String,
    pub match_id: String,
    pub match_mode: String,
    pub party_size: String,
    pub player_dist_ride: String,
    pub player_dist_walk: String,
    pub player_dmg: String,
    pub player_kills: String,
    pub player_name: String,
    pub player_survive_time: String,
    pub team_placement: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            date: "date".into(),
            game_size: "game_size".into(),
            match_id: "match_id".into(),
            match_mode: "match_mode".into(),
            party_size: "party_size".into(),
            player_dist_ride: "player_dist_ride".into(),
            player_dist_walk: "player_dist_walk".into(),
            player_dmg: "player_dmg".into(),
            player_kills: "player_kills".into(),
            player_name: "player_name".into(),
            player_survive_time: "player_survive_time".into(),
            team_placement: "team_placement".into(),
        }
    }
}

/// Header order written by the synthetic generator and expected by default.
pub const DEFAULT_HEADER: [&str; 13] = [
    "date",
    "game_size",
    "match_id",
    "match_mode",
    "party_size",
    "player_dist_ride",
    "player_dist_walk",
    "player_dmg",
    "player_kills",
    "player_name",
    "player_survive_time",
    "team_id",
    "team_placement",
];

#[derive(Debug, Clone, Copy)]
struct ColumnIndex {
    date: usize,
    game_size: usize,
    match_id: usize,
    match_mode: usize,
    party_size: usize,
    ride: usize,
    walk: usize,
    dmg: usize,
    kills: usize,
    name: usize,
    survive: usize,
    placement: usize,
}

impl ColumnMap {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<ColumnIndex> {
        let find = |logical: &str, name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema(format!("column `{name}` (for field `{logical}`) not found in header")))
        };
        Ok(ColumnIndex {
            date: find("date", &self.date)?,
            game_size: find("game_size", &self.game_size)?,
            match_id: find("match_id", &self.match_id)?,
            match_mode: find("match_mode", &self.match_mode)?,
            party_size: find("party_size", &self.party_size)?,
            ride: find("player_dist_ride", &self.player_dist_ride)?,
            walk: find("player_dist_walk", &self.player_dist_walk)?,
            dmg: find("player_dmg", &self.player_dmg)?,
            kills: find("player_kills", &self.player_kills)?,
            name: find("player_name", &self.player_name)?,
            survive: find("player_survive_time", &self.player_survive_time)?,
            placement: find("team_placement", &self.team_placement)?,
        })
    }
}

/// Streaming row parser. Created by [`parse_rows`].
pub struct RowReader<R: Read> {
    reader: csv::Reader<R>,
    index: ColumnIndex,
    record: csv::StringRecord,
}

/// Opens a delimiter-separated stream with a header row.
///
/// A header that lacks any mapped column is a fatal schema error. Bad data
/// lines surface later as `Err(RowError)` items and do not end the stream.
pub fn parse_rows<R: Read>(input: R, columns: &ColumnMap, delimiter: u8) -> Result<RowReader<R>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let index = columns.resolve(&headers)?;
    Ok(RowReader {
        reader,
        index,
        record: csv::StringRecord::new(),
    })
}

impl<R: Read> Iterator for RowReader<R> {
    type Item = std::result::Result<RawRow, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.reader.read_record(&mut self.record) {
            Ok(false) => None,
            Ok(true) => {
                let line = self.record.position().map_or(0, |p| p.line());
                Some(row_from_record(&self.record, &self.index).map_err(|message| RowError { line, message }))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    // The underlying reader is gone; nothing further can be read.
                    warn!("stopping parse at line {line}: {e}");
                    return None;
                }
                Some(Err(RowError {
                    line,
                    message: e.to_string(),
                }))
            }
        }
    }
}

fn row_from_record(rec: &csv::StringRecord, ix: &ColumnIndex) -> std::result::Result<RawRow, String> {
    let cell = |i: usize, name: &str| -> std::result::Result<&str, String> {
        rec.get(i)
            .map(str::trim)
            .ok_or_else(|| format!("missing cell for `{name}`"))
    };
    let date_s = cell(ix.date, "date")?;
    let date = parse_timestamp(date_s).ok_or_else(|| format!("unparseable date `{date_s}`"))?;
    Ok(RawRow {
        date,
        game_size: parse_count(cell(ix.game_size, "game_size")?, "game_size")?,
        match_id: cell(ix.match_id, "match_id")?.to_string(),
        match_mode: cell(ix.match_mode, "match_mode")?.to_string(),
        party_size: parse_count(cell(ix.party_size, "party_size")?, "party_size")?,
        player_dist_ride: parse_measure(cell(ix.ride, "player_dist_ride")?, "player_dist_ride")?,
        player_dist_walk: parse_measure(cell(ix.walk, "player_dist_walk")?, "player_dist_walk")?,
        player_dmg: parse_count(cell(ix.dmg, "player_dmg")?, "player_dmg")?,
        player_kills: parse_count(cell(ix.kills, "player_kills")?, "player_kills")?,
        player_name: cell(ix.name, "player_name")?.to_string(),
        player_survive_time: parse_measure(cell(ix.survive, "player_survive_time")?, "player_survive_time")?,
        team_placement: parse_int(cell(ix.placement, "team_placement")?, "team_placement")?,
    })
}

/// Integer cell; integral floats such as `12.0` are accepted.
fn parse_int(s: &str, name: &str) -> std::result::Result<i64, String> {
    if let Ok(v) = s.parse::<i64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(format!("`{name}`: expected integer, got `{s}`")),
    }
}

fn parse_count<T: TryFrom<i64>>(s: &str, name: &str) -> std::result::Result<T, String> {
    let v = parse_int(s, name)?;
    if v < 0 {
        return Err(format!("`{name}`: negative value {v}"));
    }
    T::try_from(v).map_err(|_| format!("`{name}`: value {v} out of range"))
}

fn parse_measure(s: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{name}`: expected number, got `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("`{name}`: non-finite value `{s}`"));
    }
    if v < 0.0 {
        return Err(format!("`{name}`: negative value {v}"));
    }
    Ok(v)
}

/// Accepts RFC 3339, the dataset's `2017-11-26T20:59:40+0000`, a space
/// separated naive datetime (read as UTC) and a bare date.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%z") {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc())
}

/// Decides which rows count as solo play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SoloFilter {
    /// Exact `match_mode` values to accept. When unset, any mode that does
    /// not name a team format (`duo`, `squad`) is accepted, which covers the
    /// dataset's perspective-only values `tpp`/`fpp`.
    pub modes: Option<Vec<String>>,
}

impl SoloFilter {
    pub fn is_solo(&self, row: &RawRow) -> bool {
        if row.party_size != 1 {
            return false;
        }
        let mode = row.match_mode.to_ascii_lowercase();
        match &self.modes {
            Some(allowed) => allowed.iter().any(|m| m.eq_ignore_ascii_case(&mode)),
            None => !(mode.contains("duo") || mode.contains("squad")),
        }
    }
}

/// Iterator adapter that drops non-solo rows and counts them.
pub struct SoloRows<I> {
    inner: I,
    filter: SoloFilter,
    dropped: usize,
}

impl<I> SoloRows<I> {
    pub fn dropped(&self) -> usize {
        self.dropped
    }
}

impl<I: Iterator<Item = RawRow>> Iterator for SoloRows<I> {
    type Item = RawRow;

    fn next(&mut self) -> Option<RawRow> {
        for row in self.inner.by_ref() {
            if self.filter.is_solo(&row) {
                return Some(row);
            }
            self.dropped += 1;
        }
        None
    }
}

pub fn filter_solo<I: IntoIterator<Item = RawRow>>(rows: I, filter: SoloFilter) -> SoloRows<I::IntoIter> {
    SoloRows {
        inner: rows.into_iter(),
        filter,
        dropped: 0,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleStats {
    pub rows_in: usize,
    pub duplicate_rows: usize,
    pub rank_out_of_range: usize,
    pub small_matches_discarded: usize,
    /// Matches whose placements exceeded the number of present participants
    /// and were compacted to competition ranks.
    pub reranked_matches: usize,
    /// Matches with more participants than their declared game size.
    pub game_size_raised: usize,
}

/// Groups solo rows into matches.
///
/// Duplicate `(match_id, player)` rows keep the first occurrence. Rows whose
/// placement lies outside `[1, game_size]` are dropped. Groups with fewer than
/// two participants are discarded. When participants are missing so that a
/// placement exceeds the participant count, ranks are compacted to standard
/// competition ranks (order and ties preserved) so every rank lies in `[1, n]`.
pub fn assemble_matches<I: IntoIterator<Item = RawRow>>(rows: I) -> (Vec<MatchRecord>, AssembleStats) {
    struct Group {
        timestamp: DateTime<Utc>,
        game_size: u32,
        seen: HashSet<String>,
        participants: Vec<ParticipantStats>,
    }

    let mut stats = AssembleStats::default();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Group> = HashMap::new();

    for row in rows {
        stats.rows_in += 1;
        let group = groups.entry(row.match_id.clone()).or_insert_with(|| {
            order.push(row.match_id.clone());
            Group {
                timestamp: row.date,
                game_size: row.game_size,
                seen: HashSet::new(),
                participants: Vec::new(),
            }
        });
        if group.seen.contains(&row.player_name) {
            stats.duplicate_rows += 1;
            warn!(
                "duplicate row for player `{}` in match `{}`; keeping the first",
                row.player_name, row.match_id
            );
            continue;
        }
        if row.team_placement < 1 || row.team_placement > i64::from(group.game_size) {
            stats.rank_out_of_range += 1;
            warn!(
                "placement {} outside [1, {}] for player `{}` in match `{}`; dropped",
                row.team_placement, group.game_size, row.player_name, row.match_id
            );
            continue;
        }
        group.seen.insert(row.player_name.clone());
        group.participants.push(ParticipantStats {
            player_id: row.player_name,
            rank: row.team_placement as u32,
            kills: row.player_kills,
            damage: row.player_dmg,
            walk_m: row.player_dist_walk,
            ride_m: row.player_dist_ride,
            survive_s: row.player_survive_time,
        });
    }

    let mut matches = Vec::with_capacity(order.len());
    for match_id in order {
        let Some(mut group) = groups.remove(&match_id) else {
            continue;
        };
        let n = group.participants.len();
        if n < 2 {
            stats.small_matches_discarded += 1;
            continue;
        }
        group.participants.sort_by_key(|p| p.rank);
        if group.participants.last().map_or(0, |p| p.rank as usize) > n {
            stats.reranked_matches += 1;
            compact_ranks(&mut group.participants);
        }
        let mut game_size = group.game_size;
        if n > game_size as usize {
            stats.game_size_raised += 1;
            game_size = n as u32;
        }
        matches.push(MatchRecord {
            match_id,
            timestamp: group.timestamp,
            game_size,
            participants: group.participants,
        });
    }
    (matches, stats)
}

/// Rewrites rank-sorted participants to competition ranks ("1224").
fn compact_ranks(sorted: &mut [ParticipantStats]) {
    let mut prev_raw = 0;
    let mut current = 0;
    for (i, p) in sorted.iter_mut().enumerate() {
        if p.rank != prev_raw {
            current = i as u32 + 1;
            prev_raw = p.rank;
        }
        p.rank = current;
    }
}

/// Stable ascending sort by `(timestamp, match_id)`.
pub fn sort_chronological(mut matches: Vec<MatchRecord>) -> Vec<MatchRecord> {
    matches.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.match_id.cmp(&b.match_id)));
    matches
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub columns: ColumnMap,
    /// Single-byte field delimiter.
    pub delimiter: char,
    pub solo: SoloFilter,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            columns: ColumnMap::default(),
            delimiter: ',',
            solo: SoloFilter::default(),
        }
    }
}

impl IngestOptions {
    pub fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {:?} is not a single ASCII byte", self.delimiter)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub files: usize,
    pub rows_parsed: usize,
    pub row_errors: usize,
    pub non_solo_dropped: usize,
    pub assemble: AssembleStats,
    pub matches: usize,
    pub unique_players: usize,
    pub participants: usize,
}

/// Everything `load_matches` produced: ordered matches, counters, and the
/// first few row errors for display.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub matches: Vec<MatchRecord>,
    pub stats: IngestStats,
    pub sample_errors: Vec<RowError>,
}

const SAMPLE_ERRORS: usize = 20;

/// Runs the full ingest chain over several readers (one per file).
pub fn load_from_readers<R: Read>(
    inputs: impl IntoIterator<Item = (PathBuf, R)>,
    opts: &IngestOptions,
) -> Result<Ingested> {
    let delimiter = opts.delimiter_byte()?;
    let mut stats = IngestStats::default();
    let mut sample_errors = Vec::new();
    let mut solo_rows = Vec::new();

    for (path, input) in inputs {
        stats.files += 1;
        let reader = parse_rows(input, &opts.columns, delimiter).map_err(|e| match e {
            Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let mut errors = 0usize;
        let parsed = reader.filter_map(|r| match r {
            Ok(row) => Some(row),
            Err(e) => {
                errors += 1;
                if sample_errors.len() < SAMPLE_ERRORS {
                    warn!("{}: {e}", path.display());
                    sample_errors.push(e);
                }
                None
            }
        });
        let mut rows_parsed = 0usize;
        let counted = parsed.inspect(|_| rows_parsed += 1);
        let mut solo = filter_solo(counted, opts.solo.clone());
        solo_rows.extend(solo.by_ref());
        stats.non_solo_dropped += solo.dropped();
        drop(solo);
        stats.rows_parsed += rows_parsed;
        stats.row_errors += errors;
    }

    let (matches, assemble) = assemble_matches(solo_rows);
    let matches = sort_chronological(matches);
    stats.assemble = assemble;
    stats.matches = matches.len();
    stats.participants = matches.iter().map(MatchRecord::n).sum();
    stats.unique_players = matches
        .iter()
        .flat_map(|m| m.participants.iter().map(|p| p.player_id.as_str()))
        .collect::<HashSet<_>>()
        .len();
    info!(
        "ingested {} matches, {} unique players ({} rows, {} errors, {} non-solo)",
        stats.matches, stats.unique_players, stats.rows_parsed, stats.row_errors, stats.non_solo_dropped
    );
    Ok(Ingested {
        matches,
        stats,
        sample_errors,
    })
}

pub fn load_matches<P: AsRef<Path>>(paths: &[P], opts: &IngestOptions) -> Result<Ingested> {
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        let path = p.as_ref().to_path_buf();
        let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
        files.push((path, std::io::BufReader::new(f)));
    }
    load_from_readers(files, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "date,game_size,match_id,match_mode,party_size,player_dist_ride,player_dist_walk,player_dmg,player_kills,player_name,player_survive_time,team_id,team_placement";

    fn line(match_id: &str, name: &str, placement: i64, party: u32, mode: &str) -> String {
        format!("2017-11-26T20:59:40+0000,4,{match_id},{mode},{party},10.5,800.0,120,1,{name},600.2,7,{placement}")
    }

    fn rows(text: &str) -> Vec<std::result::Result<RawRow, RowError>> {
        parse_rows(text.as_bytes(), &ColumnMap::default(), b',')
            .unwrap()
            .collect()
    }

    fn raw(match_id: &str, name: &str, placement: i64) -> RawRow {
        RawRow {
            date: parse_timestamp("2017-11-26T20:59:40+0000").unwrap(),
            game_size: 4,
            match_id: match_id.into(),
            match_mode: "tpp".into(),
            party_size: 1,
            player_dist_ride: 0.0,
            player_dist_walk: 100.0,
            player_dmg: 50,
            player_kills: 0,
            player_name: name.into(),
            player_survive_time: 300.0,
            team_placement: placement,
        }
    }

    #[test]
    fn single_valid_line() {
        let text = format!("{HEADER}\n{}\n", line("m1", "alice", 2, 1, "tpp"));
        let out = rows(&text);
        assert_eq!(out.len(), 1);
        let row = out[0].as_ref().unwrap();
        assert_eq!(row.player_name, "alice");
        assert_eq!(row.team_placement, 2);
        assert_eq!(row.player_dmg, 120);
        assert_eq!(row.player_dist_walk, 800.0);
        assert_eq!(row.date.timestamp(), 1511729980);
    }

    #[test]
    fn negative_kills_is_row_error_and_stream_continues() {
        let bad = "2017-11-26T20:59:40+0000,4,m1,tpp,1,0,0,0,-2,bob,10,1,1";
        let text = format!("{HEADER}\n{bad}\n{}\n", line("m1", "carol", 1, 1, "tpp"));
        let out = rows(&text);
        assert_eq!(out.len(), 2);
        let err = out[0].as_ref().unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("player_kills"));
        assert!(out[1].is_ok());
    }

    #[test]
    fn three_valid_one_malformed() {
        let text = format!(
            "{HEADER}\n{}\n{}\n2017-11-26T20:59:40+0000,4,m1,tpp,1,abc,0,0,0,x,10,1,1\n{}\n",
            line("m1", "a", 1, 1, "tpp"),
            line("m1", "b", 2, 1, "tpp"),
            line("m1", "c", 3, 1, "tpp"),
        );
        let out = rows(&text);
        assert_eq!(out.iter().filter(|r| r.is_ok()).count(), 3);
        let errs: Vec<_> = out.iter().filter_map(|r| r.as_ref().err()).collect();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 4);
    }

    #[test]
    fn missing_column_is_fatal() {
        let text = "date,match_id\n2017-01-01,m\n";
        let err = parse_rows(text.as_bytes(), &ColumnMap::default(), b',').err().unwrap();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn remapped_columns_and_delimiter() {
        let map = ColumnMap {
            player_name: "name".into(),
            ..Default::default()
        };
        let text = "date;game_size;match_id;match_mode;party_size;player_dist_ride;player_dist_walk;player_dmg;player_kills;name;player_survive_time;team_placement\n\
                    2018-01-02;2;m;solo;1;0;0;0;0;zed;1;1\n";
        let out: Vec<_> = parse_rows(text.as_bytes(), &map, b';').unwrap().collect();
        let row = out[0].as_ref().unwrap();
        assert_eq!(row.player_name, "zed");
        assert_eq!(row.date, parse_timestamp("2018-01-02T00:00:00Z").unwrap());
    }

    #[test]
    fn solo_filter_rules() {
        let f = SoloFilter::default();
        let mut r = raw("m", "p", 1);
        r.match_mode = "solo".into();
        assert!(f.is_solo(&r));
        r.party_size = 4;
        assert!(!f.is_solo(&r));
        r.party_size = 1;
        r.match_mode = "squad-fpp".into();
        assert!(!f.is_solo(&r));
        let strict = SoloFilter {
            modes: Some(vec!["solo".into()]),
        };
        r.match_mode = "tpp".into();
        assert!(!strict.is_solo(&r));
    }

    #[test]
    fn solo_filter_counts_drops() {
        let mut input = Vec::new();
        for i in 0..10 {
            let mut r = raw("m", &format!("p{i}"), 1);
            if i >= 6 {
                r.party_size = if i % 2 == 0 { 2 } else { 4 };
            }
            input.push(r);
        }
        let mut it = filter_solo(input, SoloFilter::default());
        let kept: Vec<_> = it.by_ref().collect();
        assert_eq!(kept.len(), 6);
        assert_eq!(it.dropped(), 4);
    }

    #[test]
    fn assemble_groups_and_discards() {
        let input = vec![
            raw("a", "x", 1),
            raw("a", "y", 2),
            raw("a", "z", 3),
            raw("lonely", "q", 1),
        ];
        let (matches, stats) = assemble_matches(input);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].n(), 3);
        assert_eq!(stats.small_matches_discarded, 1);
    }

    #[test]
    fn duplicate_player_counted_once() {
        let mut dup = raw("a", "x", 3);
        dup.player_kills = 9;
        let input = vec![raw("a", "x", 1), raw("a", "y", 2), dup];
        let (matches, stats) = assemble_matches(input);
        assert_eq!(matches[0].n(), 2);
        assert_eq!(stats.duplicate_rows, 1);
        let x = matches[0].participants.iter().find(|p| p.player_id == "x").unwrap();
        assert_eq!(x.rank, 1);
        assert_eq!(x.kills, 0);
    }

    #[test]
    fn out_of_range_placement_dropped() {
        let input = vec![raw("a", "x", 1), raw("a", "y", 2), raw("a", "w", 9), raw("a", "v", 0)];
        let (matches, stats) = assemble_matches(input);
        assert_eq!(matches[0].n(), 2);
        assert_eq!(stats.rank_out_of_range, 2);
    }

    #[test]
    fn gaps_compacted_to_competition_ranks() {
        let input = vec![raw("a", "x", 4), raw("a", "y", 1), raw("a", "z", 4)];
        let (matches, stats) = assemble_matches(input);
        assert_eq!(stats.reranked_matches, 1);
        let ranks: Vec<_> = matches[0]
            .participants
            .iter()
            .map(|p| (p.player_id.as_str(), p.rank))
            .collect();
        assert_eq!(ranks, vec![("y", 1), ("x", 2), ("z", 2)]);
    }

    #[test]
    fn placement_ties_kept() {
        let input = vec![raw("a", "x", 1), raw("a", "y", 2), raw("a", "z", 2)];
        let (matches, stats) = assemble_matches(input);
        assert_eq!(stats.reranked_matches, 0);
        assert_eq!(matches[0].ranks(), vec![1, 2, 2]);
    }

    fn record(id: &str, secs: i64) -> MatchRecord {
        MatchRecord {
            match_id: id.into(),
            timestamp: DateTime::from_timestamp(secs, 0).unwrap(),
            game_size: 2,
            participants: vec![],
        }
    }

    #[test]
    fn sort_identity_reverse_and_ties() {
        let sorted: Vec<_> = (0..5).map(|i| record(&format!("m{i}"), i * 10)).collect();
        assert_eq!(sort_chronological(sorted.clone()), sorted);
        let mut rev = sorted.clone();
        rev.reverse();
        assert_eq!(sort_chronological(rev), sorted);
        let tied = vec![record("b", 5), record("a", 5)];
        let ids: Vec<_> = sort_chronological(tied).into_iter().map(|m| m.match_id).collect();
        assert_eq!(ids, vec!["a", "b"]);
    }

    #[test]
    fn timestamp_formats() {
        let a = parse_timestamp("2017-11-26T20:59:40+0000").unwrap();
        let b = parse_timestamp("2017-11-26T20:59:40Z").unwrap();
        let c = parse_timestamp("2017-11-26 20:59:40").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(parse_timestamp("yesterday").is_none());
    }

    prop_compose! {
        fn arb_rows()(specs in prop::collection::vec((0u8..6, 0u8..8, 0i64..7, any::<bool>()), 0..60)) -> Vec<RawRow> {
            specs.into_iter().map(|(m, p, place, team)| {
                let mut r = raw(&format!("m{m}"), &format!("p{p}"), place);
                if team { r.party_size = 2; }
                r
            }).collect()
        }
    }

    proptest! {
        #[test]
        fn emitted_matches_satisfy_invariants(input in arb_rows()) {
            let solo: Vec<_> = filter_solo(input, SoloFilter::default()).collect();
            let (matches, _) = assemble_matches(solo);
            for m in &matches {
                prop_assert!(m.n() >= 2);
                prop_assert!(m.n() <= m.game_size as usize);
                let ids: HashSet<_> = m.participants.iter().map(|p| &p.player_id).collect();
                prop_assert_eq!(ids.len(), m.n());
                for p in &m.participants {
                    prop_assert!(p.rank >= 1 && p.rank as usize <= m.n());
                }
            }
        }

        #[test]
        fn assembly_preserves_valid_unique_rows(input in arb_rows()) {
            let solo: Vec<_> = filter_solo(input, SoloFilter::default()).collect();
            // Expected: first occurrence per (match, player), valid placement.
            let mut seen = HashSet::new();
            let mut per_match: HashMap<String, usize> = HashMap::new();
            for r in &solo {
                if seen.contains(&(r.match_id.clone(), r.player_name.clone())) { continue; }
                if r.team_placement < 1 || r.team_placement > i64::from(r.game_size) { continue; }
                seen.insert((r.match_id.clone(), r.player_name.clone()));
                *per_match.entry(r.match_id.clone()).or_default() += 1;
            }
            let expected: usize = per_match.values().filter(|&&c| c >= 2).sum();
            let (matches, _) = assemble_matches(solo);
            let flattened: usize = matches.iter().map(MatchRecord::n).sum();
            prop_assert_eq!(flattened, expected);
        }

        #[test]
        fn sort_is_permutation(stamps in prop::collection::vec(0i64..20, 0..30)) {
            let input: Vec<_> = stamps.iter().enumerate().map(|(i, &s)| record(&format!("id{}", i % 7), s)).collect();
            let mut before: Vec<_> = input.iter().map(|m| m.match_id.clone()).collect();
            let out = sort_chronological(input);
            let mut after: Vec<_> = out.iter().map(|m| m.match_id.clone()).collect();
            for w in out.windows(2) {
                prop_assert!((w[0].timestamp, &w[0].match_id) <= (w[1].timestamp, &w[1].match_id));
            }
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
        }
    }
}

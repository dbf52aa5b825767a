//! Command-line front end: `ingest`, `run`, `simulate` and `report`.
//!
//! Every subcommand reads an optional TOML file through `--config`; flags
//! given on the command line override values from the file.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O
//! error, 3 internal contract violation.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    build_cohort, export_report, format_table, read_scores_jsonl, run_experiments, write_summary_csv,
    write_summary_json, CohortKind, CohortScoring, CohortSpec, ExperimentConfig, GainKind, SetupSummary,
};
use crate::ingest::{load_matches, IngestOptions, MatchRecord};
use crate::prediction::{ModelId, PredictedOrder, PredictionConfig, TrueSkillKey};
use crate::profile::{ProfileStore, ZeroDivision};
use crate::rating::{Pairing, RatingConfig, RatingStore};
use crate::synth::{generate, write_csv, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::Schema(_) | Error::Io { .. } | Error::Csv(_) | Error::Json(_) => EXIT_DATA,
        Error::Contract(_) => EXIT_CONTRACT,
    }
}

fn category(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "usage",
        Error::Schema(_) => "schema",
        Error::Io { .. } => "io",
        Error::Csv(_) | Error::Json(_) => "data",
        Error::Contract(_) => "contract",
    }
}

/// Which evaluation populations to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupSelection {
    All,
    TopTier,
    Frequent,
    #[default]
    Every,
}

impl SetupSelection {
    pub fn kinds(self) -> Vec<CohortKind> {
        match self {
            SetupSelection::All => vec![CohortKind::All],
            SetupSelection::TopTier => vec![CohortKind::TopTier],
            SetupSelection::Frequent => vec![CohortKind::Frequent],
            SetupSelection::Every => CohortKind::ALL.to_vec(),
        }
    }
}

impl FromStr for SetupSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SetupSelection::All),
            "top_tier" | "top-tier" => Ok(SetupSelection::TopTier),
            "frequent" => Ok(SetupSelection::Frequent),
            "every" => Ok(SetupSelection::Every),
            _ => Err(Error::Config(format!(
                "unknown setup `{s}` (all | top_tier | frequent | every)"
            ))),
        }
    }
}

/// Everything `run` needs. Loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub setup: SetupSelection,
    pub models: Vec<ModelId>,
    pub gain: GainKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scoring: CohortScoring,
    pub rating: RatingConfig,
    pub prediction: PredictionConfig,
    pub cohort: CohortSpec,
    pub ingest: IngestOptions,
    /// Also write every prediction to `predictions.jsonl`.
    pub audit: bool,
    /// Also write final `profiles.jsonl` and `ratings.jsonl`.
    pub checkpoint: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            setup: SetupSelection::Every,
            models: ModelId::ALL.to_vec(),
            gain: GainKind::Linear,
            seed: 0,
            output_dir: PathBuf::from("out"),
            scoring: CohortScoring::MatchSelection,
            rating: RatingConfig::default(),
            prediction: PredictionConfig::default(),
            cohort: CohortSpec::default(),
            ingest: IngestOptions::default(),
            audit: false,
            checkpoint: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Config("no input files given".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].contains(m) {
                return Err(Error::Config(format!("model {m} selected twice")));
            }
        }
        self.ingest.delimiter_byte()?;
        self.rating.validate()
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            rating: self.rating.clone(),
            prediction: self.prediction,
            gain: self.gain,
            seed: self.seed,
            models: self.models.clone(),
            scoring: self.scoring,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "royale-rank",
    version,
    about = "Rank prediction benchmark for solo battle-royale matches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate input files, then print ingest statistics.
    Ingest(IngestArgs),
    /// Stream matches through every model and write the NDCG report.
    Run(RunArgs),
    /// Generate a synthetic dataset in the ingest CSV schema.
    Simulate(SimulateArgs),
    /// Re-render the summary table from a `scores.jsonl` log.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct IngestFlags {
    /// Field delimiter [default: ,]
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Accept exactly these match modes as solo (comma separated) [default: party_size 1, mode not duo/squad]
    #[arg(long, value_delimiter = ',')]
    pub solo_modes: Option<Vec<String>>,
}

impl IngestFlags {
    fn apply(&self, opts: &mut IngestOptions) {
        if let Some(d) = self.delimiter {
            opts.delimiter = d;
        }
        if let Some(modes) = &self.solo_modes {
            opts.solo.modes = Some(modes.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Input CSV files.
    pub inputs: Vec<PathBuf>,
    /// TOML file with an `[ingest]` table and optional `inputs`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub ingest: IngestFlags,
    /// Print statistics as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input CSV files.
    pub inputs: Vec<PathBuf>,
    /// TOML file with `RunConfig` fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// all | top_tier | frequent | every [default: every]
    #[arg(long)]
    pub setup: Option<SetupSelection>,
    /// Comma-separated model names [default: all 12]
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ModelId>>,
    /// linear | exponential [default: linear]
    #[arg(long)]
    pub gain: Option<GainKind>,
    /// Tie-break seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// match_selection | members_only [default: match_selection]
    #[arg(long)]
    pub scoring: Option<CohortScoring>,
    /// Elo K factor [default: 32]
    #[arg(long)]
    pub elo_k: Option<f64>,
    /// all_pairs | adjacent [default: all_pairs]
    #[arg(long)]
    pub pairing: Option<Pairing>,
    /// TrueSkill performance noise [default: 25/6]
    #[arg(long)]
    pub ts_beta: Option<f64>,
    /// TrueSkill dynamics noise [default: 25/300]
    #[arg(long)]
    pub ts_tau: Option<f64>,
    /// TrueSkill draw probability [default: 0.1]
    #[arg(long)]
    pub ts_draw_prob: Option<f64>,
    /// TrueSkill sweep cap [default: 100]
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// TrueSkill convergence tolerance [default: 1e-4]
    #[arg(long)]
    pub convergence_tol: Option<f64>,
    /// mean | conservative [default: mean]
    #[arg(long)]
    pub trueskill_key: Option<TrueSkillKey>,
    /// zero | numerator [default: zero]
    #[arg(long)]
    pub zero_division: Option<ZeroDivision>,
    /// Top-tier cohort size [default: 500]
    #[arg(long)]
    pub top_k: Option<usize>,
    #[command(flatten)]
    pub ingest: IngestFlags,
    /// Write every prediction to predictions.jsonl.
    #[arg(long)]
    pub audit: bool,
    /// Write final profiles.jsonl and ratings.jsonl.
    #[arg(long)]
    pub checkpoint: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with `SyntheticSpec` fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// [default: 1000]
    #[arg(long)]
    pub n_players: Option<usize>,
    /// [default: 5000]
    #[arg(long)]
    pub n_matches: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    pub players_per_match: Option<usize>,
    /// [default: 1.0]
    #[arg(long)]
    pub latent_skill_stddev: Option<f64>,
    /// [default: 1.0]
    #[arg(long)]
    pub performance_noise: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write `player_id,skill,archetype` for every player.
    #[arg(long)]
    pub skills_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A `scores.jsonl` file, or a run directory containing one.
    pub scores: PathBuf,
    /// Write summary.csv and summary.json here as well.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Merges `--config` and flags into a validated [`RunConfig`].
pub fn resolve_run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => RunConfig::default(),
    };
    if !args.inputs.is_empty() {
        cfg.inputs = args.inputs.clone();
    }
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = args.$flag.clone() { cfg.$($field).+ = v; })*
        };
    }
    set! {
        setup => setup,
        models => models,
        gain => gain,
        seed => seed,
        out => output_dir,
        scoring => scoring,
        elo_k => rating.elo_k,
        pairing => rating.pairing,
        ts_beta => rating.ts_beta,
        ts_tau => rating.ts_tau,
        ts_draw_prob => rating.ts_draw_prob,
        max_iterations => rating.max_iterations,
        convergence_tol => rating.convergence_tol,
        trueskill_key => prediction.trueskill_key,
        zero_division => prediction.zero_division,
        top_k => cohort.top_k,
    }
    args.ingest.apply(&mut cfg.ingest);
    cfg.audit |= args.audit;
    cfg.checkpoint |= args.checkpoint;
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_synthetic_spec(args: &SimulateArgs) -> Result<SyntheticSpec> {
    let mut spec: SyntheticSpec = match &args.config {
        Some(p) => read_toml(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(v) = args.n_players {
        spec.n_players = v;
    }
    if let Some(v) = args.n_matches {
        spec.n_matches = v;
    }
    if let Some(v) = args.players_per_match {
        spec.players_per_match = v;
    }
    if let Some(v) = args.latent_skill_stddev {
        spec.latent_skill_stddev = v;
    }
    if let Some(v) = args.performance_noise {
        spec.performance_noise = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize)]
struct AuditLine<'a> {
    match_index: usize,
    #[serde(flatten)]
    prediction: &'a PredictedOrder,
}

/// Final post-stream state. Replays the matches, so only used on request.
fn final_state(matches: &[MatchRecord], rating: &RatingConfig) -> Result<(ProfileStore, RatingStore)> {
    let mut profiles = ProfileStore::new();
    let mut ratings = RatingStore::new();
    for m in matches {
        profiles.apply_match(&m.participants)?;
        ratings.apply_match(&m.player_ids(), &m.ranks(), rating)?;
    }
    Ok((profiles, ratings))
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<SetupSummary>> {
    cfg.validate()?;
    let ingested = load_matches(&cfg.inputs, &cfg.ingest)?;
    let stats = &ingested.stats;
    info!(
        "ingested {} matches, {} players ({} row errors, {} non-solo rows dropped)",
        stats.matches, stats.unique_players, stats.row_errors, stats.non_solo_dropped
    );
    let matches = ingested.matches;
    let cohorts: Vec<_> = cfg
        .setup
        .kinds()
        .into_iter()
        .map(|k| build_cohort(k, &matches, &cfg.cohort))
        .collect();
    let exp = cfg.experiment();

    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let reports = if cfg.audit {
        let path = cfg.output_dir.join("predictions.jsonl");
        let mut w = create(&path)?;
        let mut sink = |t: usize, p: &PredictedOrder| -> Result<()> {
            serde_json::to_writer(
                &mut w,
                &AuditLine {
                    match_index: t,
                    prediction: p,
                },
            )?;
            w.write_all(b"\n").map_err(|e| Error::io(&path, e))
        };
        let reports = run_experiments(&matches, &cohorts, &exp, Some(&mut sink))?;
        finish(w, &path)?;
        reports
    } else {
        run_experiments(&matches, &cohorts, &exp, None)?
    };

    let files = export_report(&reports, &cfg.output_dir)?;
    info!("wrote {}", files.summary_csv.display());
    if cfg.checkpoint {
        let (profiles, ratings) = final_state(&matches, &cfg.rating)?;
        let p = cfg.output_dir.join("profiles.jsonl");
        let mut w = create(&p)?;
        profiles.write_jsonl(&mut w)?;
        finish(w, &p)?;
        let p = cfg.output_dir.join("ratings.jsonl");
        let mut w = create(&p)?;
        ratings.write_jsonl(&mut w)?;
        finish(w, &p)?;
    }

    let summaries: Vec<SetupSummary> = reports.iter().map(|r| r.summary.clone()).collect();
    let stdout_err = |e| Error::io("<stdout>", e);
    write!(out, "{}", format_table(&summaries, &cfg.models)).map_err(stdout_err)?;
    let violations = reports.first().map_or(0, |r| r.causality_violations);
    if violations > 0 {
        return Err(Error::contract(format!(
            "{violations} predictions read state written by their own or a later match"
        )));
    }
    Ok(summaries)
}

pub fn cmd_simulate(spec: &SyntheticSpec, out: Option<&Path>, skills_out: Option<&Path>) -> Result<usize> {
    let data = generate(spec)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            write_csv(&data.rows, &mut w)?;
            finish(w, p)?;
        }
        None => write_csv(&data.rows, io::stdout().lock())?,
    }
    if let Some(p) = skills_out {
        let mut w = csv::Writer::from_writer(create(p)?);
        w.write_record(["player_id", "skill", "archetype"])?;
        for pl in &data.players {
            w.write_record([
                pl.player_id.clone(),
                pl.skill.to_string(),
                format!("{:?}", pl.archetype),
            ])?;
        }
        w.flush().map_err(|e| Error::io(p, e))?;
    }
    Ok(data.rows.len())
}

pub fn cmd_ingest(inputs: &[PathBuf], opts: &IngestOptions, json: bool, out: &mut dyn Write) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Config("no input files given".into()));
    }
    let ing = load_matches(inputs, opts)?;
    let e = |e| Error::io("<stdout>", e);
    if json {
        serde_json::to_writer_pretty(&mut *out, &ing.stats)?;
        writeln!(out).map_err(e)?;
    } else {
        let s = &ing.stats;
        let a = &s.assemble;
        writeln!(out, "files               {}", s.files).map_err(e)?;
        writeln!(out, "rows parsed         {}", s.rows_parsed).map_err(e)?;
        writeln!(out, "row errors          {}", s.row_errors).map_err(e)?;
        writeln!(out, "non-solo dropped    {}", s.non_solo_dropped).map_err(e)?;
        writeln!(out, "duplicate rows      {}", a.duplicate_rows).map_err(e)?;
        writeln!(out, "rank out of range   {}", a.rank_out_of_range).map_err(e)?;
        writeln!(out, "small matches       {}", a.small_matches_discarded).map_err(e)?;
        writeln!(out, "reranked matches    {}", a.reranked_matches).map_err(e)?;
        writeln!(out, "game size raised    {}", a.game_size_raised).map_err(e)?;
        writeln!(out, "matches             {}", s.matches).map_err(e)?;
        writeln!(out, "unique players      {}", s.unique_players).map_err(e)?;
        writeln!(out, "participants        {}", s.participants).map_err(e)?;
        for err in &ing.sample_errors {
            writeln!(out, "  {err}").map_err(e)?;
        }
    }
    Ok(())
}

/// Summaries recomputed from a score log, in canonical setup and model order.
pub fn summaries_from_scores(scores: &[crate::evaluation::MatchScore]) -> (Vec<SetupSummary>, Vec<ModelId>) {
    let models: Vec<ModelId> = ModelId::ALL
        .into_iter()
        .filter(|m| scores.iter().any(|s| s.model == *m))
        .collect();
    let summaries = CohortKind::ALL
        .into_iter()
        .filter(|k| scores.iter().any(|s| s.setup == *k))
        .map(|k| SetupSummary::from_scores(k, &models, scores))
        .collect();
    (summaries, models)
}

pub fn cmd_report(scores_path: &Path, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<Vec<SetupSummary>> {
    let path = if scores_path.is_dir() {
        scores_path.join("scores.jsonl")
    } else {
        scores_path.to_path_buf()
    };
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let scores = read_scores_jsonl(BufReader::new(file))?;
    let (summaries, models) = summaries_from_scores(&scores);
    if let Some(dir) = out_dir {
        let p = dir.join("summary.csv");
        let mut w = create(&p)?;
        write_summary_csv(&summaries, &models, &mut w)?;
        finish(w, &p)?;
        let p = dir.join("summary.json");
        let mut w = create(&p)?;
        write_summary_json(&summaries, None, None, &vec![None; summaries.len()], &mut w)?;
        finish(w, &p)?;
    }
    write!(out, "{}", format_table(&summaries, &models)).map_err(|e| Error::io("<stdout>", e))?;
    Ok(summaries)
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Ingest(a) => {
            #[derive(Deserialize, Default)]
            #[serde(default)]
            struct IngestFile {
                inputs: Vec<PathBuf>,
                ingest: IngestOptions,
            }
            let mut file: IngestFile = match &a.config {
                Some(p) => read_toml(p)?,
                None => IngestFile::default(),
            };
            a.ingest.apply(&mut file.ingest);
            let inputs = if a.inputs.is_empty() { file.inputs } else { a.inputs };
            cmd_ingest(&inputs, &file.ingest, a.json, &mut stdout)
        }
        Command::Run(a) => {
            let cfg = resolve_run_config(&a)?;
            cmd_run(&cfg, &mut stdout).map(|_| ())
        }
        Command::Simulate(a) => {
            let spec = resolve_synthetic_spec(&a)?;
            let rows = cmd_simulate(&spec, a.out.as_deref(), a.skills_out.as_deref())?;
            info!("wrote {rows} rows");
            Ok(())
        }
        Command::Report(a) => cmd_report(&a.scores, a.out.as_deref(), &mut stdout).map(|_| ()),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error ({}): {e}", category(&e));
            exit_code(&e)
        }
    }
}

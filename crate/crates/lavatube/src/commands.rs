//! Subcommand implementations shared by the binary and the tests.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use lavatube_core::ballistics::{hop_budget, BodyParams};
use lavatube_core::comms::{chain_transmission_time, max_range, noise_floor_dbm, shannon_rate, LinkBudget};
use lavatube_core::engine::{aggregate, run, trial_seed, CoverageStats, EngineError, TrialResult};
use lavatube_core::SimConfig;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_config, Config, ConfigError, DEFAULT_CONFIG};
use crate::output::{
    monte_carlo_rows, read_jsonl, write_csv, write_jsonl, CommsTimeRow, CoverageRow, HopRow, SnapshotRecord,
    SweepRow,
};
use crate::render::render_frame;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Reads `path`, or the shipped reference config when absent.
pub fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(parse_config(DEFAULT_CONFIG)?),
        Some(p) => {
            let doc = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            parse_config(&doc).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
        }
    }
}

/// Command-line overrides applied on top of the config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub frames: Option<Vec<u32>>,
    pub trials: Option<usize>,
    pub robots: Option<Vec<usize>>,
}

impl Overrides {
    /// Applies the overrides and revalidates. A single `--robots` value also
    /// sets the explorer count of a single run.
    pub fn apply(&self, mut config: Config) -> Result<Config, CliError> {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.out {
            config.output_dir = o.to_string_lossy().into_owned();
        }
        if let Some(f) = &self.frames {
            config.frames = f.clone();
        }
        if let Some(t) = self.trials {
            config.monte_carlo.trials = t;
        }
        if let Some(r) = &self.robots {
            if let [n] = r[..] {
                config.explorers = n;
                config.placement.explorers_at = None;
            }
            config.monte_carlo.robots = r.clone();
        }
        config
            .validate()
            .map_err(|(field, message)| CliError::Validation(format!("invalid value for `{field}`: {message}")))?;
        Ok(config)
    }
}

fn create_out_dir(config: &Config) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&config.output_dir);
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

fn write_csv_file<R: serde::Serialize>(path: &Path, rows: &[R]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    write_csv(BufWriter::new(f), rows).map_err(|e| io_err(path, e))
}

#[derive(Debug)]
pub struct ExploreOutput {
    pub trial: TrialResult,
    pub files: Vec<PathBuf>,
}

/// Single seeded run: coverage.csv, hops.csv, snapshots.jsonl and one SVG per
/// requested frame.
pub fn explore(config: &Config) -> Result<ExploreOutput, CliError> {
    let trial = run(&config.sim_config(), config.seed)?;
    let dir = create_out_dir(config)?;
    let mut files = Vec::new();

    let coverage: Vec<CoverageRow> = trial
        .coverage_series
        .iter()
        .map(|&(timestep, coverage)| CoverageRow { timestep, coverage })
        .collect();
    let path = dir.join("coverage.csv");
    write_csv_file(&path, &coverage)?;
    files.push(path);

    let hops: Vec<HopRow> = trial.hop_events.iter().map(HopRow::from).collect();
    let path = dir.join("hops.csv");
    write_csv_file(&path, &hops)?;
    files.push(path);

    let records: Vec<SnapshotRecord> = trial.snapshots.iter().map(SnapshotRecord::from).collect();
    let path = dir.join("snapshots.jsonl");
    let f = File::create(&path).map_err(|e| io_err(&path, e))?;
    write_jsonl(BufWriter::new(f), &records).map_err(|e| io_err(&path, e))?;
    files.push(path);

    files.extend(write_frames(config, &records, &dir)?);
    Ok(ExploreOutput { trial, files })
}

fn write_frames(config: &Config, records: &[SnapshotRecord], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for &t in &config.frames {
        let Some(svg) = render_frame(config, records, t) else {
            continue;
        };
        let path = dir.join(format!("frame_{t:03}.svg"));
        fs::write(&path, svg).map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    Ok(files)
}

/// Re-renders frames from an existing snapshots.jsonl.
pub fn render(config: &Config, snapshots: &Path) -> Result<Vec<PathBuf>, CliError> {
    let f = File::open(snapshots).map_err(|e| io_err(snapshots, e))?;
    let records = read_jsonl(BufReader::new(f)).map_err(|e| io_err(snapshots, e))?;
    let dir = create_out_dir(config)?;
    write_frames(config, &records, &dir)
}

pub fn sweep_rows(config: &Config) -> Result<Vec<SweepRow>, CliError> {
    let fuel = config.fuel.budget();
    let mut rows = Vec::new();
    for body in &config.sweep.bodies {
        let params = BodyParams {
            g_body: body.gravity,
            g0: config.fuel.g0,
        };
        for &d in &config.sweep.distances {
            let b = hop_budget(&fuel, &params, d).map_err(|e| CliError::Validation(e.to_string()))?;
            rows.push(SweepRow {
                body: body.name.clone(),
                hop_distance_m: d,
                n_hops: b.n_hops,
                total_distance_m: b.total_distance,
            });
        }
    }
    Ok(rows)
}

/// Writes hop_sweep.csv and returns the rows.
pub fn sweep_hops(config: &Config) -> Result<(Vec<SweepRow>, PathBuf), CliError> {
    let rows = sweep_rows(config)?;
    let dir = create_out_dir(config)?;
    let path = dir.join("hop_sweep.csv");
    write_csv_file(&path, &rows)?;
    Ok((rows, path))
}

/// Itemized link budget at the maximum range.
pub fn comms_range_report(config: &Config) -> Result<String, CliError> {
    let params = config.comms.params();
    let range = max_range(&params).map_err(|e| CliError::Runtime(e.to_string()))?;
    let budget = LinkBudget::at(&params, range).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = String::new();
    out.push_str(&format!("link budget at {range:.3} m\n"));
    for (name, v) in budget.terms() {
        out.push_str(&format!("  {name:<18} {:+10.3} dB\n", v + 0.0));
    }
    out.push_str(&format!("  {:<18} {:+10.3} dBm\n", "received_power", budget.received_power_dbm));
    out.push_str(&format!("  {:<18} {:+10.3} dBm\n", "rx_sensitivity", budget.rx_sensitivity_dbm));
    out.push_str(&format!("  {:<18} {:+10.3} dB\n", "margin", budget.margin_db));
    out.push_str(&format!("  {:<18} {:+10.3} dBm\n", "noise_floor", noise_floor_dbm(&params)));
    let rate = shannon_rate(&params, range).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.push_str(&format!("  {:<18} {:10.1} bit/s\n", "shannon_rate", rate));
    out.push_str(&format!("max_range_m {range:.3}\n"));
    Ok(out)
}

pub fn comms_time_rows(config: &Config) -> Result<Vec<CommsTimeRow>, CliError> {
    let params = config.comms.params();
    config
        .comms
        .hops
        .iter()
        .map(|&hops| {
            chain_transmission_time(config.comms.chain_length_m, hops, &params)
                .map(|total_time_s| CommsTimeRow { hops, total_time_s })
                .map_err(|e| CliError::Runtime(format!("{hops} hops: {e}")))
        })
        .collect()
}

/// Writes comms_time.csv and returns the rows.
pub fn comms_time(config: &Config) -> Result<(Vec<CommsTimeRow>, PathBuf), CliError> {
    let rows = comms_time_rows(config)?;
    let dir = create_out_dir(config)?;
    let path = dir.join("comms_time.csv");
    write_csv_file(&path, &rows)?;
    Ok((rows, path))
}

/// Trials run in parallel; seeds and aggregation match the sequential
/// engine batch exactly.
pub fn monte_carlo_stats(config: &Config) -> Result<Vec<CoverageStats>, CliError> {
    let base = config.sim_config();
    let n = config.monte_carlo.trials;
    if n < 2 {
        return Err(EngineError::TooFewTrials(n).into());
    }
    config
        .monte_carlo
        .robots
        .iter()
        .map(|&count| {
            let cfg = SimConfig {
                explorers: count,
                initial_positions: None,
                ..base.clone()
            };
            let trials = (0..n)
                .into_par_iter()
                .map(|i| run(&cfg, trial_seed(config.seed, i)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(aggregate(count, &trials)?)
        })
        .collect()
}

/// Writes monte_carlo.csv and returns the statistics.
pub fn monte_carlo(config: &Config) -> Result<(Vec<CoverageStats>, PathBuf), CliError> {
    let stats = monte_carlo_stats(config)?;
    let dir = create_out_dir(config)?;
    let path = dir.join("monte_carlo.csv");
    write_csv_file(&path, &monte_carlo_rows(&stats))?;
    Ok((stats, path))
}

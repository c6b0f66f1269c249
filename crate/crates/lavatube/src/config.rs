//! TOML configuration.
//!
//! Every table and key is optional; omitted values take the defaults below,
//! which reproduce the base-connected 15-robot run in the 50 x 8 tube. Unknown
//! keys are rejected. All diagnostics carry the 1-based line they refer to
//! when one can be located.
//!
//! ```toml
//! seed = 1
//! timesteps = 20
//! explorers = 15
//! mode = "case-i"            # or "case-ii"
//! output_dir = "out"
//! frames = [0, 2, 5, 10, 15, 20]
//!
//! [environment]
//! length = 50.0
//! width = 8.0
//! resolution = 100           # cells per unit
//! obstacles = [{ x = 8.0, y = 5.0, radius = 1.0 }]
//!
//! [planner]
//! vision_radius = 2.0
//! comm_range = 5.0
//! hop_range = 7.0
//! max_point_attempts = 20
//! max_robot_attempts = 5
//! distance_samples = 50
//! selection = "round-robin"  # or "random"
//! adjacency = 4              # or 8
//!
//! [placement]
//! base = [0.0, 4.0]          # default: middle of the entrance edge
//! cluster_spacing = 0.5
//! explorers_at = [[0.5, 4.0]]  # optional explicit start points
//!
//! [fuel]
//! gravity = 1.62
//! g0 = 9.80665
//! isp = 350.0
//! m0 = 3.0
//! m_prop = 1.0
//! meters_per_unit = 1.0
//! mode = "informational"     # or "hard"
//!
//! [comms]                    # link budget and transmission time
//! [sweep]                    # hop budget sweep: bodies and hop distances
//! [monte_carlo]              # robots = [6, 15], trials = 10
//! [return_home]              # detached swarm return: enabled, at_timestep, at_coverage
//! [localization]             # zero-mean uniform noise widths
//! ```

use lavatube_core::ballistics::{delta_v_budget, BallisticsError, FuelBudget, MARS_GRAVITY, MOON_GRAVITY, STANDARD_GRAVITY};
use lavatube_core::comms::{CommParams, CommsError};
use lavatube_core::engine::{EngineError, FuelMode, ReturnPolicy, RobotSelection, SimConfig};
use lavatube_core::localization::MeasurementNoise;
use lavatube_core::planner::{Mode, PlannerError, PlannerParams};
use lavatube_core::world::{Adjacency, EnvironmentSpec, Obstacle, WorldError};
use lavatube_core::Point;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shipped reference configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/case_i.toml");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key: {message}")]
    UnknownKey { line: usize, message: String },
    #[error("{}invalid value for `{field}`: {message}", line_prefix(*.line))]
    Invalid {
        line: Option<usize>,
        field: String,
        message: String,
    },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Syntax { line, .. } | ConfigError::UnknownKey { line, .. } => Some(*line),
            ConfigError::Invalid { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ModeName {
    #[default]
    #[serde(rename = "case-i")]
    CaseI,
    #[serde(rename = "case-ii")]
    CaseII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionName {
    #[default]
    RoundRobin,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FuelModeName {
    #[default]
    Informational,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentConfig {
    pub length: f64,
    pub width: f64,
    pub resolution: u32,
    pub obstacles: Vec<ObstacleConfig>,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        let obstacles = [
            (8.0, 5.0, 1.0),
            (14.0, 2.5, 0.8),
            (21.0, 5.5, 1.5),
            (29.0, 3.0, 1.2),
            (37.0, 5.0, 0.5),
            (44.0, 3.5, 1.0),
        ]
        .into_iter()
        .map(|(x, y, radius)| ObstacleConfig { x, y, radius })
        .collect();
        Self {
            length: 50.0,
            width: 8.0,
            resolution: 100,
            obstacles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub vision_radius: f64,
    pub comm_range: f64,
    pub hop_range: f64,
    pub max_point_attempts: u32,
    pub max_robot_attempts: u32,
    pub distance_samples: u32,
    pub selection: SelectionName,
    pub adjacency: u8,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let p = PlannerParams::default();
        Self {
            vision_radius: p.vision_radius,
            comm_range: p.comm_range,
            hop_range: p.hop_range,
            max_point_attempts: p.max_point_attempts,
            max_robot_attempts: p.max_robot_attempts,
            distance_samples: p.distance_samples,
            selection: SelectionName::RoundRobin,
            adjacency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<[f64; 2]>,
    pub cluster_spacing: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explorers_at: Option<Vec<[f64; 2]>>,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            base: None,
            cluster_spacing: 0.5,
            explorers_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuelConfig {
    pub gravity: f64,
    pub g0: f64,
    pub isp: f64,
    pub m0: f64,
    pub m_prop: f64,
    pub meters_per_unit: f64,
    pub mode: FuelModeName,
}

impl Default for FuelConfig {
    fn default() -> Self {
        let budget = FuelBudget::default();
        Self {
            gravity: MOON_GRAVITY,
            g0: STANDARD_GRAVITY,
            isp: budget.isp,
            m0: budget.m0,
            m_prop: budget.m_prop,
            meters_per_unit: 1.0,
            mode: FuelModeName::Informational,
        }
    }
}

impl FuelConfig {
    pub fn budget(&self) -> FuelBudget {
        FuelBudget {
            isp: self.isp,
            m0: self.m0,
            m_prop: self.m_prop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommsConfig {
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub rx_sensitivity_dbm: f64,
    pub frequency_hz: f64,
    pub fixed_losses_db: f64,
    pub excess_loss_db: f64,
    pub bandwidth_hz: f64,
    pub noise_temperature_k: f64,
    pub pointing_loss_db: f64,
    pub min_eb_no_db: f64,
    pub packet_size_bits: u64,
    pub data_size_bits: u64,
    /// Length of the relay chain swept in time mode, m.
    pub chain_length_m: f64,
    pub hops: Vec<usize>,
}

impl Default for CommsConfig {
    fn default() -> Self {
        let p = CommParams::default();
        Self {
            tx_power_dbm: p.tx_power_dbm,
            antenna_gain_db: p.antenna_gain_db,
            rx_sensitivity_dbm: p.rx_sensitivity_dbm,
            frequency_hz: p.frequency_hz,
            fixed_losses_db: p.fixed_losses_db,
            excess_loss_db: p.excess_loss_db,
            bandwidth_hz: p.bandwidth_hz,
            noise_temperature_k: p.noise_temperature_k,
            pointing_loss_db: p.pointing_loss_db,
            min_eb_no_db: p.min_eb_no_db,
            packet_size_bits: p.packet_size_bits,
            data_size_bits: p.data_size_bits,
            chain_length_m: 900.0,
            hops: (2..=20).collect(),
        }
    }
}

impl CommsConfig {
    pub fn params(&self) -> CommParams {
        CommParams {
            tx_power_dbm: self.tx_power_dbm,
            antenna_gain_db: self.antenna_gain_db,
            rx_sensitivity_dbm: self.rx_sensitivity_dbm,
            frequency_hz: self.frequency_hz,
            fixed_losses_db: self.fixed_losses_db,
            excess_loss_db: self.excess_loss_db,
            bandwidth_hz: self.bandwidth_hz,
            noise_temperature_k: self.noise_temperature_k,
            pointing_loss_db: self.pointing_loss_db,
            min_eb_no_db: self.min_eb_no_db,
            packet_size_bits: self.packet_size_bits,
            data_size_bits: self.data_size_bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub name: String,
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub bodies: Vec<BodyConfig>,
    pub distances: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bodies: vec![
                BodyConfig {
                    name: "moon".into(),
                    gravity: MOON_GRAVITY,
                },
                BodyConfig {
                    name: "mars".into(),
                    gravity: MARS_GRAVITY,
                },
            ],
            distances: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub robots: Vec<usize>,
    pub trials: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            robots: vec![6, 15],
            trials: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReturnConfig {
    pub enabled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_timestep: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_coverage: Option<f64>,
}

impl Default for ReturnConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            at_timestep: None,
            at_coverage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub range: f64,
    pub bearing: f64,
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub timesteps: u32,
    pub explorers: usize,
    pub mode: ModeName,
    pub output_dir: String,
    pub frames: Vec<u32>,
    pub environment: EnvironmentConfig,
    pub planner: PlannerConfig,
    pub placement: PlacementConfig,
    pub fuel: FuelConfig,
    pub comms: CommsConfig,
    pub sweep: SweepConfig,
    pub monte_carlo: MonteCarloConfig,
    pub return_home: ReturnConfig,
    pub localization: NoiseConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            timesteps: 20,
            explorers: 15,
            mode: ModeName::CaseI,
            output_dir: "out".into(),
            frames: vec![0, 2, 5, 10, 15, 20],
            environment: EnvironmentConfig::default(),
            planner: PlannerConfig::default(),
            placement: PlacementConfig::default(),
            fuel: FuelConfig::default(),
            comms: CommsConfig::default(),
            sweep: SweepConfig::default(),
            monte_carlo: MonteCarloConfig::default(),
            return_home: ReturnConfig::default(),
            localization: NoiseConfig::default(),
        }
    }
}

impl Config {
    pub fn environment_spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            length: self.environment.length,
            width: self.environment.width,
            resolution: self.environment.resolution,
            obstacles: self
                .environment
                .obstacles
                .iter()
                .map(|o| Obstacle::new(o.x, o.y, o.radius))
                .collect(),
        }
    }

    pub fn planner_params(&self) -> PlannerParams {
        let p = &self.planner;
        PlannerParams {
            vision_radius: p.vision_radius,
            comm_range: p.comm_range,
            hop_range: p.hop_range,
            mode: match self.mode {
                ModeName::CaseI => Mode::CaseI,
                ModeName::CaseII => Mode::CaseII,
            },
            max_point_attempts: p.max_point_attempts,
            max_robot_attempts: p.max_robot_attempts,
            distance_samples: p.distance_samples,
            adjacency: if p.adjacency == 8 {
                Adjacency::Eight
            } else {
                Adjacency::Four
            },
        }
    }

    /// Engine configuration. Assumes [`Config::validate`] passed.
    pub fn sim_config(&self) -> SimConfig {
        let fuel = match self.fuel.mode {
            FuelModeName::Informational => FuelMode::Informational,
            FuelModeName::Hard => FuelMode::HardBudget(
                delta_v_budget(&self.fuel.budget(), self.fuel.g0).unwrap_or(0.0),
            ),
        };
        SimConfig {
            environment: self.environment_spec(),
            planner: self.planner_params(),
            explorers: self.explorers,
            timesteps: self.timesteps,
            base_position: self.placement.base.map(|[x, y]| Point::new(x, y)),
            initial_positions: self
                .placement
                .explorers_at
                .as_ref()
                .map(|v| v.iter().map(|[x, y]| Point::new(*x, *y)).collect()),
            cluster_spacing: self.placement.cluster_spacing,
            selection: match self.planner.selection {
                SelectionName::RoundRobin => RobotSelection::RoundRobin,
                SelectionName::Random => RobotSelection::Random,
            },
            gravity: self.fuel.gravity,
            meters_per_unit: self.fuel.meters_per_unit,
            fuel,
            localization_noise: MeasurementNoise {
                range: self.localization.range,
                bearing: self.localization.bearing,
                orientation: self.localization.orientation,
            },
            return_policy: ReturnPolicy {
                enabled: self.return_home.enabled,
                at_timestep: self.return_home.at_timestep,
                at_coverage: self.return_home.at_coverage,
            },
        }
    }

    /// Checks every invariant the engine, comms and fuel models rely on.
    /// Errors name the offending field but carry no line number; see
    /// [`parse_config`] for line-addressed diagnostics.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let invalid = |field: &str, msg: String| Err((field.to_string(), msg));
        if self.planner.adjacency != 4 && self.planner.adjacency != 8 {
            return invalid("planner.adjacency", "must be 4 or 8".into());
        }
        if let Err(e) = self.sim_config().validate() {
            return Err((engine_field(&e), e.to_string()));
        }
        if let Err(e) = self.fuel.budget().validate() {
            let field = match e {
                BallisticsError::NonPositiveIsp(_) => "fuel.isp",
                _ => "fuel.m_prop",
            };
            return invalid(field, e.to_string());
        }
        if !(self.fuel.g0 > 0.0) {
            return invalid("fuel.g0", "must be positive".into());
        }
        if let Err(e) = self.comms.params().validate() {
            let field = match e {
                CommsError::NonPositiveFrequency(_) => "frequency_hz",
                CommsError::InvalidParam(name) => name,
                _ => "comms",
            };
            return invalid(&format!("comms.{field}"), e.to_string());
        }
        if !(self.comms.chain_length_m > 0.0) {
            return invalid("comms.chain_length_m", "must be positive".into());
        }
        if self.comms.hops.contains(&0) {
            return invalid("comms.hops", "hop counts must be at least 1".into());
        }
        if self.sweep.distances.iter().any(|d| !(*d > 0.0)) {
            return invalid("sweep.distances", "hop distances must be positive".into());
        }
        if self.sweep.bodies.iter().any(|b| !(b.gravity > 0.0)) {
            return invalid("sweep.bodies", "gravity must be positive".into());
        }
        if self.monte_carlo.trials < 2 {
            return invalid("monte_carlo.trials", "at least 2 trials are required".into());
        }
        if self.monte_carlo.robots.contains(&0) {
            return invalid("monte_carlo.robots", "robot counts must be at least 1".into());
        }
        for (name, v) in [
            ("localization.range", self.localization.range),
            ("localization.bearing", self.localization.bearing),
            ("localization.orientation", self.localization.orientation),
        ] {
            if !(v >= 0.0) {
                return invalid(name, "noise width must be non-negative".into());
            }
        }
        Ok(())
    }
}

fn engine_field(e: &EngineError) -> String {
    match e {
        EngineError::World(w) => match w {
            WorldError::NonPositiveDimensions { length, .. } if !(*length > 0.0) => "environment.length",
            WorldError::NonPositiveDimensions { .. } => "environment.width",
            WorldError::ZeroResolution | WorldError::FractionalCells => "environment.resolution",
            _ => "environment.obstacles",
        }
        .into(),
        EngineError::Planner(PlannerError::InvalidParam(name)) => format!("planner.{name}"),
        EngineError::Planner(_) => "planner".into(),
        EngineError::NoExplorers => "explorers".into(),
        EngineError::InvalidPlacement { .. } => "placement".into(),
        EngineError::InvalidParam(name) => match *name {
            "gravity" => "fuel.gravity".into(),
            "meters_per_unit" => "fuel.meters_per_unit".into(),
            "cluster_spacing" => "placement.cluster_spacing".into(),
            "fuel budget" => "fuel.mode".into(),
            "return at_coverage" => "return_home.at_coverage".into(),
            "initial_positions" => "placement.explorers_at".into(),
            other => other.into(),
        },
        EngineError::TooFewTrials(_) => "monte_carlo.trials".into(),
    }
}

fn line_of_offset(doc: &str, offset: usize) -> usize {
    doc[..offset.min(doc.len())].matches('\n').count() + 1
}

/// 1-based line where a dotted key such as `planner.vision_radius` is set,
/// falling back to the line of its table header.
pub fn find_key_line(doc: &str, path: &str) -> Option<usize> {
    let (table, key) = match path.rsplit_once('.') {
        Some((t, k)) => (t, k),
        None => ("", path),
    };
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in doc.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[') {
            current = name.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == table {
                header_line = Some(i + 1);
            }
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else {
            continue;
        };
        let lhs = lhs.trim();
        let full = if current.is_empty() {
            lhs.to_string()
        } else {
            format!("{current}.{lhs}")
        };
        if full == path || (current == table && lhs == key) {
            return Some(i + 1);
        }
    }
    header_line
}

/// Parses and validates a configuration document.
pub fn parse_config(doc: &str) -> Result<Config, ConfigError> {
    let config: Config = toml::from_str(doc).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of_offset(doc, s.start));
        let message = e.message().to_string();
        if message.contains("unknown field") {
            ConfigError::UnknownKey { line, message }
        } else {
            ConfigError::Syntax { line, message }
        }
    })?;
    config.validate().map_err(|(field, message)| ConfigError::Invalid {
        line: find_key_line(doc, &field),
        field,
        message,
    })?;
    Ok(config)
}

/// Serializes a configuration back to TOML.
pub fn render_config(config: &Config) -> String {
    toml::to_string(config).expect("config is always representable as TOML")
}

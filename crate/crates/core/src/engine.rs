//! Timestep loop: each timestep sweeps the explorers in order, sensing,
//! planning and hopping one robot at a time.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`; trial `i` of a
//! batch uses seed `base_seed + i`. Localization noise draws from stream 1 of
//! the same seed so that turning it on never perturbs the planning sequence.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ballistics::{optimal_hop_cost, MOON_GRAVITY};
use crate::geometry::Point;
use crate::localization::{compose_pose, relative_measurement, MeasurementNoise, Pose};
use crate::math;
use crate::planner::{
    comm_connected, mode_connected, plan_for_robot, plan_next_hop, HopDecision, Mode,
    PlannerError, PlannerParams, SwarmView,
};
use crate::world::{Environment, EnvironmentSpec, WorldError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("at least one explorer is required")]
    NoExplorers,
    #[error("robot {robot} placed {reason}")]
    InvalidPlacement { robot: usize, reason: &'static str },
    #[error("invalid engine parameter `{0}`")]
    InvalidParam(&'static str),
    #[error("monte carlo needs at least 2 trials, got {0}")]
    TooFewTrials(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RobotSelection {
    /// Every explorer gets one planning turn per timestep, in id order.
    #[default]
    RoundRobin,
    /// Each turn picks a random explorer; failures retry with another one.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FuelMode {
    /// Δv is tallied but never limits motion.
    #[default]
    Informational,
    /// A robot may not exceed this total Δv (m/s).
    HardBudget(f64),
}

/// When a detached swarm turns around and retraces its hops.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReturnPolicy {
    pub enabled: bool,
    pub at_timestep: Option<u32>,
    pub at_coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub environment: EnvironmentSpec,
    pub planner: PlannerParams,
    pub explorers: usize,
    pub timesteps: u32,
    /// Base robot position; defaults to the middle of the entrance edge.
    pub base_position: Option<Point>,
    /// Explicit explorer start points; otherwise a cluster next to the base.
    pub initial_positions: Option<Vec<Point>>,
    pub cluster_spacing: f64,
    pub selection: RobotSelection,
    pub gravity: f64,
    pub meters_per_unit: f64,
    pub fuel: FuelMode,
    pub localization_noise: MeasurementNoise,
    pub return_policy: ReturnPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            environment: EnvironmentSpec {
                length: 50.0,
                width: 8.0,
                resolution: 10,
                obstacles: Vec::new(),
            },
            planner: PlannerParams::default(),
            explorers: 15,
            timesteps: 20,
            base_position: None,
            initial_positions: None,
            cluster_spacing: 0.5,
            selection: RobotSelection::RoundRobin,
            gravity: MOON_GRAVITY,
            meters_per_unit: 1.0,
            fuel: FuelMode::Informational,
            localization_noise: MeasurementNoise::default(),
            return_policy: ReturnPolicy::default(),
        }
    }
}

impl SimConfig {
    pub fn base(&self) -> Point {
        self.base_position
            .unwrap_or(Point::new(0.0, self.environment.width / 2.0))
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.environment.validate()?;
        self.planner.validate()?;
        if self.explorers < 1 {
            return Err(EngineError::NoExplorers);
        }
        if !(self.gravity > 0.0) {
            return Err(EngineError::InvalidParam("gravity"));
        }
        if !(self.meters_per_unit > 0.0) {
            return Err(EngineError::InvalidParam("meters_per_unit"));
        }
        if !(self.cluster_spacing > 0.0) {
            return Err(EngineError::InvalidParam("cluster_spacing"));
        }
        if let FuelMode::HardBudget(b) = self.fuel {
            if !(b >= 0.0) {
                return Err(EngineError::InvalidParam("fuel budget"));
            }
        }
        if let Some(c) = self.return_policy.at_coverage {
            if !(0.0..=1.0).contains(&c) {
                return Err(EngineError::InvalidParam("return at_coverage"));
            }
        }
        if let Some(p) = &self.initial_positions {
            if p.len() != self.explorers {
                return Err(EngineError::InvalidParam("initial_positions"));
            }
        }
        Ok(())
    }

    /// Explorer start points: explicit, or columns of up to five robots at
    /// `cluster_spacing` pitch stepping into the tube from the base.
    pub fn explorer_start_positions(&self) -> Vec<Point> {
        if let Some(p) = &self.initial_positions {
            return p.clone();
        }
        let base = self.base();
        let s = self.cluster_spacing;
        let fit = math::floor(self.environment.width / s) as usize;
        let per_col = fit.saturating_sub(1).clamp(1, 5);
        (0..self.explorers)
            .map(|i| {
                let col = (i / per_col) as f64;
                let row = (i % per_col) as f64 - (per_col as f64 - 1.0) / 2.0;
                Point::new(base.x + s * (col + 1.0), base.y + s * row)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Base,
    Explorer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRecord {
    pub timestep: u32,
    pub from: Point,
    pub to: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub pose: Pose,
    /// Pose reconstructed through relative measurements.
    pub estimated_pose: Pose,
    pub role: Role,
    pub delta_v_used: f64,
    pub hop_log: Vec<HopRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Exploring,
    Returning,
    Home,
}

/// One executed hop with the checks evaluated right after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopEvent {
    pub timestep: u32,
    pub robot: usize,
    pub from: Point,
    pub to: Point,
    pub distance: f64,
    pub delta_v: f64,
    /// Landing cell was explored free space before the hop.
    pub landed_in_explored: bool,
    pub returning: bool,
    pub base_connected: bool,
    pub swarm_connected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub timestep: u32,
    pub phase: Phase,
    pub poses: Vec<Pose>,
    pub newly_explored: usize,
    pub coverage: f64,
    pub base_connected: bool,
    pub swarm_connected: bool,
    pub localization_error: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub timestep: u32,
    pub env: Environment,
    pub robots: Vec<RobotState>,
    pub stall_count: u64,
    pub phase: Phase,
    pub hop_events: Vec<HopEvent>,
    config: SimConfig,
    rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    history: Vec<(usize, Point, Point)>,
    frontier: Vec<Point>,
}

/// Index of the base robot in `SimState::robots`.
pub const BASE: usize = 0;

pub fn init_simulation(config: &SimConfig, seed: u64) -> Result<SimState, EngineError> {
    config.validate()?;
    let mut env = Environment::new(config.environment.clone())?;
    let base = config.base();
    let starts = config.explorer_start_positions();
    let mut all = Vec::with_capacity(starts.len() + 1);
    all.push(base);
    all.extend(starts);
    for (robot, p) in all.iter().enumerate() {
        if !env.contains(*p) {
            return Err(EngineError::InvalidPlacement {
                robot,
                reason: "outside the tube",
            });
        }
        if config.environment.obstacles.iter().any(|o| o.contains(*p)) {
            return Err(EngineError::InvalidPlacement {
                robot,
                reason: "inside an obstacle",
            });
        }
        if all[..robot].iter().any(|q| q.distance(*p) < 1e-9) {
            return Err(EngineError::InvalidPlacement {
                robot,
                reason: "on top of another robot",
            });
        }
        if robot != BASE && p.distance(base) > config.planner.comm_range {
            return Err(EngineError::InvalidPlacement {
                robot,
                reason: "beyond comm range of the base",
            });
        }
    }
    let robots = all
        .iter()
        .enumerate()
        .map(|(id, p)| {
            let pose = Pose::new(p.x, p.y, 0.0);
            RobotState {
                id,
                pose,
                estimated_pose: pose,
                role: if id == BASE { Role::Base } else { Role::Explorer },
                delta_v_used: 0.0,
                hop_log: Vec::new(),
            }
        })
        .collect::<Vec<_>>();
    for r in &robots {
        env.mark_explored(r.pose.position(), config.planner.vision_radius);
    }
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);
    Ok(SimState {
        timestep: 0,
        env,
        robots,
        stall_count: 0,
        phase: Phase::Exploring,
        hop_events: Vec::new(),
        config: config.clone(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        noise_rng,
        history: Vec::new(),
        frontier: Vec::new(),
    })
}

impl SimState {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn positions(&self) -> Vec<Point> {
        self.robots.iter().map(|r| r.pose.position()).collect()
    }

    pub fn base_connected(&self) -> bool {
        comm_connected(&self.positions(), self.config.planner.comm_range, BASE)
    }

    pub fn swarm_connected(&self) -> bool {
        mode_connected(
            &self.positions(),
            BASE,
            self.config.planner.comm_range,
            Mode::CaseII,
        )
    }

    pub fn snapshot(&self, newly_explored: usize) -> Snapshot {
        let localization_error = self
            .robots
            .iter()
            .map(|r| r.pose.position().distance(r.estimated_pose.position()))
            .fold(0.0, f64::max);
        Snapshot {
            timestep: self.timestep,
            phase: self.phase,
            poses: self.robots.iter().map(|r| r.pose).collect(),
            newly_explored,
            coverage: self.env.coverage_fraction(),
            base_connected: self.base_connected(),
            swarm_connected: self.swarm_connected(),
            localization_error,
        }
    }

    fn should_return(&self) -> bool {
        let policy = &self.config.return_policy;
        self.config.planner.mode == Mode::CaseII
            && policy.enabled
            && (policy.at_timestep.is_some_and(|t| self.timestep >= t)
                || policy
                    .at_coverage
                    .is_some_and(|c| self.env.coverage_fraction() >= c))
    }

    /// Starts the return leg if the swarm has anything to retrace.
    pub fn begin_return(&mut self) {
        if self.phase == Phase::Exploring {
            self.phase = if self.history.is_empty() {
                Phase::Home
            } else {
                Phase::Returning
            };
        }
    }

    /// Advances one timestep and returns the snapshot taken after it.
    pub fn step(&mut self) -> Snapshot {
        if self.phase == Phase::Exploring && self.should_return() {
            self.begin_return();
        }
        self.timestep += 1;
        let newly = match self.phase {
            Phase::Exploring => self.explore_sweep(),
            Phase::Returning => {
                self.retrace_one();
                0
            }
            Phase::Home => 0,
        };
        self.snapshot(newly)
    }

    fn explore_sweep(&mut self) -> usize {
        let vision = self.config.planner.vision_radius;
        let mut newly = 0;
        let turns = self.robots.len() - 1;
        for turn in 0..turns {
            let decision = match self.config.selection {
                RobotSelection::RoundRobin => {
                    let robot = turn + 1;
                    newly += self
                        .env
                        .mark_explored(self.robots[robot].pose.position(), vision);
                    self.env
                        .free_boundary_into(self.config.planner.adjacency, &mut self.frontier);
                    let params = self.params_for(robot);
                    let positions = self.positions();
                    let view = SwarmView {
                        env: &self.env,
                        positions: &positions,
                        base: BASE,
                    };
                    plan_for_robot(&view, robot, &self.frontier, &params, &mut self.rng)
                }
                RobotSelection::Random => {
                    let params = self.config.planner;
                    let positions = self.positions();
                    let view = SwarmView {
                        env: &self.env,
                        positions: &positions,
                        base: BASE,
                    };
                    plan_next_hop(&view, &params, &mut self.rng)
                        .filter(|d| self.fuel_allows(d.robot_id, d.distance))
                }
            };
            match decision {
                Some(d) => newly += self.execute(d),
                None => self.stall_count += 1,
            }
        }
        newly
    }

    fn remaining_hop_reach(&self, robot: usize) -> f64 {
        match self.config.fuel {
            FuelMode::Informational => f64::INFINITY,
            FuelMode::HardBudget(budget) => {
                let left = (budget - self.robots[robot].delta_v_used).max(0.0);
                // invert 2 sqrt(g d) = left
                let meters = left * left / (4.0 * self.config.gravity);
                meters / self.config.meters_per_unit
            }
        }
    }

    fn fuel_allows(&self, robot: usize, distance: f64) -> bool {
        distance <= self.remaining_hop_reach(robot)
    }

    fn params_for(&self, robot: usize) -> PlannerParams {
        let mut params = self.config.planner;
        params.hop_range = params.hop_range.min(self.remaining_hop_reach(robot));
        params
    }

    fn hop_cost(&self, distance: f64) -> f64 {
        optimal_hop_cost(distance * self.config.meters_per_unit, self.config.gravity)
    }

    fn execute(&mut self, d: HopDecision) -> usize {
        let from = self.robots[d.robot_id].pose.position();
        let landed_in_explored = self.env.point_in_explored(d.target);
        let heading = math::atan2(d.direction.y, d.direction.x);
        self.move_robot(d.robot_id, d.target, heading, false, landed_in_explored, d.distance);
        self.history.push((d.robot_id, from, d.target));
        self.robots[d.robot_id].hop_log.push(HopRecord {
            timestep: self.timestep,
            from,
            to: d.target,
        });
        self.env
            .mark_explored(d.target, self.config.planner.vision_radius)
    }

    fn retrace_one(&mut self) {
        let Some((robot, from, to)) = self.history.pop() else {
            self.phase = Phase::Home;
            return;
        };
        let landed_in_explored = self.env.point_in_explored(from);
        let back = from - to;
        let heading = math::atan2(back.y, back.x);
        self.move_robot(robot, from, heading, true, landed_in_explored, back.norm());
        self.robots[robot].hop_log.push(HopRecord {
            timestep: self.timestep,
            from: to,
            to: from,
        });
        if self.history.is_empty() {
            self.phase = Phase::Home;
        }
    }

    fn move_robot(
        &mut self,
        robot: usize,
        to: Point,
        heading: f64,
        returning: bool,
        landed_in_explored: bool,
        distance: f64,
    ) {
        let from = self.robots[robot].pose.position();
        let delta_v = self.hop_cost(distance);
        let pose = Pose::new(to.x, to.y, heading);
        self.robots[robot].pose = pose;
        self.robots[robot].delta_v_used += delta_v;
        self.robots[robot].estimated_pose = self.relocalize(robot);
        let positions = self.positions();
        let comm = self.config.planner.comm_range;
        self.hop_events.push(HopEvent {
            timestep: self.timestep,
            robot,
            from,
            to,
            distance,
            delta_v,
            landed_in_explored,
            returning,
            base_connected: comm_connected(&positions, comm, BASE),
            swarm_connected: mode_connected(&positions, BASE, comm, Mode::CaseII),
        });
    }

    /// Pose of `robot` as measured from the nearest stationary neighbour,
    /// chained onto that neighbour's own estimate.
    fn relocalize(&mut self, robot: usize) -> Pose {
        let me = self.robots[robot].pose;
        let observer = self
            .robots
            .iter()
            .filter(|r| r.id != robot)
            .min_by(|a, b| {
                let da = a.pose.position().distance_sq(me.position());
                let db = b.pose.position().distance_sq(me.position());
                da.total_cmp(&db).then(a.id.cmp(&b.id))
            })
            .map(|r| (r.pose, r.estimated_pose));
        let Some((observer_true, observer_est)) = observer else {
            return me;
        };
        let meas = relative_measurement(&observer_true, &me);
        let meas = self.config.localization_noise.apply(&meas, &mut self.noise_rng);
        compose_pose(&observer_est, &meas)
    }

    /// Unreturned hops, oldest first.
    pub fn pending_return_hops(&self) -> usize {
        self.history.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    /// (timestep, coverage) for timesteps 0..=K.
    pub coverage_series: Vec<(u32, f64)>,
    pub hop_count: usize,
    pub total_delta_v: f64,
    pub stall_count: u64,
    /// Extra timesteps spent after K finishing the return leg.
    pub return_steps: u32,
    pub snapshots: Vec<Snapshot>,
    pub hop_events: Vec<HopEvent>,
    pub final_poses: Vec<Pose>,
    pub final_coverage: f64,
}

/// Runs `config.timesteps` steps from a fresh start; a detached swarm with
/// returning enabled then keeps stepping until every hop is retraced.
pub fn run(config: &SimConfig, seed: u64) -> Result<TrialResult, EngineError> {
    let mut state = init_simulation(config, seed)?;
    let mut snapshots = vec![state.snapshot(state.env.explored_cell_count())];
    let mut coverage_series = vec![(0, state.env.coverage_fraction())];
    for _ in 0..config.timesteps {
        let snap = state.step();
        coverage_series.push((snap.timestep, snap.coverage));
        snapshots.push(snap);
    }
    let mut return_steps = 0;
    if config.planner.mode == Mode::CaseII && config.return_policy.enabled {
        state.begin_return();
        while state.phase == Phase::Returning {
            snapshots.push(state.step());
            return_steps += 1;
        }
    }
    let total_delta_v = state.hop_events.iter().map(|h| h.delta_v).sum();
    Ok(TrialResult {
        seed,
        coverage_series,
        hop_count: state.hop_events.len(),
        total_delta_v,
        stall_count: state.stall_count,
        return_steps,
        snapshots,
        final_poses: state.robots.iter().map(|r| r.pose).collect(),
        final_coverage: state.env.coverage_fraction(),
        hop_events: state.hop_events,
    })
}

/// Mean and sample standard deviation of coverage per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageStats {
    pub robot_count: usize,
    pub trials: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn aggregate(robot_count: usize, trials: &[TrialResult]) -> Result<CoverageStats, EngineError> {
    if trials.len() < 2 {
        return Err(EngineError::TooFewTrials(trials.len()));
    }
    let steps = trials.iter().map(|t| t.coverage_series.len()).min().unwrap_or(0);
    let n = trials.len() as f64;
    let mut mean = Vec::with_capacity(steps);
    let mut std = Vec::with_capacity(steps);
    for k in 0..steps {
        let m = trials.iter().map(|t| t.coverage_series[k].1).sum::<f64>() / n;
        let var = trials
            .iter()
            .map(|t| {
                let d = t.coverage_series[k].1 - m;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        mean.push(m);
        std.push(math::sqrt(var));
    }
    Ok(CoverageStats {
        robot_count,
        trials: trials.len(),
        mean,
        std,
    })
}

/// Seed of trial `index` in a batch.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Sequential batch: `n_trials` seeded runs for each explorer count.
pub fn monte_carlo(
    config: &SimConfig,
    robot_counts: &[usize],
    n_trials: usize,
    base_seed: u64,
) -> Result<Vec<CoverageStats>, EngineError> {
    if n_trials < 2 {
        return Err(EngineError::TooFewTrials(n_trials));
    }
    robot_counts
        .iter()
        .map(|&count| {
            let cfg = SimConfig {
                explorers: count,
                initial_positions: None,
                ..config.clone()
            };
            let trials = (0..n_trials)
                .map(|i| run(&cfg, trial_seed(base_seed, i)))
                .collect::<Result<Vec<_>, _>>()?;
            aggregate(count, &trials)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Obstacle;

    fn small() -> SimConfig {
        SimConfig {
            environment: EnvironmentSpec {
                length: 20.0,
                width: 8.0,
                resolution: 10,
                obstacles: vec![Obstacle::new(10.0, 4.0, 1.0)],
            },
            explorers: 4,
            timesteps: 5,
            ..SimConfig::default()
        }
    }

    #[test]
    fn init_places_cluster_and_senses() {
        let s = init_simulation(&small(), 1).unwrap();
        assert_eq!(s.robots.len(), 5);
        assert_eq!(s.robots[BASE].role, Role::Base);
        assert_eq!(s.robots[BASE].pose.position(), Point::new(0.0, 4.0));
        assert!(s.env.coverage_fraction() > 0.0);
        assert!(s.base_connected());
    }

    #[test]
    fn init_rejects_bad_placements() {
        let mut cfg = small();
        cfg.explorers = 0;
        assert_eq!(init_simulation(&cfg, 1).unwrap_err(), EngineError::NoExplorers);
        let mut cfg = small();
        cfg.explorers = 1;
        cfg.initial_positions = Some(vec![Point::new(10.0, 4.2)]);
        cfg.base_position = Some(Point::new(7.0, 4.0));
        assert_eq!(
            init_simulation(&cfg, 1).unwrap_err(),
            EngineError::InvalidPlacement {
                robot: 1,
                reason: "inside an obstacle"
            }
        );
    }

    #[test]
    fn zero_timesteps_gives_initial_point_only() {
        let mut cfg = small();
        cfg.timesteps = 0;
        let r = run(&cfg, 3).unwrap();
        assert_eq!(r.coverage_series.len(), 1);
        assert_eq!(r.hop_count, 0);
    }

    #[test]
    fn completed_exploration_only_ticks() {
        let mut s = init_simulation(&small(), 1).unwrap();
        let c = s.env.spec().length / 2.0;
        s.env.mark_explored(Point::new(c, 4.0), 100.0);
        let before = s.positions();
        let snap = s.step();
        assert_eq!(snap.timestep, 1);
        assert_eq!(s.positions(), before);
        assert_eq!(snap.newly_explored, 0);
    }

    #[test]
    fn hard_budget_limits_motion() {
        let mut cfg = small();
        cfg.fuel = FuelMode::HardBudget(0.0);
        let r = run(&cfg, 5).unwrap();
        assert_eq!(r.hop_count, 0);
        cfg.fuel = FuelMode::HardBudget(6.0);
        let r = run(&cfg, 5).unwrap();
        for robot in 1..r.final_poses.len() {
            let used: f64 = r
                .hop_events
                .iter()
                .filter(|h| h.robot == robot)
                .map(|h| h.delta_v)
                .sum();
            assert!(used <= 6.0 + 1e-9, "{used}");
        }
    }

    #[test]
    fn aggregate_of_identical_trials_has_zero_spread() {
        let r = run(&small(), 11).unwrap();
        let stats = aggregate(4, &[r.clone(), r.clone(), r]).unwrap();
        assert!(stats.std.iter().all(|s| *s == 0.0));
        assert!(matches!(aggregate(4, &[]), Err(EngineError::TooFewTrials(0))));
    }
}

//! Sensor-based random-tree style hop planner for a swarm of hopping robots.
//!
//! A hop is chosen by sampling a point on the free boundary, heading for it,
//! and taking the longest sampled distance along that heading which lands in
//! explored free space, keeps the flight path over explored cells clear of
//! every sensed obstacle, and keeps the required communication graph intact.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::geometry::Point;
use crate::world::{segment_intersects_obstacle, Adjacency, Environment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("hop direction undefined: target coincides with robot")]
    CoincidentPoints,
    #[error("invalid planner parameter `{0}`")]
    InvalidParam(&'static str),
}

/// Connectivity rule applied to every candidate hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Every robot stays connected to the base.
    #[default]
    CaseI,
    /// Explorers stay connected among themselves; the base is ignored.
    CaseII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    pub vision_radius: f64,
    pub comm_range: f64,
    pub hop_range: f64,
    pub mode: Mode,
    pub max_point_attempts: u32,
    pub max_robot_attempts: u32,
    pub distance_samples: u32,
    pub adjacency: Adjacency,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            vision_radius: 2.0,
            comm_range: 5.0,
            hop_range: 7.0,
            mode: Mode::CaseI,
            max_point_attempts: 20,
            max_robot_attempts: 5,
            distance_samples: 50,
            adjacency: Adjacency::Four,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if !(self.vision_radius > 0.0) {
            return Err(PlannerError::InvalidParam("vision_radius"));
        }
        if !(self.comm_range > 0.0) {
            return Err(PlannerError::InvalidParam("comm_range"));
        }
        if !(self.hop_range >= 0.0) || !self.hop_range.is_finite() {
            return Err(PlannerError::InvalidParam("hop_range"));
        }
        if self.max_point_attempts == 0 {
            return Err(PlannerError::InvalidParam("max_point_attempts"));
        }
        if self.max_robot_attempts == 0 {
            return Err(PlannerError::InvalidParam("max_robot_attempts"));
        }
        if self.distance_samples == 0 {
            return Err(PlannerError::InvalidParam("distance_samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopDecision {
    pub robot_id: usize,
    pub direction: Point,
    pub target: Point,
    pub distance: f64,
}

/// What the planner may look at: the shared map and where every robot is.
#[derive(Debug, Clone, Copy)]
pub struct SwarmView<'a> {
    pub env: &'a Environment,
    pub positions: &'a [Point],
    /// Index of the stationary base robot in `positions`.
    pub base: usize,
}

impl SwarmView<'_> {
    pub fn explorers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.positions.len()).filter(move |i| *i != self.base)
    }
}

pub fn hop_direction(r_p: Point, r_r: Point) -> Result<Point, PlannerError> {
    let d = r_p - r_r;
    let n = d.norm();
    if n == 0.0 {
        return Err(PlannerError::CoincidentPoints);
    }
    Ok(d * (1.0 / n))
}

/// True iff the straight path misses every obstacle sensed so far.
pub fn verify_direction(robot: Point, target: Point, env: &Environment) -> bool {
    !segment_intersects_obstacle(robot, target, env.revealed_obstacles()).unwrap_or(true)
}

/// True iff every node reaches `anchor` in the disk graph of radius
/// `comm_range`. An empty node set is trivially connected.
pub fn comm_connected(positions: &[Point], comm_range: f64, anchor: usize) -> bool {
    let n = positions.len();
    if n == 0 {
        return true;
    }
    if anchor >= n {
        return false;
    }
    let r_sq = comm_range * comm_range;
    let mut seen = vec![false; n];
    let mut stack = vec![anchor];
    seen[anchor] = true;
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && positions[u].distance_sq(positions[v]) <= r_sq {
                seen[v] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    reached == n
}

/// Connectivity rule of `mode` evaluated on a full position set.
pub fn mode_connected(positions: &[Point], base: usize, comm_range: f64, mode: Mode) -> bool {
    match mode {
        Mode::CaseI => comm_connected(positions, comm_range, base),
        Mode::CaseII => {
            let explorers: Vec<Point> = positions
                .iter()
                .enumerate()
                .filter_map(|(i, p)| (i != base).then_some(*p))
                .collect();
            comm_connected(&explorers, comm_range, 0)
        }
    }
}

/// Longest of `distance_samples` evenly spaced distances in
/// `(0, min(hop_range, |selected - robot|)]` satisfying every hop constraint.
pub fn compute_hop_distance(
    view: &SwarmView<'_>,
    robot: usize,
    direction: Point,
    selected: Point,
    params: &PlannerParams,
) -> Option<f64> {
    let origin = view.positions[robot];
    let reach = params.hop_range.min(origin.distance(selected));
    if !(reach > 0.0) {
        return None;
    }
    let mut scratch = view.positions.to_vec();
    let samples = params.distance_samples.max(1);
    (1..=samples).rev().find_map(|k| {
        let d = reach * f64::from(k) / f64::from(samples);
        let landing = origin + direction * d;
        if !hop_feasible(view, origin, landing) {
            return None;
        }
        scratch[robot] = landing;
        mode_connected(&scratch, view.base, params.comm_range, params.mode).then_some(d)
    })
}

fn hop_feasible(view: &SwarmView<'_>, origin: Point, landing: Point) -> bool {
    view.env.point_in_explored(landing)
        && view.env.path_explored(origin, landing)
        && origin != landing
        && verify_direction(origin, landing, view.env)
}

/// Point-retry loop for one robot against a precomputed frontier.
pub fn plan_for_robot<R: Rng + ?Sized>(
    view: &SwarmView<'_>,
    robot: usize,
    frontier: &[Point],
    params: &PlannerParams,
    rng: &mut R,
) -> Option<HopDecision> {
    if frontier.is_empty() || robot == view.base {
        return None;
    }
    let origin = view.positions[robot];
    for _ in 0..params.max_point_attempts {
        let selected = frontier[rng.random_range(0..frontier.len())];
        let Ok(direction) = hop_direction(selected, origin) else {
            continue;
        };
        if !verify_direction(origin, selected, view.env) {
            continue;
        }
        if let Some(distance) = compute_hop_distance(view, robot, direction, selected, params) {
            return Some(HopDecision {
                robot_id: robot,
                direction,
                target: origin + direction * distance,
                distance,
            });
        }
    }
    None
}

/// Random robot, random frontier points; a robot whose points all fail is
/// swapped for a different, untried one.
pub fn plan_next_hop<R: Rng + ?Sized>(
    view: &SwarmView<'_>,
    params: &PlannerParams,
    rng: &mut R,
) -> Option<HopDecision> {
    let frontier = view.env.free_boundary(params.adjacency);
    if frontier.is_empty() {
        return None;
    }
    let mut candidates: Vec<usize> = view.explorers().collect();
    for _ in 0..params.max_robot_attempts {
        if candidates.is_empty() {
            break;
        }
        let robot = candidates.swap_remove(rng.random_range(0..candidates.len()));
        if let Some(decision) = plan_for_robot(view, robot, &frontier, params, rng) {
            return Some(decision);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{EnvironmentSpec, Obstacle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_env() -> Environment {
        Environment::new(EnvironmentSpec {
            length: 20.0,
            width: 8.0,
            resolution: 10,
            obstacles: Vec::new(),
        })
        .unwrap()
    }

    #[test]
    fn direction_examples() {
        let u = hop_direction(Point::new(3.0, 4.0), Point::new(0.0, 0.0)).unwrap();
        assert!((u.x - 0.6).abs() < 1e-15 && (u.y - 0.8).abs() < 1e-15);
        assert_eq!(
            hop_direction(Point::new(1.0, 0.0), Point::new(0.0, 0.0)).unwrap(),
            Point::new(1.0, 0.0)
        );
        assert_eq!(
            hop_direction(Point::new(1.0, 1.0), Point::new(1.0, 1.0)),
            Err(PlannerError::CoincidentPoints)
        );
    }

    #[test]
    fn unsensed_obstacles_do_not_block() {
        let mut env = Environment::new(EnvironmentSpec {
            length: 20.0,
            width: 8.0,
            resolution: 10,
            obstacles: vec![Obstacle::new(10.0, 4.0, 1.0)],
        })
        .unwrap();
        let a = Point::new(5.0, 4.0);
        let b = Point::new(15.0, 4.0);
        assert!(verify_direction(a, Point::new(5.0, 7.0), &env));
        assert!(verify_direction(a, b, &env));
        env.mark_explored(Point::new(8.0, 4.0), 2.0);
        assert!(!verify_direction(a, b, &env));
    }

    #[test]
    fn connectivity_examples() {
        let chain: Vec<Point> = (0..5).map(|i| Point::new(i as f64 * 4.5, 0.0)).collect();
        assert!(comm_connected(&chain, 5.0, 0));
        let mut lonely = chain.clone();
        lonely.push(Point::new(18.0 + 5.5, 0.0));
        assert!(!comm_connected(&lonely, 5.0, 0));
    }

    #[test]
    fn empty_frontier_yields_nothing() {
        let env = open_env();
        let positions = [Point::new(0.0, 4.0), Point::new(1.0, 4.0)];
        let view = SwarmView {
            env: &env,
            positions: &positions,
            base: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(plan_next_hop(&view, &PlannerParams::default(), &mut rng), None);
    }

    #[test]
    fn unexplored_landing_gives_no_distance() {
        let env = open_env();
        let positions = [Point::new(0.0, 4.0), Point::new(1.0, 4.0)];
        let view = SwarmView {
            env: &env,
            positions: &positions,
            base: 0,
        };
        let d = compute_hop_distance(
            &view,
            1,
            Point::new(1.0, 0.0),
            Point::new(5.0, 4.0),
            &PlannerParams::default(),
        );
        assert_eq!(d, None);
    }

    #[test]
    fn case_two_ignores_far_base() {
        let mut env = open_env();
        env.mark_explored(Point::new(10.0, 4.0), 4.0);
        // the base is far outside comm range of everybody
        let positions = [Point::new(0.0, 0.0), Point::new(10.0, 4.0)];
        let view = SwarmView {
            env: &env,
            positions: &positions,
            base: 0,
        };
        let params = PlannerParams {
            mode: Mode::CaseII,
            ..PlannerParams::default()
        };
        let d = compute_hop_distance(&view, 1, Point::new(1.0, 0.0), Point::new(13.5, 4.0), &params);
        assert_eq!(d, Some(3.5));
        let case_one = PlannerParams::default();
        assert_eq!(
            compute_hop_distance(&view, 1, Point::new(1.0, 0.0), Point::new(13.5, 4.0), &case_one),
            None
        );
    }

    #[test]
    fn planning_is_deterministic() {
        let mut env = open_env();
        env.mark_explored(Point::new(0.0, 4.0), 2.0);
        env.mark_explored(Point::new(1.0, 4.0), 2.0);
        let positions = [Point::new(0.0, 4.0), Point::new(1.0, 4.0)];
        let view = SwarmView {
            env: &env,
            positions: &positions,
            base: 0,
        };
        let params = PlannerParams::default();
        let a = plan_next_hop(&view, &params, &mut ChaCha8Rng::seed_from_u64(9));
        let b = plan_next_hop(&view, &params, &mut ChaCha8Rng::seed_from_u64(9));
        assert!(a.is_some());
        assert_eq!(a, b);
        let d = a.unwrap();
        assert!((d.direction.norm() - 1.0).abs() < 1e-9);
        assert!(d.distance > 0.0 && d.distance <= params.hop_range);
        assert!(env.point_in_explored(d.target));
    }
}

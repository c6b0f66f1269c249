//! Discretized tube world: circular obstacles, per-cell exploration state,
//! frontier extraction and segment/obstacle geometry.
//!
//! Cell `(ix, iy)` covers `[ix/res, (ix+1)/res) x [iy/res, (iy+1)/res)` and its
//! state is decided by its center point. Points map to cells by flooring, so a
//! point on a shared edge belongs to the cell on its upper/right side.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{point_segment_distance, Point};
use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("tube dimensions must be positive (length {length}, width {width})")]
    NonPositiveDimensions { length: f64, width: f64 },
    #[error("resolution must be at least 1 cell per unit")]
    ZeroResolution,
    #[error("length x resolution and width x resolution must be whole cell counts")]
    FractionalCells,
    #[error("obstacle {index} has non-positive radius {radius}")]
    NonPositiveRadius { index: usize, radius: f64 },
    #[error("obstacle {index} does not lie fully inside the tube")]
    ObstacleOutOfBounds { index: usize },
    #[error("obstacles {first} and {second} overlap")]
    ObstaclesOverlap { first: usize, second: usize },
    #[error("segment endpoints coincide")]
    DegenerateSegment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Point,
    pub radius: f64,
}

impl Obstacle {
    pub const fn new(x: f64, y: f64, radius: f64) -> Self {
        Self {
            center: Point::new(x, y),
            radius,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.distance_sq(self.center) <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    /// Extent along the tube axis (x).
    pub length: f64,
    /// Extent across the tube (y).
    pub width: f64,
    /// Cells per world unit.
    pub resolution: u32,
    pub obstacles: Vec<Obstacle>,
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.length > 0.0) || !(self.width > 0.0) {
            return Err(WorldError::NonPositiveDimensions {
                length: self.length,
                width: self.width,
            });
        }
        if self.resolution == 0 {
            return Err(WorldError::ZeroResolution);
        }
        let res = f64::from(self.resolution);
        for extent in [self.length, self.width] {
            let cells = extent * res;
            if (cells - math::round(cells)).abs() > 1e-6 {
                return Err(WorldError::FractionalCells);
            }
        }
        for (index, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) {
                return Err(WorldError::NonPositiveRadius {
                    index,
                    radius: o.radius,
                });
            }
            let c = o.center;
            if c.x - o.radius < 0.0
                || c.y - o.radius < 0.0
                || c.x + o.radius > self.length
                || c.y + o.radius > self.width
            {
                return Err(WorldError::ObstacleOutOfBounds { index });
            }
        }
        for (i, a) in self.obstacles.iter().enumerate() {
            for (j, b) in self.obstacles.iter().enumerate().skip(i + 1) {
                if a.center.distance(b.center) < a.radius + b.radius {
                    return Err(WorldError::ObstaclesOverlap {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Unexplored,
    ExploredFree,
    Obstacle,
}

/// Neighbourhood used when deciding whether an explored cell borders
/// unexplored space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjacency {
    #[default]
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CellBox {
    ix0: usize,
    iy0: usize,
    ix1: usize,
    iy1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    spec: EnvironmentSpec,
    nx: usize,
    ny: usize,
    cells: Vec<CellState>,
    obstacle_sensed: Vec<bool>,
    revealed: Vec<bool>,
    free_cells: usize,
    explored_cells: usize,
    explored_box: Option<CellBox>,
}

impl Environment {
    pub fn new(spec: EnvironmentSpec) -> Result<Self, WorldError> {
        spec.validate()?;
        let res = f64::from(spec.resolution);
        let nx = math::round(spec.length * res) as usize;
        let ny = math::round(spec.width * res) as usize;
        let mut cells = vec![CellState::Unexplored; nx * ny];
        for o in &spec.obstacles {
            let (ix0, ix1) = center_range(o.center.x, o.radius, res, nx);
            let (iy0, iy1) = center_range(o.center.y, o.radius, res, ny);
            for iy in iy0..iy1 {
                for ix in ix0..ix1 {
                    if o.contains(cell_center(ix, iy, res)) {
                        cells[iy * nx + ix] = CellState::Obstacle;
                    }
                }
            }
        }
        let free_cells = cells
            .iter()
            .filter(|c| **c != CellState::Obstacle)
            .count();
        let revealed = vec![false; spec.obstacles.len()];
        Ok(Self {
            spec,
            nx,
            ny,
            obstacle_sensed: vec![false; cells.len()],
            cells,
            revealed,
            free_cells,
            explored_cells: 0,
            explored_box: None,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    /// Grid dimensions as (cells along x, cells along y).
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn res(&self) -> f64 {
        f64::from(self.spec.resolution)
    }

    pub fn state(&self, ix: usize, iy: usize) -> CellState {
        self.cells[iy * self.nx + ix]
    }

    pub fn obstacle_cell_sensed(&self, ix: usize, iy: usize) -> bool {
        self.obstacle_sensed[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        cell_center(ix, iy, self.res())
    }

    /// Cell containing `p`, or `None` outside the rectangle.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let res = self.res();
        let fx = math::floor(p.x * res);
        let fy = math::floor(p.y * res);
        if !(fx >= 0.0 && fy >= 0.0) || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cell_of(p).is_some()
    }

    /// Marks every free cell whose center lies within `radius` of `center`
    /// as explored and returns how many cells changed state. Obstacle cells in
    /// range are flagged as sensed; an obstacle disk becomes revealed to the
    /// planner as soon as any sensed cell square touches it.
    pub fn mark_explored(&mut self, center: Point, radius: f64) -> usize {
        if !(radius > 0.0) {
            return 0;
        }
        let res = self.res();
        let r_sq = radius * radius;
        let (ix0, ix1) = center_range(center.x, radius, res, self.nx);
        let (iy0, iy1) = center_range(center.y, radius, res, self.ny);
        let mut newly = 0;
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                if cell_center(ix, iy, res).distance_sq(center) > r_sq {
                    continue;
                }
                let idx = iy * self.nx + ix;
                match self.cells[idx] {
                    CellState::Unexplored => {
                        self.cells[idx] = CellState::ExploredFree;
                        newly += 1;
                        self.grow_box(ix, iy);
                    }
                    CellState::Obstacle => self.obstacle_sensed[idx] = true,
                    CellState::ExploredFree => {}
                }
            }
        }
        self.explored_cells += newly;
        self.reveal_obstacles(center, radius);
        newly
    }

    fn grow_box(&mut self, ix: usize, iy: usize) {
        self.explored_box = Some(match self.explored_box {
            None => CellBox {
                ix0: ix,
                iy0: iy,
                ix1: ix,
                iy1: iy,
            },
            Some(b) => CellBox {
                ix0: b.ix0.min(ix),
                iy0: b.iy0.min(iy),
                ix1: b.ix1.max(ix),
                iy1: b.iy1.max(iy),
            },
        });
    }

    fn reveal_obstacles(&mut self, center: Point, radius: f64) {
        let res = self.res();
        let half = 0.5 / res;
        let diag = core::f64::consts::SQRT_2 / res;
        let r_sq = radius * radius;
        for k in 0..self.spec.obstacles.len() {
            if self.revealed[k] {
                continue;
            }
            let o = self.spec.obstacles[k];
            if center.distance(o.center) > radius + o.radius + diag {
                continue;
            }
            let (ox0, ox1) = center_range(o.center.x, o.radius + diag, res, self.nx);
            let (oy0, oy1) = center_range(o.center.y, o.radius + diag, res, self.ny);
            'cells: for iy in oy0..oy1 {
                for ix in ox0..ox1 {
                    let c = cell_center(ix, iy, res);
                    if c.distance_sq(center) > r_sq {
                        continue;
                    }
                    let nearest = Point::new(
                        o.center.x.clamp(c.x - half, c.x + half),
                        o.center.y.clamp(c.y - half, c.y + half),
                    );
                    if o.contains(nearest) {
                        self.revealed[k] = true;
                        break 'cells;
                    }
                }
            }
        }
    }

    /// Obstacles the robots have sensed so far.
    pub fn revealed_obstacles(&self) -> impl Iterator<Item = &Obstacle> + '_ {
        self.spec
            .obstacles
            .iter()
            .zip(&self.revealed)
            .filter_map(|(o, seen)| seen.then_some(o))
    }

    pub fn is_revealed(&self, index: usize) -> bool {
        self.revealed[index]
    }

    /// Centers of explored free cells bordering at least one unexplored cell.
    pub fn free_boundary(&self, adjacency: Adjacency) -> Vec<Point> {
        let mut out = Vec::new();
        self.free_boundary_into(adjacency, &mut out);
        out
    }

    pub fn free_boundary_into(&self, adjacency: Adjacency, out: &mut Vec<Point>) {
        out.clear();
        let Some(b) = self.explored_box else {
            return;
        };
        let res = self.res();
        for iy in b.iy0..=b.iy1 {
            for ix in b.ix0..=b.ix1 {
                if self.cells[iy * self.nx + ix] == CellState::ExploredFree
                    && self.borders_unexplored(ix, iy, adjacency)
                {
                    out.push(cell_center(ix, iy, res));
                }
            }
        }
    }

    fn borders_unexplored(&self, ix: usize, iy: usize, adjacency: Adjacency) -> bool {
        const FOUR: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const DIAG: [(isize, isize); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
        let check = |(dx, dy): &(isize, isize)| {
            let (x, y) = (ix as isize + dx, iy as isize + dy);
            x >= 0
                && y >= 0
                && (x as usize) < self.nx
                && (y as usize) < self.ny
                && self.cells[y as usize * self.nx + x as usize] == CellState::Unexplored
        };
        FOUR.iter().any(check) || (adjacency == Adjacency::Eight && DIAG.iter().any(check))
    }

    pub fn point_in_explored(&self, p: Point) -> bool {
        self.cell_of(p)
            .is_some_and(|(ix, iy)| self.state(ix, iy) == CellState::ExploredFree)
    }

    /// True iff every cell the closed segment `a`–`b` passes through is
    /// explored free space. Grid-corner crossings check both side cells.
    pub fn path_explored(&self, a: Point, b: Point) -> bool {
        let (Some(start), Some(end)) = (self.cell_of(a), self.cell_of(b)) else {
            return false;
        };
        let explored = |x: isize, y: isize| {
            x >= 0
                && y >= 0
                && (x as usize) < self.nx
                && (y as usize) < self.ny
                && self.cells[y as usize * self.nx + x as usize] == CellState::ExploredFree
        };
        let res = self.res();
        let (x0, y0) = (a.x * res, a.y * res);
        let (dx, dy) = ((b.x - a.x) * res, (b.y - a.y) * res);
        let (mut cx, mut cy) = (start.0 as isize, start.1 as isize);
        let (ex, ey) = (end.0 as isize, end.1 as isize);
        let step_x: isize = if dx > 0.0 { 1 } else { -1 };
        let step_y: isize = if dy > 0.0 { 1 } else { -1 };
        let axis = |origin: f64, cell: isize, delta: f64| -> (f64, f64) {
            if delta > 0.0 {
                (((cell + 1) as f64 - origin) / delta, 1.0 / delta)
            } else if delta < 0.0 {
                ((origin - cell as f64) / -delta, -1.0 / delta)
            } else {
                (f64::INFINITY, f64::INFINITY)
            }
        };
        let (mut t_x, dt_x) = axis(x0, cx, dx);
        let (mut t_y, dt_y) = axis(y0, cy, dy);
        const TIE: f64 = 1e-12;
        let budget = (ex - cx).unsigned_abs() + (ey - cy).unsigned_abs() + 2;
        for _ in 0..budget {
            if !explored(cx, cy) {
                return false;
            }
            if cx == ex && cy == ey {
                return true;
            }
            if t_x < t_y - TIE {
                cx += step_x;
                t_x += dt_x;
            } else if t_y < t_x - TIE {
                cy += step_y;
                t_y += dt_y;
            } else {
                if !explored(cx + step_x, cy) || !explored(cx, cy + step_y) {
                    return false;
                }
                cx += step_x;
                cy += step_y;
                t_x += dt_x;
                t_y += dt_y;
            }
        }
        explored(ex, ey)
    }

    pub fn free_cell_count(&self) -> usize {
        self.free_cells
    }

    pub fn explored_cell_count(&self) -> usize {
        self.explored_cells
    }

    pub fn coverage_fraction(&self) -> f64 {
        if self.free_cells == 0 {
            return 0.0;
        }
        self.explored_cells as f64 / self.free_cells as f64
    }
}

fn cell_center(ix: usize, iy: usize, res: f64) -> Point {
    Point::new((ix as f64 + 0.5) / res, (iy as f64 + 0.5) / res)
}

/// Half-open index range of cells whose centers can lie within `radius` of
/// coordinate `c`, clipped to `[0, n)`.
fn center_range(c: f64, radius: f64, res: f64, n: usize) -> (usize, usize) {
    let lo = math::ceil((c - radius) * res - 0.5).max(0.0);
    let hi = (math::floor((c + radius) * res - 0.5) + 1.0).min(n as f64);
    if !(hi > lo) {
        return (0, 0);
    }
    (lo as usize, hi as usize)
}

/// True iff the closed segment `a`–`b` comes within radius of any obstacle.
pub fn segment_intersects_obstacle<'a, I>(a: Point, b: Point, obstacles: I) -> Result<bool, WorldError>
where
    I: IntoIterator<Item = &'a Obstacle>,
{
    if a == b {
        return Err(WorldError::DegenerateSegment);
    }
    Ok(obstacles
        .into_iter()
        .any(|o| point_segment_distance(o.center, a, b) <= o.radius))
}

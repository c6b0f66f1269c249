//! Point-mass ballistic hops over flat terrain with two impulsive burns
//! (launch and soft landing), and rocket-equation hop budgets.

use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

pub const STANDARD_GRAVITY: f64 = 9.80665;
pub const MOON_GRAVITY: f64 = 1.62;
pub const MARS_GRAVITY: f64 = 3.71;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BallisticsError {
    #[error("transfer time must be positive, got {0}")]
    NonPositiveTransferTime(f64),
    #[error("gravity must be positive, got {0}")]
    NonPositiveGravity(f64),
    #[error("hop distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("propellant mass {m_prop} must be positive and below total mass {m0}")]
    InvalidMasses { m0: f64, m_prop: f64 },
    #[error("specific impulse must be positive, got {0}")]
    NonPositiveIsp(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParams {
    /// Surface gravity, m/s².
    pub g_body: f64,
    /// Reference gravity for Isp conversion, m/s².
    pub g0: f64,
}

impl BodyParams {
    pub const MOON: BodyParams = BodyParams {
        g_body: MOON_GRAVITY,
        g0: STANDARD_GRAVITY,
    };
    pub const MARS: BodyParams = BodyParams {
        g_body: MARS_GRAVITY,
        g0: STANDARD_GRAVITY,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelBudget {
    /// Specific impulse, s.
    pub isp: f64,
    /// Wet mass, kg.
    pub m0: f64,
    /// Propellant mass, kg.
    pub m_prop: f64,
}

impl FuelBudget {
    pub fn validate(&self) -> Result<(), BallisticsError> {
        if !(self.isp > 0.0) {
            return Err(BallisticsError::NonPositiveIsp(self.isp));
        }
        if !(self.m_prop > 0.0 && self.m_prop < self.m0) {
            return Err(BallisticsError::InvalidMasses {
                m0: self.m0,
                m_prop: self.m_prop,
            });
        }
        Ok(())
    }
}

impl Default for FuelBudget {
    fn default() -> Self {
        Self {
            isp: 350.0,
            m0: 3.0,
            m_prop: 1.0,
        }
    }
}

/// One ballistic hop between two points at equal height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopPlan {
    /// Horizontal displacement (dx, dy), m.
    pub displacement: (f64, f64),
    pub transfer_time: f64,
    pub v0: Vec3,
    pub vf: Vec3,
    pub delta_v1: f64,
    pub delta_v2: f64,
}

impl HopPlan {
    pub fn total_delta_v(&self) -> f64 {
        self.delta_v1 + self.delta_v2
    }
}

/// Launch velocity reaching horizontal displacement `d` after `tau` seconds.
pub fn hop_velocity(d: (f64, f64), g: f64, tau: f64) -> Result<Vec3, BallisticsError> {
    if !(tau > 0.0) {
        return Err(BallisticsError::NonPositiveTransferTime(tau));
    }
    if !(g > 0.0) {
        return Err(BallisticsError::NonPositiveGravity(g));
    }
    Ok(Vec3::new(d.0 / tau, d.1 / tau, g * tau / 2.0))
}

/// Full hop with both burns for a given transfer time.
pub fn plan_hop(d: (f64, f64), g: f64, tau: f64) -> Result<HopPlan, BallisticsError> {
    let v0 = hop_velocity(d, g, tau)?;
    let vf = Vec3::new(v0.x, v0.y, v0.z - g * tau);
    Ok(HopPlan {
        displacement: d,
        transfer_time: tau,
        v0,
        vf,
        delta_v1: v0.norm(),
        delta_v2: vf.norm(),
    })
}

/// Transfer time minimizing `delta_v1 + delta_v2`: `sqrt(2 d / g)`.
pub fn optimal_transfer_time(distance: f64, g: f64) -> Result<f64, BallisticsError> {
    if !(distance > 0.0) {
        return Err(BallisticsError::NonPositiveDistance(distance));
    }
    if !(g > 0.0) {
        return Err(BallisticsError::NonPositiveGravity(g));
    }
    Ok(math::sqrt(2.0 * distance / g))
}

/// Fuel-optimal hop along displacement `d`.
pub fn optimal_hop(d: (f64, f64), g: f64) -> Result<HopPlan, BallisticsError> {
    let tau = optimal_transfer_time(math::hypot(d.0, d.1), g)?;
    plan_hop(d, g, tau)
}

/// Launch plus landing Δv of a fuel-optimal hop, `2 sqrt(g d)`.
/// Zero-length hops cost nothing.
pub fn optimal_hop_cost(distance: f64, g: f64) -> f64 {
    2.0 * math::sqrt(g * distance.max(0.0))
}

/// Total Δv available from the rocket equation.
pub fn delta_v_budget(budget: &FuelBudget, g0: f64) -> Result<f64, BallisticsError> {
    budget.validate()?;
    Ok(budget.isp * g0 * math::ln(budget.m0 / (budget.m0 - budget.m_prop)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopBudget {
    pub n_hops: u64,
    pub total_distance: f64,
}

/// Number of equal fuel-optimal hops the propellant affords.
pub fn hop_budget(
    budget: &FuelBudget,
    body: &BodyParams,
    hop_distance: f64,
) -> Result<HopBudget, BallisticsError> {
    if !(hop_distance > 0.0) {
        return Err(BallisticsError::NonPositiveDistance(hop_distance));
    }
    if !(body.g_body > 0.0) {
        return Err(BallisticsError::NonPositiveGravity(body.g_body));
    }
    let total = delta_v_budget(budget, body.g0)?;
    let n_hops = math::floor(total / optimal_hop_cost(hop_distance, body.g_body)) as u64;
    Ok(HopBudget {
        n_hops,
        total_distance: n_hops as f64 * hop_distance,
    })
}

/// `n` evenly spaced samples of the hop parabola for t in [0, tau].
pub fn trajectory_points(origin: Vec3, v0: Vec3, g: f64, tau: f64, n: usize) -> Vec<Vec3> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = tau * i as f64 / (n - 1) as f64;
            Vec3::new(
                origin.x + v0.x * t,
                origin.y + v0.y * t,
                origin.z + v0.z * t - 0.5 * g * t * t,
            )
        })
        .collect()
}
